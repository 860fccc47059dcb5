#include "optlab/splitting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>

#include "optlab/problems.hpp"

namespace optlab {

namespace {

constexpr double kDivergenceGuard = 1e100;

long now_ns(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

// prox_{tau H*}(u) = u - tau * prox_{H / tau}(u / tau)  (Moreau identity);
// the toolbox stores H, the algorithms need conjugate proxes.
Vec conjugate_prox(const ProxTerm& H, double tau, const Vec& u) {
  return u - tau * H.prox(1.0 / tau, u / tau);
}

void guard_finite(const Vec& x, const char* who) {
  if (!x.allFinite() || x.norm() > kDivergenceGuard)
    throw NumericalError(std::string(who) +
                         " diverged; check stepsize conditions and that the "
                         "constraint right-hand side is consistent");
}

TraceRow metrics_row(long step, long grads, long proxes, const Vec& x,
                     const std::function<double(const Vec&)>& objective,
                     const TraceRef* ref,
                     const std::chrono::steady_clock::time_point& t0) {
  TraceRow r;
  r.step = step;
  r.grads = grads;
  r.proxes = proxes;
  if (ref) {
    r.f_gap = objective(x) - ref->f_star;
    r.dist_sq = (x - ref->x_star).squaredNorm();
  } else {
    r.f_gap = std::numeric_limits<double>::quiet_NaN();
    r.dist_sq = std::numeric_limits<double>::quiet_NaN();
  }
  r.wall_ns = now_ns(t0);
  return r;
}

double power_iteration_op(const LinOp& L) {
  if (L.cols == 0 || L.rows == 0) return 0.0;
  RngStream rng(0x9e3779b9u, "power-iteration/op");
  Vec v(L.cols);
  for (int i = 0; i < L.cols; ++i) v[i] = rng.normal();
  double nv = v.norm();
  if (nv == 0.0) v[0] = 1.0; else v /= nv;
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vec w = L.adjoint(L.apply(v));
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    double next = v.dot(w);
    w /= nw;
    if (it > 0 && std::abs(next - lambda) <= 1e-10 * std::abs(next))
      return std::sqrt(std::max(next, 0.0));
    lambda = next;
    v = w;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace

// ------------------------------------------------------------------
// Gradient estimators

GradEstimator GradEstimator::full() {
  GradEstimator e;
  e.variant_ = Variant::full;
  return e;
}

GradEstimator GradEstimator::sgd(int batch, RngStream rng) {
  if (batch < 1) throw ConfigError("sgd estimator needs batch >= 1");
  GradEstimator e;
  e.variant_ = Variant::sgd;
  e.batch_ = batch;
  e.rng_ = rng;
  return e;
}

GradEstimator GradEstimator::svrg(long loop_len, RngStream rng) {
  GradEstimator e;
  e.variant_ = Variant::svrg;
  e.loop_len_ = loop_len;
  e.rng_ = rng;
  return e;
}

GradEstimator GradEstimator::saga(RngStream rng) {
  GradEstimator e;
  e.variant_ = Variant::saga;
  e.rng_ = rng;
  return e;
}

GradEstimator GradEstimator::lsvrg(double p_refresh, RngStream rng) {
  if (p_refresh < 0 || p_refresh > 1)
    throw ConfigError("loopless refresh probability must be in [0, 1]");
  GradEstimator e;
  e.variant_ = Variant::lsvrg;
  e.p_refresh_ = p_refresh;
  e.rng_ = rng;
  return e;
}

void GradEstimator::bind(const FiniteSumObjective& f, const Vec& x0) {
  bound_ = true;
  calls_ = 0;
  switch (variant_) {
    case Variant::full:
    case Variant::sgd:
      break;
    case Variant::svrg:
      if (loop_len_ <= 0) loop_len_ = 2 * f.n();
      ref_point_ = x0;
      ref_grad_ = f.component_mean_grad(x0);
      grad_evals_ += f.n();
      break;
    case Variant::lsvrg:
      if (p_refresh_ <= 0) p_refresh_ = 1.0 / static_cast<double>(f.n());
      ref_point_ = x0;
      ref_grad_ = f.component_mean_grad(x0);
      grad_evals_ += f.n();
      break;
    case Variant::saga:
      warm_start(f, x0);
      break;
  }
}

void GradEstimator::warm_start(const FiniteSumObjective& f, const Vec& point) {
  if (variant_ != Variant::saga)
    throw ConfigError("warm_start applies to the saga estimator only");
  bound_ = true;
  table_.clear();
  table_mean_ = Vec::Zero(f.dim());
  for (int i = 0; i < f.n(); ++i) {
    table_.push_back(f.grad_i(i, point));
    table_mean_ += table_.back();
  }
  table_mean_ /= static_cast<double>(f.n());
  grad_evals_ += f.n();
}

Vec GradEstimator::next(const FiniteSumObjective& f, const Vec& x) {
  if (!bound_) bind(f, x);
  ++calls_;
  switch (variant_) {
    case Variant::full:
      grad_evals_ += f.n();
      return f.grad(x);
    case Variant::sgd: {
      Vec g = Vec::Zero(f.dim());
      for (int s = 0; s < batch_; ++s) g += f.grad_i(rng_.index(f.n()), x);
      grad_evals_ += batch_;
      return g / static_cast<double>(batch_);
    }
    case Variant::svrg: {
      if ((calls_ - 1) % loop_len_ == 0 && calls_ > 1) {
        ref_point_ = x;
        ref_grad_ = f.component_mean_grad(x);
        grad_evals_ += f.n();
      }
      const int i = rng_.index(f.n());
      grad_evals_ += 2;
      return f.grad_i(i, x) - f.grad_i(i, ref_point_) + ref_grad_;
    }
    case Variant::saga: {
      const int i = rng_.index(f.n());
      Vec gi = f.grad_i(i, x);
      Vec v = gi - table_[static_cast<size_t>(i)] + table_mean_;
      table_mean_ += (gi - table_[static_cast<size_t>(i)]) /
                     static_cast<double>(f.n());
      table_[static_cast<size_t>(i)] = std::move(gi);
      grad_evals_ += 1;
      return v;
    }
    case Variant::lsvrg: {
      const int i = rng_.index(f.n());
      Vec v = f.grad_i(i, x) - f.grad_i(i, ref_point_) + ref_grad_;
      grad_evals_ += 2;
      if (rng_.uniform() < p_refresh_) {
        ref_point_ = x;
        ref_grad_ = f.component_mean_grad(x);
        grad_evals_ += f.n();
      }
      return v;
    }
  }
  return Vec();
}

double GradEstimator::saga_table_drift() const {
  if (variant_ != Variant::saga || table_.empty()) return 0.0;
  Vec mean = Vec::Zero(table_[0].size());
  for (const Vec& g : table_) mean += g;
  mean /= static_cast<double>(table_.size());
  return (mean - table_mean_).norm();
}

GradEstimator::Constants GradEstimator::constants(const FiniteSumObjective& f,
                                                  bool strongly_convex) const {
  const double L = f.L();
  const double inf = std::numeric_limits<double>::infinity();
  switch (variant_) {
    case Variant::full:
      return strongly_convex ? Constants{2.0 / (L + f.mu()), 1.0, inf}
                             : Constants{1.0 / L, 1.0, inf};
    case Variant::sgd:
      return strongly_convex ? Constants{1.0 / (2.0 * L), 1.0, inf}
                             : Constants{1.0 / (4.0 * L), 1.0, inf};
    case Variant::svrg:
    case Variant::saga:
    case Variant::lsvrg: {
      const double Lm = f.L_max() > 0 ? f.L_max() : L;
      return strongly_convex
                 ? Constants{1.0 / (5.0 * Lm), 1.0, 1.0 / (3.0 * f.n())}
                 : Constants{1.0 / (6.0 * Lm), 1.0 / 3.0, inf};
    }
  }
  return {};
}

// ------------------------------------------------------------------
// Stochastic decoupling

SdmState sdm_init(const FiniteSumObjective& f, const std::vector<ProxTerm>& g,
                  const Vec& x0) {
  SdmState st;
  st.x = x0.size() == static_cast<Eigen::Index>(f.dim()) ? x0 : Vec::Zero(f.dim());
  st.z = st.x;
  st.y.assign(g.size(), Vec::Zero(f.dim()));
  st.y_mean = Vec::Zero(f.dim());
  return st;
}

namespace {

double sdm_gamma(const SdmOptions& opts, long k) {
  if (!opts.time_varying) {
    if (opts.gamma <= 0) throw ConfigError("SDM needs gamma > 0");
    return opts.gamma;
  }
  if (opts.mu <= 0 || opts.omega <= 0 || opts.a <= 0)
    throw ConfigError("time-varying SDM needs positive (mu, omega, a)");
  return 2.0 / (opts.mu * opts.omega * (opts.a + static_cast<double>(k) + 1.0));
}

std::vector<double> sdm_probs(const SdmOptions& opts, size_t m) {
  if (opts.probabilities.empty())
    return std::vector<double>(m, 1.0 / static_cast<double>(m));
  if (opts.probabilities.size() != m)
    throw ConfigError("SDM probability count mismatch");
  return opts.probabilities;
}

}  // namespace

void sdm_step(const FiniteSumObjective& f, const ProxTerm& psi,
              const std::vector<ProxTerm>& g, SdmState& state,
              const SdmOptions& opts, GradEstimator& est, RngStream& rng) {
  const size_t m = g.size();
  if (m == 0) throw ConfigError("SDM needs at least one non-smooth term");
  const auto probs = sdm_probs(opts, m);
  const double gamma = sdm_gamma(opts, state.k);

  Vec v = est.next(f, state.x);
  state.z = psi.prox(gamma, state.x - gamma * (v + state.y_mean));

  int j;
  try {
    j = sample_categorical(rng, probs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const double eta_j = gamma / (static_cast<double>(m) * probs[static_cast<size_t>(j)]);
  Vec arg = state.z + eta_j * state.y[static_cast<size_t>(j)];
  Vec x_next = g[static_cast<size_t>(j)].prox(eta_j, arg);
  Vec y_j_next = state.y[static_cast<size_t>(j)] + (state.z - x_next) / eta_j;
  state.y_mean += (y_j_next - state.y[static_cast<size_t>(j)]) / static_cast<double>(m);
  state.y[static_cast<size_t>(j)] = std::move(y_j_next);
  state.x = std::move(x_next);
  state.k += 1;
}

namespace {

double sdm_objective(const FiniteSumObjective& f, const ProxTerm& psi,
                     const std::vector<ProxTerm>& g, const Vec& x) {
  double val = f.value(x) + psi.value(x);
  double gs = 0.0;
  for (const auto& term : g) gs += term.value(x);
  return val + gs / static_cast<double>(g.size());
}

}  // namespace

MetricTrace sdm_run(const FiniteSumObjective& f, const ProxTerm& psi,
                    const std::vector<ProxTerm>& g, const Vec& x0,
                    const SdmOptions& opts, GradEstimator est, long K,
                    RngStream rng, const TraceRef* ref) {
  const auto t0 = std::chrono::steady_clock::now();
  SdmState st = sdm_init(f, g, x0);
  est.bind(f, st.x);
  auto objective = [&](const Vec& x) { return sdm_objective(f, psi, g, x); };
  MetricTrace trace;
  long proxes = 0;
  trace.add(metrics_row(0, est.grad_evals(), proxes, st.x, objective, ref, t0));
  for (long k = 0; k < K; ++k) {
    sdm_step(f, psi, g, st, opts, est, rng);
    proxes += psi.is_zero() ? 1 : 2;  // one g_j prox, plus the psi prox
    guard_finite(st.x, "SDM");
    trace.add(metrics_row(k + 1, est.grad_evals(), proxes, st.x, objective, ref, t0));
  }
  trace.final_iterate = st.x;
  return trace;
}

MetricTrace sdm_kaczmarz_mode(const Mat& W, const Vec& b, const Vec& x0, long K,
                              RngStream rng, const TraceRef* ref) {
  if (W.rows() != b.size()) throw ConfigError("system shape mismatch");
  std::vector<ProxTerm> g;
  for (Eigen::Index j = 0; j < W.rows(); ++j)
    g.push_back(ProxTerm::hyperplane(W.row(j).transpose(), b[j]));
  FiniteSumObjective f = make_quadratic_distance(x0);
  SdmOptions opts;
  opts.gamma = 1.0 / static_cast<double>(W.rows());
  return sdm_run(f, ProxTerm::zero(), g, x0, opts, GradEstimator::full(), K,
                 rng, ref);
}

MetricTrace sdm_linear_run(const FiniteSumObjective& f, const Mat& A,
                           const Vec& b, GradEstimator est, double gamma,
                           const std::vector<double>& probabilities, long K,
                           RngStream rng, const TraceRef* ref) {
  if (A.rows() != b.size()) throw ConfigError("system shape mismatch");
  if (gamma <= 0) throw ConfigError("SDM needs gamma > 0");
  const auto t0 = std::chrono::steady_clock::now();
  const size_t m = static_cast<size_t>(A.rows());
  const auto probs = probabilities.empty()
                         ? std::vector<double>(m, 1.0 / static_cast<double>(m))
                         : probabilities;
  if (probs.size() != m) throw ConfigError("probability count mismatch");
  std::vector<double> row_sq(m);
  for (size_t j = 0; j < m; ++j) row_sq[j] = A.row(static_cast<Eigen::Index>(j)).squaredNorm();

  Vec x = Vec::Zero(f.dim());
  Vec y = Vec::Zero(f.dim());  // aggregate dual only
  est.bind(f, x);
  auto objective = [&f](const Vec& v) { return f.value(v); };
  MetricTrace trace;
  trace.add(metrics_row(0, est.grad_evals(), 0, x, objective, ref, t0));
  for (long k = 0; k < K; ++k) {
    Vec v = est.next(f, x);
    Vec z = x - gamma * (v + y);
    if (m == 0) {  // no constraints: plain estimator descent
      x = std::move(z);
      guard_finite(x, "SDM (linear)");
      trace.add(metrics_row(k + 1, est.grad_evals(), 0, x, objective, ref, t0));
      continue;
    }
    int j;
    try {
      j = sample_categorical(rng, probs);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const double r = A.row(j).dot(z) - b[j];
    Vec x_next = z - (r / row_sq[static_cast<size_t>(j)]) * A.row(j).transpose();
    y += (probs[static_cast<size_t>(j)] / gamma) * (z - x_next);
    x = std::move(x_next);
    guard_finite(x, "SDM (linear)");
    trace.add(metrics_row(k + 1, est.grad_evals(), k + 1, x, objective, ref, t0));
  }
  trace.final_iterate = x;
  return trace;
}

// ------------------------------------------------------------------
// Linear operators

LinOp LinOp::dense(Mat A) {
  auto Ap = std::make_shared<Mat>(std::move(A));
  LinOp op;
  op.rows = static_cast<int>(Ap->rows());
  op.cols = static_cast<int>(Ap->cols());
  op.apply = [Ap](const Vec& v) { return Vec(*Ap * v); };
  op.adjoint = [Ap](const Vec& v) { return Vec(Ap->transpose() * v); };
  return op;
}

LinOp LinOp::identity(int d) {
  LinOp op;
  op.rows = d;
  op.cols = d;
  op.apply = [](const Vec& v) { return v; };
  op.adjoint = [](const Vec& v) { return v; };
  return op;
}

LinOp LinOp::zero(int rows, int cols) {
  LinOp op;
  op.rows = rows;
  op.cols = cols;
  op.apply = [rows](const Vec&) { return Vec(Vec::Zero(rows)); };
  op.adjoint = [cols](const Vec&) { return Vec(Vec::Zero(cols)); };
  return op;
}

LinOp LinOp::chain_difference(int d) {
  if (d < 2) throw ConfigError("chain difference needs d >= 2");
  LinOp op;
  op.rows = d - 1;
  op.cols = d;
  op.apply = [d](const Vec& v) {
    Vec out(d - 1);
    for (int j = 0; j + 1 < d; ++j) out[j] = v[j] - v[j + 1];
    return out;
  };
  op.adjoint = [d](const Vec& u) {
    Vec out = Vec::Zero(d);
    for (int j = 0; j + 1 < d; ++j) {
      out[j] += u[j];
      out[j + 1] -= u[j];
    }
    return out;
  };
  return op;
}

double spectral_norm(const LinOp& L) { return power_iteration_op(L); }

// ------------------------------------------------------------------
// Primal-dual solvers

namespace {

void check_pd_conditions(const FiniteSumObjective& f, const LinOp& L,
                         const PrimalDualOptions& opts, bool deterministic,
                         bool strict_inequality) {
  if (opts.gamma <= 0 || opts.tau <= 0)
    throw ConfigError("primal-dual solvers need gamma, tau > 0");
  if (deterministic && f.L() > 0 && opts.gamma >= 2.0 / f.L())
    throw ConfigError("stepsize condition gamma < 2/L violated");
  const double norm = spectral_norm(L);
  const double product = opts.gamma * opts.tau * norm * norm;
  const double bound = 1.0 + 1e-12;
  if (strict_inequality ? product >= 1.0 : product > bound)
    throw ConfigError("stepsize condition gamma tau ||L||^2 " +
                      std::string(strict_inequality ? "< 1" : "<= 1") +
                      " violated");
}

Vec init_or_zero(const Vec& v, int d) {
  return v.size() == d ? v : Vec(Vec::Zero(d));
}

// Materializes the operator column by column and rejects right-hand sides
// outside its range (least-squares residual test).
void check_rhs_in_range(const LinOp& L, const Vec& b, const char* who) {
  if (b.size() == 0 || b.norm() == 0.0) return;
  Mat dense(L.rows, L.cols);
  for (int j = 0; j < L.cols; ++j) {
    Vec e = Vec::Zero(L.cols);
    e[j] = 1.0;
    dense.col(j) = L.apply(e);
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(dense);
  const double residual = (dense * cod.solve(b) - b).norm();
  if (residual > 1e-8 * std::max(1.0, b.norm()))
    throw ConfigError(std::string(who) +
                      ": right-hand side is not in the operator range "
                      "(least-squares residual " +
                      std::to_string(residual) + ")");
}

}  // namespace

MetricTrace pddy_run(const FiniteSumObjective& f, const ProxTerm& psi,
                     const ProxTerm& H, const LinOp& L,
                     const PrimalDualOptions& opts, GradEstimator est,
                     const TraceRef* ref) {
  check_pd_conditions(f, L, opts, est.variant() == GradEstimator::Variant::full,
                      /*strict=*/true);
  const auto t0 = std::chrono::steady_clock::now();
  const double gamma = opts.gamma, tau = opts.tau;
  Vec p = init_or_zero(opts.x0, f.dim());
  Vec y = init_or_zero(opts.y0, L.rows);
  est.bind(f, p);
  auto objective = [&](const Vec& v) {
    return f.value(v) + psi.value(v) + H.value(L.apply(v));
  };
  MetricTrace trace;
  long proxes = 0;
  trace.add(metrics_row(0, est.grad_evals(), proxes, p, objective, ref, t0));
  Vec x;
  for (long k = 0; k < opts.K; ++k) {
    y = conjugate_prox(H, tau, y + tau * L.apply(p - gamma * L.adjoint(y)));
    x = p - gamma * L.adjoint(y);
    Vec v = est.next(f, x);
    Vec s = psi.prox(gamma, 2.0 * x - p - gamma * v);
    p += s - x;
    proxes += 2;
    guard_finite(x, "PDDY");
    trace.add(metrics_row(k + 1, est.grad_evals(), proxes, x, objective, ref, t0));
  }
  trace.final_iterate = opts.K > 0 ? x : p;
  return trace;
}

MetricTrace pd3o_run(const FiniteSumObjective& f, const ProxTerm& psi,
                     const ProxTerm& H, const LinOp& L,
                     const PrimalDualOptions& opts, GradEstimator est,
                     const TraceRef* ref) {
  check_pd_conditions(f, L, opts, est.variant() == GradEstimator::Variant::full,
                      /*strict=*/false);
  const auto t0 = std::chrono::steady_clock::now();
  const double gamma = opts.gamma, tau = opts.tau;
  Vec p = init_or_zero(opts.x0, f.dim());
  Vec y = init_or_zero(opts.y0, L.rows);
  est.bind(f, p);
  auto objective = [&](const Vec& v) {
    return f.value(v) + psi.value(v) + H.value(L.apply(v));
  };
  MetricTrace trace;
  long proxes = 0;
  trace.add(metrics_row(0, est.grad_evals(), proxes, p, objective, ref, t0));
  Vec x;
  for (long k = 0; k < opts.K; ++k) {
    x = psi.prox(gamma, p);
    Vec v = est.next(f, x);
    Vec w = 2.0 * x - p - gamma * v;
    y = conjugate_prox(H, tau, y + tau * L.apply(w - gamma * L.adjoint(y)));
    p = x - gamma * v - gamma * L.adjoint(y);
    proxes += 2;
    guard_finite(x, "PD3O");
    trace.add(metrics_row(k + 1, est.grad_evals(), proxes, x, objective, ref, t0));
  }
  trace.final_iterate = opts.K > 0 ? x : p;
  return trace;
}

MetricTrace condat_vu_run(const FiniteSumObjective& f, const ProxTerm& psi,
                          const ProxTerm& H, const LinOp& L,
                          const PrimalDualOptions& opts, CondatVuForm form,
                          const TraceRef* ref) {
  if (opts.gamma <= 0 || opts.tau <= 0)
    throw ConfigError("Condat-Vu needs gamma, tau > 0");
  const double norm = spectral_norm(L);
  if (f.L() / 2.0 >= 1.0 / opts.tau - opts.gamma * norm * norm)
    throw ConfigError(
        "Condat-Vu condition nu/2 < 1/tau - gamma ||L||^2 violated");
  const auto t0 = std::chrono::steady_clock::now();
  const double gamma = opts.gamma, tau = opts.tau;
  Vec x = init_or_zero(opts.x0, f.dim());
  Vec dual = init_or_zero(opts.y0, L.rows);
  auto objective = [&](const Vec& v) {
    return f.value(v) + psi.value(v) + H.value(L.apply(v));
  };
  MetricTrace trace;
  long grads = 0, proxes = 0;
  trace.add(metrics_row(0, grads, proxes, x, objective, ref, t0));
  for (long k = 0; k < opts.K; ++k) {
    if (form == CondatVuForm::I) {
      Vec x_next = psi.prox(tau, x - tau * f.grad(x) - tau * L.adjoint(dual));
      dual = conjugate_prox(H, gamma, dual + gamma * L.apply(2.0 * x_next - x));
      x = std::move(x_next);
    } else {
      Vec dual_next = conjugate_prox(H, gamma, dual + gamma * L.apply(x));
      Vec x_next = psi.prox(
          tau, x - tau * f.grad(x) - tau * L.adjoint(2.0 * dual_next - dual));
      dual = std::move(dual_next);
      x = std::move(x_next);
    }
    grads += f.n();
    proxes += 2;
    guard_finite(x, "Condat-Vu");
    trace.add(metrics_row(k + 1, grads, proxes, x, objective, ref, t0));
  }
  trace.final_iterate = x;
  return trace;
}

MetricTrace licosgd_run(const FiniteSumObjective& f, const LinOp& L,
                        const Vec& b, const PrimalDualOptions& opts,
                        GradEstimator est, const TraceRef* ref) {
  check_pd_conditions(f, L, opts, est.variant() == GradEstimator::Variant::full,
                      /*strict=*/false);
  check_rhs_in_range(L, b, "LiCoSGD");
  const auto t0 = std::chrono::steady_clock::now();
  const double gamma = opts.gamma, tau = opts.tau;
  Vec x = init_or_zero(opts.x0, f.dim());
  Vec y = init_or_zero(opts.y0, L.rows);
  est.bind(f, x);
  auto objective = [&f](const Vec& v) { return f.value(v); };
  MetricTrace trace;
  trace.add(metrics_row(0, est.grad_evals(), 0, x, objective, ref, t0));
  for (long k = 0; k < opts.K; ++k) {
    Vec v = est.next(f, x);
    Vec w = x - gamma * v;
    y = (y + tau * L.apply(w - gamma * L.adjoint(y))) - tau * b;
    x = w - gamma * L.adjoint(y);
    guard_finite(x, "LiCoSGD");
    guard_finite(y, "LiCoSGD (dual)");
    trace.add(metrics_row(k + 1, est.grad_evals(), 0, x, objective, ref, t0));
  }
  trace.final_iterate = x;
  return trace;
}

MetricTrace prilicosgd_run(const FiniteSumObjective& f, const LinOp& W,
                           const Vec& c, const PrimalDualOptions& opts,
                           GradEstimator est, const TraceRef* ref) {
  if (opts.gamma <= 0 || opts.tau <= 0)
    throw ConfigError("primal-dual solvers need gamma, tau > 0");
  const double norm = spectral_norm(W);  // W = L*L, so ||L||^2 = ||W||
  if (opts.gamma * opts.tau * norm > 1.0 + 1e-12)
    throw ConfigError("stepsize condition gamma tau ||W|| <= 1 violated");
  check_rhs_in_range(W, c, "PriLiCoSGD");
  const auto t0 = std::chrono::steady_clock::now();
  const double gamma = opts.gamma, tau = opts.tau;
  Vec x = init_or_zero(opts.x0, f.dim());
  Vec a = init_or_zero(opts.y0, f.dim());  // a = L* y
  est.bind(f, x);
  auto objective = [&f](const Vec& v) { return f.value(v); };
  MetricTrace trace;
  trace.add(metrics_row(0, est.grad_evals(), 0, x, objective, ref, t0));
  for (long k = 0; k < opts.K; ++k) {
    Vec v = est.next(f, x);
    Vec t = x - gamma * v;
    a = (a + tau * W.apply(t - gamma * a)) - tau * c;
    x = t - gamma * a;
    guard_finite(x, "PriLiCoSGD");
    guard_finite(a, "PriLiCoSGD (dual)");
    trace.add(metrics_row(k + 1, est.grad_evals(), 0, x, objective, ref, t0));
  }
  trace.final_iterate = x;
  return trace;
}

Mat graph_laplacian(int n_nodes, const std::vector<std::pair<int, int>>& edges) {
  Mat W = Mat::Zero(n_nodes, n_nodes);
  for (auto [u, v] : edges) {
    if (u == v) throw ConfigError("self loops are not allowed");
    if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes)
      throw ConfigError("edge endpoint out of range");
    W(u, u) += 1.0;
    W(v, v) += 1.0;
    W(u, v) -= 1.0;
    W(v, u) -= 1.0;
  }
  return W;
}

DestroyResult destroy_run(const std::vector<FiniteSumObjective>& fs,
                          const std::vector<std::pair<int, int>>& edges,
                          double gamma, double tau,
                          std::vector<GradEstimator> ests, long K,
                          const TraceRef* ref) {
  const int M = static_cast<int>(fs.size());
  if (M < 1) throw ConfigError("decentralized run needs nodes");
  if (ests.size() != fs.size())
    throw ConfigError("need one estimator per node");
  const int d = fs[0].dim();

  // adjacency + connectivity check
  std::vector<std::vector<int>> nbrs(static_cast<size_t>(M));
  for (auto [u, v] : edges) {
    if (u == v) throw ConfigError("self loops are not allowed");
    if (u < 0 || v < 0 || u >= M || v >= M)
      throw ConfigError("edge endpoint out of range");
    nbrs[static_cast<size_t>(u)].push_back(v);
    nbrs[static_cast<size_t>(v)].push_back(u);
  }
  {
    std::vector<bool> seen(static_cast<size_t>(M), false);
    std::deque<int> queue{0};
    seen[0] = true;
    int count = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : nbrs[static_cast<size_t>(u)])
        if (!seen[static_cast<size_t>(v)]) {
          seen[static_cast<size_t>(v)] = true;
          ++count;
          queue.push_back(v);
        }
    }
    if (count != M) throw ConfigError("gossip graph must be connected");
  }

  Mat W = graph_laplacian(M, edges);
  if (gamma <= 0 || tau <= 0) throw ConfigError("needs gamma, tau > 0");
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(W);
    const double wnorm = es.eigenvalues().maxCoeff();
    if (gamma * tau * wnorm > 1.0 + 1e-12)
      throw ConfigError("stepsize condition gamma tau ||W|| <= 1 violated");
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Vec> x(static_cast<size_t>(M), Vec::Zero(d));
  std::vector<Vec> a(static_cast<size_t>(M), Vec::Zero(d));  // sum_i a_i = 0
  for (int i = 0; i < M; ++i) ests[static_cast<size_t>(i)].bind(fs[static_cast<size_t>(i)], x[static_cast<size_t>(i)]);

  DestroyResult out;
  auto mean_objective = [&fs, M](const Vec& v) {
    double s = 0.0;
    for (const auto& f : fs) s += f.value(v);
    return s / static_cast<double>(M);
  };
  auto record = [&](long step) {
    Vec xbar = Vec::Zero(d);
    for (const Vec& xi : x) xbar += xi;
    xbar /= static_cast<double>(M);
    long grads = 0;
    for (const auto& e : ests) grads += e.grad_evals();
    TraceRow r;
    r.step = step;
    r.grads = grads;
    if (ref) {
      r.f_gap = mean_objective(xbar) - ref->f_star;
      r.dist_sq = (xbar - ref->x_star).squaredNorm();
    } else {
      r.f_gap = std::numeric_limits<double>::quiet_NaN();
      r.dist_sq = std::numeric_limits<double>::quiet_NaN();
    }
    r.wall_ns = now_ns(t0);
    out.trace.add(r);
    double cons = 0.0;
    for (const Vec& xi : x) cons += (xi - xbar).squaredNorm();
    out.consensus.push_back(cons / static_cast<double>(M));
    return xbar;
  };

  record(0);
  std::vector<Vec> t(static_cast<size_t>(M));
  std::vector<Vec> a_next(static_cast<size_t>(M));
  for (long k = 0; k < K; ++k) {
    for (int i = 0; i < M; ++i)
      t[static_cast<size_t>(i)] =
          x[static_cast<size_t>(i)] -
          gamma * ests[static_cast<size_t>(i)].next(fs[static_cast<size_t>(i)],
                                                    x[static_cast<size_t>(i)]);
    // node updates in index order; each touches its neighborhood only
    for (int i = 0; i < M; ++i) {
      Vec acc = W(i, i) * (t[static_cast<size_t>(i)] - gamma * a[static_cast<size_t>(i)]);
      for (int j : nbrs[static_cast<size_t>(i)])
        acc += W(i, j) * (t[static_cast<size_t>(j)] - gamma * a[static_cast<size_t>(j)]);
      a_next[static_cast<size_t>(i)] = a[static_cast<size_t>(i)] + tau * acc;
    }
    for (int i = 0; i < M; ++i) {
      a[static_cast<size_t>(i)] = a_next[static_cast<size_t>(i)];
      x[static_cast<size_t>(i)] = t[static_cast<size_t>(i)] - gamma * a[static_cast<size_t>(i)];
      guard_finite(x[static_cast<size_t>(i)], "decentralized run");
    }
    out.x_mean_final = record(k + 1);
  }
  if (K == 0) {
    Vec xbar = Vec::Zero(d);
    for (const Vec& xi : x) xbar += xi;
    out.x_mean_final = xbar / static_cast<double>(M);
  }
  out.trace.final_iterate = out.x_mean_final;
  return out;
}

}  // namespace optlab
