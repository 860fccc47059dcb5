#include "optlab/shuffle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace optlab {

namespace {

long now_ns(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

TraceRow make_row(long step, long grads, long proxes, const Vec& x,
                  const FiniteSumObjective& f, const ProxTerm& psi,
                  const TraceRef* ref,
                  const std::chrono::steady_clock::time_point& t0) {
  TraceRow r;
  r.step = step;
  r.grads = grads;
  r.proxes = proxes;
  if (ref) {
    r.f_gap = f.value(x) + psi.value(x) - ref->f_star;
    r.dist_sq = (x - ref->x_star).squaredNorm();
  } else {
    r.f_gap = std::numeric_limits<double>::quiet_NaN();
    r.dist_sq = std::numeric_limits<double>::quiet_NaN();
  }
  r.wall_ns = now_ns(t0);
  return r;
}

double factorial_capped(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) {
    f *= i;
    if (f > 1e6) return f;
  }
  return f;
}

// Shared core of the variance / radius diagnostics: the permutation
// average of D_{f_{pi_i}}(x*_i, x*) for each prefix length i, either exact
// over all n! orderings (n! <= 720) or estimated over sampled ones.
std::vector<double> mean_prefix_divergence(const FiniteSumObjective& f,
                                           const Vec& x_star, double gamma,
                                           long num_perms, RngStream& rng) {
  const int n = f.n();
  std::vector<Vec> grads;
  grads.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) grads.push_back(f.grad_i(i, x_star));

  std::vector<double> acc(static_cast<size_t>(n), 0.0);
  auto accumulate_perm = [&](const std::vector<int>& pi) {
    Vec shift = Vec::Zero(f.dim());
    for (int i = 0; i < n; ++i) {
      // x*_i = x* - gamma * sum_{j<i} grad f_{pi_j}(x*)
      Vec xi = x_star - gamma * shift;
      acc[static_cast<size_t>(i)] += f.bregman_i(pi[static_cast<size_t>(i)], xi, x_star);
      shift += grads[static_cast<size_t>(pi[static_cast<size_t>(i)])];
    }
  };

  long count = 0;
  if (factorial_capped(n) <= 720.0) {
    std::vector<int> pi(static_cast<size_t>(n));
    std::iota(pi.begin(), pi.end(), 0);
    do {
      accumulate_perm(pi);
      ++count;
    } while (std::next_permutation(pi.begin(), pi.end()));
  } else {
    if (num_perms < 1) throw ConfigError("need num_perms >= 1");
    for (long s = 0; s < num_perms; ++s) {
      accumulate_perm(rng.permutation(n));
      ++count;
    }
  }
  for (double& a : acc) a /= static_cast<double>(count);
  return acc;
}

}  // namespace

PermutationSchedule PermutationSchedule::rr(RngStream rng) {
  PermutationSchedule s;
  s.kind_ = Kind::RR;
  s.rng_ = rng;
  return s;
}

PermutationSchedule PermutationSchedule::so(RngStream rng, int n) {
  PermutationSchedule s;
  s.kind_ = Kind::SO;
  s.rng_ = rng;
  s.base_ = s.rng_.permutation(n);
  return s;
}

PermutationSchedule PermutationSchedule::ig(std::vector<int> order) {
  PermutationSchedule s;
  s.kind_ = Kind::IG;
  s.base_ = std::move(order);
  return s;
}

std::vector<int> PermutationSchedule::next(int n) {
  switch (kind_) {
    case Kind::RR:
      return rng_.permutation(n);
    case Kind::SO:
      if (static_cast<int>(base_.size()) != n)
        throw ConfigError("shuffle-once permutation size mismatch");
      return base_;
    case Kind::IG:
      if (base_.empty()) {
        std::vector<int> id(static_cast<size_t>(n));
        std::iota(id.begin(), id.end(), 0);
        return id;
      }
      if (static_cast<int>(base_.size()) != n)
        throw ConfigError("incremental-gradient order size mismatch");
      return base_;
  }
  return {};
}

StepsizeSchedule StepsizeSchedule::constant(double gamma) {
  if (gamma <= 0) throw ConfigError("stepsize must be positive");
  StepsizeSchedule s;
  s.kind_ = Kind::constant;
  s.gamma_ = gamma;
  return s;
}

StepsizeSchedule StepsizeSchedule::inv_epoch(double gamma, long k0, double c) {
  if (gamma <= 0 || c <= 0) throw ConfigError("stepsize must be positive");
  StepsizeSchedule s;
  s.kind_ = Kind::inv_epoch;
  s.gamma_ = gamma;
  s.k0_ = k0;
  s.c_ = c;
  return s;
}

StepsizeSchedule StepsizeSchedule::prox_decreasing(long T, double L_max,
                                                   double mu, int n) {
  if (L_max <= 0 || mu <= 0 || n < 1 || T < 1)
    throw ConfigError("decreasing schedule needs positive constants");
  StepsizeSchedule s;
  s.kind_ = Kind::prox_decreasing;
  s.T_ = T;
  s.L_max_ = L_max;
  s.mu_ = mu;
  s.n_ = n;
  s.k0_ = (T + 1) / 2;  // ceil(T/2)
  return s;
}

StepsizeSchedule StepsizeSchedule::inverse_linear(double a, double b) {
  if (a < 0 || b <= 0) throw ConfigError("inverse-linear schedule needs a >= 0, b > 0");
  StepsizeSchedule s;
  s.kind_ = Kind::inverse_linear;
  s.a_ = a;
  s.b_ = b;
  return s;
}

double StepsizeSchedule::at(long k) const {
  switch (kind_) {
    case Kind::constant:
      return gamma_;
    case Kind::inv_epoch:
      return std::min(gamma_, c_ / static_cast<double>(std::max<long>(1, k - k0_)));
    case Kind::prox_decreasing: {
      const double mn = mu_ * static_cast<double>(n_);
      if (static_cast<double>(T_) <= L_max_ / (2.0 * mn) || k <= k0_)
        return 1.0 / L_max_;
      const double s = 7.0 * L_max_ / (4.0 * mn);
      return 7.0 / (mn * (s + static_cast<double>(k - k0_)));
    }
    case Kind::inverse_linear:
      return 2.0 / (a_ * static_cast<double>(k) + b_);
  }
  return gamma_;
}

Vec epoch_pass(const FiniteSumObjective& f, Vec x, double gamma,
               const std::vector<int>& order, std::vector<Vec>* inner) {
  if (gamma <= 0) throw ConfigError("epoch pass needs gamma > 0");
  if (inner) inner->clear();
  for (int idx : order) {
    x -= gamma * f.grad_i(idx, x);
    if (inner) inner->push_back(x);
  }
  return x;
}

MetricTrace run_shuffled(const FiniteSumObjective& f,
                         PermutationSchedule& schedule,
                         const StepsizeSchedule& steps, long T, const Vec& x0,
                         const TraceRef* ref) {
  return run_prox_rr(f, ProxTerm::zero(), schedule, steps, T, x0, ref);
}

MetricTrace run_prox_rr(const FiniteSumObjective& f, const ProxTerm& psi,
                        PermutationSchedule& schedule,
                        const StepsizeSchedule& steps, long T, const Vec& x0,
                        const TraceRef* ref) {
  if (T < 0) throw ConfigError("epoch budget must be nonnegative");
  const auto t0 = std::chrono::steady_clock::now();
  MetricTrace trace;
  Vec x = x0;
  long grads = 0, proxes = 0;
  trace.add(make_row(0, grads, proxes, x, f, psi, ref, t0));
  const int n = f.n();
  for (long k = 0; k < T; ++k) {
    const double gamma = steps.at(k);
    x = epoch_pass(f, std::move(x), gamma, schedule.next(n));
    grads += n;
    if (!psi.is_zero()) {
      x = psi.prox(gamma * static_cast<double>(n), x);
      proxes += 1;
    }
    guard_iterate(x, "shuffled run");
    trace.add(make_row(k + 1, grads, proxes, x, f, psi, ref, t0));
  }
  trace.final_iterate = x;
  return trace;
}

MetricTrace run_prox_rr_per_iteration(const FiniteSumObjective& f,
                                      const ProxTerm& psi,
                                      PermutationSchedule& schedule,
                                      const StepsizeSchedule& steps, long T,
                                      const Vec& x0, const TraceRef* ref) {
  if (T < 0) throw ConfigError("epoch budget must be nonnegative");
  const auto t0 = std::chrono::steady_clock::now();
  MetricTrace trace;
  Vec x = x0;
  long grads = 0, proxes = 0;
  trace.add(make_row(0, grads, proxes, x, f, psi, ref, t0));
  const int n = f.n();
  for (long k = 0; k < T; ++k) {
    const double gamma = steps.at(k);
    for (int idx : schedule.next(n)) {
      x = psi.prox(gamma, x - gamma * f.grad_i(idx, x));
      ++proxes;
    }
    grads += n;
    guard_iterate(x, "per-iteration proximal run");
    trace.add(make_row(k + 1, grads, proxes, x, f, psi, ref, t0));
  }
  trace.final_iterate = x;
  return trace;
}

std::vector<Vec> limit_points(const FiniteSumObjective& f, const Vec& x_star,
                              double gamma, const std::vector<int>& order) {
  const int n = f.n();
  if (static_cast<int>(order.size()) != n)
    throw ConfigError("limit points need a full ordering");
  std::vector<Vec> pts;
  pts.reserve(static_cast<size_t>(n) + 1);
  Vec shift = Vec::Zero(f.dim());
  pts.push_back(x_star);
  for (int i = 0; i < n; ++i) {
    shift += f.grad_i(order[static_cast<size_t>(i)], x_star);
    pts.push_back(x_star - gamma * shift);
  }
  return pts;
}

double shuffling_variance(const FiniteSumObjective& f, const Vec& x_star,
                          double gamma, long num_perms, RngStream& rng) {
  if (gamma <= 0) throw ConfigError("shuffling variance needs gamma > 0");
  const int n = f.n();
  if (n <= 1) return 0.0;
  auto acc = mean_prefix_divergence(f, x_star, gamma, num_perms, rng);
  double best = 0.0;
  for (int i = 1; i <= n - 1; ++i)
    best = std::max(best, acc[static_cast<size_t>(i)] / gamma);
  return best;
}

double shuffling_radius(const FiniteSumObjective& f, const ProxTerm& /*psi*/,
                        const Vec& x_star, double gamma, long num_perms,
                        RngStream& rng) {
  if (gamma <= 0) throw ConfigError("shuffling radius needs gamma > 0");
  const int n = f.n();
  auto acc = mean_prefix_divergence(f, x_star, gamma, num_perms, rng);
  double best = 0.0;
  for (int i = 0; i <= n - 1; ++i)
    best = std::max(best, acc[static_cast<size_t>(i)] / (gamma * gamma));
  return best;
}

WorStats wor_stats(const std::vector<Vec>& X, int m) {
  const int n = static_cast<int>(X.size());
  if (n < 1 || m < 1 || m > n) throw ConfigError("need 1 <= m <= n vectors");
  Vec mean = Vec::Zero(X[0].size());
  for (const Vec& x : X) mean += x;
  mean /= static_cast<double>(n);
  WorStats out;
  out.mean = mean;
  if (n == 1) {
    out.var_of_sample_mean = 0.0;  // 0/0 convention
    return out;
  }
  double sigma_sq = 0.0;
  for (const Vec& x : X) sigma_sq += (x - mean).squaredNorm();
  sigma_sq /= static_cast<double>(n);
  out.var_of_sample_mean = static_cast<double>(n - m) /
                           (static_cast<double>(m) * static_cast<double>(n - 1)) *
                           sigma_sq;
  return out;
}

FiniteSumObjective importance_resample(const FiniteSumObjective& f) {
  const int n = f.n();
  double L_bar = 0.0;
  for (int i = 0; i < n; ++i) L_bar += f.L_i(i);
  L_bar /= static_cast<double>(n);
  if (L_bar <= 0) throw ConfigError("importance resampling needs positive smoothness");

  auto base = std::make_shared<FiniteSumObjective>(f);
  std::vector<Component> comps;
  std::vector<double> L_i;
  for (int i = 0; i < n; ++i) {
    const long copies = static_cast<long>(std::ceil(f.L_i(i) / L_bar));
    const long n_i = std::max<long>(1, copies);
    const double w = 1.0 / static_cast<double>(n_i);
    for (long c = 0; c < n_i; ++c) {
      comps.push_back(Component{
          [base, i, w](const Vec& x) { return w * base->value_i(i, x); },
          [base, i, w](const Vec& x) { return Vec(w * base->grad_i(i, x)); }});
      L_i.push_back(w * f.L_i(i));
    }
  }
  // The aggregate keeps the original normalizer 1/n, so the objective is
  // unchanged even though the component count grew to N <= 2n.
  return FiniteSumObjective(f.kind(), f.dim(), std::move(comps),
                            std::move(L_i), f.L(), f.mu(),
                            f.scale());
}

}  // namespace optlab
