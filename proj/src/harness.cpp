#include "optlab/harness.hpp"

#include <chrono>
#include <cmath>
#include <map>

#include "optlab/adaptive.hpp"
#include "optlab/federated.hpp"
#include "optlab/problems.hpp"
#include "optlab/quantize.hpp"
#include "optlab/shuffle.hpp"
#include "optlab/splitting.hpp"

namespace optlab {

std::string version() { return "0.1.0"; }

namespace {

using nlohmann::json;

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return j[key].get<double>();
}

long get_int(const json& j, const char* key, long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ConfigError(std::string("field '") + key + "' must be an integer");
  return j[key].get<long>();
}

std::string get_str(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
  return j[key].get<std::string>();
}

// Synthetic binary classification data: Gaussian features, labels from a
// random separating direction with label noise.
Dataset synth_classification(int n, int d, RngStream& rng) {
  Dataset ds;
  ds.n_features = d;
  Vec w(d);
  for (int j = 0; j < d; ++j) w[j] = rng.normal();
  for (int i = 0; i < n; ++i) {
    SparseRow row;
    double t = 0.0;
    for (int j = 0; j < d; ++j) {
      double v = rng.normal();
      row.entries.emplace_back(j, v);
      t += v * w[j];
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(t + 0.5 * rng.normal() > 0 ? 1.0 : 0.0);
  }
  return ds;
}

struct BuiltProblem {
  FiniteSumObjective f;
  ProxTerm psi = ProxTerm::zero();
  bool has_operator = false;
  LinOp L;
  ProxTerm H = ProxTerm::zero();
  double lambda_tv = 0.0;
  Mat A;  // linear-constraint data, when present
  Vec b;
  Dataset ds;
  bool has_dataset = false;
  double lambda2 = 0.0;
};

BuiltProblem build_problem(const json& spec, uint64_t seed) {
  RngStream rng(seed, "problem");
  BuiltProblem out;
  const std::string kind = get_str(spec, "kind", "");
  if (kind == "logistic") {
    out.lambda2 = get_num(spec, "lambda2", 0.0);
    if (spec.contains("dataset")) {
      out.ds = load_libsvm_file(spec["dataset"].get<std::string>());
    } else {
      out.ds = synth_classification(static_cast<int>(get_int(spec, "n", 64)),
                                    static_cast<int>(get_int(spec, "d", 10)), rng);
    }
    out.has_dataset = true;
    const double l1 = get_num(spec, "lambda1", 0.0);
    // l2 lives in the smooth part by default; "l2_in_prox" moves it into
    // the regularizer (elastic net), trading component strong convexity
    // for a strongly convex prox term
    const bool l2_in_prox = spec.value("l2_in_prox", false);
    if (l2_in_prox) {
      out.f = make_logistic(out.ds, 0.0);
      out.psi = ProxTerm::elastic(l1, out.lambda2);
      out.lambda2 = 0.0;
    } else {
      out.f = make_logistic(out.ds, out.lambda2);
      if (l1 > 0) out.psi = ProxTerm::l1(l1);
    }
  } else if (kind == "quadratics") {
    const int n = static_cast<int>(get_int(spec, "n", 20));
    const int d = static_cast<int>(get_int(spec, "d", 5));
    const double kappa = get_num(spec, "kappa", 10.0);
    const double L = get_num(spec, "L", 1.0);
    std::vector<double> w(static_cast<size_t>(n));
    std::vector<Vec> centers;
    for (int i = 0; i < n; ++i) {
      // log-spaced curvatures between L/kappa and L
      const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 1.0;
      w[static_cast<size_t>(i)] = L * std::pow(1.0 / kappa, 1.0 - t);
      Vec c(d);
      for (int j = 0; j < d; ++j) c[j] = 3.0 * rng.normal();
      centers.push_back(std::move(c));
    }
    out.f = make_component_quadratics(std::move(w), std::move(centers));
  } else if (kind == "quadratic_distance") {
    const int d = static_cast<int>(get_int(spec, "d", 10));
    Vec x0(d);
    for (int j = 0; j < d; ++j) x0[j] = rng.normal();
    out.f = make_quadratic_distance(x0);
  } else if (kind == "gaussian_system") {
    const int d = static_cast<int>(get_int(spec, "d", 20));
    GaussianSystem sys = gaussian_system(d, rng);
    out.A = sys.W;
    out.b = sys.b;
    Vec x0 = Vec::Zero(d);
    out.f = make_quadratic_distance(x0);
  } else if (kind == "fused_lasso") {
    const int n = static_cast<int>(get_int(spec, "n", 30));
    const int d = static_cast<int>(get_int(spec, "d", 20));
    out.lambda2 = get_num(spec, "lambda2", 0.1);
    Mat W(n, d);
    Vec truth(d);
    // piecewise-constant ground truth gives the TV term something to do
    double level = rng.normal();
    for (int j = 0; j < d; ++j) {
      if (rng.uniform() < 0.3) level = rng.normal();
      truth[j] = level;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) W(i, j) = rng.normal();
    Vec a = W * truth;
    for (int i = 0; i < n; ++i) a[i] += 0.1 * rng.normal();
    out.f = make_least_squares(std::move(W), std::move(a), out.lambda2);
    const double l1 = get_num(spec, "lambda1", 0.0);
    if (l1 > 0) out.psi = ProxTerm::l1(l1);
    out.lambda_tv = get_num(spec, "lambda_tv", 0.05);
    out.has_operator = true;
    out.L = LinOp::chain_difference(d);
    out.H = ProxTerm::l1(out.lambda_tv);
  } else if (kind == "rankdef_system") {
    const int m = static_cast<int>(get_int(spec, "m", 12));
    const int d = static_cast<int>(get_int(spec, "d", 20));
    const int rank = static_cast<int>(get_int(spec, "rank", 6));
    Mat B(m, rank), C(rank, d);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < rank; ++j) B(i, j) = rng.normal();
    for (int i = 0; i < rank; ++i)
      for (int j = 0; j < d; ++j) C(i, j) = rng.normal() / std::sqrt(d);
    out.A = B * C;
    Vec xbar(d);
    for (int j = 0; j < d; ++j) xbar[j] = rng.normal();
    out.b = out.A * xbar;
    Vec x0(d);
    for (int j = 0; j < d; ++j) x0[j] = rng.normal();
    out.f = make_quadratic_distance(x0);
  } else {
    throw ConfigError("unknown problem kind: '" + kind + "'");
  }
  return out;
}

// FISTA with the combined soft-threshold-of-TV prox; ground truth for the
// operator-composite fused lasso.
TraceRef fused_lasso_reference(const BuiltProblem& p, double tol) {
  const double gamma = 1.0 / p.f.L();
  const double l1 = p.psi.is_zero() ? 0.0 : p.psi.lambda();
  auto prox = [&](const Vec& v, double step) {
    Vec u = prox_tv_chain(v, step * p.lambda_tv);
    if (l1 > 0) u = ProxTerm::l1(l1).prox(step, u);
    return u;
  };
  Vec x = Vec::Zero(p.f.dim());
  Vec z = x;
  double t = 1.0;
  for (long k = 0; k < 2000000; ++k) {
    Vec x_next = prox(z - gamma * p.f.grad(z), gamma);
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((z - x_next).dot(x_next - x) > 0) {
      t = 1.0;
      t_next = 1.0;
      z = x_next;
    } else {
      z = x_next + ((t - 1.0) / t_next) * (x_next - x);
    }
    const double res = (x_next - x).norm();
    const double scale = std::max(1.0, x.norm());
    x = x_next;
    t = t_next;
    if (k > 0 && res <= tol * scale) break;
  }
  TraceRef ref;
  ref.x_star = x;
  double tv = 0.0;
  for (int j = 0; j + 1 < p.f.dim(); ++j) tv += std::abs(x[j] - x[j + 1]);
  ref.f_star = p.f.value(x) + p.psi.value(x) + p.lambda_tv * tv;
  return ref;
}

// Minimizer of f over {A x = b} for quadratic-distance f via the normal
// equations of the projection.
TraceRef constrained_reference(const BuiltProblem& p) {
  // f = ||x - x0||^2/2 with centre recovered from the gradient at zero;
  // the constrained optimum is the projection x0 - A^T (A A^T)^+ (A x0 - b)
  Vec x0 = -p.f.grad(Vec::Zero(p.f.dim()));
  Eigen::CompleteOrthogonalDecomposition<Mat> gram(p.A * p.A.transpose());
  Vec x = x0 - p.A.transpose() * gram.pseudoInverse() * (p.A * x0 - p.b);
  TraceRef ref;
  ref.x_star = x;
  ref.f_star = p.f.value(x);
  return ref;
}

GradEstimator build_estimator(const json& solver, uint64_t seed) {
  const std::string variant = get_str(solver, "estimator", "full");
  RngStream rng(seed, "solver/estimator");
  if (variant == "full") return GradEstimator::full();
  if (variant == "sgd")
    return GradEstimator::sgd(static_cast<int>(get_int(solver, "batch", 1)), rng);
  if (variant == "svrg")
    return GradEstimator::svrg(get_int(solver, "loop", 0), rng);
  if (variant == "saga") return GradEstimator::saga(rng);
  if (variant == "lsvrg")
    return GradEstimator::lsvrg(get_num(solver, "p_refresh", 0.0), rng);
  throw ConfigError("unknown estimator '" + variant + "'");
}

MetricTrace dispatch_shuffle(const RunConfig& cfg, const BuiltProblem& p,
                             const TraceRef& ref) {
  const json& solver = cfg.solver();
  const std::string method = get_str(solver, "method", "rr");
  const double gamma = get_num(solver, "gamma", 0.1 / std::max(p.f.L_max(), 1e-12));
  StepsizeSchedule steps = StepsizeSchedule::constant(gamma);
  if (solver.contains("schedule")) {
    const json& s = solver["schedule"];
    const std::string kind = get_str(s, "kind", "constant");
    if (kind == "constant") {
      steps = StepsizeSchedule::constant(gamma);
    } else if (kind == "inv_epoch") {
      steps = StepsizeSchedule::inv_epoch(gamma, get_int(s, "k0", 0),
                                          get_num(s, "c", 1.0));
    } else if (kind == "prox_decreasing") {
      steps = StepsizeSchedule::prox_decreasing(cfg.budget(), p.f.L_max(),
                                                get_num(s, "mu", p.f.mu()),
                                                p.f.n());
    } else {
      throw ConfigError("unknown stepsize schedule '" + kind + "'");
    }
  }
  RngStream rng(cfg.seed(), "solver/permutation");
  PermutationSchedule perm =
      method == "so" ? PermutationSchedule::so(rng, p.f.n())
      : method == "ig" ? PermutationSchedule::ig()
                       : PermutationSchedule::rr(rng);
  Vec x0 = Vec::Zero(p.f.dim());
  if (method == "prox_rr" || method == "prox_so") {
    PermutationSchedule prox_perm =
        method == "prox_so" ? PermutationSchedule::so(rng, p.f.n())
                            : PermutationSchedule::rr(rng);
    return run_prox_rr(p.f, p.psi, prox_perm, steps, cfg.budget(), x0, &ref);
  }
  if (method == "prox_rr_iter") {  // per-iteration prox baseline
    PermutationSchedule prox_perm = PermutationSchedule::rr(rng);
    return run_prox_rr_per_iteration(p.f, p.psi, prox_perm, steps,
                                     cfg.budget(), x0, &ref);
  }
  if (method != "rr" && method != "so" && method != "ig")
    throw ConfigError("unknown shuffle method '" + method + "'");
  return run_shuffled(p.f, perm, steps, cfg.budget(), x0, &ref);
}

MetricTrace dispatch_federated(const RunConfig& cfg, const BuiltProblem& p,
                               TraceRef& ref) {
  if (!p.has_dataset)
    throw ConfigError("federated solvers need a dataset-backed problem");
  const json& solver = cfg.solver();
  const std::string method = get_str(solver, "method", "fed_rr");
  const int M = static_cast<int>(get_int(solver, "M", 4));
  const std::string mode_s = get_str(solver, "mode", "contiguous");
  PartitionMode mode = mode_s == "replicate" ? PartitionMode::replicate
                       : mode_s == "shuffled" ? PartitionMode::shuffled
                                              : PartitionMode::contiguous;
  RngStream prng(cfg.seed(), "solver/partition");
  FederatedProblem fp = partition(p.ds, M, mode, prng, p.lambda2, p.psi);
  // metrics are w.r.t. the federated global objective (mean of shards)
  Reference r = reference_solution(fp.global, fp.reg, cfg.ref_tol());
  ref.x_star = r.x;
  ref.f_star = r.fval;
  RngStream rng(cfg.seed(), "solver");
  const double gamma =
      get_num(solver, "gamma", 0.5 / std::max(fp.global.L_max(), 1e-12));
  if (method == "local_sgd") {
    // local SGD has no prox step: it solves the unregularized problem
    if (!fp.reg.is_zero())
      throw ConfigError("local_sgd does not support a regularizer term");
    SyncSchedule sync = SyncSchedule::every(get_int(solver, "H", 1));
    return local_sgd(fp, sync, gamma, cfg.budget(),
                     static_cast<int>(get_int(solver, "batch", 1)), rng, &ref)
        .trace;
  }
  if (method == "fed_rr" || method == "fed_so") {
    auto variant = method == "fed_so" ? PermutationSchedule::Kind::SO
                                      : PermutationSchedule::Kind::RR;
    return fed_rr(fp, gamma, cfg.budget(), rng, variant, &ref);
  }
  throw ConfigError("unknown federated method '" + method + "'");
}

MetricTrace dispatch_adaptive(const RunConfig& cfg, const BuiltProblem& p,
                              const TraceRef& ref) {
  const json& solver = cfg.solver();
  const std::string method = get_str(solver, "method", "adgd");
  const double gamma0 = get_num(solver, "gamma0", 1e-10);
  Vec x0 = Vec::Zero(p.f.dim());
  GradFn grad = [&p](const Vec& x) { return p.f.grad(x); };
  ValueFn value = [&p](const Vec& x) { return p.f.value(x); };
  if (method == "adgd")
    return adgd_run(grad, x0, gamma0, cfg.budget(), value, &ref).trace;
  if (method == "adgd_accel")
    return adgd_accel_run(grad, x0, gamma0, cfg.budget(), value, &ref).trace;
  if (method == "adsgd") {
    const double alpha = get_num(solver, "alpha", 0.5);
    const std::string opt = get_str(solver, "option", "biased");
    RngStream rng(cfg.seed(), "solver");
    return adsgd_run(p.f, x0, gamma0, alpha,
                     opt == "unbiased" ? AdsgdOption::unbiased
                                       : AdsgdOption::biased,
                     cfg.budget(), rng, &ref)
        .trace;
  }
  throw ConfigError("unknown adaptive method '" + method + "'");
}

MetricTrace dispatch_diana(const RunConfig& cfg, const BuiltProblem& p,
                           TraceRef& ref) {
  if (!p.has_dataset)
    throw ConfigError("quantized solvers need a dataset-backed problem");
  const json& solver = cfg.solver();
  const std::string method = get_str(solver, "method", "diana");
  const int M = static_cast<int>(get_int(solver, "M", 4));
  const std::string mode_s = get_str(solver, "mode", "contiguous");
  PartitionMode mode = mode_s == "replicate" ? PartitionMode::replicate
                       : mode_s == "shuffled" ? PartitionMode::shuffled
                                              : PartitionMode::contiguous;
  RngStream prng(cfg.seed(), "solver/partition");
  FederatedProblem fp = partition(p.ds, M, mode, prng, p.lambda2, p.psi);
  Reference r = reference_solution(fp.global, fp.reg, cfg.ref_tol());
  ref.x_star = r.x;
  ref.f_star = r.fval;

  DianaOptions opts;
  const std::string p_s = get_str(solver, "p", "inf");
  opts.p = p_s == "1" ? PNorm::one : p_s == "2" ? PNorm::two : PNorm::inf;
  const long block = get_int(solver, "block", 0);
  opts.blocks = block > 0 ? BlockSpec{std::vector<int>()} : BlockSpec{};
  if (block > 0) {
    std::vector<int> sizes;
    int left = fp.global.dim();
    while (left > 0) {
      sizes.push_back(std::min<int>(static_cast<int>(block), left));
      left -= sizes.back();
    }
    opts.blocks = BlockSpec{sizes};
  }
  DianaParams defaults = diana_default_params(
      fp.global.L(), std::max(fp.global.mu(), 1e-12), M, opts.p,
      opts.blocks.sizes.empty() ? BlockSpec::single(fp.global.dim())
                                : opts.blocks);
  opts.alpha = method == "terngrad" ? 0.0
                                    : get_num(solver, "alpha", defaults.alpha);
  opts.gamma = StepsizeSchedule::constant(get_num(solver, "gamma", defaults.gamma));
  opts.beta = get_num(solver, "beta", 0.0);
  opts.psi_term = fp.reg;
  opts.rounds = cfg.budget();
  opts.batch = static_cast<int>(get_int(solver, "batch", 0));
  RngStream rng(cfg.seed(), "solver");
  if (method == "terngrad") return terngrad_run(fp, opts, rng, &ref);
  if (method == "diana") return diana_run(fp, opts, rng, &ref);
  throw ConfigError("unknown quantized method '" + method + "'");
}

MetricTrace dispatch_sdm(const RunConfig& cfg, const BuiltProblem& p,
                         TraceRef& ref) {
  const json& solver = cfg.solver();
  const std::string method = get_str(solver, "method", "kaczmarz");
  RngStream rng(cfg.seed(), "solver");
  if (method == "kaczmarz") {
    if (p.A.size() == 0) throw ConfigError("kaczmarz mode needs a linear system");
    Vec x0 = -p.f.grad(Vec::Zero(p.f.dim()));
    ref = constrained_reference(p);
    return sdm_kaczmarz_mode(p.A, p.b, x0, cfg.budget(), rng, &ref);
  }
  if (method == "linear") {
    if (p.A.size() == 0) throw ConfigError("linear mode needs a linear system");
    ref = constrained_reference(p);
    GradEstimator est = build_estimator(solver, cfg.seed());
    const double gamma =
        get_num(solver, "gamma", est.constants(p.f, p.f.mu() > 0).gamma_max);
    return sdm_linear_run(p.f, p.A, p.b, est, gamma, {}, cfg.budget(), rng,
                          &ref);
  }
  throw ConfigError("unknown sdm method '" + method + "'");
}

MetricTrace dispatch_splitting(const RunConfig& cfg, const BuiltProblem& p,
                               TraceRef& ref) {
  const json& solver = cfg.solver();
  const std::string method = get_str(solver, "method", "pddy");
  PrimalDualOptions opts;
  opts.K = cfg.budget();

  if (method == "licosgd" || method == "prilicosgd") {
    if (p.A.size() == 0)
      throw ConfigError("linearly constrained methods need a linear system");
    ref = constrained_reference(p);
    LinOp L = LinOp::dense(p.A);
    const double norm = spectral_norm(L);
    GradEstimator est = build_estimator(solver, cfg.seed());
    // default stepsize from the estimator's own safe range
    const double gmax = est.constants(p.f, p.f.mu() > 0).gamma_max;
    opts.gamma = get_num(solver, "gamma", gmax);
    opts.tau = get_num(solver, "tau", 0.9 / (opts.gamma * norm * norm));
    if (method == "licosgd")
      return licosgd_run(p.f, L, p.b, opts, est, &ref);
    LinOp W = LinOp::dense(p.A.transpose() * p.A);
    Vec c = p.A.transpose() * p.b;
    return prilicosgd_run(p.f, W, c, opts, est, &ref);
  }

  if (!p.has_operator)
    throw ConfigError("operator-splitting methods need a composite problem");
  ref = fused_lasso_reference(p, cfg.ref_tol());
  const double norm = spectral_norm(p.L);
  if (method == "pddy" || method == "pd3o") {
    GradEstimator est = build_estimator(solver, cfg.seed());
    const double gmax = est.constants(p.f, p.f.mu() > 0).gamma_max;
    opts.gamma = get_num(solver, "gamma", gmax);
    opts.tau = get_num(solver, "tau", 0.9 / (opts.gamma * norm * norm));
    return method == "pddy" ? pddy_run(p.f, p.psi, p.H, p.L, opts, est, &ref)
                            : pd3o_run(p.f, p.psi, p.H, p.L, opts, est, &ref);
  }
  opts.gamma = get_num(solver, "gamma", 1.0 / p.f.L());
  opts.tau = get_num(solver, "tau", 0.9 / (opts.gamma * norm * norm));
  if (method == "condat_vu" || method == "condat_vu2") {
    // the Condat-Vu condition needs tau (primal) small against gamma (dual)
    opts.tau = get_num(solver, "tau", 0.0);
    opts.gamma = get_num(solver, "gamma", 0.0);
    if (opts.tau <= 0 || opts.gamma <= 0) {
      opts.gamma = 0.5 / norm;
      opts.tau = 0.9 / (p.f.L() / 2.0 + opts.gamma * norm * norm);
    }
    return condat_vu_run(p.f, p.psi, p.H, p.L, opts,
                         method == "condat_vu" ? CondatVuForm::I
                                               : CondatVuForm::II,
                         &ref);
  }
  throw ConfigError("unknown splitting method '" + method + "'");
}

}  // namespace

MetricTrace run(const RunConfig& cfg) {
  BuiltProblem p = build_problem(cfg.problem(), cfg.seed());
  const std::string family = cfg.family();

  TraceRef ref;
  MetricTrace trace;
  if (family == "shuffle" || family == "adaptive") {
    if (p.has_operator)
      throw ConfigError("family '" + family + "' cannot run operator-composite problems");
    Reference r = reference_solution(p.f, p.psi, cfg.ref_tol());
    ref.x_star = r.x;
    ref.f_star = r.fval;
    trace = family == "shuffle" ? dispatch_shuffle(cfg, p, ref)
                                : dispatch_adaptive(cfg, p, ref);
  } else if (family == "federated") {
    trace = dispatch_federated(cfg, p, ref);
  } else if (family == "diana") {
    trace = dispatch_diana(cfg, p, ref);
  } else if (family == "sdm") {
    trace = dispatch_sdm(cfg, p, ref);
  } else if (family == "splitting") {
    trace = dispatch_splitting(cfg, p, ref);
  } else {
    throw ConfigError("unknown solver family '" + family + "'");
  }
  trace.config_hash = cfg.hash();
  trace.version = version();
  return trace;
}

namespace {

const std::map<std::string, std::string>& bundled() {
  static const std::map<std::string, std::string> configs = {
      {"smoke_shuffle", R"({
        "problem": {"kind": "quadratics", "n": 20, "d": 5, "kappa": 10.0},
        "solver": {"family": "shuffle", "method": "rr", "gamma": 0.02},
        "seed": 7, "budget": 60, "ref_tol": 1e-12})"},
      {"smoke_federated", R"({
        "problem": {"kind": "logistic", "n": 64, "d": 10, "lambda2": 0.1},
        "solver": {"family": "federated", "method": "fed_rr", "M": 4, "gamma": 0.05},
        "seed": 7, "budget": 40, "ref_tol": 1e-10})"},
      {"smoke_adaptive", R"({
        "problem": {"kind": "logistic", "n": 64, "d": 10, "lambda2": 0.1},
        "solver": {"family": "adaptive", "method": "adgd", "gamma0": 1e-10},
        "seed": 7, "budget": 300, "ref_tol": 1e-10})"},
      {"smoke_diana", R"({
        "problem": {"kind": "logistic", "n": 64, "d": 10, "lambda2": 0.1},
        "solver": {"family": "diana", "method": "diana", "M": 4, "p": "inf"},
        "seed": 7, "budget": 150, "ref_tol": 1e-10})"},
      {"smoke_terngrad", R"({
        "problem": {"kind": "logistic", "n": 64, "d": 10, "lambda2": 0.1},
        "solver": {"family": "diana", "method": "terngrad", "M": 4, "p": "inf", "gamma": 0.05},
        "seed": 7, "budget": 150, "ref_tol": 1e-10})"},
      {"smoke_sdm", R"({
        "problem": {"kind": "rankdef_system", "m": 12, "d": 24, "rank": 6},
        "solver": {"family": "sdm", "method": "kaczmarz"},
        "seed": 7, "budget": 1500, "ref_tol": 1e-12})"},
      {"smoke_splitting", R"({
        "problem": {"kind": "fused_lasso", "n": 30, "d": 20, "lambda2": 0.1, "lambda_tv": 0.05},
        "solver": {"family": "splitting", "method": "pddy", "estimator": "saga"},
        "seed": 7, "budget": 6000, "ref_tol": 1e-12})"},
  };
  return configs;
}

}  // namespace

std::vector<std::string> bundled_config_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : bundled()) names.push_back(name);
  return names;
}

std::string bundled_config(const std::string& name) {
  auto it = bundled().find(name);
  if (it == bundled().end())
    throw ConfigError("no bundled config named '" + name + "'");
  return it->second;
}

std::vector<BenchResult> bench_suite(const std::string& suite) {
  if (suite != "smoke") throw ConfigError("unknown bench suite '" + suite + "'");
  std::vector<BenchResult> results;
  for (const auto& name : bundled_config_names()) {
    BenchResult r;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      RunConfig cfg = RunConfig::from_json_text(bundled_config(name));
      run(cfg);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace optlab
