#include "optlab/checks.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "optlab/adaptive.hpp"
#include "optlab/federated.hpp"
#include "optlab/harness.hpp"
#include "optlab/problems.hpp"
#include "optlab/quantize.hpp"
#include "optlab/shuffle.hpp"
#include "optlab/splitting.hpp"

namespace optlab {

namespace {

struct Suite {
  std::vector<CheckResult> results;

  void check(const std::string& name, bool pass, const std::string& detail = "") {
    results.push_back({name, pass, detail});
  }

  void run(const std::string& name, const std::function<void(Suite&)>& body) {
    try {
      body(*this);
    } catch (const std::exception& e) {
      results.push_back({name + "/exception", false, e.what()});
    }
  }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

Dataset random_dataset(int n, int d, RngStream& rng, double density = 1.0) {
  Dataset ds;
  ds.n_features = d;
  for (int i = 0; i < n; ++i) {
    SparseRow row;
    for (int j = 0; j < d; ++j)
      if (rng.uniform() < density) row.entries.emplace_back(j, rng.normal());
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(rng.uniform() < 0.5 ? 0.0 : 1.0);
  }
  return ds;
}

Vec random_vec(int d, RngStream& rng, double scale = 1.0) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

double max_fd_gradient_error(const FiniteSumObjective& f, RngStream& rng,
                             int points) {
  double worst = 0.0;
  for (int t = 0; t < points; ++t) {
    Vec x = random_vec(f.dim(), rng);
    const double h = 1e-6 * (1.0 + x.norm());
    Vec g = f.grad(x);
    Vec fd(f.dim());
    for (int j = 0; j < f.dim(); ++j) {
      Vec e = Vec::Zero(f.dim());
      e[j] = h;
      fd[j] = (f.value(x + e) - f.value(x - e)) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(1.0, g.norm()));
  }
  return worst;
}

void check_problems(Suite& s) {
  RngStream rng(101, "checks/problems");
  Dataset ds = random_dataset(40, 8, rng);
  FiniteSumObjective logistic = make_logistic(ds, 0.05);

  double err = max_fd_gradient_error(logistic, rng, 10);
  s.check("problems/logistic-gradient-vs-fd", err < 1e-5, fmt(err));

  Mat A(15, 6);
  Vec b(15);
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 6; ++j) A(i, j) = rng.normal();
    b[i] = rng.normal();
  }
  FiniteSumObjective ls = make_least_squares(A, b, 0.1);
  err = max_fd_gradient_error(ls, rng, 10);
  s.check("problems/least-squares-gradient-vs-fd", err < 1e-5, fmt(err));

  FiniteSumObjective qd = make_quadratic_distance(random_vec(5, rng));
  err = max_fd_gradient_error(qd, rng, 10);
  s.check("problems/quadratic-distance-gradient-vs-fd", err < 1e-5, fmt(err));

  Vec x = random_vec(8, rng);
  double agree = (logistic.grad(x) - logistic.component_mean_grad(x)).norm();
  s.check("problems/component-mean-equals-full-gradient", agree < 1e-12, fmt(agree));

  Dataset round = parse_libsvm(serialize_libsvm(ds));
  bool same = round.n_features == ds.n_features && round.labels == ds.labels;
  for (int i = 0; same && i < ds.n_samples(); ++i)
    same = round.rows[static_cast<size_t>(i)].entries ==
           ds.rows[static_cast<size_t>(i)].entries;
  s.check("problems/libsvm-round-trip", same);

  Mat dense(12, 7);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 7; ++j) dense(i, j) = rng.normal();
  double pi_norm = spectral_norm_dense(dense);
  double svd_norm = dense.jacobiSvd().singularValues()[0];
  s.check("problems/power-iteration-vs-svd",
          std::abs(pi_norm - svd_norm) <= 1e-8 * svd_norm,
          fmt(std::abs(pi_norm - svd_norm) / svd_norm));

  GaussianSystem sys = gaussian_system(16, rng);
  double consistency = (sys.W * sys.x_star - sys.b).norm();
  double asym = (sys.W - sys.W.transpose()).norm();
  double lam_min = Eigen::SelfAdjointEigenSolver<Mat>(sys.W).eigenvalues().minCoeff();
  s.check("problems/gaussian-system-construction",
          consistency <= 1e-12 && asym <= 1e-14 && lam_min >= 1e-2 - 1e-9,
          "residual " + fmt(consistency) + ", lam_min " + fmt(lam_min));
}

std::vector<std::pair<std::string, ProxTerm>> prox_zoo(RngStream& rng) {
  std::vector<std::pair<std::string, ProxTerm>> zoo;
  zoo.emplace_back("zero", ProxTerm::zero());
  zoo.emplace_back("l1", ProxTerm::l1(0.7));
  zoo.emplace_back("sqnorm", ProxTerm::sqnorm(1.3));
  zoo.emplace_back("elastic", ProxTerm::elastic(0.5, 0.8));
  zoo.emplace_back("group_l2", ProxTerm::group_l2({{0, 1}, {2, 3, 4}}, 0.6));
  zoo.emplace_back("hinge", ProxTerm::hinge(random_vec(6, rng), 1.0));
  zoo.emplace_back("hyperplane", ProxTerm::hyperplane(random_vec(6, rng), 0.4));
  zoo.emplace_back("dantzig_slab",
                   ProxTerm::dantzig_slab(random_vec(6, rng), 0.2, 0.5));
  zoo.emplace_back("consensus",
                   ProxTerm::consensus(3, ProxTerm::l1(0.4)));
  zoo.emplace_back("linear_comp",
                   ProxTerm::linear_comp(random_vec(6, rng), Phi1D::abs(0.9)));
  return zoo;
}

int prox_dim(const std::string& name) {
  if (name == "group_l2") return 5;
  return 6;  // consensus: 3 blocks of 2
}

void check_prox(Suite& s) {
  RngStream rng(202, "checks/prox");
  auto zoo = prox_zoo(rng);
  for (auto& [name, term] : zoo) {
    const int d = prox_dim(name);
    double worst_firm = 0.0;
    for (int t = 0; t < 1500; ++t) {
      const double gamma = std::exp(rng.normal());
      Vec x = random_vec(d, rng, 2.0), y = random_vec(d, rng, 2.0);
      Vec px = term.prox(gamma, x), py = term.prox(gamma, y);
      const double lhs = (px - py).squaredNorm();
      const double rhs = (x - y).squaredNorm() -
                         ((x - px) - (y - py)).squaredNorm();
      worst_firm = std::max(worst_firm, lhs - rhs);
    }
    s.check("prox/firm-nonexpansive/" + name, worst_firm <= 1e-10, fmt(worst_firm));
  }
  // strong-convexity contraction for the mu > 0 kinds
  for (const char* name : {"sqnorm", "elastic"}) {
    ProxTerm term = std::string(name) == "sqnorm" ? ProxTerm::sqnorm(1.3)
                                                  : ProxTerm::elastic(0.5, 0.8);
    double worst = 0.0;
    for (int t = 0; t < 1500; ++t) {
      const double gamma = std::exp(rng.normal());
      Vec x = random_vec(6, rng, 2.0), y = random_vec(6, rng, 2.0);
      const double lhs = (term.prox(gamma, x) - term.prox(gamma, y)).squaredNorm();
      const double rhs = (x - y).squaredNorm() / (1.0 + 2.0 * gamma * term.mu());
      worst = std::max(worst, lhs - rhs);
    }
    s.check(std::string("prox/contraction/") + name, worst <= 1e-10, fmt(worst));
  }
  // Moreau decomposition on scalars: prox_{g l1}(x) = x - proj_{[-g l1, g l1]}(x)
  double worst_moreau = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const double gamma = std::exp(rng.normal());
    const double lam = std::exp(rng.normal());
    Vec x = random_vec(1, rng, 3.0);
    Vec p = ProxTerm::l1(lam).prox(gamma, x);
    const double ball = gamma * lam;
    const double proj = std::clamp(x[0], -ball, ball);
    worst_moreau = std::max(worst_moreau, std::abs(p[0] - (x[0] - proj)));
  }
  s.check("prox/moreau-l1-vs-linf-projection", worst_moreau <= 1e-10, fmt(worst_moreau));

  // linear composition: x - prox(x) stays in span(a)
  Vec a = random_vec(6, rng);
  ProxTerm lc = ProxTerm::linear_comp(a, Phi1D::abs(0.9));
  double worst_range = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double gamma = std::exp(rng.normal());
    Vec x = random_vec(6, rng, 2.0);
    Vec r = x - lc.prox(gamma, x);
    Vec res = r - a * (a.dot(r) / a.squaredNorm());
    worst_range = std::max(worst_range, res.norm());
  }
  s.check("prox/linear-comp-range", worst_range <= 1e-9, fmt(worst_range));

  // fixed point at a reference optimum, gamma-independent
  Dataset ds = random_dataset(30, 6, rng);
  FiniteSumObjective f = make_logistic(ds, 0.2);
  ProxTerm psi = ProxTerm::l1(0.05);
  Reference ref = reference_solution(f, psi, 1e-12);
  double r1 = prox_fixed_point_check(psi, f, 0.1, ref.x);
  double r2 = prox_fixed_point_check(psi, f, 1.0, ref.x);
  double r3 = prox_fixed_point_check(psi, f, 10.0, ref.x);
  s.check("prox/fixed-point-at-optimum", r2 <= 1e-7, fmt(r2));
  s.check("prox/fixed-point-gamma-independence",
          std::abs(r1 - r2) <= 1e-9 && std::abs(r3 - r2) <= 1e-9,
          fmt(std::max(std::abs(r1 - r2), std::abs(r3 - r2))));
}

void check_shuffle(Suite& s) {
  RngStream rng(303, "checks/shuffle");
  // n = 1: RR and SO both degenerate to gradient descent, bitwise
  {
    FiniteSumObjective f = make_quadratic_distance(random_vec(4, rng));
    auto steps = StepsizeSchedule::constant(0.3);
    auto rr = PermutationSchedule::rr(RngStream(1, "a"));
    auto so = PermutationSchedule::so(RngStream(2, "b"), 1);
    Vec x0 = random_vec(4, rng);
    MetricTrace t1 = run_shuffled(f, rr, steps, 20, x0);
    MetricTrace t2 = run_shuffled(f, so, steps, 20, x0);
    s.check("shuffle/rr-so-coincide-at-n1",
            (t1.final_iterate - t2.final_iterate).norm() == 0.0);
  }
  // permutation equivariance of the epoch pass
  {
    std::vector<double> w = {0.5, 1.0, 2.0, 3.0};
    std::vector<Vec> c;
    for (int i = 0; i < 4; ++i) c.push_back(random_vec(3, rng));
    FiniteSumObjective f = make_component_quadratics(w, c);
    std::vector<int> relabel = {2, 0, 3, 1};
    std::vector<double> w2(4);
    std::vector<Vec> c2(4);
    for (int i = 0; i < 4; ++i) {
      w2[static_cast<size_t>(relabel[static_cast<size_t>(i)])] = w[static_cast<size_t>(i)];
      c2[static_cast<size_t>(relabel[static_cast<size_t>(i)])] = c[static_cast<size_t>(i)];
    }
    FiniteSumObjective g = make_component_quadratics(w2, c2);
    std::vector<int> order = {3, 1, 0, 2};
    std::vector<int> mapped(4);
    for (int i = 0; i < 4; ++i)
      mapped[static_cast<size_t>(i)] = relabel[static_cast<size_t>(order[static_cast<size_t>(i)])];
    Vec x0 = random_vec(3, rng);
    Vec a = epoch_pass(f, x0, 0.05, order);
    Vec b = epoch_pass(g, x0, 0.05, mapped);
    s.check("shuffle/epoch-pass-equivariance", (a - b).norm() == 0.0);
  }
  // shuffling variance against its strongly convex bounds, enumerated n = 5
  {
    std::vector<double> w = {0.6, 0.8, 1.0, 1.4, 2.0};
    std::vector<Vec> c;
    for (int i = 0; i < 5; ++i) c.push_back(random_vec(3, rng, 2.0));
    FiniteSumObjective f = make_component_quadratics(w, c);
    Reference ref = reference_solution(f, ProxTerm::zero(), 1e-13);
    const double sstar = sigma_star(f, ref.x);
    bool ok = true;
    std::string detail;
    for (double gamma : {1.0 / f.L(), 0.1 / f.L()}) {
      RngStream r2 = rng.sub("variance");
      const double v = shuffling_variance(f, ref.x, gamma, 1, r2);
      const double lo = gamma * f.mu() * 5.0 / 8.0 * sstar;
      const double hi = gamma * f.L() * 5.0 / 4.0 * sstar;
      ok = ok && (lo - 1e-9 <= v) && (v <= hi + 1e-9);
      detail += fmt(lo) + " <= " + fmt(v) + " <= " + fmt(hi) + "; ";
    }
    s.check("shuffle/variance-bounds", ok, detail);
  }
  // without-replacement statistics, exact enumeration for n <= 6
  {
    bool ok = true;
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
      std::vector<Vec> X;
      for (int i = 0; i < n; ++i) X.push_back(random_vec(3, rng, 2.0));
      for (int m = 1; m <= n; ++m) {
        WorStats st = wor_stats(X, m);
        // enumerate all m-subsets; ordered draws share subset averages
        std::vector<int> idx(static_cast<size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<bool> select(static_cast<size_t>(n), false);
        std::fill(select.begin(), select.begin() + m, true);
        double acc = 0.0;
        long count = 0;
        std::sort(select.begin(), select.end());
        do {
          Vec mean = Vec::Zero(3);
          for (int i = 0; i < n; ++i)
            if (select[static_cast<size_t>(i)]) mean += X[static_cast<size_t>(i)];
          mean /= static_cast<double>(m);
          acc += (mean - st.mean).squaredNorm();
          ++count;
        } while (std::next_permutation(select.begin(), select.end()));
        const double exact = acc / static_cast<double>(count);
        worst = std::max(worst, std::abs(exact - st.var_of_sample_mean));
        ok = ok && std::abs(exact - st.var_of_sample_mean) <= 1e-12;
      }
    }
    s.check("shuffle/wor-variance-enumeration", ok, fmt(worst));
  }
  // importance resampling properties
  {
    std::vector<double> w;
    std::vector<Vec> c;
    for (int i = 0; i < 12; ++i) {
      w.push_back(std::exp(1.5 * rng.normal()));
      c.push_back(random_vec(3, rng));
    }
    FiniteSumObjective f = make_component_quadratics(w, c);
    FiniteSumObjective g = importance_resample(f);
    double L_bar = 0.0;
    for (int i = 0; i < f.n(); ++i) L_bar += f.L_i(i);
    L_bar /= f.n();
    bool ok = g.n() <= 2 * f.n();
    for (int i = 0; i < g.n(); ++i) ok = ok && g.L_i(i) <= L_bar * (1.0 + 1e-12);
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      Vec x = random_vec(3, rng, 2.0);
      worst = std::max(worst,
                       std::abs(g.value(x) - f.value(x)) /
                           std::max(1.0, std::abs(f.value(x))));
    }
    s.check("shuffle/importance-resample", ok && worst <= 1e-12,
            "N=" + std::to_string(g.n()) + " err=" + fmt(worst));
  }
}

void check_federated(Suite& s) {
  RngStream rng(404, "checks/federated");
  Dataset ds = random_dataset(41, 6, rng);  // uneven shards on purpose

  RngStream prng1(11, "p");
  FederatedProblem fp = partition(ds, 4, PartitionMode::contiguous, prng1, 0.1);
  {
    Vec x = random_vec(6, rng);
    Vec mean = Vec::Zero(6);
    for (const auto& sh : fp.shards) mean += sh.grad(x);
    mean /= static_cast<double>(fp.M);
    s.check("federated/global-equals-mean-of-shards",
            (fp.global.grad(x) - mean).norm() <= 1e-12);
  }
  {
    MetricTrace a = fed_rr(fp, 0.05, 10, RngStream(99, "fed"), PermutationSchedule::Kind::RR);
    MetricTrace b = fed_rr(fp, 0.05, 10, RngStream(99, "fed"), PermutationSchedule::Kind::RR);
    s.check("federated/fed-rr-deterministic",
            (a.final_iterate - b.final_iterate).norm() == 0.0);
    LocalSgdResult c = local_sgd(fp, SyncSchedule::every(3), 0.05, 30, 2, RngStream(99, "l"));
    LocalSgdResult d = local_sgd(fp, SyncSchedule::every(3), 0.05, 30, 2, RngStream(99, "l"));
    s.check("federated/local-sgd-deterministic",
            (c.x_final - d.x_final).norm() == 0.0);
  }
  {
    Vec x = random_vec(6, rng);
    FedVariances v = fed_variances(fp, x);
    double bias = 0.0;
    for (const auto& sh : fp.shards) bias += sh.grad(x).squaredNorm();
    bias /= static_cast<double>(fp.M);
    s.check("federated/sigma-dif-dominates-bias",
            v.sigma_dif_sq >= bias - 1e-12,
            fmt(v.sigma_dif_sq) + " vs " + fmt(bias));
    RngStream prng2(12, "p");
    FederatedProblem rep = partition(ds, 3, PartitionMode::replicate, prng2, 0.1);
    FedVariances vr = fed_variances(rep, x);
    s.check("federated/replicate-sigma-equal",
            std::abs(vr.sigma_dif_sq - vr.sigma_opt_sq) <= 1e-12);
  }
}

void check_adaptive(Suite& s) {
  RngStream rng(505, "checks/adaptive");
  Mat A(12, 4);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = rng.normal();
  Mat Q = A.transpose() * A / 12.0 + 0.1 * Mat::Identity(4, 4);
  Vec c = random_vec(4, rng);
  GradFn grad = [&](const Vec& x) { return Vec(Q * (x - c)); };
  const double L = Eigen::SelfAdjointEigenSolver<Mat>(Q).eigenvalues().maxCoeff();

  AdgdRun run1 = adgd_run(grad, Vec::Zero(4), 1e-10, 300);
  AdgdRun run2 = adgd_run(grad, Vec::Zero(4), 1e-10, 300);
  s.check("adaptive/deterministic", (run1.x_final - run2.x_final).norm() == 0.0);

  bool gamma_ok = true;
  for (size_t i = 1; i < run1.iterates.size(); ++i)
    gamma_ok = gamma_ok && run1.iterates[i].gamma >= 1.0 / (2.0 * L) - 1e-12;
  s.check("adaptive/stepsize-lower-bound", gamma_ok);

  bool weights_ok = true;
  double worst = 0.0;
  for (size_t i = 0; i + 1 < run1.iterates.size(); ++i) {
    const double w = run1.iterates[i].gamma * (1.0 + run1.iterates[i].theta) -
                     run1.iterates[i + 1].gamma * run1.iterates[i + 1].theta;
    const double scale = std::max(1.0, run1.iterates[i].gamma *
                                           (1.0 + run1.iterates[i].theta));
    worst = std::min(worst, w / scale);
    weights_ok = weights_ok && w >= -1e-12 * scale;
    // the absolute bound applies while the iterates still move
    if ((run1.iterates[i + 1].x - run1.iterates[i].x).norm() > 0.0)
      weights_ok = weights_ok && w >= -1e-12;
  }
  s.check("adaptive/ergodic-weights-nonnegative", weights_ok, fmt(worst));
}

void check_quantize(Suite& s) {
  RngStream rng(606, "checks/quantize");
  Vec delta = random_vec(8, rng, 2.0);
  // unbiasedness and the variance identity, moderate sample size
  for (PNorm p : {PNorm::one, PNorm::two, PNorm::inf}) {
    for (BlockSpec blocks : {BlockSpec::single(8), BlockSpec{{4, 4}}, BlockSpec::per_coordinate(8)}) {
      const int samples = 20000;
      Vec mean = Vec::Zero(8);
      double var = 0.0;
      RngStream draw = rng.sub("draws");
      for (int t = 0; t < samples; ++t) {
        Vec dec = quant_block(delta, p, blocks, draw).decode();
        mean += dec;
        var += (dec - delta).squaredNorm();
      }
      mean /= samples;
      var /= samples;
      const double psi_exact = psi(delta, p, blocks);
      // per-coordinate standard error of the ternary draw
      bool mean_ok = true;
      for (int j = 0; j < 8; ++j) {
        double se = std::sqrt(std::max(psi_exact, 1e-30) / samples);
        // additive slack absorbs accumulation error over the sample sums
        mean_ok = mean_ok && std::abs(mean[j] - delta[j]) <= 4.0 * se + 1e-10;
      }
      const bool var_ok = psi_exact == 0.0 ||
                          std::abs(var - psi_exact) <= 0.05 * psi_exact + 1e-12;
      std::string tag = std::to_string(blocks.sizes.size());
      std::string pn = p == PNorm::one ? "1" : (p == PNorm::two ? "2" : "inf");
      s.check("quantize/unbiased-p" + pn + "-blocks" + tag, mean_ok);
      s.check("quantize/variance-identity-p" + pn + "-blocks" + tag, var_ok,
              fmt(var) + " vs " + fmt(psi_exact));
    }
  }
  // monotonicity of the variance in p
  bool mono = true;
  for (int t = 0; t < 100; ++t) {
    Vec v = random_vec(8, rng, 2.0);
    BlockSpec blocks = BlockSpec::single(8);
    const double p1 = psi(v, PNorm::one, blocks);
    const double p2 = psi(v, PNorm::two, blocks);
    const double pi = psi(v, PNorm::inf, blocks);
    mono = mono && pi <= p2 + 1e-12 && p2 <= p1 + 1e-12 && pi >= -1e-12;
  }
  s.check("quantize/psi-monotone-in-p", mono);
  // alpha_p sampled lower bound
  for (PNorm p : {PNorm::one, PNorm::two, PNorm::inf}) {
    bool ok = true;
    for (int d : {2, 4, 16}) {
      const double bound = alpha_p(p, d);
      for (int t = 0; t < 10000; ++t) {
        Vec v = random_vec(d, rng);
        const double np = p == PNorm::one   ? v.lpNorm<1>()
                          : p == PNorm::two ? v.norm()
                                            : v.lpNorm<Eigen::Infinity>();
        const double ratio = v.squaredNorm() / (v.lpNorm<1>() * np);
        ok = ok && ratio >= bound - 1e-9;
      }
    }
    s.check("quantize/alpha-p-lower-bound", ok);
  }
  // wire round trip
  {
    QuantizedMessage msg = quant_block(delta, PNorm::two, BlockSpec{{3, 5}}, rng);
    QuantizedMessage back = QuantizedMessage::deserialize(msg.serialize(),
                                                          BlockSpec{{3, 5}}, PNorm::two);
    s.check("quantize/wire-round-trip",
            (msg.decode() - back.decode()).norm() == 0.0);
  }
}

void check_splitting(Suite& s) {
  RngStream rng(707, "checks/splitting");
  Dataset ds = random_dataset(20, 5, rng);
  FiniteSumObjective f = make_logistic(ds, 0.1);
  Vec x = random_vec(5, rng);
  Vec exact = f.component_mean_grad(x);

  Vec bind_point = random_vec(5, rng);
  for (auto variant : {GradEstimator::Variant::sgd, GradEstimator::Variant::svrg,
                       GradEstimator::Variant::saga, GradEstimator::Variant::lsvrg}) {
    // conditional unbiasedness: fixed internal state (same bind point),
    // fresh sampling randomness on every draw
    const int samples = 10000;
    Vec mean = Vec::Zero(5);
    double second = 0.0;
    for (int t = 0; t < samples; ++t) {
      RngStream draw = rng.sub("draw/" + std::to_string(t));
      GradEstimator est =
          variant == GradEstimator::Variant::sgd ? GradEstimator::sgd(1, draw)
          : variant == GradEstimator::Variant::svrg ? GradEstimator::svrg(0, draw)
          : variant == GradEstimator::Variant::saga ? GradEstimator::saga(draw)
                                                    : GradEstimator::lsvrg(0, draw);
      est.bind(f, bind_point);
      Vec v = est.next(f, x);
      mean += v;
      second += (v - exact).squaredNorm();
    }
    mean /= samples;
    const double se = std::sqrt(std::max(second / samples, 1e-30) / samples);
    const bool ok = (mean - exact).norm() <= 4.0 * se * std::sqrt(5.0) + 1e-12;
    s.check("splitting/estimator-unbiased/" + std::to_string(static_cast<int>(variant)), ok,
            fmt((mean - exact).norm()) + " vs se " + fmt(se));
  }
  {
    GradEstimator saga = GradEstimator::saga(rng.sub("saga"));
    saga.bind(f, x);
    for (int t = 0; t < 50; ++t) saga.next(f, random_vec(5, rng));
    s.check("splitting/saga-table-mean", saga.saga_table_drift() <= 1e-12,
            fmt(saga.saga_table_drift()));
  }
  // dual aggregate consistency and y_j in span(a_j) during SDM
  {
    RngStream prng(31, "sys");
    GaussianSystem sys = gaussian_system(8, prng);
    std::vector<ProxTerm> g;
    for (int j = 0; j < 8; ++j)
      g.push_back(ProxTerm::hyperplane(sys.W.row(j).transpose(), sys.b[j]));
    FiniteSumObjective qd = make_quadratic_distance(random_vec(8, prng));
    SdmState st = sdm_init(qd, g, Vec::Zero(8));
    SdmOptions opts;
    opts.gamma = 0.125;
    GradEstimator est = GradEstimator::full();
    est.bind(qd, st.x);
    RngStream term_rng(32, "terms");
    bool ok = true;
    double worst = 0.0;
    for (int t = 0; t < 60; ++t) {
      sdm_step(qd, ProxTerm::zero(), g, st, opts, est, term_rng);
      Vec mean = Vec::Zero(8);
      for (const auto& yj : st.y) mean += yj;
      mean /= static_cast<double>(st.y.size());
      worst = std::max(worst, (mean - st.y_mean).norm());
      for (int j = 0; j < 8; ++j) {
        const Vec& a = g[static_cast<size_t>(j)].a();
        Vec res = st.y[static_cast<size_t>(j)] -
                  a * (a.dot(st.y[static_cast<size_t>(j)]) / a.squaredNorm());
        ok = ok && res.norm() <= 1e-9;
      }
    }
    s.check("splitting/sdm-dual-aggregate", worst <= 1e-12 && ok, fmt(worst));
  }
  // chain-difference spectrum
  {
    const int d = 10;
    LinOp D = LinOp::chain_difference(d);
    Mat dense(d - 1, d);
    for (int j = 0; j < d; ++j) {
      Vec e = Vec::Zero(d);
      e[j] = 1.0;
      dense.col(j) = D.apply(e);
    }
    Vec eig = Eigen::SelfAdjointEigenSolver<Mat>(dense * dense.transpose()).eigenvalues();
    bool ok = true;
    for (int k = 1; k <= d - 1; ++k) {
      const double expected = 2.0 - 2.0 * std::cos(static_cast<double>(k) * M_PI / d);
      ok = ok && std::abs(eig[k - 1] - expected) <= 1e-9;
    }
    s.check("splitting/chain-difference-spectrum", ok);
  }
}

void check_harness(Suite& s) {
  // canonical config round trip
  RunConfig cfg = RunConfig::from_json_text(bundled_config("smoke_shuffle"));
  RunConfig again = RunConfig::from_json_text(cfg.canonical());
  s.check("harness/config-canonical-round-trip", cfg.canonical() == again.canonical());

  MetricTrace t1 = run(cfg);
  MetricTrace t2 = run(cfg);
  bool same = t1.rows.size() == t2.rows.size();
  for (size_t i = 0; same && i < t1.rows.size(); ++i) {
    same = t1.rows[i].step == t2.rows[i].step &&
           t1.rows[i].grads == t2.rows[i].grads &&
           t1.rows[i].proxes == t2.rows[i].proxes &&
           t1.rows[i].bits == t2.rows[i].bits &&
           t1.rows[i].f_gap == t2.rows[i].f_gap &&
           t1.rows[i].dist_sq == t2.rows[i].dist_sq;
  }
  s.check("harness/run-deterministic", same);

  MetricTrace parsed = parse_csv(to_csv(t1));
  s.check("harness/csv-round-trip", to_csv(parsed) == to_csv(t1));
}

}  // namespace

std::vector<CheckResult> run_invariant_checks() {
  Suite s;
  s.run("problems", check_problems);
  s.run("prox", check_prox);
  s.run("shuffle", check_shuffle);
  s.run("federated", check_federated);
  s.run("adaptive", check_adaptive);
  s.run("quantize", check_quantize);
  s.run("splitting", check_splitting);
  s.run("harness", check_harness);
  return s.results;
}

}  // namespace optlab
