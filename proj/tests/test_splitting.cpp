#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "optlab/problems.hpp"
#include "optlab/splitting.hpp"

using namespace optlab;

namespace {

Vec rv(int d, RngStream& rng, double scale = 1.0) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

Dataset random_dataset(int n, int d, RngStream& rng) {
  Dataset ds;
  ds.n_features = d;
  for (int i = 0; i < n; ++i) {
    SparseRow row;
    for (int j = 0; j < d; ++j) row.entries.emplace_back(j, rng.normal());
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(rng.uniform() < 0.5 ? 0.0 : 1.0);
  }
  return ds;
}

Mat kron_identity(const Mat& W, int d) {
  Mat out = Mat::Zero(W.rows() * d, W.cols() * d);
  for (int i = 0; i < W.rows(); ++i)
    for (int j = 0; j < W.cols(); ++j)
      out.block(i * d, j * d, d, d) = W(i, j) * Mat::Identity(d, d);
  return out;
}

}  // namespace

TEST_CASE("full estimator returns the exact gradient") {
  RngStream rng(1, "full");
  Dataset ds = random_dataset(10, 3, rng);
  FiniteSumObjective f = make_logistic(ds, 0.1);
  GradEstimator est = GradEstimator::full();
  Vec x = rv(3, rng);
  CHECK((est.next(f, x) - f.grad(x)).norm() == 0.0);
}

TEST_CASE("saga step matches the hand formula after a warm start") {
  RngStream rng(2, "saga");
  Vec c0 = rv(2, rng), c1 = rv(2, rng);
  FiniteSumObjective f = make_component_quadratics({1.0, 2.0}, {c0, c1});
  Vec w = rv(2, rng);  // warm-start point
  GradEstimator est = GradEstimator::saga(RngStream(33, "e"));
  est.warm_start(f, w);  // table at w

  Vec x = rv(2, rng);
  Vec v = est.next(f, x);
  // replay the index draw
  int i = RngStream(33, "e").index(2);
  Vec mean_w = f.component_mean_grad(w);
  Vec expected = f.grad_i(i, x) - f.grad_i(i, w) + mean_w;
  CHECK((v - expected).norm() <= 1e-15);

  // interpolation problem, table at the optimum: v = grad f_i(x)
  FiniteSumObjective interp = make_component_quadratics({1.0, 2.0}, {c0, c0});
  GradEstimator est2 = GradEstimator::saga(RngStream(34, "e"));
  est2.warm_start(interp, c0);
  int j = RngStream(34, "e").index(2);
  Vec v2 = est2.next(interp, x);
  CHECK((v2 - interp.grad_i(j, x)).norm() <= 1e-15);
}

TEST_CASE("loopless refresh with probability one gives exact gradients at the reference") {
  RngStream rng(3, "lsvrg");
  Dataset ds = random_dataset(8, 3, rng);
  FiniteSumObjective f = make_logistic(ds, 0.2);
  GradEstimator est = GradEstimator::lsvrg(1.0, RngStream(55, "e"));
  Vec x = rv(3, rng);
  est.bind(f, x);
  // reference point equals the query point: the correction cancels exactly
  Vec v = est.next(f, x);
  CHECK((v - f.component_mean_grad(x)).norm() <= 1e-15);
  // p = 1 refreshed to x again, so a second query at x is exact too
  Vec v2 = est.next(f, x);
  CHECK((v2 - f.component_mean_grad(x)).norm() <= 1e-15);
}

TEST_CASE("svrg refreshes on schedule") {
  RngStream rng(4, "svrg");
  Dataset ds = random_dataset(6, 2, rng);
  FiniteSumObjective f = make_logistic(ds, 0.1);
  GradEstimator est = GradEstimator::svrg(3, RngStream(56, "e"));
  Vec x0 = Vec::Zero(2);
  est.bind(f, x0);
  long base = est.grad_evals();
  CHECK(base == 6);  // binding costs one full pass
  est.next(f, rv(2, rng));
  CHECK(est.grad_evals() == base + 2);
}

TEST_CASE("estimators are conditionally unbiased") {
  RngStream rng(5, "unbiased");
  Dataset ds = random_dataset(12, 3, rng);
  FiniteSumObjective f = make_logistic(ds, 0.1);
  Vec x = rv(3, rng);
  Vec exact = f.component_mean_grad(x);
  auto make = [&](int which, int draw) {
    RngStream r = rng.sub("draw/" + std::to_string(which) + "/" + std::to_string(draw));
    switch (which) {
      case 0: return GradEstimator::sgd(1, r);
      case 1: return GradEstimator::svrg(0, r);
      case 2: return GradEstimator::saga(r);
      default: return GradEstimator::lsvrg(0.0, r);
    }
  };
  Vec bind_point = rv(3, rng);
  for (int which = 0; which < 4; ++which) {
    // fixed state (same bind point), fresh sampling randomness per draw
    const int samples = 10000;
    Vec mean = Vec::Zero(3);
    double second = 0.0;
    for (int t = 0; t < samples; ++t) {
      GradEstimator est = make(which, t);
      est.bind(f, bind_point);
      Vec v = est.next(f, x);
      mean += v;
      second += (v - exact).squaredNorm();
    }
    mean /= samples;
    const double se = std::sqrt(std::max(second / samples, 1e-30) / samples);
    CHECK((mean - exact).norm() <= 4.0 * se * std::sqrt(3.0) + 1e-12);
  }
}

TEST_CASE("saga running average tracks its table") {
  RngStream rng(6, "table");
  Dataset ds = random_dataset(9, 3, rng);
  FiniteSumObjective f = make_logistic(ds, 0.1);
  GradEstimator est = GradEstimator::saga(RngStream(7, "e"));
  est.bind(f, Vec::Zero(3));
  for (int t = 0; t < 200; ++t) est.next(f, rv(3, rng));
  CHECK(est.saga_table_drift() <= 1e-12);
}

TEST_CASE("SDM with zero terms and full gradients is plain gradient descent") {
  RngStream rng(8, "sdm-gd");
  Vec x0 = rv(3, rng);
  FiniteSumObjective f = make_quadratic_distance(x0);
  std::vector<ProxTerm> g = {ProxTerm::zero()};
  SdmState st = sdm_init(f, g, Vec::Zero(3));
  SdmOptions opts;
  opts.gamma = 0.3;
  GradEstimator est = GradEstimator::full();
  est.bind(f, st.x);
  RngStream terms(9, "t");
  Vec x_manual = Vec::Zero(3);
  for (int k = 0; k < 10; ++k) {
    sdm_step(f, ProxTerm::zero(), g, st, opts, est, terms);
    x_manual -= 0.3 * f.grad(x_manual);
    CHECK((st.x - x_manual).norm() <= 1e-14);
  }
}

TEST_CASE("SDM fixed point with m = 1 and no smooth part") {
  // min ||x||^2/2 s.t. a^T x = b: optimum x* = b a / ||a||^2 and the dual
  // certificate y* = -x* make (x*, y*) a fixed point of the step
  RngStream rng(10, "dr");
  Vec a = rv(4, rng);
  const double b = 1.7;
  Vec x_star = (b / a.squaredNorm()) * a;
  FiniteSumObjective zero_f = make_linear_components({Vec(Vec::Zero(4))});
  std::vector<ProxTerm> g = {ProxTerm::hyperplane(a, b)};
  SdmState st = sdm_init(zero_f, g, x_star);
  st.y[0] = -x_star;
  st.y_mean = -x_star;
  SdmOptions opts;
  opts.gamma = 0.6;
  GradEstimator est = GradEstimator::full();
  est.bind(zero_f, st.x);
  RngStream terms(11, "t");
  for (int k = 0; k < 5; ++k) sdm_step(zero_f, ProxTerm::sqnorm(1.0), g, st, opts, est, terms);
  CHECK((st.x - x_star).norm() <= 1e-14);
  CHECK((st.y[0] + x_star).norm() <= 1e-14);
}

TEST_CASE("dual vectors stay in the span of their rows") {
  RngStream rng(12, "span");
  std::vector<ProxTerm> g;
  std::vector<Vec> rows;
  for (int j = 0; j < 5; ++j) {
    rows.push_back(rv(4, rng));
    g.push_back(ProxTerm::linear_comp(rows.back(), Phi1D::abs(0.5)));
  }
  FiniteSumObjective f = make_quadratic_distance(rv(4, rng));
  SdmState st = sdm_init(f, g, Vec::Zero(4));
  SdmOptions opts;
  opts.gamma = 0.2;
  GradEstimator est = GradEstimator::full();
  est.bind(f, st.x);
  RngStream terms(13, "t");
  for (int k = 0; k < 60; ++k) {
    sdm_step(f, ProxTerm::zero(), g, st, opts, est, terms);
    for (int j = 0; j < 5; ++j) {
      const Vec& aj = rows[static_cast<size_t>(j)];
      Vec y = st.y[static_cast<size_t>(j)];
      Vec res = y - aj * (aj.dot(y) / aj.squaredNorm());
      CHECK(res.norm() <= 1e-9);
    }
  }
}

TEST_CASE("kaczmarz mode: one equation converges in one step") {
  Mat W(1, 3);
  W << 1.0, 2.0, -1.0;
  Vec b(1);
  b << 0.5;
  Vec x0(3);
  x0 << 1.0, -1.0, 2.0;
  MetricTrace t = sdm_kaczmarz_mode(W, b, x0, 1, RngStream(14, "k"));
  CHECK(std::abs(W.row(0).dot(t.final_iterate) - 0.5) <= 1e-12);
}

TEST_CASE("kaczmarz mode equals classical randomized Kaczmarz") {
  RngStream prng(15, "sys");
  GaussianSystem sys = gaussian_system(20, prng);
  Vec x0 = rv(20, prng);
  MetricTrace t = sdm_kaczmarz_mode(sys.W, sys.b, x0, 200, RngStream(16, "idx"));

  // classical method with the same index stream
  RngStream idx(16, "idx");
  std::vector<double> probs(20, 1.0 / 20.0);
  Vec x = x0;
  for (int k = 0; k < 200; ++k) {
    int j = sample_categorical(idx, probs);
    const double r = sys.W.row(j).dot(x) - sys.b[j];
    x -= (r / sys.W.row(j).squaredNorm()) * sys.W.row(j).transpose();
  }
  CHECK((t.final_iterate - x).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("kaczmarz mode with orthogonal rows is exact after covering all rows") {
  Mat W = 2.0 * Mat::Identity(4, 4);  // orthogonal rows
  RngStream rng(17, "orth");
  Vec sol = rv(4, rng);
  Vec b = W * sol;
  Vec x0 = rv(4, rng);
  FiniteSumObjective fq = make_quadratic_distance(x0);
  TraceRef tr{sol, fq.value(sol)};
  MetricTrace t = sdm_kaczmarz_mode(W, b, x0, 60, RngStream(18, "idx"), &tr);
  // replay the index stream to find when every row has been visited
  RngStream idx(18, "idx");
  std::vector<double> probs(4, 0.25);
  std::vector<bool> seen(4, false);
  int covered_at = -1;
  for (int k = 0; k < 60; ++k) {
    seen[static_cast<size_t>(sample_categorical(idx, probs))] = true;
    if (covered_at < 0 && seen[0] && seen[1] && seen[2] && seen[3]) covered_at = k + 1;
  }
  REQUIRE(covered_at > 0);
  CHECK((t.rows[static_cast<size_t>(covered_at)].dist_sq) <= 1e-24);
}

TEST_CASE("memory-efficient linear variant matches the full-state run") {
  RngStream prng(19, "sys");
  GaussianSystem sys = gaussian_system(12, prng);
  FiniteSumObjective f = make_quadratic_distance(rv(12, prng));
  std::vector<ProxTerm> g;
  for (int j = 0; j < 12; ++j)
    g.push_back(ProxTerm::hyperplane(sys.W.row(j).transpose(), sys.b[j]));
  SdmOptions opts;
  opts.gamma = 0.04;
  MetricTrace full = sdm_run(f, ProxTerm::zero(), g, Vec::Zero(12), opts,
                             GradEstimator::full(), 200, RngStream(20, "r"));
  MetricTrace lean = sdm_linear_run(f, sys.W, sys.b, GradEstimator::full(),
                                    0.04, {}, 200, RngStream(20, "r"));
  CHECK((full.final_iterate - lean.final_iterate).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("memory-efficient variant without constraints is estimator descent") {
  RngStream rng(21, "noconstraints");
  Vec x0 = rv(3, rng);
  FiniteSumObjective f = make_quadratic_distance(x0);
  Mat empty(0, 3);
  Vec none(0);
  MetricTrace t = sdm_linear_run(f, empty, none, GradEstimator::full(), 0.5,
                                 {}, 20, RngStream(22, "r"));
  Vec x = Vec::Zero(3);
  for (int k = 0; k < 20; ++k) x -= 0.5 * f.grad(x);
  CHECK((t.final_iterate - x).norm() == 0.0);
}

TEST_CASE("spectral norms of operators") {
  CHECK(spectral_norm(LinOp::identity(5)) == doctest::Approx(1.0).epsilon(1e-9));
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 3.0;
  D(1, 1) = 1.0;
  CHECK(spectral_norm(LinOp::dense(D)) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(spectral_norm(LinOp::zero(3, 4)) == 0.0);
  // chain difference on d = 4: ||D||^2 = 2 + sqrt(2)
  const double n4 = spectral_norm(LinOp::chain_difference(4));
  CHECK(n4 * n4 == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("PDDY with no operator and no psi is (stochastic) gradient descent") {
  RngStream rng(23, "pgd");
  Dataset ds = random_dataset(10, 3, rng);
  FiniteSumObjective f = make_logistic(ds, 0.2);
  PrimalDualOptions opts;
  opts.gamma = 0.5 / f.L();
  opts.tau = 1.0;
  opts.K = 30;
  opts.x0 = Vec::Zero(3);
  MetricTrace t = pddy_run(f, ProxTerm::zero(), ProxTerm::zero(),
                           LinOp::zero(0, 3), opts, GradEstimator::full());
  // the k-th recorded iterate is the gradient-descent iterate x_k
  Vec x = Vec::Zero(3);
  for (int k = 0; k + 1 < 30; ++k) x -= opts.gamma * f.grad(x);
  CHECK((t.final_iterate - x).norm() <= 1e-14);
}

TEST_CASE("PD3O with a singleton dual indicator is LiCoSGD, bitwise") {
  RngStream rng(24, "lico");
  const int d = 8, m = 3;
  Mat L(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) L(i, j) = rng.normal();
  Vec x_feas = rv(d, rng);
  Vec b = L * x_feas;
  std::vector<double> w(5, 1.0);
  std::vector<Vec> cs;
  for (int i = 0; i < 5; ++i) cs.push_back(rv(d, rng));
  FiniteSumObjective f = make_component_quadratics(w, cs);

  LinOp Lop = LinOp::dense(L);
  const double norm = spectral_norm(Lop);
  PrimalDualOptions opts;
  opts.gamma = 0.8 / f.L();
  opts.tau = 0.9 / (opts.gamma * norm * norm);
  opts.K = 150;
  opts.x0 = Vec::Zero(d);

  Vec x_unc = Vec::Zero(d);
  for (int i = 0; i < 5; ++i) x_unc += cs[static_cast<size_t>(i)];
  x_unc /= 5.0;
  Eigen::CompleteOrthogonalDecomposition<Mat> gram(L * L.transpose());
  Vec xs = x_unc - L.transpose() * gram.pseudoInverse() * (L * x_unc - b);
  TraceRef tr{xs, f.value(xs)};
  MetricTrace pd3o = pd3o_run(f, ProxTerm::zero(), ProxTerm::point(b), Lop,
                              opts, GradEstimator::full(), &tr);
  MetricTrace lico = licosgd_run(f, Lop, b, opts, GradEstimator::full(), &tr);
  REQUIRE(lico.rows.size() == pd3o.rows.size());
  // PD3O records the iterate before its update, LiCoSGD after: row k+1 of
  // the former is row k of the latter, and the sequences agree exactly
  for (size_t i = 0; i + 1 < pd3o.rows.size(); ++i)
    CHECK(lico.rows[i].dist_sq == pd3o.rows[i + 1].dist_sq);
}

TEST_CASE("Condat-Vu forms agree and satisfy the constraint qualification") {
  RngStream rng(25, "cv");
  Dataset ds = random_dataset(20, 6, rng);
  FiniteSumObjective f = make_logistic(ds, 0.3);
  LinOp D = LinOp::chain_difference(6);
  ProxTerm H = ProxTerm::l1(0.05);
  ProxTerm psi = ProxTerm::l1(0.02);
  const double norm = spectral_norm(D);
  PrimalDualOptions opts;
  opts.gamma = 0.4 / norm;
  opts.tau = 0.9 / (f.L() / 2.0 + opts.gamma * norm * norm);
  opts.K = 4000;
  opts.x0 = Vec::Zero(6);
  MetricTrace t1 = condat_vu_run(f, psi, H, D, opts, CondatVuForm::I);
  MetricTrace t2 = condat_vu_run(f, psi, H, D, opts, CondatVuForm::II);
  CHECK((t1.final_iterate - t2.final_iterate).norm() <= 1e-6);

  // condition violation is rejected
  PrimalDualOptions bad = opts;
  bad.tau = 10.0 / (f.L() / 2.0);
  CHECK_THROWS_AS(condat_vu_run(f, psi, H, D, bad, CondatVuForm::I), ConfigError);
}

TEST_CASE("Condat-Vu with a zero operator is proximal gradient descent") {
  RngStream rng(26, "cvpg");
  Dataset ds = random_dataset(10, 3, rng);
  FiniteSumObjective f = make_logistic(ds, 0.2);
  ProxTerm psi = ProxTerm::l1(0.02);
  PrimalDualOptions opts;
  opts.gamma = 0.5;
  opts.tau = 1.0 / f.L();
  opts.K = 25;
  opts.x0 = Vec::Zero(3);
  MetricTrace t = condat_vu_run(f, psi, ProxTerm::zero(), LinOp::zero(0, 3),
                                opts, CondatVuForm::I);
  Vec x = Vec::Zero(3);
  for (int k = 0; k < 25; ++k) x = psi.prox(opts.tau, x - opts.tau * f.grad(x));
  CHECK((t.final_iterate - x).norm() <= 1e-14);
}

TEST_CASE("Chambolle-Pock special case solves a saddle toy") {
  // f = 0, psi = 0, H = ind{b}: the primal-dual pair converges to a
  // solution of L x = b
  Mat L(2, 2);
  L << 1.0, 0.3, 0.0, 1.0;
  Vec b(2);
  b << 0.4, -0.7;
  FiniteSumObjective zero_f = make_linear_components({Vec(Vec::Zero(2))});
  LinOp Lop = LinOp::dense(L);
  const double norm = spectral_norm(Lop);
  PrimalDualOptions opts;
  opts.gamma = 0.5 / norm;
  opts.tau = 0.9 / (opts.gamma * norm * norm);
  opts.K = 3000;
  opts.x0 = Vec::Zero(2);
  MetricTrace t = pd3o_run(zero_f, ProxTerm::zero(), ProxTerm::point(b), Lop,
                           opts, GradEstimator::full());
  Vec direct = L.colPivHouseholderQr().solve(b);
  CHECK((t.final_iterate - direct).norm() <= 1e-6);
}

TEST_CASE("LiCoSGD with the identity operator converges to the pinned point") {
  RngStream rng(27, "pin");
  Vec xbar = rv(4, rng);
  FiniteSumObjective f = make_quadratic_distance(rv(4, rng));
  PrimalDualOptions opts;
  opts.gamma = 0.5;
  opts.tau = 1.0;
  opts.K = 2000;
  opts.x0 = Vec::Zero(4);
  MetricTrace t = licosgd_run(f, LinOp::identity(4), xbar, opts,
                              GradEstimator::full());
  CHECK((t.final_iterate - xbar).norm() <= 1e-8);
}

TEST_CASE("LiCoSGD and PriLiCoSGD produce identical primal iterates") {
  RngStream rng(28, "pri");
  const int d = 6, m = 2;
  Mat L(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) L(i, j) = rng.normal();
  Vec b = L * rv(d, rng);
  std::vector<double> w(4, 1.0);
  std::vector<Vec> cs;
  for (int i = 0; i < 4; ++i) cs.push_back(rv(d, rng));
  FiniteSumObjective f = make_component_quadratics(w, cs);
  LinOp Lop = LinOp::dense(L);
  const double norm = spectral_norm(Lop);
  PrimalDualOptions opts;
  opts.gamma = 0.8 / f.L();
  opts.tau = 0.9 / (opts.gamma * norm * norm);
  opts.K = 120;
  opts.x0 = Vec::Zero(d);
  // a reference makes the per-row distance columns comparable
  Vec x_unc = Vec::Zero(d);
  for (int i = 0; i < 4; ++i) x_unc += cs[static_cast<size_t>(i)];
  x_unc /= 4.0;
  Eigen::CompleteOrthogonalDecomposition<Mat> gram(L * L.transpose());
  Vec xs = x_unc - L.transpose() * gram.pseudoInverse() * (L * x_unc - b);
  TraceRef tr{xs, f.value(xs)};
  MetricTrace a = licosgd_run(f, Lop, b, opts, GradEstimator::full(), &tr);
  MetricTrace c = prilicosgd_run(f, LinOp::dense(L.transpose() * L),
                                 L.transpose() * b, opts, GradEstimator::full(), &tr);
  REQUIRE(a.rows.size() == c.rows.size());
  CHECK((a.final_iterate - c.final_iterate).lpNorm<Eigen::Infinity>() <= 1e-12);
  for (size_t i = 0; i < a.rows.size(); ++i)
    CHECK(std::abs(a.rows[i].dist_sq - c.rows[i].dist_sq) <= 1e-10);
}

TEST_CASE("inconsistent constraints trip the divergence guard") {
  // b outside range(L): the dual blows up and the guard reports it
  Mat L(2, 2);
  L << 1.0, 0.0, 1.0, 0.0;  // rank 1: range is the diagonal
  Vec b(2);
  b << 1.0, -1.0;  // not in range
  FiniteSumObjective f = make_quadratic_distance(Vec::Zero(2));
  PrimalDualOptions opts;
  opts.gamma = 0.9;
  opts.tau = 0.5;
  opts.K = 100000;
  opts.x0 = Vec::Zero(2);
  CHECK_THROWS_AS(licosgd_run(f, LinOp::dense(L), b, opts, GradEstimator::full()),
                  ConfigError);
}

TEST_CASE("decentralized run: consensus preserved from a consensual start") {
  RngStream rng(29, "destroy");
  Vec c = rv(3, rng);
  std::vector<FiniteSumObjective> fs(4, make_quadratic_distance(c));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) edges.emplace_back(i, j);
  std::vector<GradEstimator> ests(4, GradEstimator::full());
  DestroyResult res = destroy_run(fs, edges, 0.4, 0.3, ests, 40);
  for (double cres : res.consensus) CHECK(cres <= 1e-20);
  CHECK((res.x_mean_final - c).norm() <= 1e-6);
}

TEST_CASE("two-node path converges to the average-optimal point") {
  RngStream rng(30, "2node");
  Vec c0 = rv(2, rng), c1 = rv(2, rng);
  std::vector<FiniteSumObjective> fs = {make_quadratic_distance(c0),
                                        make_quadratic_distance(c1)};
  std::vector<std::pair<int, int>> edges = {{0, 1}};
  std::vector<GradEstimator> ests(2, GradEstimator::full());
  DestroyResult res = destroy_run(fs, edges, 0.4, 0.4 / (0.4 * 2.0), ests, 6000);
  Vec target = 0.5 * (c0 + c1);  // closed-form mean of the minimizers
  CHECK((res.x_mean_final - target).norm() <= 1e-6);
  CHECK(res.consensus.back() <= 1e-12);
}

TEST_CASE("decentralized run equals the lifted primal-only solver") {
  RngStream rng(31, "lift");
  const int M = 3, d = 2;
  std::vector<FiniteSumObjective> fs;
  for (int i = 0; i < M; ++i)
    fs.push_back(make_quadratic_distance(rv(d, rng)));
  std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 2}};
  const double gamma = 0.3, tau = 0.2;
  std::vector<GradEstimator> ests(M, GradEstimator::full());
  DestroyResult dec = destroy_run(fs, edges, gamma, tau, ests, 200);

  // lifted problem: stacked objective with per-node gradients, W = Lap (x) I
  Mat What = graph_laplacian(M, edges);
  Mat W = kron_identity(What, d);
  std::vector<Component> comps;
  std::vector<double> L_i;
  for (int i = 0; i < M; ++i) {
    const auto fi = fs[static_cast<size_t>(i)];
    comps.push_back(Component{
        [fi, i](const Vec& x) {
          return static_cast<double>(M) * fi.value(x.segment(i * d, d));
        },
        [fi, i](const Vec& x) {
          Vec g = Vec::Zero(M * d);
          g.segment(i * d, d) = static_cast<double>(M) * fi.grad(x.segment(i * d, d));
          return g;
        }});
    L_i.push_back(static_cast<double>(M) * fi.L());
  }
  FiniteSumObjective lifted(ObjectiveKind::custom, M * d, std::move(comps),
                            std::move(L_i), static_cast<double>(M), 0.0);
  PrimalDualOptions opts;
  opts.gamma = gamma;
  opts.tau = tau;
  opts.K = 200;
  opts.x0 = Vec::Zero(M * d);
  MetricTrace lift = prilicosgd_run(lifted, LinOp::dense(W), Vec::Zero(M * d),
                                    opts, GradEstimator::full());
  Vec mean = Vec::Zero(d);
  for (int i = 0; i < M; ++i) mean += lift.final_iterate.segment(i * d, d);
  mean /= static_cast<double>(M);
  CHECK((mean - dec.x_mean_final).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("disconnected graphs are rejected") {
  std::vector<FiniteSumObjective> fs(4, make_quadratic_distance(Vec::Zero(2)));
  std::vector<std::pair<int, int>> edges = {{0, 1}, {2, 3}};
  std::vector<GradEstimator> ests(4, GradEstimator::full());
  CHECK_THROWS_AS(destroy_run(fs, edges, 0.1, 0.1, ests, 5), ConfigError);
}

TEST_CASE("variance reduction collapses the SGD plateau") {
  RngStream rng(32, "vr");
  Dataset ds = random_dataset(40, 6, rng);
  FiniteSumObjective f = make_logistic(ds, 0.5);
  Reference ref = reference_solution(f, ProxTerm::zero(), 1e-12);
  TraceRef tr{ref.x, ref.fval};
  Mat empty(0, 6);
  Vec none(0);
  const double gamma = 0.25 / f.L_max();
  const long K = 30000;
  MetricTrace saga = sdm_linear_run(f, empty, none,
                                    GradEstimator::saga(RngStream(33, "s")),
                                    gamma, {}, K, RngStream(34, "r"), &tr);
  MetricTrace sgd = sdm_linear_run(f, empty, none,
                                   GradEstimator::sgd(1, RngStream(33, "s")),
                                   gamma, {}, K, RngStream(34, "r"), &tr);
  CHECK(saga.rows.back().dist_sq <= 1e-8);
  CHECK(sgd.rows.back().dist_sq >= 100.0 * saga.rows.back().dist_sq);
}

TEST_CASE("stepsize preset constants per estimator") {
  RngStream rng(35, "presets");
  Dataset ds = random_dataset(10, 3, rng);
  FiniteSumObjective f = make_logistic(ds, 0.1);
  auto gd = GradEstimator::full().constants(f, true);
  CHECK(gd.gamma_max == doctest::Approx(2.0 / (f.L() + f.mu())));
  CHECK(gd.omega == 1.0);
  auto vr = GradEstimator::saga(RngStream(1, "x")).constants(f, true);
  CHECK(vr.gamma_max == doctest::Approx(1.0 / (5.0 * f.L_max())));
  CHECK(vr.rho == doctest::Approx(1.0 / 30.0));
  auto cvx = GradEstimator::svrg(0, RngStream(2, "y")).constants(f, false);
  CHECK(cvx.omega == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("PDDY and PD3O agree on overlapping group lasso") {
  // overlapping groups are disjoint after lifting through the selection
  // operator, which is exactly the psi + H(Lx) shape
  RngStream rng(36, "ogl");
  const int d = 8, n = 20;
  Mat A(n, d);
  Vec b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
    b[i] = rng.normal();
  }
  FiniteSumObjective f = make_least_squares(A, b, 0.05);
  const std::vector<std::vector<int>> groups = {{0, 1, 2, 3}, {2, 3, 4, 5}, {4, 5, 6, 7}};
  // selection operator stacking the (overlapping) group subvectors
  int rows = 0;
  for (const auto& g : groups) rows += static_cast<int>(g.size());
  Mat S = Mat::Zero(rows, d);
  std::vector<std::vector<int>> stacked;
  int off = 0;
  for (const auto& g : groups) {
    std::vector<int> sg;
    for (int j : g) {
      S(off, j) = 1.0;
      sg.push_back(off);
      ++off;
    }
    stacked.push_back(std::move(sg));
  }
  LinOp Lop = LinOp::dense(S);
  ProxTerm H = ProxTerm::group_l2(stacked, 0.1);  // disjoint after lifting
  const double nrm = spectral_norm(Lop);
  PrimalDualOptions opts;
  opts.gamma = 1.0 / f.L();
  opts.tau = 0.9 / (opts.gamma * nrm * nrm);
  opts.K = 8000;
  opts.x0 = Vec::Zero(d);
  MetricTrace t1 = pddy_run(f, ProxTerm::zero(), H, Lop, opts, GradEstimator::full());
  MetricTrace t2 = pd3o_run(f, ProxTerm::zero(), H, Lop, opts, GradEstimator::full());
  CHECK((t1.final_iterate - t2.final_iterate).norm() <= 1e-6);
  auto objective = [&](const Vec& x) {
    double s = f.value(x);
    for (const auto& g : groups) {
      double q = 0.0;
      for (int j : g) q += x[j] * x[j];
      s += 0.1 * std::sqrt(q);
    }
    return s;
  };
  CHECK(std::abs(objective(t1.final_iterate) - objective(t2.final_iterate)) <= 1e-8);
}

TEST_CASE("time-varying SDM stepsizes follow the prescribed schedule and converge") {
  // orthonormal constraint rows keep the projection part well conditioned
  RngStream prng(37, "tv");
  const int d = 10;
  Mat G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = prng.normal();
  Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ();
  Vec xsol = rv(d, prng);
  Vec b = Q * xsol;
  FiniteSumObjective f = make_quadratic_distance(rv(d, prng));
  std::vector<ProxTerm> g;
  for (int j = 0; j < d; ++j)
    g.push_back(ProxTerm::hyperplane(Q.row(j).transpose(), b[j]));

  GradEstimator est = GradEstimator::full();
  auto consts = est.constants(f, true);
  SdmOptions opts;
  opts.time_varying = true;
  opts.mu = f.mu();
  opts.omega = consts.omega;
  opts.a = 2.0 / (consts.omega * f.mu() * consts.gamma_max);
  TraceRef tr{xsol, f.value(xsol)};  // Q x = b pins the iterate to xsol
  MetricTrace t = sdm_run(f, ProxTerm::zero(), g, Vec::Zero(d), opts, est,
                          1000, RngStream(38, "r"), &tr);
  CHECK(t.rows[300].dist_sq <= 1e-8);
  CHECK(t.rows.back().dist_sq <= 1e-24);
}

TEST_CASE("loopless estimator drives the primal-dual solver to the optimum") {
  RngStream rng(39, "lsvrgpd");
  Dataset ds = random_dataset(30, 5, rng);
  FiniteSumObjective f = make_logistic(ds, 0.4);
  Reference ref = reference_solution(f, ProxTerm::zero(), 1e-12);
  TraceRef tr{ref.x, ref.fval};
  PrimalDualOptions opts;
  opts.gamma = 0.2 / f.L_max();
  opts.tau = 1.0;
  opts.K = 20000;
  opts.x0 = Vec::Zero(5);
  MetricTrace t = pddy_run(f, ProxTerm::zero(), ProxTerm::zero(), LinOp::zero(0, 5),
                           opts, GradEstimator::lsvrg(0.0, RngStream(40, "e")), &tr);
  CHECK(t.rows.back().dist_sq <= 1e-10);
}
