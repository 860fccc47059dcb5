#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "optlab/problems.hpp"
#include "optlab/shuffle.hpp"

using namespace optlab;

namespace {

Vec rv(int d, RngStream& rng, double scale = 1.0) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

Vec scalar(double v) {
  Vec x(1);
  x[0] = v;
  return x;
}

FiniteSumObjective strongly_convex_suite(int n, int d, RngStream& rng,
                                         double mu = 0.5, double L = 2.0) {
  std::vector<double> w;
  std::vector<Vec> c;
  for (int i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 1.0;
    w.push_back(mu + (L - mu) * t);
    c.push_back(rv(d, rng, 2.0));
  }
  return make_component_quadratics(w, c);
}

}  // namespace

TEST_CASE("epoch pass: n = 1 is a single full-gradient step") {
  RngStream rng(1, "n1");
  Vec x0 = rv(3, rng);
  FiniteSumObjective f = make_quadratic_distance(x0);
  Vec x = rv(3, rng);
  Vec next = epoch_pass(f, x, 0.25, {0});
  CHECK((next - (x - 0.25 * (x - x0))).norm() == 0.0);
}

TEST_CASE("epoch pass: zero gradients leave the point unchanged") {
  Vec c = scalar(1.5);
  FiniteSumObjective f =
      make_component_quadratics({1.0, 2.0}, {c, c});
  Vec next = epoch_pass(f, c, 0.3, {1, 0});
  CHECK((next - c).norm() == 0.0);
}

TEST_CASE("epoch pass: two steps hand-unrolled") {
  // f_i = (x - c_i)^2 / 2, gamma = 0.1, x = 0, order (0, 1)
  const double c1 = 0.8, c2 = -1.3, gamma = 0.1;
  FiniteSumObjective f =
      make_component_quadratics({1.0, 1.0}, {scalar(c1), scalar(c2)});
  Vec out = epoch_pass(f, scalar(0.0), gamma, {0, 1});
  double x1 = 0.0 - gamma * (0.0 - c1);
  double x2 = x1 - gamma * (x1 - c2);
  CHECK(std::abs(out[0] - x2) <= 1e-15);
}

TEST_CASE("shuffle-once with the same seed gives identical traces") {
  RngStream rng(2, "so");
  FiniteSumObjective f = strongly_convex_suite(6, 3, rng);
  auto steps = StepsizeSchedule::constant(0.05);
  auto s1 = PermutationSchedule::so(RngStream(77, "perm"), 6);
  auto s2 = PermutationSchedule::so(RngStream(77, "perm"), 6);
  MetricTrace t1 = run_shuffled(f, s1, steps, 25, Vec::Zero(3));
  MetricTrace t2 = run_shuffled(f, s2, steps, 25, Vec::Zero(3));
  REQUIRE(t1.rows.size() == t2.rows.size());
  CHECK((t1.final_iterate - t2.final_iterate).norm() == 0.0);
}

TEST_CASE("incremental gradient on an interpolation problem descends monotonically") {
  RngStream rng(3, "ig");
  Vec c = rv(3, rng);
  // all components share the same minimizer
  FiniteSumObjective f =
      make_component_quadratics({0.5, 1.0, 2.0}, {c, c, c});
  TraceRef ref{c, f.value(c)};
  auto ig = PermutationSchedule::ig();
  auto steps = StepsizeSchedule::constant(0.02);
  MetricTrace t = run_shuffled(f, ig, steps, 12, Vec::Zero(3), &ref);
  for (size_t k = 4; k < t.rows.size(); ++k)
    CHECK(t.rows[k].dist_sq < t.rows[k - 1].dist_sq);
}

TEST_CASE("random reshuffling settles on a plateau") {
  RngStream rng(4, "plateau");
  FiniteSumObjective f = strongly_convex_suite(10, 3, rng);
  Reference ref = reference_solution(f, ProxTerm::zero(), 1e-12);
  TraceRef tr{ref.x, ref.fval};
  auto steps = StepsizeSchedule::constant(0.2 / f.L());
  auto sched = PermutationSchedule::rr(RngStream(5, "rr"));
  MetricTrace t = run_shuffled(f, sched, steps, 200, Vec::Zero(3), &tr);
  std::vector<double> tail;
  for (size_t k = t.rows.size() - 10; k < t.rows.size(); ++k)
    tail.push_back(t.rows[k].dist_sq);
  const double mean = std::accumulate(tail.begin(), tail.end(), 0.0) / 10.0;
  double var = 0.0;
  for (double v : tail) var += (v - mean) * (v - mean);
  var /= 10.0;
  CHECK(mean > 0.0);
  CHECK(var < 0.1 * mean);
}

TEST_CASE("proximal epoch with a zero regularizer is bitwise plain reshuffling") {
  RngStream rng(6, "proxzero");
  FiniteSumObjective f = strongly_convex_suite(5, 3, rng);
  auto steps = StepsizeSchedule::constant(0.04);
  auto s1 = PermutationSchedule::rr(RngStream(8, "p"));
  auto s2 = PermutationSchedule::rr(RngStream(8, "p"));
  MetricTrace plain = run_shuffled(f, s1, steps, 15, Vec::Zero(3));
  MetricTrace prox = run_prox_rr(f, ProxTerm::zero(), s2, steps, 15, Vec::Zero(3));
  REQUIRE(plain.rows.size() == prox.rows.size());
  CHECK((plain.final_iterate - prox.final_iterate).norm() == 0.0);
  CHECK(plain.rows.back().proxes == 0);
  CHECK(prox.rows.back().proxes == 0);
}

TEST_CASE("end-of-epoch prox equals the aggregated step on linear components") {
  // two linear losses and a quadratic regularizer: after one epoch the
  // end-of-epoch prox reproduces prox_{2 gamma psi}(x0 - 2 gamma grad f(x0))
  // exactly, while per-iteration proxing lands somewhere else
  RngStream rng(7, "example");
  const int d = 4;
  Vec c1 = rv(d, rng), c2 = rv(d, rng);
  FiniteSumObjective f = make_linear_components({c1, c2});
  ProxTerm psi = ProxTerm::sqnorm(1.0);
  const double gamma = 0.1;
  Vec x0 = rv(d, rng);

  auto sched = PermutationSchedule::ig();  // fixed order (0, 1)
  auto steps = StepsizeSchedule::constant(gamma);
  MetricTrace t = run_prox_rr(f, psi, sched, steps, 1, x0);
  Vec grad_f = 0.5 * (c1 + c2);
  Vec closed = psi.prox(2.0 * gamma, x0 - 2.0 * gamma * grad_f);
  CHECK((t.final_iterate - closed).lpNorm<Eigen::Infinity>() <= 1e-14);

  // the per-iteration construction differs
  Vec tilde = psi.prox(gamma, x0 - gamma * c1);
  tilde = psi.prox(gamma, tilde - gamma * c2);
  CHECK((tilde - closed).norm() > 1e-6);
}

TEST_CASE("one prox call per epoch") {
  RngStream rng(9, "count");
  FiniteSumObjective f = strongly_convex_suite(4, 2, rng);
  auto sched = PermutationSchedule::rr(RngStream(10, "p"));
  auto steps = StepsizeSchedule::constant(0.05);
  MetricTrace t = run_prox_rr(f, ProxTerm::l1(0.01), sched, steps, 9, Vec::Zero(2));
  CHECK(t.rows.back().proxes == 9);
  CHECK(t.rows.back().grads == 9 * 4);
}

TEST_CASE("limit points") {
  RngStream rng(11, "limits");
  const int n = 4, d = 3;
  FiniteSumObjective f = strongly_convex_suite(n, d, rng);
  Reference ref = reference_solution(f, ProxTerm::zero(), 1e-13);
  const double gamma = 0.08;
  std::vector<int> order = {2, 0, 3, 1};
  auto pts = limit_points(f, ref.x, gamma, order);
  REQUIRE(pts.size() == static_cast<size_t>(n) + 1);
  CHECK((pts[0] - ref.x).norm() == 0.0);
  // telescoping: x*_n = x* - gamma * n * grad f(x*)
  Vec expected = ref.x - gamma * static_cast<double>(n) * f.component_mean_grad(ref.x);
  CHECK((pts[static_cast<size_t>(n)] - expected).norm() <= 1e-12);

  // all-zero component gradients: every limit point is x*
  Vec c = rv(2, rng);
  FiniteSumObjective interp = make_component_quadratics({1.0, 2.0}, {c, c});
  auto fixed = limit_points(interp, c, 0.5, {0, 1});
  for (const auto& p : fixed) CHECK((p - c).norm() == 0.0);

  // one-term prefix by hand: n = 2 linear components
  Vec g1 = scalar(1.0), g2 = scalar(-3.0);
  FiniteSumObjective lin = make_linear_components({g1, g2});
  auto lp = limit_points(lin, scalar(2.0), 0.5, {0, 1});
  CHECK(lp[1][0] == doctest::Approx(2.0 - 0.5 * 1.0).epsilon(1e-15));
}

TEST_CASE("shuffling variance: zero for identical components at the optimum") {
  RngStream rng(13, "var0");
  Vec c = rv(2, rng);
  FiniteSumObjective f = make_component_quadratics({1.0, 1.0, 1.0}, {c, c, c});
  RngStream sampler(14, "s");
  CHECK(shuffling_variance(f, c, 0.1, 10, sampler) == doctest::Approx(0.0));
  CHECK(shuffling_variance(f, c, 0.1, 10, sampler) >= 0.0);
}

TEST_CASE("shuffling variance matches an independent enumeration oracle") {
  RngStream rng(15, "var");
  const int n = 4, d = 2;
  FiniteSumObjective f = strongly_convex_suite(n, d, rng);
  Reference ref = reference_solution(f, ProxTerm::zero(), 1e-13);
  const double gamma = 0.07;
  RngStream sampler(16, "s");
  const double lib = shuffling_variance(f, ref.x, gamma, 1, sampler);

  // direct evaluation of the defining formula over all n! permutations
  std::vector<int> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<double> acc(static_cast<size_t>(n), 0.0);
  long count = 0;
  do {
    for (int i = 0; i < n; ++i) {
      Vec xi = ref.x;
      for (int j = 0; j < i; ++j)
        xi -= gamma * f.grad_i(pi[static_cast<size_t>(j)], ref.x);
      acc[static_cast<size_t>(i)] +=
          f.bregman_i(pi[static_cast<size_t>(i)], xi, ref.x);
    }
    ++count;
  } while (std::next_permutation(pi.begin(), pi.end()));
  double oracle = 0.0;
  for (int i = 1; i < n; ++i)
    oracle = std::max(oracle, acc[static_cast<size_t>(i)] / count / gamma);
  CHECK(lib == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("shuffling radius includes the zeroth prefix and scales by gamma^-2") {
  RngStream rng(17, "rad");
  const int n = 3;
  FiniteSumObjective f = strongly_convex_suite(n, 2, rng);
  Reference ref = reference_solution(f, ProxTerm::zero(), 1e-13);
  RngStream sampler(18, "s");
  const double gamma = 0.05;
  const double rad = shuffling_radius(f, ProxTerm::zero(), ref.x, gamma, 1, sampler);
  CHECK(rad >= 0.0);

  std::vector<int> pi = {0, 1, 2};
  std::vector<double> acc(3, 0.0);
  long count = 0;
  do {
    for (int i = 0; i < n; ++i) {
      Vec xi = ref.x;
      for (int j = 0; j < i; ++j)
        xi -= gamma * f.grad_i(pi[static_cast<size_t>(j)], ref.x);
      acc[static_cast<size_t>(i)] += f.bregman_i(pi[static_cast<size_t>(i)], xi, ref.x);
    }
    ++count;
  } while (std::next_permutation(pi.begin(), pi.end()));
  double oracle = 0.0;
  for (int i = 0; i < n; ++i)
    oracle = std::max(oracle, acc[static_cast<size_t>(i)] / count / (gamma * gamma));
  CHECK(rad == doctest::Approx(oracle).epsilon(1e-12));

  // identical components at an interior optimum: radius 0
  Vec c = rv(2, rng);
  FiniteSumObjective interp = make_component_quadratics({1.0, 1.0}, {c, c});
  CHECK(shuffling_radius(interp, ProxTerm::zero(), c, gamma, 1, sampler) ==
        doctest::Approx(0.0));
}

TEST_CASE("shuffling variance respects the strongly convex sandwich") {
  RngStream rng(19, "sandwich");
  const int n = 5;
  FiniteSumObjective f = strongly_convex_suite(n, 3, rng, 0.4, 3.0);
  Reference ref = reference_solution(f, ProxTerm::zero(), 1e-13);
  const double s_star = sigma_star(f, ref.x);
  for (double gamma : {1.0 / f.L(), 1.0 / (10.0 * f.L())}) {
    RngStream sampler(20, "s");
    const double v = shuffling_variance(f, ref.x, gamma, 1, sampler);
    CHECK(v >= gamma * f.mu() * n / 8.0 * s_star - 1e-9);
    CHECK(v <= gamma * f.L() * n / 4.0 * s_star + 1e-9);
  }
}

TEST_CASE("without-replacement statistics") {
  RngStream rng(21, "wor");
  // m = n: the sample mean is the mean, zero variance
  std::vector<Vec> X;
  for (int i = 0; i < 5; ++i) X.push_back(rv(3, rng));
  CHECK(wor_stats(X, 5).var_of_sample_mean == 0.0);

  // two scalars +-1, single draw: variance 1 (enumerating both draws)
  std::vector<Vec> pm = {scalar(1.0), scalar(-1.0)};
  WorStats st = wor_stats(pm, 1);
  CHECK(st.mean[0] == 0.0);
  CHECK(st.var_of_sample_mean == doctest::Approx(1.0));

  // n = 1 hits the 0/0 convention
  CHECK(wor_stats({scalar(2.0)}, 1).var_of_sample_mean == 0.0);

  // Monte-Carlo agreement on a random n = 6 instance
  std::vector<Vec> Y;
  for (int i = 0; i < 6; ++i) Y.push_back(rv(2, rng, 2.0));
  const int m = 3;
  WorStats exact = wor_stats(Y, m);
  RngStream draws(22, "mc");
  const int trials = 100000;
  double acc = 0.0, acc2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto perm = draws.permutation(6);
    Vec mean = Vec::Zero(2);
    for (int i = 0; i < m; ++i) mean += Y[static_cast<size_t>(perm[static_cast<size_t>(i)])];
    mean /= m;
    const double v = (mean - exact.mean).squaredNorm();
    acc += v;
    acc2 += v * v;
  }
  const double mc = acc / trials;
  const double se = std::sqrt((acc2 / trials - mc * mc) / trials);
  CHECK(std::abs(mc - exact.var_of_sample_mean) <= 3.0 * se);
}

TEST_CASE("importance resampling") {
  RngStream rng(23, "importance");
  // equal smoothness: identity transformation
  {
    std::vector<Vec> c;
    for (int i = 0; i < 4; ++i) c.push_back(rv(2, rng));
    FiniteSumObjective f = make_component_quadratics({2.0, 2.0, 2.0, 2.0}, c);
    FiniteSumObjective g = importance_resample(f);
    CHECK(g.n() == f.n());
  }
  // L = (1, 3): L_bar = 2, copies (1, 2), N = 3 <= 4
  {
    std::vector<Vec> c = {rv(2, rng), rv(2, rng)};
    FiniteSumObjective f = make_component_quadratics({1.0, 3.0}, c);
    FiniteSumObjective g = importance_resample(f);
    CHECK(g.n() == 3);
    CHECK(g.L_i(0) == doctest::Approx(1.0));
    CHECK(g.L_i(1) == doctest::Approx(1.5));
    CHECK(g.L_i(2) == doctest::Approx(1.5));
    for (int t = 0; t < 5; ++t) {
      Vec x = rv(2, rng, 2.0);
      CHECK(std::abs(g.value(x) - f.value(x)) <=
            1e-12 * std::max(1.0, std::abs(f.value(x))));
      CHECK((g.grad(x) - f.grad(x)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("decreasing stepsize schedules") {
  // warmup then 1/k decay
  auto inv = StepsizeSchedule::inv_epoch(0.5, 10, 3.0);
  CHECK(inv.at(0) == 0.5);
  CHECK(inv.at(10) == 0.5);
  CHECK(inv.at(16) == doctest::Approx(0.5));
  CHECK(inv.at(30) == doctest::Approx(3.0 / 20.0));

  // two-phase proximal schedule: constant at 1/L_max for the first half
  const long T = 100;
  const double L = 4.0, mu = 0.5;
  const int n = 10;
  auto prox = StepsizeSchedule::prox_decreasing(T, L, mu, n);
  for (long k = 0; k <= 50; ++k) CHECK(prox.at(k) == doctest::Approx(1.0 / L));
  const double s = 7.0 * L / (4.0 * mu * n);
  CHECK(prox.at(51) == doctest::Approx(7.0 / (mu * n * (s + 1.0))));
  CHECK(prox.at(52) < prox.at(51));

  auto invlin = StepsizeSchedule::inverse_linear(0.5, 4.0);
  CHECK(invlin.at(0) == doctest::Approx(0.5));
  CHECK(invlin.at(8) == doctest::Approx(2.0 / 8.0));
}

TEST_CASE("per-iteration prox differs from the end-of-epoch placement") {
  RngStream rng(25, "placement");
  FiniteSumObjective f = strongly_convex_suite(6, 3, rng);
  ProxTerm psi = ProxTerm::l1(0.05);
  auto steps = StepsizeSchedule::constant(0.05);
  auto s1 = PermutationSchedule::so(RngStream(26, "p"), 6);
  auto s2 = PermutationSchedule::so(RngStream(26, "p"), 6);
  MetricTrace epoch = run_prox_rr(f, psi, s1, steps, 8, Vec::Zero(3));
  MetricTrace iter = run_prox_rr_per_iteration(f, psi, s2, steps, 8, Vec::Zero(3));
  CHECK(epoch.rows.back().proxes == 8);
  CHECK(iter.rows.back().proxes == 8 * 6);
  CHECK((epoch.final_iterate - iter.final_iterate).norm() > 0.0);
}

TEST_CASE("shuffling radius obeys its closed-form upper bound") {
  // composite instance: the regularizer moves the optimum so the mean
  // gradient no longer vanishes there
  RngStream rng(27, "radbound");
  const int n = 5, d = 3;
  FiniteSumObjective f = strongly_convex_suite(n, d, rng, 0.5, 2.5);
  ProxTerm psi = ProxTerm::sqnorm(0.7);
  Reference ref = reference_solution(f, psi, 1e-13);
  const double L_max = f.L_max();
  const double grad_norm_sq = f.component_mean_grad(ref.x).squaredNorm();
  const double s_star = sigma_star(f, ref.x);
  const double bound =
      L_max / 2.0 * n * (n * grad_norm_sq + 0.5 * s_star);
  for (double gamma : {0.05, 0.2}) {
    RngStream sampler(28, "s");
    const double rad = shuffling_radius(f, psi, ref.x, gamma, 1, sampler);
    CHECK(rad <= bound + 1e-9);
  }
}

TEST_CASE("radius and variance coincide up to the stepsize factor without a regularizer") {
  RngStream rng(29, "radvar");
  const int n = 4;
  FiniteSumObjective f = strongly_convex_suite(n, 2, rng);
  Reference ref = reference_solution(f, ProxTerm::zero(), 1e-13);
  const double gamma = 0.06;
  RngStream s1(30, "a"), s2(30, "a");
  const double rad = shuffling_radius(f, ProxTerm::zero(), ref.x, gamma, 1, s1);
  const double var = shuffling_variance(f, ref.x, gamma, 1, s2);
  CHECK(rad == doctest::Approx(var / gamma).epsilon(1e-12));
}
