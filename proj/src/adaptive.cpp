#include "optlab/adaptive.hpp"

#include <chrono>
#include <cmath>

namespace optlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Growth ceiling for the adaptive quantities. It never binds outside the
// fully stalled regime (iterates fixed at machine precision, gradient
// differences exactly zero) and keeps the ergodic certificate sums finite
// there.
constexpr double kGrowthCap = 1e100;

// sqrt(c + theta) * gamma with the +inf convention on theta.
double growth_arm(double c, double theta, double gamma) {
  if (std::isinf(theta)) return kInf;
  return std::sqrt(c + theta) * gamma;
}

double ratio_arm(double num, double den) {
  if (den == 0.0) return kInf;
  return num / den;
}

Vec first_step(AdaptiveState& st, const Vec& x, const Vec& g, double gamma0) {
  if (gamma0 <= 0) throw ConfigError("adaptive methods need gamma_0 > 0");
  st.x_prev = x;
  st.grad_prev = g;
  st.gamma_prev = gamma0;
  st.theta_prev = kInf;
  st.k = 1;
  return x - gamma0 * g;
}

Vec generic_adgd_step(AdaptiveState& st, const Vec& x, const Vec& g,
                      double growth_c, double ratio_scale,
                      double ratio_denom_scale) {
  const double dx = (x - st.x_prev).norm();
  const double dg = (g - st.grad_prev).norm();
  double gamma = std::min(growth_arm(growth_c, st.theta_prev, st.gamma_prev),
                          ratio_arm(ratio_scale * dx, ratio_denom_scale * dg));
  if (std::isinf(gamma)) gamma = st.gamma_prev;  // both arms infinite
  gamma = std::min(gamma, kGrowthCap);
  const double theta = gamma / st.gamma_prev;
  Vec x_next = x - gamma * g;
  st.x_prev = x;
  st.grad_prev = g;
  st.gamma_prev = gamma;
  st.theta_prev = theta;
  st.k += 1;
  return x_next;
}

long now_ns(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

Vec adgd_step(AdaptiveState& st, const GradFn& grad, const Vec& x) {
  Vec g = grad(x);
  if (st.k == 0) return first_step(st, x, g, st.gamma_prev > 0 ? st.gamma_prev : 1e-10);
  return generic_adgd_step(st, x, g, 1.0, 1.0, 2.0);
}

Vec adgd_general_step(AdaptiveState& st, const GradFn& grad, const Vec& x,
                      double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("general update needs alpha in (0, 1)");
  const double beta = 1.0 / (2.0 * (1.0 - alpha));
  Vec g = grad(x);
  if (st.k == 0) return first_step(st, x, g, st.gamma_prev > 0 ? st.gamma_prev : 1e-10);
  return generic_adgd_step(st, x, g, 1.0 / beta, alpha, 1.0);
}

Vec adgd_smooth_step(AdaptiveState& st, const GradFn& grad, const Vec& x,
                     double L) {
  if (L <= 0) throw ConfigError("smooth variant needs L > 0");
  Vec g = grad(x);
  if (st.k == 0) return first_step(st, x, g, 1.0 / L);
  const double dx = (x - st.x_prev).norm();
  const double dg = (g - st.grad_prev).norm();
  const double L_k = dx > 0 ? dg / dx : 0.0;
  const double second =
      1.0 / (st.gamma_prev * L * L) + (L_k > 0 ? 1.0 / (2.0 * L_k) : kInf);
  double gamma = std::min(growth_arm(1.0, st.theta_prev, st.gamma_prev), second);
  if (std::isinf(gamma)) gamma = st.gamma_prev;
  gamma = std::min(gamma, kGrowthCap);
  const double theta = gamma / st.gamma_prev;
  Vec x_next = x - gamma * g;
  st.x_prev = x;
  st.grad_prev = g;
  st.gamma_prev = gamma;
  st.theta_prev = theta;
  st.k += 1;
  return x_next;
}

Vec adgd_accel_step(AdaptiveState& st, const GradFn& grad, const Vec& x) {
  Vec g = grad(x);
  if (st.k == 0) {
    Vec x1 = first_step(st, x, g, st.gamma_prev > 0 ? st.gamma_prev : 1e-10);
    st.mu_prev = 0.0;
    st.Theta_prev = kInf;
    st.y_prev = x1;
    return x1;
  }
  const double dx = (x - st.x_prev).norm();
  const double dg = (g - st.grad_prev).norm();
  double gamma = std::min(growth_arm(1.0, st.theta_prev / 2.0, st.gamma_prev),
                          ratio_arm(dx, 2.0 * dg));
  if (std::isinf(gamma)) gamma = st.gamma_prev;
  gamma = std::min(gamma, kGrowthCap);
  // mu mirrors gamma for the inverse map; the growth arm keeps mu finite
  // when the iterates stall (dx = 0).
  double mu = std::min(growth_arm(1.0, st.Theta_prev / 2.0, st.mu_prev),
                       ratio_arm(dg, 2.0 * dx));
  if (std::isinf(mu)) mu = st.mu_prev;
  mu = std::min(mu, kGrowthCap);
  const double root_inv_gamma = std::sqrt(1.0 / gamma);
  const double root_mu = std::sqrt(mu);
  const double beta = (root_inv_gamma - root_mu) / (root_inv_gamma + root_mu);

  Vec y_next = x - gamma * g;
  Vec x_next = y_next + beta * (y_next - st.y_prev);

  st.Theta_prev = st.mu_prev > 0 ? mu / st.mu_prev : kInf;
  st.theta_prev = gamma / st.gamma_prev;
  st.mu_prev = mu;
  st.gamma_prev = gamma;
  st.x_prev = x;
  st.grad_prev = g;
  st.y_prev = y_next;
  st.k += 1;
  return x_next;
}

Vec adsgd_step(AdaptiveState& st, const FiniteSumObjective& f, const Vec& x,
               double alpha, AdsgdOption option, RngStream& rng) {
  if (alpha <= 0) throw ConfigError("adaptive SGD needs alpha > 0");
  const int i = rng.index(f.n());
  Vec g = f.grad_i(i, x);
  if (st.k == 0) return first_step(st, x, g, st.gamma_prev > 0 ? st.gamma_prev : 1e-10);

  double L_k;
  const double dx = (x - st.x_prev).norm();
  if (option == AdsgdOption::biased) {
    L_k = dx > 0 ? (g - f.grad_i(i, st.x_prev)).norm() / dx : 0.0;
  } else {
    const int j = rng.index(f.n());
    L_k = dx > 0 ? (f.grad_i(j, x) - f.grad_i(j, st.x_prev)).norm() / dx : 0.0;
  }
  double gamma = std::min(growth_arm(1.0, st.theta_prev, st.gamma_prev),
                          L_k > 0 ? alpha / L_k : kInf);
  if (std::isinf(gamma)) gamma = st.gamma_prev;
  gamma = std::min(gamma, kGrowthCap);
  const double theta = gamma / st.gamma_prev;
  Vec x_next = x - gamma * g;
  st.x_prev = x;
  st.grad_prev = g;
  st.gamma_prev = gamma;
  st.theta_prev = theta;
  st.k += 1;
  return x_next;
}

Vec ergodic_average(const std::vector<AdaptiveIterate>& iterates) {
  if (iterates.empty()) throw ConfigError("ergodic average needs K >= 1");
  const size_t K = iterates.size();
  double S = iterates[0].gamma * iterates[0].theta;
  for (const auto& it : iterates) S += it.gamma;
  Vec num = Vec::Zero(iterates[0].x.size());
  for (size_t i = 0; i + 1 < K; ++i) {
    const double w = iterates[i].gamma * (1.0 + iterates[i].theta) -
                     iterates[i + 1].gamma * iterates[i + 1].theta;
    if (w < -1e-12 * std::max(1.0, iterates[i].gamma * (1.0 + iterates[i].theta)))
      throw NumericalError("negative ergodic weight; stepsize rule violated");
    num += w * iterates[i].x;
  }
  num += iterates[K - 1].gamma * (1.0 + iterates[K - 1].theta) * iterates[K - 1].x;
  return num / S;
}

namespace {

AdgdRun drive(const std::function<Vec(AdaptiveState&, const Vec&)>& step,
              const Vec& x0, double gamma0, long K, const ValueFn& value,
              const TraceRef* ref) {
  const auto t0 = std::chrono::steady_clock::now();
  AdgdRun run;
  AdaptiveState st;
  st.gamma_prev = gamma0;
  Vec x = x0;
  {
    TraceRow row;
    row.step = 0;
    if (ref) {
      row.f_gap = value ? value(x) - ref->f_star
                        : std::numeric_limits<double>::quiet_NaN();
      row.dist_sq = (x - ref->x_star).squaredNorm();
    } else {
      row.f_gap = std::numeric_limits<double>::quiet_NaN();
      row.dist_sq = std::numeric_limits<double>::quiet_NaN();
    }
    row.wall_ns = now_ns(t0);
    run.trace.add(row);
  }
  for (long k = 0; k < K; ++k) {
    Vec x_from = x;
    x = step(st, x_from);
    // The certificate pairs x_k with the stepsize taken *at* x_k. The
    // bootstrap step from x_0 with gamma_0 is not part of it.
    if (st.k >= 2)
      run.iterates.push_back({std::move(x_from), st.gamma_prev, st.theta_prev});
    TraceRow row;
    row.step = k + 1;
    row.grads = st.k;
    if (ref) {
      row.f_gap = value ? value(x) - ref->f_star
                        : std::numeric_limits<double>::quiet_NaN();
      row.dist_sq = (x - ref->x_star).squaredNorm();
    } else {
      row.f_gap = std::numeric_limits<double>::quiet_NaN();
      row.dist_sq = std::numeric_limits<double>::quiet_NaN();
    }
    row.wall_ns = now_ns(t0);
    run.trace.add(row);
  }
  run.x_final = x;
  return run;
}

}  // namespace

AdgdRun adgd_run(const GradFn& grad, const Vec& x0, double gamma0, long K,
                 const ValueFn& value, const TraceRef* ref) {
  return drive([&grad](AdaptiveState& st, const Vec& x) { return adgd_step(st, grad, x); },
               x0, gamma0, K, value, ref);
}

AdgdRun adgd_accel_run(const GradFn& grad, const Vec& x0, double gamma0, long K,
                       const ValueFn& value, const TraceRef* ref) {
  return drive([&grad](AdaptiveState& st, const Vec& x) { return adgd_accel_step(st, grad, x); },
               x0, gamma0, K, value, ref);
}

AdgdRun adsgd_run(const FiniteSumObjective& f, const Vec& x0, double gamma0,
                  double alpha, AdsgdOption option, long K, RngStream rng,
                  const TraceRef* ref) {
  ValueFn value = [&f](const Vec& x) { return f.value(x); };
  return drive(
      [&](AdaptiveState& st, const Vec& x) {
        return adsgd_step(st, f, x, alpha, option, rng);
      },
      x0, gamma0, K, value, ref);
}

}  // namespace optlab
