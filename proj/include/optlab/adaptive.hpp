#ifndef OPTLAB_ADAPTIVE_HPP
#define OPTLAB_ADAPTIVE_HPP

#include <functional>
#include <limits>
#include <vector>

#include "optlab/objective.hpp"
#include "optlab/rng.hpp"
#include "optlab/trace.hpp"

namespace optlab {

using GradFn = std::function<Vec(const Vec&)>;
using ValueFn = std::function<double(const Vec&)>;

// State shared by the adaptive-stepsize family. theta_prev is the ratio
// gamma_k / gamma_{k-1} after each step; the 1/0 = +inf convention governs
// the first step and zero gradient differences.
struct AdaptiveState {
  Vec x_prev, grad_prev;
  double gamma_prev = 0.0;
  double theta_prev = std::numeric_limits<double>::infinity();
  // acceleration extras
  double mu_prev = 0.0;
  double Theta_prev = std::numeric_limits<double>::infinity();
  Vec y_prev;
  long k = 0;  // completed steps
};

// One recorded iterate of an adaptive run, enough to form the ergodic
// average of the convergence certificate.
struct AdaptiveIterate {
  Vec x;
  double gamma = 0.0;
  double theta = 0.0;
};

// Plain adaptive gradient descent:
//   gamma_k = min{ sqrt(1 + theta_{k-1}) gamma_{k-1},
//                  ||x_k - x_{k-1}|| / (2 ||grad_k - grad_{k-1}||) }.
// A zero gradient difference makes the second bound +inf; on the very
// first step both bounds are +inf and gamma_1 falls back to gamma_0.
Vec adgd_step(AdaptiveState& st, const GradFn& grad, const Vec& x);

// General two-parameter update: beta = 1 / (2 (1 - alpha)),
//   gamma_k = min{ sqrt(1/beta + theta_{k-1}) gamma_{k-1},
//                  alpha ||dx|| / ||dg|| },  alpha in (0, 1).
// alpha = 1/2 reproduces adgd_step exactly.
Vec adgd_general_step(AdaptiveState& st, const GradFn& grad, const Vec& x,
                      double alpha);

// Variant for known smoothness L (gamma_0 is forced to 1/L):
//   gamma_k = min{ sqrt(1 + theta) gamma_{k-1},
//                  1 / (gamma_{k-1} L^2) + 1 / (2 L_k) },
// with the local estimate L_k = ||dg|| / ||dx||.
Vec adgd_smooth_step(AdaptiveState& st, const GradFn& grad, const Vec& x,
                     double L);

// Accelerated heuristic: the stepsize uses the damped root
// sqrt(1 + theta/2); mu_k mirrors the gamma rule for the inverse map and
// beta_k = (sqrt(1/gamma_k) - sqrt(mu_k)) / (sqrt(1/gamma_k) + sqrt(mu_k)).
Vec adgd_accel_step(AdaptiveState& st, const GradFn& grad, const Vec& x);

enum class AdsgdOption { biased, unbiased };

// Stochastic variant: the local curvature L_k comes either from the same
// sample that drives the update (biased) or from an independent one
// (unbiased); gamma_k = min{ sqrt(1 + theta) gamma_{k-1}, alpha / L_k }.
Vec adsgd_step(AdaptiveState& st, const FiniteSumObjective& f, const Vec& x,
               double alpha, AdsgdOption option, RngStream& rng);

// Weighted ergodic average from the convergence certificate:
//   w_i = gamma_i (1 + theta_i) - gamma_{i+1} theta_{i+1},
//   S_K = sum_i gamma_i + gamma_1 theta_1,
//   xhat = [gamma_K (1 + theta_K) x_K + sum_{i<K} w_i x_i] / S_K.
// Throws on a negative weight, which the stepsize rule rules out.
Vec ergodic_average(const std::vector<AdaptiveIterate>& iterates);

struct AdgdRun {
  std::vector<AdaptiveIterate> iterates;  // x_1 ... x_K
  Vec x_final;
  MetricTrace trace;
};

// Convenience drivers recording the full iterate history.
AdgdRun adgd_run(const GradFn& grad, const Vec& x0, double gamma0, long K,
                 const ValueFn& value = nullptr, const TraceRef* ref = nullptr);
AdgdRun adgd_accel_run(const GradFn& grad, const Vec& x0, double gamma0, long K,
                       const ValueFn& value = nullptr,
                       const TraceRef* ref = nullptr);
AdgdRun adsgd_run(const FiniteSumObjective& f, const Vec& x0, double gamma0,
                  double alpha, AdsgdOption option, long K, RngStream rng,
                  const TraceRef* ref = nullptr);

}  // namespace optlab

#endif
