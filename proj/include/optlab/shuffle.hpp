#ifndef OPTLAB_SHUFFLE_HPP
#define OPTLAB_SHUFFLE_HPP

#include <optional>
#include <vector>

#include "optlab/objective.hpp"
#include "optlab/prox.hpp"
#include "optlab/rng.hpp"
#include "optlab/trace.hpp"

namespace optlab {

// Epoch orderings over [n]: Random Reshuffling draws a fresh permutation
// every epoch, Shuffle-Once draws one permutation up front and reuses it,
// Incremental Gradient cycles through a fixed deterministic order
// (identity by default).
class PermutationSchedule {
 public:
  enum class Kind { RR, SO, IG };

  static PermutationSchedule rr(RngStream rng);
  static PermutationSchedule so(RngStream rng, int n);
  static PermutationSchedule ig(std::vector<int> order = {});

  std::vector<int> next(int n);
  Kind kind() const { return kind_; }

 private:
  Kind kind_ = Kind::IG;
  RngStream rng_{0};
  std::vector<int> base_;
};

class StepsizeSchedule {
 public:
  enum class Kind { constant, inv_epoch, prox_decreasing, inverse_linear };

  static StepsizeSchedule constant(double gamma);
  // min{gamma, c / max(1, k - k0)}: constant warmup, then O(1/k) decay.
  static StepsizeSchedule inv_epoch(double gamma, long k0, double c);
  // Two-phase epoch schedule: 1/L_max while T <= L_max/(2 mu n) or
  // k <= ceil(T/2), then 7 / (mu n (s + k - k0)) with s = 7 L_max / (4 mu n).
  static StepsizeSchedule prox_decreasing(long T, double L_max, double mu, int n);
  // gamma_k = 2 / (a k + b).
  static StepsizeSchedule inverse_linear(double a, double b);

  double at(long k) const;
  Kind kind() const { return kind_; }

 private:
  Kind kind_ = Kind::constant;
  double gamma_ = 0.0, c_ = 0.0, a_ = 0.0, b_ = 0.0;
  long k0_ = 0;
  double L_max_ = 0.0, mu_ = 0.0;
  long T_ = 0;
  int n_ = 0;
};

// One pass of component-gradient steps in the given order:
// x_{i+1} = x_i - gamma * grad f_{pi_i}(x_i). Optionally records the inner
// iterates x_1 ... x_n.
Vec epoch_pass(const FiniteSumObjective& f, Vec x, double gamma,
               const std::vector<int>& order,
               std::vector<Vec>* inner = nullptr);

// T epochs of RR / SO / IG. The trace holds one row per epoch (plus the
// initial point) with ||x - x*||^2 and f - f* when a reference is given.
MetricTrace run_shuffled(const FiniteSumObjective& f,
                         PermutationSchedule& schedule,
                         const StepsizeSchedule& steps, long T, const Vec& x0,
                         const TraceRef* ref = nullptr);

// Proximal RR / SO: the prox is applied once at the end of each epoch with
// parameter gamma_k * n.
MetricTrace run_prox_rr(const FiniteSumObjective& f, const ProxTerm& psi,
                        PermutationSchedule& schedule,
                        const StepsizeSchedule& steps, long T, const Vec& x0,
                        const TraceRef* ref = nullptr);

// Per-iteration baseline: the prox is applied after every component step
// with parameter gamma_k (n prox calls per epoch).
MetricTrace run_prox_rr_per_iteration(const FiniteSumObjective& f,
                                      const ProxTerm& psi,
                                      PermutationSchedule& schedule,
                                      const StepsizeSchedule& steps, long T,
                                      const Vec& x0,
                                      const TraceRef* ref = nullptr);

// Intermediate limit points of the inner loop for a fixed permutation:
// x*_i = x* - gamma * sum_{j<i} grad f_{pi_j}(x*), returned for
// i = 0 ... n (x*_0 = x*, x*_n = x* - gamma n grad-mean).
std::vector<Vec> limit_points(const FiniteSumObjective& f, const Vec& x_star,
                              double gamma, const std::vector<int>& order);

// max_{i in [1, n-1]} (1/gamma) E_pi[ D_{f_{pi_i}}(x*_i, x*) ]. Exact
// enumeration of all permutations when n! <= 720, otherwise a Monte-Carlo
// average over num_perms sampled permutations.
double shuffling_variance(const FiniteSumObjective& f, const Vec& x_star,
                          double gamma, long num_perms, RngStream& rng);

// max_{i in [0, n-1]} (1/gamma^2) E_pi[ D_{f_{pi_i}}(x*_i, x*) ]. The
// regularizer enters only through the location of x*.
double shuffling_radius(const FiniteSumObjective& f, const ProxTerm& psi,
                        const Vec& x_star, double gamma, long num_perms,
                        RngStream& rng);

struct WorStats {
  Vec mean;
  double var_of_sample_mean = 0.0;
};

// Mean of the vectors and the exact variance of the average of m draws
// sampled uniformly without replacement: (n - m) / (m (n - 1)) * sigma^2,
// with the 0/0 convention at n = 1.
WorStats wor_stats(const std::vector<Vec>& X, int m);

// Reformulates f with n_i = ceil(L_i / L_bar) copies of f_i / n_i so every
// component's smoothness is at most the mean L_bar. The total component
// count is at most 2n and the aggregate objective is unchanged.
FiniteSumObjective importance_resample(const FiniteSumObjective& f);

}  // namespace optlab

#endif
