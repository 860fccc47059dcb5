#ifndef OPTLAB_SPLITTING_HPP
#define OPTLAB_SPLITTING_HPP

#include <functional>
#include <optional>
#include <vector>

#include "optlab/objective.hpp"
#include "optlab/prox.hpp"
#include "optlab/rng.hpp"
#include "optlab/trace.hpp"

namespace optlab {

// Pluggable stochastic gradient estimator. All variants are conditionally
// unbiased for grad f(x); svrg refreshes its reference every loop_len
// steps, lsvrg with probability p_refresh, saga keeps per-component
// gradients and their running average.
class GradEstimator {
 public:
  enum class Variant { full, sgd, svrg, saga, lsvrg };

  static GradEstimator full();
  static GradEstimator sgd(int batch, RngStream rng);
  static GradEstimator svrg(long loop_len, RngStream rng);  // 0 -> 2n
  static GradEstimator saga(RngStream rng);
  static GradEstimator lsvrg(double p_refresh, RngStream rng);  // 0 -> 1/n

  // Initializes references / tables against f at x0. Must be called once
  // before next(); saga fills its table with component gradients at x0.
  void bind(const FiniteSumObjective& f, const Vec& x0);
  // Replaces the saga table with gradients at the given point.
  void warm_start(const FiniteSumObjective& f, const Vec& point);

  Vec next(const FiniteSumObjective& f, const Vec& x);

  Variant variant() const { return variant_; }
  long grad_evals() const { return grad_evals_; }
  // || mean(table) - running average ||; zero for non-saga variants.
  double saga_table_drift() const;

  // Constants (gamma_max, omega, rho) from the per-estimator contracts,
  // used by the time-varying stepsize presets.
  struct Constants {
    double gamma_max = 0.0;
    double omega = 0.0;
    double rho = 0.0;
  };
  Constants constants(const FiniteSumObjective& f, bool strongly_convex) const;

 private:
  Variant variant_ = Variant::full;
  int batch_ = 1;
  long loop_len_ = 0;
  double p_refresh_ = 0.0;
  RngStream rng_{0};
  bool bound_ = false;
  long calls_ = 0;
  long grad_evals_ = 0;
  Vec ref_point_;
  Vec ref_grad_;
  std::vector<Vec> table_;
  Vec table_mean_;
};

// ------------------------------------------------------------------
// Stochastic decoupling of f + (1/m) sum_j g_j + psi: a psi-prox on a
// gradient-estimator step, then the prox of one sampled g_j with dual
// memory y_j; eta_j = gamma / (m p_j).

struct SdmState {
  Vec x;
  Vec z;
  std::vector<Vec> y;  // one dual vector per term
  Vec y_mean;
  long k = 0;
};

struct SdmOptions {
  double gamma = 0.0;                 // constant stepsize (ignored in time-varying mode)
  std::vector<double> probabilities;  // empty -> uniform
  // Time-varying mode gamma_k = 2 / (mu omega (a + k + 1)).
  bool time_varying = false;
  double mu = 0.0;
  double omega = 0.0;
  double a = 0.0;
};

SdmState sdm_init(const FiniteSumObjective& f, const std::vector<ProxTerm>& g,
                  const Vec& x0);

void sdm_step(const FiniteSumObjective& f, const ProxTerm& psi,
              const std::vector<ProxTerm>& g, SdmState& state,
              const SdmOptions& opts, GradEstimator& est, RngStream& rng);

MetricTrace sdm_run(const FiniteSumObjective& f, const ProxTerm& psi,
                    const std::vector<ProxTerm>& g, const Vec& x0,
                    const SdmOptions& opts, GradEstimator est, long K,
                    RngStream rng, const TraceRef* ref = nullptr);

// Kaczmarz reduction: f = ||x - x0||^2 / 2, psi = 0, gamma = 1/m, y0 = 0
// makes the iterates coincide with classical randomized projections onto
// the rows of W x = b under the same index sequence.
MetricTrace sdm_kaczmarz_mode(const Mat& W, const Vec& b, const Vec& x0, long K,
                              RngStream rng, const TraceRef* ref = nullptr);

// Memory-efficient variant for linear equality constraints A_j^T x = b_j:
// keeps only the aggregate dual vector; x+ = Pi_j(z),
// y <- y + (p_j / gamma)(z - x+). Trace-equal to the full-state run.
MetricTrace sdm_linear_run(const FiniteSumObjective& f, const Mat& A,
                           const Vec& b, GradEstimator est, double gamma,
                           const std::vector<double>& probabilities, long K,
                           RngStream rng, const TraceRef* ref = nullptr);

// ------------------------------------------------------------------
// Linear operators for the primal-dual solvers.

struct LinOp {
  int rows = 0, cols = 0;
  std::function<Vec(const Vec&)> apply;    // R^cols -> R^rows
  std::function<Vec(const Vec&)> adjoint;  // R^rows -> R^cols

  static LinOp dense(Mat A);
  static LinOp identity(int d);
  static LinOp zero(int rows, int cols);
  // Chain difference operator D in R^{(d-1) x d}, (Dx)_j = x_j - x_{j+1}.
  static LinOp chain_difference(int d);
};

// Power iteration estimate of ||L||, relative tolerance 1e-10; 0 for the
// zero operator.
double spectral_norm(const LinOp& L);

// ------------------------------------------------------------------
// Primal-dual Davis-Yin solvers for f + psi + H(Lx). H* proxes come from
// H via the Moreau identity. Stepsize conditions: gamma in (0, 2/nu) for
// deterministic gradients; gamma tau ||L||^2 < 1 (PDDY strict; PD3O and
// LiCoSGD admit equality).

struct PrimalDualOptions {
  double gamma = 0.0;
  double tau = 0.0;
  long K = 0;
  Vec x0;  // primal init (p^0); empty -> zeros
  Vec y0;  // dual init; empty -> zeros
};

MetricTrace pddy_run(const FiniteSumObjective& f, const ProxTerm& psi,
                     const ProxTerm& H, const LinOp& L,
                     const PrimalDualOptions& opts, GradEstimator est,
                     const TraceRef* ref = nullptr);

MetricTrace pd3o_run(const FiniteSumObjective& f, const ProxTerm& psi,
                     const ProxTerm& H, const LinOp& L,
                     const PrimalDualOptions& opts, GradEstimator est,
                     const TraceRef* ref = nullptr);

enum class CondatVuForm { I, II };

// Deterministic Condat-Vu (both forms); requires nu/2 < 1/tau - gamma ||L||^2
// where tau is the primal and gamma the dual stepsize.
MetricTrace condat_vu_run(const FiniteSumObjective& f, const ProxTerm& psi,
                          const ProxTerm& H, const LinOp& L,
                          const PrimalDualOptions& opts, CondatVuForm form,
                          const TraceRef* ref = nullptr);

// min f(x) s.t. Lx = b, fully split (no projections). y0 must lie in
// range(L) (zero by default).
MetricTrace licosgd_run(const FiniteSumObjective& f, const LinOp& L,
                        const Vec& b, const PrimalDualOptions& opts,
                        GradEstimator est, const TraceRef* ref = nullptr);

// Primal-only form maintaining a = L* y, using W = L* L and c = L* b.
MetricTrace prilicosgd_run(const FiniteSumObjective& f, const LinOp& W,
                           const Vec& c, const PrimalDualOptions& opts,
                           GradEstimator est, const TraceRef* ref = nullptr);

// Decentralized instantiation over a gossip (Laplacian) matrix: per-node
// updates touch only graph neighbors. Node i holds objective fs[i] and its
// own estimator. The trace's f_gap column reports the optimality gap of
// the node average and dist_sq its squared distance to x*; the consensus
// residual (1/M) sum ||x_i - xbar||^2 is returned separately.
struct DestroyResult {
  MetricTrace trace;
  std::vector<double> consensus;  // per recorded step
  Vec x_mean_final;
};

DestroyResult destroy_run(const std::vector<FiniteSumObjective>& fs,
                          const std::vector<std::pair<int, int>>& edges,
                          double gamma, double tau,
                          std::vector<GradEstimator> ests, long K,
                          const TraceRef* ref = nullptr);

// Graph Laplacian from an undirected edge list (0-based, no self loops).
Mat graph_laplacian(int n_nodes, const std::vector<std::pair<int, int>>& edges);

}  // namespace optlab

#endif
