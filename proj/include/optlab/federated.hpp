#ifndef OPTLAB_FEDERATED_HPP
#define OPTLAB_FEDERATED_HPP

#include <vector>

#include "optlab/dataset.hpp"
#include "optlab/objective.hpp"
#include "optlab/prox.hpp"
#include "optlab/rng.hpp"
#include "optlab/shuffle.hpp"
#include "optlab/trace.hpp"

namespace optlab {

enum class PartitionMode { contiguous, shuffled, replicate };

// M workers with local finite sums f_m; the global objective is the mean
// of the shard objectives, materialized as a finite sum over all samples.
struct FederatedProblem {
  int M = 0;
  std::vector<FiniteSumObjective> shards;
  FiniteSumObjective global;
  ProxTerm reg;  // shared regularizer R (zero by default)
  PartitionMode mode = PartitionMode::contiguous;

  long total_samples() const;
};

// Builds a FederatedProblem from caller-supplied shard objectives.
FederatedProblem make_federated(std::vector<FiniteSumObjective> shards,
                                ProxTerm reg = ProxTerm::zero(),
                                PartitionMode mode = PartitionMode::contiguous);

// Splits a dataset across M workers and builds logistic shards:
// contiguous keeps index order (heterogeneous), shuffled permutes first,
// replicate gives every worker the full dataset (identical data).
FederatedProblem partition(const Dataset& ds, int M, PartitionMode mode,
                           RngStream& rng, double lambda2,
                           ProxTerm reg = ProxTerm::zero());

// Synchronization times: either a constant gap H or explicit increasing
// timesteps.
struct SyncSchedule {
  long H = 1;
  std::vector<long> explicit_steps;

  static SyncSchedule every(long H);
  static SyncSchedule at(std::vector<long> steps);
  bool syncs_at(long t) const;  // t = 1-based completed step count
};

// Local SGD: every worker runs independent with-replacement minibatch
// steps on its shard; at each sync point the local iterates are replaced
// by their average. The trace logs per step the averaged iterate metrics;
// bits column is unused. V^k (iterate deviation) is returned separately.
struct LocalSgdResult {
  MetricTrace trace;
  std::vector<double> deviation;  // V^k per step, 0 right after each sync
  Vec x_final;                    // final averaged iterate
};

LocalSgdResult local_sgd(const FederatedProblem& fp, const SyncSchedule& sync,
                         double gamma, long K, int batch, RngStream rng,
                         const TraceRef* ref = nullptr);

// Federated RR / SO: per epoch every worker runs one full reshuffled pass
// over its shard, the server averages and applies prox_{gamma (N/M) R}.
MetricTrace fed_rr(const FederatedProblem& fp, double gamma, long T,
                   RngStream rng, PermutationSchedule::Kind variant,
                   const TraceRef* ref = nullptr);

struct FedVariances {
  double sigma_opt_sq = 0.0;   // second moment of per-sample gradients, all data
  double sigma_dif_sq = 0.0;   // mean over workers of local second moments
  std::vector<double> sigma_m_sq;  // per-worker centered variances
};

// Exact finite-sum evaluations of the heterogeneity diagnostics at x*.
FedVariances fed_variances(const FederatedProblem& fp, const Vec& x_star);

}  // namespace optlab

#endif
