#include "optlab/federated.hpp"

#include "optlab/problems.hpp"

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

// Global objective (1/M) sum_m f_m as a finite sum over all samples.
// Component j of shard m enters with weight N / (M N_m) relative to the
// global 1/N normalization; for even shards the weight is 1.
FiniteSumObjective build_global(const std::vector<FiniteSumObjective>& shards) {
  if (shards.empty()) throw ConfigError("federated problem needs workers");
  const int d = shards[0].dim();
  const int M = static_cast<int>(shards.size());
  long N = 0;
  for (const auto& s : shards) N += s.n();

  auto owned = std::make_shared<std::vector<FiniteSumObjective>>(shards);
  std::vector<Component> comps;
  std::vector<double> L_i;
  double L = 0.0, mu = std::numeric_limits<double>::infinity();
  for (int m = 0; m < M; ++m) {
    const auto& s = shards[static_cast<size_t>(m)];
    if (s.dim() != d) throw ConfigError("shard dimension mismatch");
    const double w = static_cast<double>(N) /
                     (static_cast<double>(M) * static_cast<double>(s.n()));
    for (int j = 0; j < s.n(); ++j) {
      comps.push_back(Component{
          [owned, m, j, w](const Vec& x) {
            return w * (*owned)[static_cast<size_t>(m)].value_i(j, x);
          },
          [owned, m, j, w](const Vec& x) {
            return Vec(w * (*owned)[static_cast<size_t>(m)].grad_i(j, x));
          }});
      L_i.push_back(w * s.L_i(j));
    }
    L = std::max(L, s.L());
    mu = std::min(mu, s.mu());
  }
  // The mean of L-smooth functions is L-smooth; max over shards is a safe
  // aggregate bound (exact for replicate mode).
  return FiniteSumObjective(ObjectiveKind::custom, d, std::move(comps),
                            std::move(L_i), L, mu);
}

}  // namespace

long FederatedProblem::total_samples() const {
  long N = 0;
  for (const auto& s : shards) N += s.n();
  return N;
}

FederatedProblem make_federated(std::vector<FiniteSumObjective> shards,
                                ProxTerm reg, PartitionMode mode) {
  FederatedProblem fp;
  fp.M = static_cast<int>(shards.size());
  fp.global = build_global(shards);
  fp.shards = std::move(shards);
  fp.reg = std::move(reg);
  fp.mode = mode;
  return fp;
}

FederatedProblem partition(const Dataset& ds, int M, PartitionMode mode,
                           RngStream& rng, double lambda2, ProxTerm reg) {
  if (M < 1) throw ConfigError("partition needs M >= 1");
  if (M > ds.n_samples())
    throw ConfigError("more workers than samples: M = " + std::to_string(M) +
                      ", n = " + std::to_string(ds.n_samples()));
  std::vector<FiniteSumObjective> shards;
  if (mode == PartitionMode::replicate) {
    FiniteSumObjective full = make_logistic(ds, lambda2);
    for (int m = 0; m < M; ++m) shards.push_back(full);
  } else {
    Dataset src = ds;
    if (mode == PartitionMode::shuffled) {
      auto perm = rng.permutation(ds.n_samples());
      Dataset shuffled;
      shuffled.n_features = ds.n_features;
      for (int i : perm) {
        shuffled.rows.push_back(ds.rows[static_cast<size_t>(i)]);
        shuffled.labels.push_back(ds.labels[static_cast<size_t>(i)]);
      }
      src = std::move(shuffled);
    }
    const int n = src.n_samples();
    int begin = 0;
    for (int m = 0; m < M; ++m) {
      int size = n / M + (m < n % M ? 1 : 0);
      shards.push_back(make_logistic(src.slice(begin, begin + size), lambda2));
      begin += size;
    }
  }
  FederatedProblem fp = make_federated(std::move(shards), std::move(reg), mode);
  return fp;
}

SyncSchedule SyncSchedule::every(long H) {
  if (H < 1) throw ConfigError("sync gap must be >= 1");
  SyncSchedule s;
  s.H = H;
  return s;
}

SyncSchedule SyncSchedule::at(std::vector<long> steps) {
  for (size_t i = 1; i < steps.size(); ++i)
    if (steps[i] <= steps[i - 1])
      throw ConfigError("sync timesteps must be strictly increasing");
  SyncSchedule s;
  s.H = 0;
  s.explicit_steps = std::move(steps);
  return s;
}

bool SyncSchedule::syncs_at(long t) const {
  if (H > 0) return t % H == 0;
  return std::binary_search(explicit_steps.begin(), explicit_steps.end(), t);
}

LocalSgdResult local_sgd(const FederatedProblem& fp, const SyncSchedule& sync,
                         double gamma, long K, int batch, RngStream rng,
                         const TraceRef* ref) {
  if (gamma <= 0) throw ConfigError("local SGD needs gamma > 0");
  if (batch < 1) throw ConfigError("local SGD needs batch >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const int M = fp.M;
  const int d = fp.global.dim();

  std::vector<RngStream> streams;
  for (int m = 0; m < M; ++m)
    streams.push_back(rng.sub("worker/" + std::to_string(m)));

  std::vector<Vec> x(static_cast<size_t>(M), Vec::Zero(d));
  LocalSgdResult out;
  long grads = 0;

  auto mean_iterate = [&]() {
    Vec acc = Vec::Zero(d);
    for (int m = 0; m < M; ++m) acc += x[static_cast<size_t>(m)];
    return Vec(acc / static_cast<double>(M));
  };
  auto record = [&](long step, const Vec& xhat) {
    TraceRow r;
    r.step = step;
    r.grads = grads;
    if (ref) {
      r.f_gap = fp.global.value(xhat) - ref->f_star;
      r.dist_sq = (xhat - ref->x_star).squaredNorm();
    } else {
      r.f_gap = std::numeric_limits<double>::quiet_NaN();
      r.dist_sq = std::numeric_limits<double>::quiet_NaN();
    }
    r.wall_ns = now_ns(t0);
    out.trace.add(r);
    double v = 0.0;
    for (int m = 0; m < M; ++m)
      v += (x[static_cast<size_t>(m)] - xhat).squaredNorm();
    out.deviation.push_back(v / static_cast<double>(M));
  };

  record(0, mean_iterate());
  for (long t = 1; t <= K; ++t) {
    for (int m = 0; m < M; ++m) {
      const auto& shard = fp.shards[static_cast<size_t>(m)];
      Vec g = Vec::Zero(d);
      for (int s = 0; s < batch; ++s) {
        int i = streams[static_cast<size_t>(m)].index(shard.n());
        g += shard.grad_i(i, x[static_cast<size_t>(m)]);
      }
      g /= static_cast<double>(batch);
      x[static_cast<size_t>(m)] -= gamma * g;
      grads += batch;
    }
    if (sync.syncs_at(t)) {
      Vec xhat = mean_iterate();
      for (int m = 0; m < M; ++m) x[static_cast<size_t>(m)] = xhat;
    }
    Vec xhat = mean_iterate();
    guard_iterate(xhat, "local SGD");
    record(t, xhat);
  }
  out.x_final = mean_iterate();
  out.trace.final_iterate = out.x_final;
  return out;
}

MetricTrace fed_rr(const FederatedProblem& fp, double gamma, long T,
                   RngStream rng, PermutationSchedule::Kind variant,
                   const TraceRef* ref) {
  if (gamma <= 0) throw ConfigError("FedRR needs gamma > 0");
  if (variant == PermutationSchedule::Kind::IG)
    throw ConfigError("FedRR supports the RR and SO variants");
  const auto t0 = std::chrono::steady_clock::now();
  const int M = fp.M;
  const int d = fp.global.dim();
  const long N = fp.total_samples();

  MetricTrace trace;
  double L_max = 0.0;
  for (const auto& s : fp.shards) L_max = std::max(L_max, s.L_max());
  if (L_max > 0 && gamma > 1.0 / L_max)
    trace.warnings.push_back("stepsize exceeds 1/max L_i; convergence not advised");

  std::vector<PermutationSchedule> perms;
  for (int m = 0; m < M; ++m) {
    RngStream ws = rng.sub("worker/" + std::to_string(m));
    perms.push_back(variant == PermutationSchedule::Kind::RR
                        ? PermutationSchedule::rr(ws)
                        : PermutationSchedule::so(ws, fp.shards[static_cast<size_t>(m)].n()));
  }

  Vec x = Vec::Zero(d);
  long grads = 0, proxes = 0;
  auto record = [&](long step) {
    TraceRow r;
    r.step = step;
    r.grads = grads;
    r.proxes = proxes;
    if (ref) {
      r.f_gap = fp.global.value(x) + fp.reg.value(x) - ref->f_star;
      r.dist_sq = (x - ref->x_star).squaredNorm();
    } else {
      r.f_gap = std::numeric_limits<double>::quiet_NaN();
      r.dist_sq = std::numeric_limits<double>::quiet_NaN();
    }
    r.wall_ns = now_ns(t0);
    trace.add(r);
  };

  record(0);
  for (long k = 0; k < T; ++k) {
    Vec acc = Vec::Zero(d);
    for (int m = 0; m < M; ++m) {
      const auto& shard = fp.shards[static_cast<size_t>(m)];
      acc += epoch_pass(shard, x, gamma,
                        perms[static_cast<size_t>(m)].next(shard.n()));
      grads += shard.n();
    }
    x = acc / static_cast<double>(M);
    if (!fp.reg.is_zero()) {
      x = fp.reg.prox(gamma * static_cast<double>(N) / static_cast<double>(M), x);
      proxes += 1;
    }
    guard_iterate(x, "federated reshuffling");
    record(k + 1);
  }
  trace.final_iterate = x;
  return trace;
}

FedVariances fed_variances(const FederatedProblem& fp, const Vec& x_star) {
  FedVariances out;
  long N = 0;
  double total_second_moment = 0.0;
  for (const auto& shard : fp.shards) {
    Vec local_mean = shard.component_mean_grad(x_star);
    double second = 0.0, centered = 0.0;
    for (int j = 0; j < shard.n(); ++j) {
      Vec g = shard.grad_i(j, x_star);
      second += g.squaredNorm();
      centered += (g - local_mean).squaredNorm();
    }
    total_second_moment += second;
    N += shard.n();
    out.sigma_dif_sq += second / static_cast<double>(shard.n());
    out.sigma_m_sq.push_back(centered / static_cast<double>(shard.n()));
  }
  out.sigma_dif_sq /= static_cast<double>(fp.M);
  out.sigma_opt_sq = total_second_moment / static_cast<double>(N);
  return out;
}

}  // namespace optlab
