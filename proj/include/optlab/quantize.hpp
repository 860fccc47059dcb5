#ifndef OPTLAB_QUANTIZE_HPP
#define OPTLAB_QUANTIZE_HPP

#include <cstdint>
#include <vector>

#include "optlab/federated.hpp"
#include "optlab/prox.hpp"
#include "optlab/rng.hpp"
#include "optlab/shuffle.hpp"
#include "optlab/trace.hpp"

namespace optlab {

enum class PNorm { one, two, inf };

// Coordinate partition d_1 + ... + d_m = d, covering in order.
struct BlockSpec {
  std::vector<int> sizes;

  static BlockSpec single(int d) { return BlockSpec{{d}}; }
  static BlockSpec per_coordinate(int d) {
    return BlockSpec{std::vector<int>(static_cast<size_t>(d), 1)};
  }
  int total() const;
  int max_block() const;
  void validate(int d) const;
};

// Block-wise ternary compression of a vector: per block, the p-norm scalar
// and a sign/mask payload with t_j in {-1, 0, +1}. decode() returns
// norm_p * t per block.
struct QuantizedMessage {
  std::vector<double> block_norms;
  std::vector<int8_t> ternary;
  BlockSpec blocks;
  PNorm p = PNorm::inf;
  double bit_estimate = 0.0;

  Vec decode() const;
  long nnz() const;

  // Wire format: per block, 8-byte little-endian norm, then 2 bits per
  // coordinate (00 = 0, 01 = +1, 10 = -1) padded to a byte boundary.
  std::vector<uint8_t> serialize() const;
  static QuantizedMessage deserialize(const std::vector<uint8_t>& bytes,
                                      BlockSpec blocks, PNorm p);
};

// Ternary quantization: each coordinate keeps its sign with probability
// |delta_j| / ||delta||_p (one uniform draw per coordinate in order); the
// zero vector maps to the zero message.
QuantizedMessage quant_p(const Vec& delta, PNorm p, RngStream& rng);
QuantizedMessage quant_block(const Vec& delta, PNorm p, const BlockSpec& blocks,
                             RngStream& rng);

// Exact variance of the quantizer: Psi(x) = sum_l ( ||x(l)||_1 ||x(l)||_p
// - ||x(l)||^2 ) >= 0, the per-block moments formula.
double psi(const Vec& delta, PNorm p, const BlockSpec& blocks);

// inf_{x != 0} ||x||^2 / (||x||_1 ||x||_p): 1/d, 1/sqrt(d), 2/(1+sqrt(d))
// for p = 1, 2, inf.
double alpha_p(PNorm p, int d);

// E ||quant_p(delta)||_0 = ||delta||_1 / ||delta||_p (0 for delta = 0).
double expected_nnz(const Vec& delta, PNorm p);

// Bit estimate for a ternary vector with the given support size:
// sqrt(nnz) (ln nnz + ln 2 + 1) + b float bits for the norm scalar.
double bit_cost(double nnz, int float_bits = 32);

struct DianaOptions {
  PNorm p = PNorm::inf;
  BlockSpec blocks;        // empty -> one block over the full dimension
  double alpha = 0.0;      // memory learning rate
  StepsizeSchedule gamma = StepsizeSchedule::constant(1.0);
  double beta = 0.0;       // momentum
  ProxTerm psi_term;       // proximal regularizer at the server
  long rounds = 0;
  int batch = 0;           // per-worker minibatch; 0 = full local gradient
};

// Distributed method quantizing gradient *differences* against per-worker
// memory h_i; the server maintains h = mean h_i exactly and applies a
// proximal step on the momentum-averaged estimate. final_memory, when
// given, receives the per-worker h_i at termination.
MetricTrace diana_run(const FederatedProblem& fp, const DianaOptions& opts,
                      RngStream rng, const TraceRef* ref = nullptr,
                      std::vector<Vec>* final_memory = nullptr);

// DIANA with alpha = 0 and h_i^0 = 0: TernGrad for p = inf, 1-bit QSGD for
// p = 2.
MetricTrace terngrad_run(const FederatedProblem& fp, DianaOptions opts,
                         RngStream rng, const TraceRef* ref = nullptr);

struct DianaParams {
  double alpha = 0.0;
  double c = 0.0;
  double gamma = 0.0;
};

// Theory-prescribed strongly convex parameters: alpha = alpha_p / 2,
// c = 4 (1 - alpha_p) / (M alpha_p^2),
// gamma = min{ alpha / mu, 2 / ((L + mu)(1 + c alpha)) }.
DianaParams diana_default_params(double L, double mu, int M, PNorm p,
                                 const BlockSpec& blocks);

}  // namespace optlab

#endif
