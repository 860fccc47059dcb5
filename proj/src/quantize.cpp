#include "optlab/quantize.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

namespace optlab {

namespace {

long now_ns(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

double pnorm(const Vec& v, PNorm p) {
  switch (p) {
    case PNorm::one:
      return v.lpNorm<1>();
    case PNorm::two:
      return v.norm();
    case PNorm::inf:
      return v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

}  // namespace

int BlockSpec::total() const {
  int t = 0;
  for (int s : sizes) t += s;
  return t;
}

int BlockSpec::max_block() const {
  int m = 0;
  for (int s : sizes) m = std::max(m, s);
  return m;
}

void BlockSpec::validate(int d) const {
  for (int s : sizes)
    if (s < 1) throw ConfigError("block sizes must be >= 1");
  if (total() != d)
    throw ConfigError("block sizes must partition the dimension");
}

Vec QuantizedMessage::decode() const {
  Vec out(blocks.total());
  int offset = 0;
  for (size_t l = 0; l < blocks.sizes.size(); ++l) {
    const double nrm = block_norms[l];
    for (int j = 0; j < blocks.sizes[l]; ++j)
      out[offset + j] = nrm * static_cast<double>(ternary[static_cast<size_t>(offset + j)]);
    offset += blocks.sizes[l];
  }
  return out;
}

long QuantizedMessage::nnz() const {
  long c = 0;
  for (int8_t t : ternary) c += (t != 0);
  return c;
}

std::vector<uint8_t> QuantizedMessage::serialize() const {
  std::vector<uint8_t> bytes;
  int offset = 0;
  for (size_t l = 0; l < blocks.sizes.size(); ++l) {
    uint64_t raw;
    static_assert(sizeof(double) == sizeof(uint64_t));
    std::memcpy(&raw, &block_norms[l], 8);
    for (int b = 0; b < 8; ++b)
      bytes.push_back(static_cast<uint8_t>((raw >> (8 * b)) & 0xff));
    uint8_t acc = 0;
    int filled = 0;
    for (int j = 0; j < blocks.sizes[l]; ++j) {
      int8_t t = ternary[static_cast<size_t>(offset + j)];
      uint8_t code = t == 0 ? 0u : (t > 0 ? 1u : 2u);
      acc |= static_cast<uint8_t>(code << (2 * filled));
      if (++filled == 4) {
        bytes.push_back(acc);
        acc = 0;
        filled = 0;
      }
    }
    if (filled > 0) bytes.push_back(acc);
    offset += blocks.sizes[l];
  }
  return bytes;
}

QuantizedMessage QuantizedMessage::deserialize(const std::vector<uint8_t>& bytes,
                                               BlockSpec blocks, PNorm p) {
  QuantizedMessage msg;
  msg.blocks = std::move(blocks);
  msg.p = p;
  size_t pos = 0;
  for (int size : msg.blocks.sizes) {
    if (pos + 8 > bytes.size()) throw ConfigError("truncated quantized message");
    uint64_t raw = 0;
    for (int b = 0; b < 8; ++b)
      raw |= static_cast<uint64_t>(bytes[pos + static_cast<size_t>(b)]) << (8 * b);
    pos += 8;
    double nrm;
    std::memcpy(&nrm, &raw, 8);
    msg.block_norms.push_back(nrm);
    int consumed = 0;
    while (consumed < size) {
      if (pos >= bytes.size()) throw ConfigError("truncated quantized message");
      uint8_t acc = bytes[pos++];
      for (int s = 0; s < 4 && consumed < size; ++s, ++consumed) {
        uint8_t code = (acc >> (2 * s)) & 0x3;
        if (code == 3) throw ConfigError("invalid ternary code");
        msg.ternary.push_back(code == 0 ? 0 : (code == 1 ? 1 : -1));
      }
    }
  }
  msg.bit_estimate = static_cast<double>(bytes.size()) * 8.0;
  return msg;
}

double bit_cost(double nnz, int float_bits) {
  if (nnz <= 0) return static_cast<double>(float_bits);
  return std::sqrt(nnz) * (std::log(nnz) + std::log(2.0) + 1.0) +
         static_cast<double>(float_bits);
}

QuantizedMessage quant_block(const Vec& delta, PNorm p, const BlockSpec& blocks,
                             RngStream& rng) {
  blocks.validate(static_cast<int>(delta.size()));
  for (Eigen::Index i = 0; i < delta.size(); ++i)
    if (!std::isfinite(delta[i]))
      throw ConfigError("quantization input must be finite");
  QuantizedMessage msg;
  msg.blocks = blocks;
  msg.p = p;
  msg.ternary.resize(static_cast<size_t>(delta.size()), 0);
  int offset = 0;
  for (int size : blocks.sizes) {
    Vec block = delta.segment(offset, size);
    const double nrm = pnorm(block, p);
    msg.block_norms.push_back(nrm);
    long nnz = 0;
    if (nrm > 0.0) {
      // one uniform draw per coordinate in coordinate order
      for (int j = 0; j < size; ++j) {
        const double prob = std::abs(block[j]) / nrm;
        const bool keep = rng.uniform() < prob;
        if (keep) {
          msg.ternary[static_cast<size_t>(offset + j)] =
              block[j] > 0 ? int8_t{1} : int8_t{-1};
          ++nnz;
        }
      }
    }
    msg.bit_estimate += bit_cost(static_cast<double>(nnz));
    offset += size;
  }
  return msg;
}

QuantizedMessage quant_p(const Vec& delta, PNorm p, RngStream& rng) {
  return quant_block(delta, p, BlockSpec::single(static_cast<int>(delta.size())),
                     rng);
}

double psi(const Vec& delta, PNorm p, const BlockSpec& blocks) {
  blocks.validate(static_cast<int>(delta.size()));
  double s = 0.0;
  int offset = 0;
  for (int size : blocks.sizes) {
    Vec block = delta.segment(offset, size);
    s += block.lpNorm<1>() * pnorm(block, p) - block.squaredNorm();
    offset += size;
  }
  return s;
}

double alpha_p(PNorm p, int d) {
  if (d < 1) throw ConfigError("alpha_p needs d >= 1");
  switch (p) {
    case PNorm::one:
      return 1.0 / static_cast<double>(d);
    case PNorm::two:
      return 1.0 / std::sqrt(static_cast<double>(d));
    case PNorm::inf:
      return 2.0 / (1.0 + std::sqrt(static_cast<double>(d)));
  }
  throw ConfigError("supported quantization norms are p in {1, 2, inf}");
}

double expected_nnz(const Vec& delta, PNorm p) {
  const double nrm = pnorm(delta, p);
  if (nrm == 0.0) return 0.0;
  return delta.lpNorm<1>() / nrm;
}

MetricTrace diana_run(const FederatedProblem& fp, const DianaOptions& opts,
                      RngStream rng, const TraceRef* ref,
                      std::vector<Vec>* final_memory) {
  if (opts.beta < 0 || opts.beta >= 1)
    throw ConfigError("momentum needs 0 <= beta < 1");
  if (opts.alpha < 0) throw ConfigError("memory rate needs alpha >= 0");
  const auto t0 = std::chrono::steady_clock::now();
  const int M = fp.M;
  const int d = fp.global.dim();
  BlockSpec blocks = opts.blocks.sizes.empty() ? BlockSpec::single(d) : opts.blocks;
  blocks.validate(d);

  std::vector<RngStream> grad_streams, quant_streams;
  for (int m = 0; m < M; ++m) {
    grad_streams.push_back(rng.sub("grad/" + std::to_string(m)));
    quant_streams.push_back(rng.sub("quant/" + std::to_string(m)));
  }

  Vec x = Vec::Zero(d);
  std::vector<Vec> h(static_cast<size_t>(M), Vec::Zero(d));
  Vec h_mean = Vec::Zero(d);
  long grads = 0, proxes = 0;
  // momentum buffer warm start; without momentum it is never read
  Vec v = Vec::Zero(d);
  if (opts.beta > 0) {
    v = fp.global.grad(x);
    grads += fp.global.n();
  }
  double bits = 0.0;

  MetricTrace trace;
  auto record = [&](long step) {
    TraceRow r;
    r.step = step;
    r.grads = grads;
    r.proxes = proxes;
    r.bits = bits;
    if (ref) {
      r.f_gap = fp.global.value(x) + opts.psi_term.value(x) - ref->f_star;
      r.dist_sq = (x - ref->x_star).squaredNorm();
    } else {
      r.f_gap = std::numeric_limits<double>::quiet_NaN();
      r.dist_sq = std::numeric_limits<double>::quiet_NaN();
    }
    r.wall_ns = now_ns(t0);
    trace.add(r);
  };

  record(0);
  for (long k = 0; k < opts.rounds; ++k) {
    Vec delta_mean = Vec::Zero(d);
    for (int m = 0; m < M; ++m) {
      const auto& shard = fp.shards[static_cast<size_t>(m)];
      Vec g;
      if (opts.batch <= 0 || opts.batch >= shard.n()) {
        g = shard.grad(x);
        grads += shard.n();
      } else {
        g = Vec::Zero(d);
        for (int s = 0; s < opts.batch; ++s)
          g += shard.grad_i(grad_streams[static_cast<size_t>(m)].index(shard.n()), x);
        g /= static_cast<double>(opts.batch);
        grads += opts.batch;
      }
      Vec delta = g - h[static_cast<size_t>(m)];
      QuantizedMessage msg =
          quant_block(delta, opts.p, blocks, quant_streams[static_cast<size_t>(m)]);
      Vec delta_hat = msg.decode();
      bits += msg.bit_estimate;
      h[static_cast<size_t>(m)] += opts.alpha * delta_hat;
      delta_mean += delta_hat;
    }
    delta_mean /= static_cast<double>(M);
    Vec g_hat = h_mean + delta_mean;
    h_mean += opts.alpha * delta_mean;
    v = opts.beta * v + g_hat;
    const double gamma = opts.gamma.at(k);
    if (opts.psi_term.is_zero()) {
      x -= gamma * v;
    } else {
      x = opts.psi_term.prox(gamma, x - gamma * v);
      proxes += 1;
    }
    guard_iterate(x, "quantized distributed run");
    record(k + 1);
  }
  trace.final_iterate = x;
  if (final_memory) *final_memory = h;
  return trace;
}

MetricTrace terngrad_run(const FederatedProblem& fp, DianaOptions opts,
                         RngStream rng, const TraceRef* ref) {
  opts.alpha = 0.0;
  return diana_run(fp, opts, rng, ref);
}

DianaParams diana_default_params(double L, double mu, int M, PNorm p,
                                 const BlockSpec& blocks) {
  if (mu <= 0) throw ConfigError("theory parameters need mu > 0");
  if (M < 1) throw ConfigError("theory parameters need M >= 1");
  const double ap = alpha_p(p, blocks.max_block());
  DianaParams out;
  out.alpha = ap / 2.0;
  out.c = 4.0 * (1.0 - ap) / (static_cast<double>(M) * ap * ap);
  out.gamma = std::min(out.alpha / mu,
                       2.0 / ((L + mu) * (1.0 + out.c * out.alpha)));
  return out;
}

}  // namespace optlab
