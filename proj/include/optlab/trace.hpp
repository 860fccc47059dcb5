#ifndef OPTLAB_TRACE_HPP
#define OPTLAB_TRACE_HPP

#include <string>
#include <vector>

#include "optlab/types.hpp"

namespace optlab {

struct TraceRow {
  long step = 0;        // epoch, round or iteration counter
  long grads = 0;       // cumulative component-gradient evaluations
  long proxes = 0;      // cumulative proximal-operator evaluations
  double bits = 0.0;    // cumulative communicated bits (estimate)
  double f_gap = 0.0;   // f(x) - f*, NaN when no reference is attached
  double dist_sq = 0.0; // ||x - x*||^2, NaN when no reference is attached
  long wall_ns = 0;     // elapsed wall time; excluded from determinism
};

// Deterministic seeded execution record. Everything except wall_ns is a
// pure function of (config, seed).
struct MetricTrace {
  std::vector<TraceRow> rows;
  std::string config_hash;
  std::string version;
  std::vector<std::string> warnings;
  Vec final_iterate;

  void add(TraceRow r);
  const TraceRow& back() const { return rows.back(); }
};

// Optimum used to fill the f_gap / dist_sq columns of a trace.
struct TraceRef {
  Vec x_star;
  double f_star = 0.0;
};

// CSV with header `step,grads,proxes,bits,f_gap,dist_sq,wall_ns`, floats
// rendered with 17 significant digits, '.' decimal separator, LF endings.
void write_csv(const MetricTrace& trace, const std::string& path);
std::string to_csv(const MetricTrace& trace);
MetricTrace read_csv(const std::string& path);
MetricTrace parse_csv(const std::string& text);

}  // namespace optlab

#endif
