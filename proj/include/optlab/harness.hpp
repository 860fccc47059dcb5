#ifndef OPTLAB_HARNESS_HPP
#define OPTLAB_HARNESS_HPP

#include <string>
#include <utility>
#include <vector>

#include "optlab/config.hpp"
#include "optlab/trace.hpp"

namespace optlab {

std::string version();

// Builds the configured problem, computes its reference solution at the
// configured tolerance, dispatches to the named solver and returns the
// trace. (config, seed) determines every byte of the result except the
// wall_ns column.
MetricTrace run(const RunConfig& cfg);

// Smoke configs bundled with the library, one per solver family.
std::vector<std::string> bundled_config_names();
std::string bundled_config(const std::string& name);

struct BenchResult {
  std::string name;
  double seconds = 0.0;
  bool ok = false;
  std::string error;
};

std::vector<BenchResult> bench_suite(const std::string& suite);

}  // namespace optlab

#endif
