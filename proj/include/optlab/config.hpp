#ifndef OPTLAB_CONFIG_HPP
#define OPTLAB_CONFIG_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "optlab/types.hpp"

namespace optlab {

// A run is fully described by a JSON document:
//   {
//     "problem": { "kind": ..., ... },
//     "solver":  { "family": ..., "method": ..., ... },
//     "seed": 1234,
//     "budget": 100,
//     "ref_tol": 1e-10,
//     "out": "trace.csv"        // optional
//   }
// Serialization is canonical (sorted keys), so configs hash stably and
// round-trip losslessly.
class RunConfig {
 public:
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);

  std::string canonical() const;  // sorted-key JSON dump
  std::string hash() const;       // 64-bit FNV-1a of the canonical form, hex

  uint64_t seed() const;
  void set_seed(uint64_t seed);

  std::string family() const;
  std::string out_path() const;  // empty if not set
  long budget() const;
  double ref_tol() const;

  const nlohmann::json& problem() const;
  const nlohmann::json& solver() const;
  const nlohmann::json& raw() const { return doc_; }

 private:
  nlohmann::json doc_;
};

}  // namespace optlab

#endif
