#include "optlab/config.hpp"

#include <fstream>
#include <sstream>

namespace optlab {

RunConfig RunConfig::from_json_text(const std::string& text) {
  RunConfig cfg;
  try {
    cfg.doc_ = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.doc_.is_object()) throw ConfigError("config must be a JSON object");
  if (!cfg.doc_.contains("problem") || !cfg.doc_["problem"].is_object())
    throw ConfigError("config needs a 'problem' object");
  if (!cfg.doc_.contains("solver") || !cfg.doc_["solver"].is_object())
    throw ConfigError("config needs a 'solver' object");
  if (!cfg.doc_["solver"].contains("family"))
    throw ConfigError("config needs solver.family");
  if (!cfg.doc_.contains("seed") || !cfg.doc_["seed"].is_number())
    throw ConfigError("config needs a numeric 'seed'");
  if (!cfg.doc_.contains("budget") || !cfg.doc_["budget"].is_number_integer())
    throw ConfigError("config needs an integer 'budget'");
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string RunConfig::canonical() const {
  // nlohmann::json keeps object keys sorted, so dump() is canonical
  return doc_.dump();
}

std::string RunConfig::hash() const {
  const std::string s = canonical();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

uint64_t RunConfig::seed() const { return doc_["seed"].get<uint64_t>(); }

void RunConfig::set_seed(uint64_t seed) { doc_["seed"] = seed; }

std::string RunConfig::family() const {
  return doc_["solver"]["family"].get<std::string>();
}

std::string RunConfig::out_path() const {
  return doc_.value("out", std::string());
}

long RunConfig::budget() const { return doc_["budget"].get<long>(); }

double RunConfig::ref_tol() const { return doc_.value("ref_tol", 1e-10); }

const nlohmann::json& RunConfig::problem() const { return doc_["problem"]; }
const nlohmann::json& RunConfig::solver() const { return doc_["solver"]; }

}  // namespace optlab
