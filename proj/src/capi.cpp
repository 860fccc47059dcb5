#include "optlab.h"

#include <cstring>
#include <string>

#include "optlab/checks.hpp"
#include "optlab/config.hpp"
#include "optlab/harness.hpp"
#include "optlab/trace.hpp"

struct optlab_config {
  optlab::RunConfig cfg;
};

struct optlab_trace {
  optlab::MetricTrace trace;
};

namespace {

thread_local std::string g_last_error = "no error";

optlab_status fail(optlab_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
optlab_status guarded(Fn&& fn) {
  try {
    fn();
    return OPTLAB_OK;
  } catch (const optlab::ConfigError& e) {
    return fail(OPTLAB_ERR_CONFIG, e.what());
  } catch (const optlab::NumericalError& e) {
    return fail(OPTLAB_ERR_NUMERICAL, e.what());
  } catch (const std::exception& e) {
    return fail(OPTLAB_ERR_INTERNAL, e.what());
  }
}

optlab_status copy_out(const std::string& s, char* buf, size_t buf_len) {
  if (buf == nullptr || buf_len == 0)
    return fail(OPTLAB_ERR_CONFIG, "output buffer is empty");
  if (s.size() + 1 > buf_len)
    return fail(OPTLAB_ERR_CONFIG, "output buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return OPTLAB_OK;
}

}  // namespace

extern "C" {

const char* optlab_version(void) {
  static const std::string v = optlab::version();
  return v.c_str();
}

const char* optlab_last_error(void) { return g_last_error.c_str(); }

optlab_status optlab_config_parse(const char* json_text, optlab_config** out) {
  if (!json_text || !out) return fail(OPTLAB_ERR_CONFIG, "null argument");
  return guarded([&] {
    auto* handle = new optlab_config{optlab::RunConfig::from_json_text(json_text)};
    *out = handle;
  });
}

optlab_status optlab_config_load(const char* path, optlab_config** out) {
  if (!path || !out) return fail(OPTLAB_ERR_CONFIG, "null argument");
  return guarded([&] {
    auto* handle = new optlab_config{optlab::RunConfig::from_file(path)};
    *out = handle;
  });
}

optlab_status optlab_config_set_seed(optlab_config* cfg, uint64_t seed) {
  if (!cfg) return fail(OPTLAB_ERR_CONFIG, "null config");
  return guarded([&] { cfg->cfg.set_seed(seed); });
}

optlab_status optlab_config_family(const optlab_config* cfg, char* buf,
                                   size_t buf_len) {
  if (!cfg) return fail(OPTLAB_ERR_CONFIG, "null config");
  optlab_status rc = OPTLAB_OK;
  optlab_status inner = guarded([&] { rc = copy_out(cfg->cfg.family(), buf, buf_len); });
  return inner != OPTLAB_OK ? inner : rc;
}

optlab_status optlab_config_out_path(const optlab_config* cfg, char* buf,
                                     size_t buf_len) {
  if (!cfg) return fail(OPTLAB_ERR_CONFIG, "null config");
  optlab_status rc = OPTLAB_OK;
  optlab_status inner = guarded([&] { rc = copy_out(cfg->cfg.out_path(), buf, buf_len); });
  return inner != OPTLAB_OK ? inner : rc;
}

void optlab_config_free(optlab_config* cfg) { delete cfg; }

optlab_status optlab_bundled_names(char* buf, size_t buf_len) {
  optlab_status rc = OPTLAB_OK;
  optlab_status inner = guarded([&] {
    std::string joined;
    for (const auto& name : optlab::bundled_config_names()) {
      if (!joined.empty()) joined += '\n';
      joined += name;
    }
    rc = copy_out(joined, buf, buf_len);
  });
  return inner != OPTLAB_OK ? inner : rc;
}

optlab_status optlab_bundled_config(const char* name, char* buf, size_t buf_len) {
  if (!name) return fail(OPTLAB_ERR_CONFIG, "null name");
  optlab_status rc = OPTLAB_OK;
  optlab_status inner =
      guarded([&] { rc = copy_out(optlab::bundled_config(name), buf, buf_len); });
  return inner != OPTLAB_OK ? inner : rc;
}

optlab_status optlab_run(const optlab_config* cfg, optlab_trace** out) {
  if (!cfg || !out) return fail(OPTLAB_ERR_CONFIG, "null argument");
  return guarded([&] {
    auto* handle = new optlab_trace{optlab::run(cfg->cfg)};
    *out = handle;
  });
}

long optlab_trace_rows(const optlab_trace* trace) {
  return trace ? static_cast<long>(trace->trace.rows.size()) : 0;
}

optlab_status optlab_trace_row(const optlab_trace* trace, long row,
                               double values[7]) {
  if (!trace || !values) return fail(OPTLAB_ERR_CONFIG, "null argument");
  if (row < 0 || row >= static_cast<long>(trace->trace.rows.size()))
    return fail(OPTLAB_ERR_CONFIG, "row index out of range");
  const optlab::TraceRow& r = trace->trace.rows[static_cast<size_t>(row)];
  values[0] = static_cast<double>(r.step);
  values[1] = static_cast<double>(r.grads);
  values[2] = static_cast<double>(r.proxes);
  values[3] = r.bits;
  values[4] = r.f_gap;
  values[5] = r.dist_sq;
  values[6] = static_cast<double>(r.wall_ns);
  return OPTLAB_OK;
}

optlab_status optlab_trace_write_csv(const optlab_trace* trace,
                                     const char* path) {
  if (!trace || !path) return fail(OPTLAB_ERR_CONFIG, "null argument");
  return guarded([&] { optlab::write_csv(trace->trace, path); });
}

optlab_status optlab_trace_read_csv(const char* path, optlab_trace** out) {
  if (!path || !out) return fail(OPTLAB_ERR_CONFIG, "null argument");
  return guarded([&] {
    auto* handle = new optlab_trace{optlab::read_csv(path)};
    *out = handle;
  });
}

void optlab_trace_free(optlab_trace* trace) { delete trace; }

optlab_status optlab_check_invariants(optlab_check_cb cb, void* user,
                                      int* n_failed) {
  return guarded([&] {
    int failed = 0;
    for (const auto& r : optlab::run_invariant_checks()) {
      if (!r.pass) ++failed;
      if (cb) cb(r.name.c_str(), r.pass ? 1 : 0, r.detail.c_str(), user);
    }
    if (n_failed) *n_failed = failed;
  });
}

optlab_status optlab_bench_suite(const char* suite, optlab_bench_cb cb,
                                 void* user, int* n_failed) {
  if (!suite) return fail(OPTLAB_ERR_CONFIG, "null suite name");
  return guarded([&] {
    int failed = 0;
    for (const auto& r : optlab::bench_suite(suite)) {
      if (!r.ok) ++failed;
      if (cb) cb(r.name.c_str(), r.ok ? 1 : 0, r.seconds, r.error.c_str(), user);
    }
    if (n_failed) *n_failed = failed;
  });
}

}  // extern "C"
