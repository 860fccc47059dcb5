// Command-line front end; talks to the lab exclusively through the C API.
//
//   optlab <family> run --config <file> [--seed N] [--out trace.csv]
//   optlab bench suite <name>
//   optlab check invariants
//
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optlab.h"

namespace {

int status_to_exit(optlab_status rc) {
  switch (rc) {
    case OPTLAB_OK:
      return 0;
    case OPTLAB_ERR_CONFIG:
      return 2;
    case OPTLAB_ERR_NUMERICAL:
      return 3;
    default:
      return 3;
  }
}

int fail_with(optlab_status rc, const char* context) {
  std::fprintf(stderr, "error: %s: %s\n", context, optlab_last_error());
  return status_to_exit(rc);
}

struct RunArgs {
  std::string family;
  std::string config_path;
  long long seed = -1;
  bool seed_set = false;
  std::string out_path;
};

int do_run(const RunArgs& args) {
  if (args.config_path.empty()) {
    std::fprintf(stderr, "error: missing --config <file>\n");
    return 2;
  }
  optlab_config* cfg = nullptr;
  optlab_status rc = optlab_config_load(args.config_path.c_str(), &cfg);
  if (rc != OPTLAB_OK) return fail_with(rc, "loading config");

  char family[64];
  rc = optlab_config_family(cfg, family, sizeof(family));
  if (rc != OPTLAB_OK) {
    optlab_config_free(cfg);
    return fail_with(rc, "reading config");
  }
  if (args.family != family) {
    std::fprintf(stderr,
                 "error: config solver.family is '%s' but the subcommand is "
                 "'%s'\n",
                 family, args.family.c_str());
    optlab_config_free(cfg);
    return 2;
  }

  if (args.seed_set) {
    rc = optlab_config_set_seed(cfg, static_cast<uint64_t>(args.seed));
  } else if (const char* env = std::getenv("OPTLAB_SEED")) {
    rc = optlab_config_set_seed(cfg, std::strtoull(env, nullptr, 10));
  }
  if (rc != OPTLAB_OK) {
    optlab_config_free(cfg);
    return fail_with(rc, "overriding seed");
  }

  optlab_trace* trace = nullptr;
  rc = optlab_run(cfg, &trace);
  if (rc != OPTLAB_OK) {
    optlab_config_free(cfg);
    return fail_with(rc, "running");
  }

  std::string out = args.out_path;
  if (out.empty()) {
    char buf[1024];
    if (optlab_config_out_path(cfg, buf, sizeof(buf)) == OPTLAB_OK) out = buf;
  }
  if (!out.empty()) {
    rc = optlab_trace_write_csv(trace, out.c_str());
    if (rc != OPTLAB_OK) {
      optlab_trace_free(trace);
      optlab_config_free(cfg);
      return fail_with(rc, "writing trace");
    }
    std::printf("wrote %ld rows to %s\n", optlab_trace_rows(trace), out.c_str());
  } else {
    const long rows = optlab_trace_rows(trace);
    double v[7];
    if (rows > 0 && optlab_trace_row(trace, rows - 1, v) == OPTLAB_OK) {
      std::printf("%ld rows; final f_gap %.6g, dist_sq %.6g\n", rows, v[4], v[5]);
    }
  }
  optlab_trace_free(trace);
  optlab_config_free(cfg);
  return 0;
}

void print_check(const char* name, int pass, const char* detail, void* user) {
  auto* failures = static_cast<int*>(user);
  if (!pass) ++*failures;
  if (detail && detail[0] != '\0')
    std::printf("[%s] %s (%s)\n", pass ? "PASS" : "FAIL", name, detail);
  else
    std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", name);
}

void print_bench(const char* name, int ok, double seconds, const char* error,
                 void* /*user*/) {
  if (ok)
    std::printf("%-22s %8.3f s\n", name, seconds);
  else
    std::printf("%-22s FAILED: %s\n", name, error);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-optimization laboratory (version " +
               std::string(optlab_version()) + ")"};
  app.require_subcommand(1);

  const std::vector<std::string> families = {"shuffle", "federated", "adaptive",
                                             "diana", "sdm", "splitting"};
  std::vector<RunArgs> run_args(families.size());
  bool run_requested = false;
  size_t run_index = 0;

  for (size_t i = 0; i < families.size(); ++i) {
    auto* fam = app.add_subcommand(families[i], "Run a " + families[i] + " solver");
    auto* run = fam->add_subcommand("run", "Execute a config");
    run_args[i].family = families[i];
    run->add_option("--config", run_args[i].config_path, "JSON run config");
    run->add_option("--seed", run_args[i].seed, "Seed override")
        ->each([&run_args, i](const std::string&) { run_args[i].seed_set = true; });
    run->add_option("--out", run_args[i].out_path, "CSV output path");
    run->callback([&run_requested, &run_index, i]() {
      run_requested = true;
      run_index = i;
    });
    fam->require_subcommand(1);
  }

  auto* bench = app.add_subcommand("bench", "Bundled benchmark suites");
  std::string suite_name;
  auto* suite = bench->add_subcommand("suite", "Run a named suite");
  suite->add_option("name", suite_name, "Suite name (e.g. smoke)")->required();
  bench->require_subcommand(1);

  auto* check = app.add_subcommand("check", "Verification commands");
  auto* invariants = check->add_subcommand("invariants", "Run the property suites");
  check->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  if (run_requested) return do_run(run_args[run_index]);

  if (suite->parsed()) {
    int failed = 0;
    optlab_status rc = optlab_bench_suite(suite_name.c_str(), print_bench,
                                          nullptr, &failed);
    if (rc != OPTLAB_OK) return fail_with(rc, "bench suite");
    return failed == 0 ? 0 : 3;
  }

  if (invariants->parsed()) {
    int failed = 0;
    optlab_status rc = optlab_check_invariants(print_check, &failed, nullptr);
    if (rc != OPTLAB_OK) return fail_with(rc, "check invariants");
    std::printf("%s\n", failed == 0 ? "all invariants hold" : "FAILURES detected");
    return failed == 0 ? 0 : 3;
  }

  return 2;
}
