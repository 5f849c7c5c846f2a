// spincm command-line front end.  Talks to the library exclusively through
// the C API in spincm/spincm.h.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spincm/spincm.h"

namespace {

// Exit codes: 0 ok, 1 property failure, 2 config error, 3 numeric failure.
int exit_code_for(spincm_status status) {
  switch (status) {
    case SPINCM_OK:
      return 0;
    case SPINCM_ERR_PROPERTY_FAILED:
      return 1;
    case SPINCM_ERR_CONFIG:
    case SPINCM_ERR_INVALID_ARGUMENT:
    case SPINCM_ERR_IO:
      return 2;
    default:
      return 3;
  }
}

struct ConfigHandle {
  spincm_config* cfg = spincm_config_new();
  ~ConfigHandle() { spincm_config_free(cfg); }
};

struct CommonOptions {
  std::string config_file;
  std::string point_file;
  std::string out_dir;
  std::string convention;
  std::string system;
  std::string orbit;
  int n = -1;
  int k = -1;
  double dt = -1.0;
  double t_final = -1.0;
  long seed = -1;
  int sample_every = -1;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "configuration file (key = value lines)");
    app->add_option("--point", point_file, "phase point JSON file");
    app->add_option("--out", out_dir, "output directory");
    app->add_option("--n", n, "matrix size n");
    app->add_option("--k", k, "flow generator index k");
    app->add_option("--dt", dt, "integrator step");
    app->add_option("--t-final", t_final, "final time");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--sample-every", sample_every, "record every this many steps");
    app->add_option("--convention", convention, "gamma convention: expq | exp2q");
    app->add_option("--system", system, "system: spin_cm | spin_rs | rational_cm");
    app->add_option("--orbit", orbit, "orbit: rank1 | general");
  }

  int apply(spincm_config* cfg) const {
    if (!config_file.empty()) {
      const spincm_status st = spincm_config_load_file(cfg, config_file.c_str());
      if (st != SPINCM_OK) {
        std::fprintf(stderr, "spincm: %s: %s\n", spincm_status_name(st), spincm_last_error());
        return exit_code_for(st);
      }
    }
    auto set = [cfg](const char* key, const std::string& value) {
      spincm_config_set(cfg, key, value.c_str());
    };
    if (!point_file.empty()) set("point_file", point_file);
    if (!out_dir.empty()) set("out", out_dir);
    if (!convention.empty()) set("convention", convention);
    if (!system.empty()) set("system", system);
    if (!orbit.empty()) set("orbit", orbit);
    if (n >= 0) set("n", std::to_string(n));
    if (k >= 0) set("k", std::to_string(k));
    if (dt > 0) set("dt", std::to_string(dt));
    if (t_final > 0) set("t_final", std::to_string(t_final));
    if (seed >= 0) set("seed", std::to_string(seed));
    if (sample_every > 0) set("sample_every", std::to_string(sample_every));
    // Environment override for the output directory.
    if (const char* env_out = std::getenv("SPINCM_OUT"); env_out != nullptr && env_out[0] != '\0')
      set("out", env_out);
    return 0;
  }
};

int report(spincm_status status, char* json) {
  if (json != nullptr) {
    std::printf("%s\n", json);
    spincm_string_free(json);
  }
  if (status != SPINCM_OK)
    std::fprintf(stderr, "spincm: %s: %s\n", spincm_status_name(status), spincm_last_error());
  return exit_code_for(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spin Calogero-Moser / rational spin Ruijsenaars toolkit"};
  app.require_subcommand(1);

  CommonOptions opts;

  CLI::App* simulate = app.add_subcommand("simulate", "integrate the reduced equations of motion");
  opts.attach(simulate);

  CLI::App* exact = app.add_subcommand("exact", "sample the exact linearized flow");
  opts.attach(exact);

  std::string suite;
  CLI::App* check = app.add_subcommand("check", "run a property suite");
  check->add_option("suite", suite, "brackets | integrability | duality | degeneration | angles")
      ->required();
  opts.attach(check);

  CLI::App* scan = app.add_subcommand("scan-degeneration", "small-group-element degeneration scan");
  opts.attach(scan);

  CLI11_PARSE(app, argc, argv);

  ConfigHandle handle;
  if (const int rc = opts.apply(handle.cfg); rc != 0) return rc;

  char* json = nullptr;
  if (simulate->parsed()) return report(spincm_run_simulate(handle.cfg, &json), json);
  if (exact->parsed()) return report(spincm_run_exact(handle.cfg, &json), json);
  if (check->parsed()) return report(spincm_run_check(handle.cfg, suite.c_str(), &json), json);
  if (scan->parsed()) return report(spincm_run_degeneration_scan(handle.cfg, &json), json);
  return 2;
}
