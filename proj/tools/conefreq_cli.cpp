// Command-line driver. Talks to the library only through the C API.
#include <conefreq/conefreq.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitError = 2;

int report(cf_status status) {
  if (status == CF_OK) return 0;
  if (status == CF_ERR_CHECKS_FAILED) {
    std::fprintf(stderr, "checks failed:\n%s", cf_last_error());
    return kExitChecksFailed;
  }
  std::fprintf(stderr, "error [%s]: %s\n", cf_status_name(status), cf_last_error());
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-function pipeline for elliptic problems in planar cones"};
  app.set_version_flag("--version", std::string(cf_version()));

  std::string config_path;
  std::string out_dir;
  std::string stage;
  std::string stage_flag;
  int threads = -1;
  long long seed = -1;
  std::vector<std::string> overrides;

  app.add_option("STAGE", stage, "validate, mesh, solve, freq, spectrum, blowup, ineq or all");
  app.add_option("-c,--config", config_path, "INI-style run configuration")->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "output directory (overrides CONEFREQ_OUT and [output] dir)");
  app.add_option("--stage", stage_flag, "same as the positional stage");
  app.add_option("-j,--threads", threads, "worker thread cap, 0 = hardware default")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "RNG seed for the inequality corpus")->check(CLI::NonNegativeNumber);
  app.add_option("--set", overrides, "extra override section.key=value (repeatable)");

  CLI11_PARSE(app, argc, argv);

  if (!stage.empty() && !stage_flag.empty() && stage != stage_flag) {
    std::fprintf(stderr, "error: positional stage '%s' conflicts with --stage '%s'\n", stage.c_str(),
                 stage_flag.c_str());
    return kExitError;
  }
  if (stage.empty()) stage = stage_flag;

  cf_config* cfg = nullptr;
  cf_status st = config_path.empty() ? cf_config_default(&cfg) : cf_config_load(config_path.c_str(), &cfg);
  if (st != CF_OK) return report(st);

  auto set = [&](const char* section, const char* key, const std::string& value) {
    if (st == CF_OK) st = cf_config_set(cfg, section, key, value.c_str());
  };

  for (const auto& o : overrides) {
    const auto dot = o.find('.');
    const auto eq = o.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
      std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n", o.c_str());
      cf_config_free(cfg);
      return kExitError;
    }
    set(o.substr(0, dot).c_str(), o.substr(dot + 1, eq - dot - 1).c_str(), o.substr(eq + 1));
  }
  if (const char* env = std::getenv("CONEFREQ_OUT"); env != nullptr && *env != '\0' && out_dir.empty())
    set("output", "dir", env);
  if (!out_dir.empty()) set("output", "dir", out_dir);
  if (!stage.empty()) set("run", "stage", stage);
  if (threads >= 0) set("run", "threads", std::to_string(threads));
  if (seed >= 0) set("run", "seed", std::to_string(seed));

  if (st == CF_OK) st = cf_pipeline_run(cfg);
  if (st == CF_OK || st == CF_ERR_CHECKS_FAILED)
    std::printf("report written to %s\n", cf_config_out_dir(cfg));
  const int code = report(st);
  cf_config_free(cfg);
  return code;
}
