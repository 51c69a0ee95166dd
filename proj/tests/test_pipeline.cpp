#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "conefreq/config.hpp"
#include "conefreq/error.hpp"
#include "conefreq/pipeline.hpp"
#include "doctest.h"

using namespace conefreq;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("conefreq_test_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string summary_value(const PipelineResult& r, const std::string& key) {
  for (const auto& [k, v] : r.summary)
    if (k == key) return v;
  return {};
}

const CheckResult* find_check(const PipelineResult& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("full run on the analytic benchmark") {
    TempDir dir("full");
    RunConfig cfg;
    cfg.out_dir = dir.path.string();
    cfg.cap_alpha = kPi / 2;
    const auto r = run_pipeline(cfg);
    for (const auto& c : r.checks) {
      CAPTURE(c.name);
      CAPTURE(c.detail);
      CHECK(c.passed);
    }
    CHECK(r.status == 0);
    CHECK(r.failures().empty());
    CHECK(std::stod(summary_value(r, "freq.gamma_hat")) == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(summary_value(r, "blowup.k0") == "2");
    CHECK(std::stod(summary_value(r, "blowup.gamma_k0")) == doctest::Approx(2.0));
    CHECK_FALSE(summary_value(r, "blowup.gamma_discrepancy").empty());
    for (const char* f : {"summary.txt", "trace.csv", "trace.svg", "spectrum.csv", "cap_spectrum.csv", "blowup.csv",
                          "blowup_summary.txt", "inequalities.csv", "hypotheses.txt", "mesh.txt", "solution.txt",
                          "manifest.txt"})
      CHECK_MESSAGE(fs::exists(dir.path / f), f);
    const auto summary = slurp(dir.path / "summary.txt");
    CHECK(summary.rfind("status=pass\n", 0) == 0);
    CHECK(summary.find("check.freq.dnuova=pass") != std::string::npos);

    SUBCASE("partial rerun reuses the exported solution") {
      const auto before = fs::last_write_time(dir.path / "solution.txt");
      const auto trace_before = slurp(dir.path / "trace.csv");
      RunConfig again = cfg;
      again.stage = "freq";
      const auto r2 = run_pipeline(again);
      CHECK(r2.status == 0);
      CHECK(fs::last_write_time(dir.path / "solution.txt") == before);
      CHECK(slurp(dir.path / "trace.csv") == trace_before);
      CHECK(summary_value(r2, "freq.gamma_hat") == summary_value(r, "freq.gamma_hat"));
    }
  }

  TEST_CASE("log_weight flags ellipticity yet reports the frequency") {
    TempDir dir("logw");
    std::istringstream is("[coefficients]\npreset = log_weight\n[mesh]\nh = 0.04\n[run]\nstage = validate\n");
    auto cfg = parse_config(is, "logw.ini");
    cfg.out_dir = dir.path.string();
    auto r = run_pipeline(cfg);
    CHECK(r.status == 1);
    const auto* muck = find_check(r, "validate.MUCK");
    REQUIRE(muck != nullptr);
    CHECK_FALSE(muck->passed);
    bool listed = false;
    for (const auto& f : r.failures()) listed = listed || f.find("validate.MUCK") != std::string::npos;
    CHECK(listed);

    cfg.stage = "freq";
    r = run_pipeline(cfg);
    CHECK_FALSE(summary_value(r, "freq.C1_fit").empty());
    CHECK(find_check(r, "freq.monotonicity") != nullptr);
  }

  TEST_CASE("invalid config fails before any output") {
    TempDir dir("invalid");
    RunConfig cfg;
    cfg.out_dir = dir.path.string();
    cfg.r_lo = 1e-4;
    CHECK_THROWS_AS(run_pipeline(cfg), Error);
    CHECK_FALSE(fs::exists(dir.path));
  }

  TEST_CASE("stage subsets") {
    TempDir dir("spectrum");
    RunConfig cfg;
    cfg.out_dir = dir.path.string();
    cfg.stage = "spectrum";
    const auto r = run_pipeline(cfg);
    CHECK(r.status == 0);
    CHECK(fs::exists(dir.path / "spectrum.csv"));
    CHECK_FALSE(fs::exists(dir.path / "trace.csv"));
    CHECK(find_check(r, "spectrum.orthonormality") != nullptr);
  }
}
