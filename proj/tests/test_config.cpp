#include <sstream>

#include "conefreq/config.hpp"
#include "conefreq/error.hpp"
#include "doctest.h"

using namespace conefreq;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is, "test.ini");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("empty input yields validated defaults") {
    const auto c = parse("");
    CHECK(c.dimension == 2);
    CHECK(c.opening == doctest::Approx(kPi / 2));
    CHECK(c.h == 0.02);
    CHECK(c.preset == "constant");
    CHECK(c.outer == "eigen:2");
    CHECK(c.points == 12);
    CHECK(c.lambdas == std::vector<double>{0.4, 0.2, 0.1});
    CHECK(c.stage == "all");
    CHECK(c.seed == 42);
    CHECK(c.effective_dnuova_tol() == 2e-2);
  }

  TEST_CASE("sections, comments and expressions") {
    const auto c = parse(R"(# comment
; another
[domain]
opening = 2*pi/3

[mesh]
h = 0.03
[coefficients]
preset = power_weight
delta = 0.5
[outer_data]
spec = mixed:2:1,3:0.2
[blowup]
lambda = 0.3, 0.15, 0.075
[checks]
dnuova_tol = 0.04
[run]
seed = 7
stage = freq
)");
    CHECK(c.opening == doctest::Approx(2 * kPi / 3));
    CHECK(c.h == 0.03);
    CHECK(c.preset == "power_weight");
    CHECK(c.params.at("delta") == 0.5);
    CHECK(c.outer == "mixed:2:1,3:0.2");
    CHECK(c.lambdas.size() == 3);
    CHECK(c.seed == 7);
    CHECK(c.stage == "freq");
    CHECK(c.effective_dnuova_tol() == 0.04);
    CHECK(c.key_lines.at("mesh.h") == 7);
  }

  TEST_CASE("weighted presets default to the looser identity tolerance") {
    CHECK(parse("[coefficients]\npreset = power_weight\n").effective_dnuova_tol() == 5e-2);
  }

  TEST_CASE("scalar grammar") {
    CHECK(parse_scalar("pi") == doctest::Approx(kPi));
    CHECK(parse_scalar(" pi/2 ") == doctest::Approx(kPi / 2));
    CHECK(parse_scalar("-pi/4") == doctest::Approx(-kPi / 4));
    CHECK(parse_scalar("1e-3") == 1e-3);
    CHECK(parse_scalar("3*pi/2/3") == doctest::Approx(kPi / 2));
    CHECK_THROWS_AS(parse_scalar("two"), std::invalid_argument);
    CHECK_THROWS_AS(parse_scalar("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_scalar(""), std::invalid_argument);
  }

  TEST_CASE("diagnostics carry the line and field") {
    CHECK(parse_error("[mesh]\nh = 0.02\nbogus = 1\n") == "test.ini:3: mesh.bogus: unknown key");
    const auto rlo = parse_error("[mesh]\nr_min = 0.01\n[r_grid]\nr_lo = 0.005\n");
    CHECK(rlo.find("test.ini:4: r_grid.r_lo") == 0);
    CHECK(rlo.find("below mesh.r_min") != std::string::npos);
    CHECK(parse_error("[mesh]\nh = abc\n").find("test.ini:2: mesh.h") == 0);
    CHECK(parse_error("[run]\nstage = everything\n").find("unknown stage") != std::string::npos);
    CHECK(parse_error("[coefficients]\npreset = nope\n").find("coefficients.preset") != std::string::npos);
    CHECK(parse_error("[outer_data]\nspec = eigen:0\n").find("outer_data.spec") != std::string::npos);
    CHECK(parse_error("[blowup]\nlambda = 0.1, 0.2, 0.4\n").find("decreasing") != std::string::npos);
    CHECK(parse_error("[domain]\ndimension = 3\n").find("domain.dimension") != std::string::npos);
    CHECK(parse_error("[mesh\nh = 1\n").find("test.ini:1") == 0);
    CHECK(parse_error("[run]\nthreads = -1\n").find("run.threads") != std::string::npos);
  }

  TEST_CASE("overrides revalidate") {
    auto c = parse("");
    set_config_value(c, "output", "dir", "/tmp/elsewhere");
    CHECK(c.out_dir == "/tmp/elsewhere");
    set_config_value(c, "run", "seed", "99");
    CHECK(c.seed == 99);
    CHECK_THROWS_AS(set_config_value(c, "r_grid", "r_lo", "1e-5"), Error);
    CHECK_THROWS_AS(set_config_value(c, "nosuch", "key", "1"), Error);
  }

  TEST_CASE("missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), Error);
  }

  TEST_CASE("stage list") {
    CHECK(stage_names().front() == "validate");
    CHECK(stage_names().back() == "all");
    CHECK(stage_names().size() == 8);
  }
}
