#include <cmath>
#include <sstream>

#include "conefreq/error.hpp"
#include "conefreq/inequalities.hpp"
#include "conefreq/parallel.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace conefreq;

TEST_SUITE("inequalities") {
  TEST_CASE("closed-form margins for the constant field") {
    const auto mesh = testing::quarter_mesh(0.04);
    const auto one = interpolate(mesh, [](const Vec2&) { return 1.0; });
    const auto& A1 = testing::constant_coeffs();

    // lhs = c pi/4, rhs = pi/2 at r = 1, mu = 0.
    const auto p = poincare_margin(one, A1, 0.0, 1.0, 0.9);
    CHECK(p.lhs == doctest::Approx(0.9 * kPi / 4).epsilon(1e-10));
    CHECK(p.rhs == doctest::Approx(kPi / 2).epsilon(1e-10));
    CHECK(p.margin == doctest::Approx(0.8639379797).epsilon(1e-9));
    CHECK(p.name == "poincare");

    const auto l = poincare_lemma_margin(one, A1, 0.0, 1.0);
    CHECK(l.margin == doctest::Approx(kPi / 4).epsilon(1e-10));

    // Lateral mass 2 against int u^2/|x| = pi/2; the 1/|x| singularity keeps
    // the volume rule from being exact, hence the looser tolerance.
    const auto t = trace_margin(one, A1, 0.0, 1.0);
    CHECK(t.lhs == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(t.fitted_C == doctest::Approx(4.0 / kPi).epsilon(1e-3));
    CHECK(std::abs(t.margin) <= 1e-12);
    const auto t2 = trace_margin(one, A1, 0.0, 1.0, 2.0);
    CHECK(t2.margin == doctest::Approx(2.0 * kPi / 2 - 2.0).epsilon(1e-3));
  }

  TEST_CASE("zero field and fields vanishing on the sides") {
    const auto mesh = testing::quarter_mesh(0.04);
    const auto& A1 = testing::constant_coeffs();
    const auto zero = interpolate(mesh, [](const Vec2&) { return 0.0; });
    const auto p = poincare_margin(zero, A1, 0.5, 0.7, 0.5);
    CHECK(p.lhs == 0.0);
    CHECK(p.rhs == 0.0);
    CHECK(p.margin == 0.0);
    const auto xy = interpolate(mesh, [](const Vec2& x) { return x.x() * x.y(); });
    const auto t = trace_margin(xy, A1, 0.5, 0.6, 1.0);
    CHECK(std::abs(t.lhs) <= 1e-30);
    CHECK(t.margin == doctest::Approx(t.rhs));
    CHECK(t.margin > 0.0);
  }

  TEST_CASE("quadratic harmonic margins") {
    const auto& A1 = testing::constant_coeffs();
    const auto ex = [](const Vec2& x) { return x.x() * x.x() - x.y() * x.y(); };
    const auto coarse = interpolate(testing::quarter_mesh(0.04), ex);
    const auto fine = interpolate(testing::quarter_mesh(0.02), ex);
    CHECK(poincare_margin(coarse, A1, 1.0, 0.5, 0.4).margin > 0.0);
    const double c1 = trace_margin(coarse, A1, 0.5, 0.5).fitted_C;
    const double c2 = trace_margin(fine, A1, 0.5, 0.5).fitted_C;
    CHECK(std::isfinite(c1));
    CHECK(std::abs(c2 - c1) <= 0.2 * c1);
  }

  TEST_CASE("homogeneous fields scale like their degree") {
    // For u = x at radius r and mu = 0: int u^2 = r^4 pi/16, arc mass r^3 pi/4,
    // energy pi r^2/4.
    const auto mesh = testing::quarter_mesh(0.04);
    const auto& A1 = testing::constant_coeffs();
    const auto x = interpolate(mesh, [](const Vec2& p) { return p.x(); });
    const double r = 0.5, c = 0.5;
    const auto p = poincare_margin(x, A1, 0.0, r, c);
    CHECK(p.lhs == doctest::Approx(c * std::pow(r, 4) * kPi / 16).epsilon(5e-3));
    CHECK(p.rhs == doctest::Approx(r * std::pow(r, 3) * kPi / 4 + r * r * kPi * r * r / 4).epsilon(5e-3));
  }

  TEST_CASE("admissible parameters") {
    const auto mesh = testing::quarter_mesh(0.04);
    const auto one = interpolate(mesh, [](const Vec2&) { return 1.0; });
    const auto& A1 = testing::constant_coeffs();
    CHECK_THROWS_AS(poincare_margin(one, A1, 2.0, 0.5, 0.1), Error);
    CHECK_THROWS_AS(poincare_margin(one, A1, 0.0, 0.5, 1.0), Error);
    CHECK_THROWS_AS(poincare_margin(one, A1, 0.0, 0.5, 0.0), Error);
  }

  TEST_CASE("randomized suite") {
    const auto mesh = testing::quarter_mesh(0.04);
    const auto& A1 = testing::constant_coeffs();
    const SuiteGrid grid;
    const auto rep = randomized_suite(mesh, A1, 12, 7, grid);
    CHECK(rep.min_poincare_margin >= -1e-10);
    CHECK(rep.min_lemma_margin >= -1e-10);
    CHECK(rep.min_trace_margin >= -1e-10);
    CHECK(rep.calibrated_C >= 4.0 / kPi * (1 - 1e-8));
    CHECK(rep.max_fitted_C == doctest::Approx(rep.calibrated_C));
    CHECK(rep.max_random_fitted_C <= rep.calibrated_C);
    REQUIRE(rep.rows.size() == rep.field_index.size());
    const std::size_t per_field =
        grid.radii.size() * (2 * grid.mu.size() + grid.gamma_exp.size());
    CHECK(rep.rows.size() % per_field == 0);
    CHECK(rep.field_index.back() == 11);
    CHECK(rep.field_index.front() < 0);

    SUBCASE("same seed, any thread count, same rows") {
      set_max_threads(1);
      const auto again = randomized_suite(mesh, A1, 12, 7, grid);
      set_max_threads(0);
      std::stringstream a, b;
      write_suite_csv(a, rep);
      write_suite_csv(b, again);
      CHECK(a.str() == b.str());
    }
    SUBCASE("different seed, different random rows") {
      const auto other = randomized_suite(mesh, A1, 12, 8, grid);
      std::stringstream a, b;
      write_suite_csv(a, rep);
      write_suite_csv(b, other);
      CHECK(a.str() != b.str());
    }
    SUBCASE("CSV layout") {
      std::stringstream ss;
      write_suite_csv(ss, rep);
      std::string line;
      std::getline(ss, line);
      CHECK(line.rfind("#", 0) == 0);
      std::getline(ss, line);
      CHECK(line == "field_index,inequality,params,lhs,rhs,margin");
    }
  }

  TEST_CASE("weighted coefficients keep the margins") {
    const auto mesh = testing::quarter_mesh(0.04);
    const auto pw = make_preset("power_weight", {{"delta", 0.5}});
    const auto rep = randomized_suite(mesh, pw, 6, 3);
    CHECK(rep.min_poincare_margin >= -1e-10);
    CHECK(rep.min_lemma_margin >= -1e-10);
  }
}
