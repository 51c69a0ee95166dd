#include <cmath>
#include <sstream>

#include "conefreq/blowup.hpp"
#include "conefreq/error.hpp"
#include "conefreq/frequency.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace conefreq;

TEST_SUITE("blowup") {
  const std::vector<double> lambdas{0.4, 0.2, 0.1};

  TEST_CASE("rescaled field is normalized") {
    const auto& u = testing::quadratic_field();
    const auto& A1 = testing::constant_coeffs();
    const auto rs = rescale_solution(u, A1, 0.2);
    CHECK(rs.lambda == 0.2);
    CHECK(rs.H_lambda == doctest::Approx(compute_H(u, A1, 0.2)));
    CHECK(compute_H(rs.field, rs.coeffs, 1.0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_THROWS_AS(rescale_solution(u, A1, 0.7), Error);
    CHECK_THROWS_AS(rescale_solution(u, A1, 1e-4), Error);
  }

  TEST_CASE("single eigenmode is classified") {
    const auto& u = testing::quadratic_field();
    const auto& A1 = testing::constant_coeffs();
    const auto basis = arc_spectrum(kPi / 2, 8);
    const double g = estimate_gamma(compute_trace(u, A1, radius_grid(0.05, 0.8, 12))).gamma_hat;
    const auto b = classify_blowup(u, A1, lambdas, basis, g);
    CHECK(b.dominant_mode == 2);
    CHECK(b.dominant_sq >= 0.999);
    CHECK(b.gamma_k0 == doctest::Approx(2.0));
    CHECK(b.gamma_check == doctest::Approx(std::abs(g - 2.0)).epsilon(1e-12));
    CHECK(b.normalization_error <= 1e-6);
    CHECK(b.harmonic_residual <= 1e-6);
    REQUIRE(b.levels.size() == 3);
    for (const auto& lv : b.levels) CHECK(lv.bessel_sum <= 1.0 + 1e-6);

    std::stringstream csv, summary;
    write_blowup_csv(csv, b);
    write_blowup_summary(summary, b);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "lambda,k,coefficient");
    CHECK(summary.str().find("k0=2") != std::string::npos);
  }

  TEST_CASE("mixed data: subdominant energy decays like lambda^4") {
    // u = r^2 psi_2 + 0.2 r^4 psi_3: the psi_3 share of the normalized
    // profile scales as lambda^2, so its squared coefficient as lambda^4.
    const auto mesh = testing::quarter_mesh(0.02);
    const auto& A1 = testing::constant_coeffs();
    const auto u = solve(mesh, A1, OuterData::parse("mixed:2:1,3:0.2"));
    const auto basis = arc_spectrum(kPi / 2, 8);
    const auto b = classify_blowup(u, A1, lambdas, basis, 2.0);
    CHECK(b.dominant_mode == 2);
    CHECK(b.subdominant_nonincreasing);
    for (std::size_t i = 1; i < b.levels.size(); ++i) {
      const double ratio = b.levels[i - 1].subdominant_energy / b.levels[i].subdominant_energy;
      CHECK(ratio == doctest::Approx(16.0).epsilon(0.1));
    }
  }

  TEST_CASE("tied leading coefficients are rejected") {
    // With c_3 = 1 / 0.1^2 both modes carry equal weight at lambda = 0.1.
    const auto mesh = testing::quarter_mesh(0.02);
    const auto& A1 = testing::constant_coeffs();
    const auto u = solve(mesh, A1, OuterData::parse("mixed:2:1,3:100"));
    const auto basis = arc_spectrum(kPi / 2, 8);
    CHECK_THROWS_AS(classify_blowup(u, A1, lambdas, basis, 3.0), Error);
  }

  TEST_CASE("classification arguments") {
    const auto& u = testing::quadratic_field();
    const auto& A1 = testing::constant_coeffs();
    const auto basis = arc_spectrum(kPi / 2, 8);
    const std::vector<double> two{0.4, 0.2}, rising{0.1, 0.2, 0.4};
    CHECK_THROWS_AS(classify_blowup(u, A1, two, basis, 2.0), Error);
    CHECK_THROWS_AS(classify_blowup(u, A1, rising, basis, 2.0), Error);
    CHECK_THROWS_AS(classify_blowup(u, A1, lambdas, arc_spectrum(kPi / 2, 4), 2.0), Error);
    CHECK_THROWS_AS(classify_blowup(u, A1, lambdas, arc_spectrum(kPi, 8), 2.0), Error);
  }

  TEST_CASE("harmonic residual separates true and false exponents") {
    const auto& m = *testing::quarter_mesh(0.04);
    const auto basis = arc_spectrum(kPi / 2, 8);
    const double good = harmonic_residual(m, basis, 3, 4.0);
    const double bad = harmonic_residual(m, basis, 3, 3.0);
    CHECK(good <= 1e-3);
    CHECK(bad > 10 * good);
  }
}
