#include <cmath>
#include <sstream>

#include "conefreq/error.hpp"
#include "conefreq/solver.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace conefreq;

namespace {

double exact_quadratic(const Vec2& x) {
  // Harmonic extension of psi_2 = sqrt(4/pi) cos(2 theta) on the quarter sector.
  return std::sqrt(4.0 / kPi) * (x.x() * x.x() - x.y() * x.y());
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("outer data grammar") {
    CHECK(OuterData::parse("eigen:2").kind() == OuterData::Kind::Eigen);
    const auto mixed = OuterData::parse("mixed:2:1,3:0.2");
    CHECK(mixed.kind() == OuterData::Kind::Mixed);
    REQUIRE(mixed.modes().size() == 2);
    CHECK(mixed.modes()[1].first == 3);
    CHECK(mixed.modes()[1].second == doctest::Approx(0.2));
    CHECK(OuterData::parse("zero").kind() == OuterData::Kind::Zero);
    CHECK(OuterData::eigen(1)(0.3, kPi / 2) == doctest::Approx(1.0 / std::sqrt(kPi / 2)));
    for (const char* bad : {"eigen:0", "eigen:x", "mixed:", "wobble", "table:/nonexistent/file"})
      CHECK_THROWS_AS(OuterData::parse(bad), Error);
  }

  TEST_CASE("Dirichlet nodes sit on the outer arc") {
    const auto& m = *testing::quarter_mesh(0.04);
    const auto flags = dirichlet_nodes(m);
    int count = 0;
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      if (flags[i]) {
        ++count;
        CHECK(m.nodes[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
    CHECK(count > 10);
  }

  TEST_CASE("stiffness matrix is symmetric with constants in its kernel") {
    const auto& m = *testing::quarter_mesh(0.04);
    const auto K = assemble_stiffness(m, [](const Vec2& x) { return 1.0 + x.norm(); });
    const Eigen::SparseMatrix<double> Kt = K.transpose();
    CHECK((K - Kt).norm() <= 1e-12 * K.norm());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(K.rows());
    CHECK((K * ones).norm() <= 1e-10 * K.norm());
  }

  TEST_CASE("homogeneous harmonic is reproduced") {
    const auto& u = testing::quadratic_field();
    CHECK(u.log().converged);
    CHECK(u.log().algebraic_residual <= 1e-8);
    const auto& m = u.mesh();
    double err = 0.0;
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
      err = std::max(err, std::abs(u.values()[static_cast<Eigen::Index>(i)] - exact_quadratic(m.nodes[i])));
    CHECK(err <= 1e-3);
  }

  TEST_CASE("energy error decreases under refinement") {
    const auto& A1 = testing::constant_coeffs();
    double errs[2];
    int i = 0;
    for (double h : {0.04, 0.02}) {
      const auto mesh = testing::quarter_mesh(h);
      const auto u = solve(mesh, A1, OuterData::eigen(2));
      const auto ex = interpolate(mesh, exact_quadratic);
      errs[i++] = energy_norm(*mesh, u.values(), ex.values(), A1.A);
    }
    CHECK(errs[1] < errs[0]);
  }

  TEST_CASE("zero data gives the zero solution") {
    const auto u = solve(testing::quarter_mesh(0.04), testing::constant_coeffs(), OuterData::zero());
    CHECK(u.values().cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("Picard iteration converges with forcing") {
    for (const char* preset : {"linear_neumann", "linear_volume", "combined"}) {
      CAPTURE(preset);
      const auto cs = make_preset(preset);
      const auto u = solve(testing::quarter_mesh(0.04), cs, OuterData::eigen(2));
      CHECK(u.log().converged);
      CHECK(u.log().picard_steps >= 1);
      CHECK(u.log().final_residual <= 1e-10);
      CHECK(u.log().algebraic_residual <= 1e-8);
    }
  }

  TEST_CASE("Picard failure is reported") {
    const auto cs = make_preset("combined");
    CHECK_THROWS_AS(solve(testing::quarter_mesh(0.04), cs, OuterData::eigen(2), {1e-14, 1}), Error);
  }

  TEST_CASE("solution export round trip and logs") {
    const auto mesh = testing::quarter_mesh(0.04);
    const auto u = solve(mesh, testing::constant_coeffs(), OuterData::eigen(3));
    std::stringstream ss;
    write_solution(ss, u);
    const auto back = read_solution(ss, mesh);
    CHECK((back.values() - u.values()).cwiseAbs().maxCoeff() == 0.0);
    std::stringstream log;
    write_solve_log(log, u.log());
    CHECK(log.str().find("converged") != std::string::npos);
  }
}
