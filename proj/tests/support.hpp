#pragma once

#include <memory>

#include "conefreq/coefficients.hpp"
#include "conefreq/geometry.hpp"
#include "conefreq/solver.hpp"

namespace testing {

// Quarter-sector meshes are expensive enough to share between test cases.
inline std::shared_ptr<const conefreq::Mesh> quarter_mesh(double h) {
  static std::shared_ptr<const conefreq::Mesh> m02, m04;
  auto& slot = h == 0.02 ? m02 : m04;
  if (!slot) {
    slot = std::make_shared<const conefreq::Mesh>(
        conefreq::generate_mesh(conefreq::build_domain(2, conefreq::kPi / 2), h, 0.7, 1e-3));
  }
  return slot;
}

inline const conefreq::CoefficientSet& constant_coeffs() {
  static const auto c = conefreq::make_preset("constant");
  return c;
}

// Discrete harmonic with outer data psi_2 = sqrt(4/pi) cos(2 theta), i.e. a
// multiple of r^2 cos(2 theta), on the h = 0.02 quarter sector.
inline const conefreq::SolutionField& quadratic_field() {
  static const auto u = conefreq::solve(quarter_mesh(0.02), constant_coeffs(), conefreq::OuterData::eigen(2));
  return u;
}

}  // namespace testing
