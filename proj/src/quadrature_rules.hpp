#pragma once

#include <array>
#include <vector>

namespace conefreq::detail {

struct Rule1D {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

// Gauss-Legendre rule with n points mapped to [0, 1]; n in {2, 3, 4, 5, 6, 8}.
const Rule1D& gauss_legendre(int n);

struct TriangleRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;  // sum to 1
};

// Symmetric 7-point rule, exact for degree 5.
const TriangleRule& triangle_rule_degree5();

}  // namespace conefreq::detail
