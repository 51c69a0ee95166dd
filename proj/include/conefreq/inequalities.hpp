#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "conefreq/coefficients.hpp"
#include "conefreq/solver.hpp"

namespace conefreq {

// name is one of
//   poincare        c int A u^2/|x|^mu <= r^{1-mu} int_arc A u^2 + 2 r^{2-mu}/(n-mu) int A|grad u|^2
//   poincare_lemma  int ((n-mu)/2 A + grad A . x) u^2/|x|^mu
//                     <= r^{1-mu} int_arc A u^2 + 2/(n-mu) int A |grad u|^2 |x|^{2-mu}
//   trace           int_lat A u^2/|x|^g <= C (r^{1-g} int A|grad u|^2 + int A u^2/|x|^{g+1})
// All integrals are over B_r.
struct InequalityMargin {
  std::string name;
  double exponent = 0.0;  // mu or gamma_exp
  double r = 0.0;
  double c = 0.0;         // supplied constant (c for poincare, C for trace)
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;    // rhs - lhs
  double fitted_C = 0.0;  // trace only: lhs / (sum of rhs components)
  double rhs_energy = 0.0;
  double rhs_mass = 0.0;

  std::string params() const;
};

InequalityMargin poincare_margin(const SolutionField& field, const CoefficientSet& coeffs, double mu,
                                 double r, double c);
InequalityMargin poincare_lemma_margin(const SolutionField& field, const CoefficientSet& coeffs,
                                       double mu, double r);
// With C = NaN the fitted constant is used, which makes the margin zero.
InequalityMargin trace_margin(const SolutionField& field, const CoefficientSet& coeffs,
                              double gamma_exp, double r,
                              double C = std::numeric_limits<double>::quiet_NaN());

struct SuiteGrid {
  std::vector<double> mu{-1.0, 0.0, 1.0, 1.5};
  std::vector<double> gamma_exp{-0.5, 0.0, 0.5};
  std::vector<double> radii{0.25, 0.5, 1.0};
  double c_fraction = 0.9 * 0.99;  // c = c_fraction (n - mu)/2
};

struct SuiteReport {
  std::vector<int> field_index;  // -1.. for calibration fields, 0.. for random fields
  std::vector<InequalityMargin> rows;
  double calibrated_C = 0.0;       // max fitted trace constant over the calibration corpus
  double min_poincare_margin = 0.0;
  double min_lemma_margin = 0.0;
  double min_trace_margin = 0.0;   // random fields against calibrated_C
  double max_fitted_C = 0.0;       // over calibration and random fields
  double max_random_fitted_C = 0.0;
};

// Smooth calibration fields first (constant, linear and homogeneous
// harmonic modes), then `count` random P1 fields with nodal values i.i.d.
// uniform in [-1, 1]; field i draws from its own generator seeded by
// (seed, i), so the report does not depend on the thread count.
SuiteReport randomized_suite(std::shared_ptr<const Mesh> mesh, const CoefficientSet& coeffs, int count,
                             std::uint64_t seed, const SuiteGrid& grid = {});

void write_suite_csv(std::ostream& os, const SuiteReport& report);

}  // namespace conefreq
