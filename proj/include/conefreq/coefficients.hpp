#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "conefreq/geometry.hpp"

namespace conefreq {

struct StructuralConstants {
  double c = 0.5;      // ellipticity: c <= A <= 1/c
  double C = 10.0;     // growth constant of the remainder bounds
  double delta = 1.0;  // growth exponent
};

// Weight A, Neumann forcing f(x, t) and volume forcing g(x, t) with their
// analytic derivatives. The equation is div(A grad u) = g(x, u) in the sector
// with A du/dnu = f(x, u) on the lateral boundary.
struct CoefficientSet {
  std::string preset_id;
  std::function<double(const Vec2&)> A;
  std::function<Vec2(const Vec2&)> gradA;
  std::function<double(const Vec2&, double)> f;
  std::function<double(const Vec2&, double)> ft;
  std::function<Vec2(const Vec2&, double)> gradx_f;
  std::function<double(const Vec2&, double)> F;
  std::function<double(const Vec2&, double)> g;
  StructuralConstants constants;
  // Hypotheses are only checked inside B_{validity_radius}.
  double validity_radius = 1.0;
  bool has_f = false;
  bool has_g = false;
};

using ParamTable = std::map<std::string, double>;

// Presets: constant, power_weight, log_weight, linear_neumann, linear_volume,
// combined. Recognized parameters: delta, a (weight amplitude), kappa,
// kappa_f, kappa_g, c, C.
CoefficientSet make_preset(const std::string& preset_id, const ParamTable& params = {});

const std::vector<std::string>& preset_names();

// Coefficients seen by u_lambda(x) = u(lambda x) / scale.
CoefficientSet rescale_coefficients(const CoefficientSet& base, double lambda, double scale);

struct HypothesisRecord {
  std::string name;
  bool satisfied = true;
  double worst_margin = 0.0;
  Vec2 worst_point = Vec2::Zero();
  // Smallest constant making the bound hold on the samples (ellipticity c
  // for MUCK; C for the growth bounds; unused for the epsilon-based checks).
  double fitted_constant = 0.0;
};

struct HypothesisReport {
  std::vector<HypothesisRecord> records;
  std::vector<double> r_grid;
  std::vector<double> epsilon;  // epsilon_r on r_grid, nondecreasing
  double r1 = 0.5;
  double L1_integral = 0.0;

  const HypothesisRecord& get(const std::string& name) const;
  bool all_satisfied() const;
  // Piecewise-linear interpolation of epsilon_r (clamped at the ends).
  double epsilon_at(double r) const;
};

// Hypothesis names in report order.
inline const std::vector<std::string>& hypothesis_names() {
  static const std::vector<std::string> names{"MUCK",   "STR:HY1", "TANGE", "STR:HY2",
                                              "STR:HY2DER", "g:grow", "L1"};
  return names;
}

HypothesisReport validate_hypotheses(const CoefficientSet& coeffs, const Mesh& mesh,
                                     std::span<const double> r_grid, double r1 = 0.5);

void write_hypothesis_report(std::ostream& os, const HypothesisReport& report);

}  // namespace conefreq
