#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "conefreq/coefficients.hpp"
#include "conefreq/solver.hpp"

namespace conefreq {

// Everything the frequency function needs at one radius, from a single
// ball quadrature.
struct RadiusQuantities {
  double r = 0.0;
  double H = 0.0;
  double D = 0.0;
  double E = 0.0;
  double boundary_forcing = 0.0;  // int_{B_r ∩ ∂Omega} f(x,u) u
  double volume_forcing = 0.0;    // int_{B_r ∩ Omega} g(x,u) u
  double flux = 0.0;              // int_{∂B_r ∩ Omega} A u du/dnu
  double weight_term = 0.0;       // (r^{2-n}/2) int_{∂B_r ∩ Omega} (grad A . nu) u^2
};

RadiusQuantities compute_radius(const SolutionField& field, const CoefficientSet& coeffs, double r);
double compute_H(const SolutionField& field, const CoefficientSet& coeffs, double r);
// Returns (D, E).
std::pair<double, double> compute_D_E(const SolutionField& field, const CoefficientSet& coeffs,
                                      double r);

struct TraceSample {
  double r = 0.0;
  double H = 0.0;
  double D = 0.0;
  double E = 0.0;
  double N = 0.0;
  double Hprime = 0.0;
  double dnuova_residual = 0.0;  // D - (r H'/2 - weight_term)
  double flux_residual = 0.0;    // flux - r^{n-2} D
  double weight_term = 0.0;
};

struct DoublingEntry {
  double r = 0.0;
  double R = 0.0;
  double ratio = 0.0;
};

struct FrequencyTrace {
  std::vector<TraceSample> samples;
  double gamma_hat = 0.0;
  double gamma_extrapolated = 0.0;
  double C1_fit = 0.0;
  std::vector<DoublingEntry> doubling;

  std::vector<double> radii() const;
  // Log-linear interpolation of H inside the grid span.
  double H_at(double r) const;
};

// `points` radii from lo to hi, geometric or uniform spacing.
std::vector<double> radius_grid(double lo, double hi, int points, bool geometric = true);

// H' comes from central differences of log H against log r (one-sided at
// the ends), so pure powers H = c r^{2 gamma} are differentiated exactly.
FrequencyTrace compute_trace(const SolutionField& field, const CoefficientSet& coeffs,
                             std::span<const double> r_grid);

struct GammaEstimate {
  double gamma_hat = 0.0;
  double extrapolated = 0.0;
};

// 1/r-weighted mean of N over the three smallest radii.
GammaEstimate estimate_gamma(const FrequencyTrace& trace);

struct MonotonicityFit {
  double C1 = 0.0;
  std::vector<double> remainder_integral;  // int_r^{r_max} max(s^delta, eps_s)/s ds
  std::vector<double> w;                   // corrected weight at C1
};

// Smallest C1 >= 0 on a 1e-3 lattice making
// w(r) = (2 + N(r)) exp(-C1 int_r^{r_max} max(s^delta, eps_s)/s ds)
// nondecreasing on the trace grid.
MonotonicityFit fit_monotonicity_constant(const FrequencyTrace& trace,
                                          const std::function<double(double)>& epsilon,
                                          double delta);

struct DoublingTable {
  std::vector<DoublingEntry> entries;
  double max_ratio = 0.0;
};

DoublingTable doubling_constants(const FrequencyTrace& trace, double R);

struct VanishingReport {
  std::vector<double> sup_ratio;      // sup over the three smallest radii of H / r^{2k}
  std::vector<double> growth;         // growth exponent of H / r^{2k} toward the vertex
  int certified_order = 0;            // largest k with H / r^{2k} bounded at the small end
  std::vector<bool> below_floor;      // sup_ratio < 1e-8
};

VanishingReport vanishing_order_test(const FrequencyTrace& trace, int k_max);

// max over the grid of E - 2 (C r^delta H + D); nonpositive when comparable.
double comparability_excess(const FrequencyTrace& trace, double C, double delta);

// min over the grid of N + 1.
double min_N_plus_one(const FrequencyTrace& trace);

void write_trace_csv(std::ostream& os, const FrequencyTrace& trace);
void write_trace_svg(std::ostream& os, const FrequencyTrace& trace);

}  // namespace conefreq
