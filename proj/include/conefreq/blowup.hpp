#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "conefreq/coefficients.hpp"
#include "conefreq/solver.hpp"
#include "conefreq/spectral.hpp"

namespace conefreq {

struct RescaledField {
  SolutionField field;
  CoefficientSet coeffs;  // coefficients of the equation solved by u_lambda
  double lambda = 0.0;
  double H_lambda = 0.0;
};

// u_lambda(x) = u(lambda x) / sqrt(H(lambda)) on a fresh mesh with the same
// grading, by point evaluation of the P1 interpolant of u.
RescaledField rescale_solution(const SolutionField& field, const CoefficientSet& coeffs,
                               double lambda);

struct BlowupLevel {
  double lambda = 0.0;
  std::vector<double> theta;    // arc sample angles
  std::vector<double> profile;  // sqrt(A) u / sqrt(H) at those angles
  std::vector<double> coefficients;  // projections onto psi_1..psi_K
  double normalization_error = 0.0;  // |int A-weighted profile^2 - 1|
  double unweighted_mass = 0.0;      // int u_lambda^2 on the unit arc
  double subdominant_energy = 0.0;   // sum of squared coefficients other than k0
  double bessel_sum = 0.0;           // sum of all squared coefficients
};

struct BlowupResult {
  std::vector<BlowupLevel> levels;  // in lambda_list order (decreasing)
  int dominant_mode = 0;            // 1-based
  double dominant_sq = 0.0;         // squared coefficient of k0 at the smallest lambda
  double gamma_hat = 0.0;
  double gamma_k0 = 0.0;
  double gamma_check = 0.0;
  double normalization_error = 0.0;  // max over levels
  bool subdominant_nonincreasing = true;
  double harmonic_residual = 0.0;
};

// gamma_hat comes from estimate_gamma on the trace of the same field.
BlowupResult classify_blowup(const SolutionField& field, const CoefficientSet& coeffs,
                             std::span<const double> lambda_list, const SpectralBasis& basis,
                             double gamma_hat);

// Relative weak-Laplace residual of the P1 interpolant of |x|^gamma psi on
// the mesh: ||(K v)_free|| / ||(|K| |v|)_free||, free = not on the outer arc.
double harmonic_residual(const Mesh& mesh, const SpectralBasis& basis, int k, double gamma);

void write_blowup_csv(std::ostream& os, const BlowupResult& result);
void write_blowup_summary(std::ostream& os, const BlowupResult& result);

}  // namespace conefreq
