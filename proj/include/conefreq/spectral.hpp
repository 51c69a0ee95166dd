#pragma once

#include <iosfwd>
#include <vector>

namespace conefreq {

// Neumann eigenpairs of the Laplace-Beltrami operator on the cap, ordered by
// eigenvalue. Modes are 1-based: mode 1 is the constant.
struct SpectralBasis {
  int dimension = 2;
  double opening = 0.0;
  double cap_measure = 0.0;
  std::vector<double> eigenvalues;
  std::vector<double> gamma;  // homogeneity exponents of |x|^gamma psi_k
  bool numeric = false;
  // Numeric caps: uniform colatitude grid, lumped mass weights (without the
  // 2*pi azimuthal factor), and nodal eigenvector samples.
  std::vector<double> grid;
  std::vector<double> mass;
  std::vector<std::vector<double>> samples;
  std::vector<double> stiffness_diag, stiffness_off;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  // psi_k at polar angle (n = 2) or colatitude (n = 3), normalized so
  // that the cap integral of psi_k^2 is 1.
  double psi(int k, double angle) const;
};

SpectralBasis arc_spectrum(double omega, int k_max);

// Axisymmetric Neumann modes of the cap {colatitude < alpha} in S^2 via a
// conservative second-order finite-difference discretization of
// -(sin t psi')' = lambda sin t psi.
SpectralBasis cap_axisymmetric_spectrum(double alpha, int k_max, int grid_n);

double gamma_from_eigenvalue(int n, double lambda);
double eigenvalue_from_gamma(int n, double gamma);

// Discrete residual ||K psi - lambda M psi|| / ||M psi|| of a numeric mode.
double cap_residual(const SpectralBasis& basis, int k);

// Discrete inner product <psi_j, psi_k> under the cap measure.
double cap_inner_product(const SpectralBasis& basis, int j, int k);

// CSV with header k,lambda,gamma.
void write_spectrum_csv(std::ostream& os, const SpectralBasis& basis);

}  // namespace conefreq
