#include "conefreq/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>

#include "conefreq/error.hpp"
#include "conefreq/types.hpp"

namespace conefreq {

double SpectralBasis::psi(int k, double angle) const {
  if (k < 1 || k > size()) fail(ErrorKind::Range, fmt::format("psi: mode {} not in basis", k));
  if (!numeric) {
    if (k == 1) return 1.0 / std::sqrt(opening);
    return std::sqrt(2.0 / opening) * std::cos((k - 1) * kPi * angle / opening);
  }
  const auto& s = samples[static_cast<std::size_t>(k - 1)];
  const double h = grid[1] - grid[0];
  const double pos = std::clamp(angle / h, 0.0, static_cast<double>(grid.size() - 1));
  const std::size_t i = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * s[i] + w * s[i + 1];
}

SpectralBasis arc_spectrum(double omega, int k_max) {
  if (!(omega > 0.0 && omega < 2.0 * kPi))
    fail(ErrorKind::Domain, fmt::format("arc_spectrum: omega = {} not in (0, 2 pi)", omega));
  if (k_max < 1) fail(ErrorKind::Parameter, "arc_spectrum: k_max must be >= 1");
  SpectralBasis b;
  b.dimension = 2;
  b.opening = omega;
  b.cap_measure = omega;
  for (int k = 1; k <= k_max; ++k) {
    const double root = (k - 1) * kPi / omega;
    b.eigenvalues.push_back(root * root);
    b.gamma.push_back(gamma_from_eigenvalue(2, root * root));
  }
  return b;
}

SpectralBasis cap_axisymmetric_spectrum(double alpha, int k_max, int grid_n) {
  if (!(alpha > 0.0 && alpha <= kPi / 2 + 1e-15))
    fail(ErrorKind::Domain, fmt::format("cap spectrum: alpha = {} not in (0, pi/2]", alpha));
  if (grid_n < 200) fail(ErrorKind::Parameter, fmt::format("cap spectrum: grid_n = {} < 200", grid_n));
  if (k_max < 1 || k_max > grid_n) fail(ErrorKind::Parameter, "cap spectrum: bad k_max");

  const int n = grid_n + 1;  // nodes t_i = i h, i = 0..grid_n
  const double h = alpha / grid_n;
  SpectralBasis b;
  b.dimension = 3;
  b.opening = alpha;
  b.cap_measure = 2.0 * kPi * (1.0 - std::cos(alpha));
  b.numeric = true;
  b.grid.resize(n);
  b.mass.resize(n);
  for (int i = 0; i < n; ++i) b.grid[i] = i * h;

  // Control volume [t_{i-1/2}, t_{i+1/2}] clipped to [0, alpha]: the mass is
  // its exact sin-measure, fluxes use sin at the faces. sin(0) = 0 closes the
  // pole and the cap edge carries a zero flux.
  auto face = [h](int i) { return std::sin((i + 0.5) * h); };
  for (int i = 0; i < n; ++i) {
    const double lo = i == 0 ? 0.0 : (i - 0.5) * h;
    const double hi = i == n - 1 ? alpha : (i + 0.5) * h;
    b.mass[i] = std::cos(lo) - std::cos(hi);
  }
  b.stiffness_diag.assign(n, 0.0);
  b.stiffness_off.assign(n - 1, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    const double k = face(i) / h;
    b.stiffness_diag[i] += k;
    b.stiffness_diag[i + 1] += k;
    b.stiffness_off[i] = -k;
  }

  // Symmetric form M^{-1/2} K M^{-1/2}.
  std::vector<double> d(n), e(n - 1);
  for (int i = 0; i < n; ++i) d[i] = b.stiffness_diag[i] / b.mass[i];
  for (int i = 0; i + 1 < n; ++i) e[i] = b.stiffness_off[i] / std::sqrt(b.mass[i] * b.mass[i + 1]);

  lapack_int found = 0;
  std::vector<double> w(n), z(static_cast<std::size_t>(n) * k_max);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(k_max));
  const lapack_int info =
      LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, k_max, 0.0,
                     &found, w.data(), z.data(), n, isuppz.data());
  if (info != 0 || found != k_max)
    fail(ErrorKind::Assembly, fmt::format("cap spectrum: tridiagonal eigensolver failed ({})", info));

  for (int k = 0; k < k_max; ++k) {
    std::vector<double> v(n);
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] = z[static_cast<std::size_t>(k) * n + i] / std::sqrt(b.mass[i]);
      norm2 += b.mass[i] * v[i] * v[i];
    }
    const double scale = 1.0 / std::sqrt(2.0 * kPi * norm2);
    // Sign convention: positive at the pole.
    const double sign = v[0] < 0.0 ? -1.0 : 1.0;
    for (double& x : v) x *= scale * sign;
    // The constant mode is exactly zero; clamp roundoff.
    const double lambda = k == 0 ? std::max(0.0, w[k]) : w[k];
    b.eigenvalues.push_back(lambda);
    b.gamma.push_back(gamma_from_eigenvalue(3, std::max(0.0, lambda)));
    b.samples.push_back(std::move(v));
  }
  return b;
}

double gamma_from_eigenvalue(int n, double lambda) {
  if (lambda < 0.0) fail(ErrorKind::Range, fmt::format("gamma_from_eigenvalue: lambda = {} < 0", lambda));
  const double half = 0.5 * (n - 2);
  return -half + std::sqrt(half * half + lambda);
}

double eigenvalue_from_gamma(int n, double gamma) { return gamma * (gamma + n - 2); }

double cap_residual(const SpectralBasis& b, int k) {
  if (!b.numeric) return 0.0;
  const auto& v = b.samples.at(static_cast<std::size_t>(k - 1));
  const double lambda = b.eigenvalues.at(static_cast<std::size_t>(k - 1));
  const std::size_t n = v.size();
  double res2 = 0.0, ref2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double kv = b.stiffness_diag[i] * v[i];
    if (i > 0) kv += b.stiffness_off[i - 1] * v[i - 1];
    if (i + 1 < n) kv += b.stiffness_off[i] * v[i + 1];
    const double mv = b.mass[i] * v[i];
    res2 += (kv - lambda * mv) * (kv - lambda * mv) / b.mass[i];
    ref2 += mv * mv / b.mass[i];
  }
  return std::sqrt(res2 / ref2);
}

double cap_inner_product(const SpectralBasis& b, int j, int k) {
  if (!b.numeric) {
    // Exact for the cosine basis; evaluated by composite Gauss sampling.
    const int panels = 16 * std::max(j, k) + 64;
    const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const double gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
    double s = 0.0;
    const double hp = b.opening / panels;
    for (int p = 0; p < panels; ++p)
      for (int q = 0; q < 3; ++q) {
        const double t = (p + 0.5 + 0.5 * gx[q]) * hp;
        s += 0.5 * hp * gw[q] * b.psi(j, t) * b.psi(k, t);
      }
    return s;
  }
  const auto& a = b.samples.at(static_cast<std::size_t>(j - 1));
  const auto& c = b.samples.at(static_cast<std::size_t>(k - 1));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += b.mass[i] * a[i] * c[i];
  return 2.0 * kPi * s;
}

void write_spectrum_csv(std::ostream& os, const SpectralBasis& b) {
  os << "k,lambda,gamma\n";
  for (int k = 1; k <= b.size(); ++k)
    os << fmt::format("{},{:.12g},{:.12g}\n", k, b.eigenvalues[k - 1], b.gamma[k - 1]);
}

}  // namespace conefreq
