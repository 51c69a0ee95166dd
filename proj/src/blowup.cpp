#include "conefreq/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>

#include "conefreq/error.hpp"
#include "conefreq/frequency.hpp"
#include "conefreq/parallel.hpp"

namespace conefreq {

RescaledField rescale_solution(const SolutionField& field, const CoefficientSet& coeffs,
                               double lambda) {
  const Mesh& mesh = field.mesh();
  const double lo = mesh.grading.r_min / 0.8;
  if (!(lambda >= lo * (1.0 - 1e-12) && lambda <= 0.5 + 1e-12))
    fail(ErrorKind::Range, fmt::format("rescale_solution: lambda = {} outside [{}, 0.5]", lambda, lo));
  const double H = compute_H(field, coeffs, lambda);
  if (!(H > 0.0))
    fail(ErrorKind::Degenerate, fmt::format("rescale_solution: H({}) = {} <= 0", lambda, H));
  const double s = std::sqrt(H);

  auto fresh = std::make_shared<const Mesh>(generate_mesh(build_domain(2, mesh.opening), mesh.target_h,
                                                          mesh.grading.ratio, mesh.grading.r_min));
  const PointLocator locator(mesh);
  Eigen::VectorXd values(static_cast<Eigen::Index>(fresh->nodes.size()));
  parallel_for(fresh->nodes.size(), [&](std::size_t i) {
    const Vec2 y = lambda * fresh->nodes[i];
    const int e = locator.locate(y);
    values[static_cast<Eigen::Index>(i)] = field.value_in(e, y) / s;
  });
  return {SolutionField(fresh, std::move(values)), rescale_coefficients(coeffs, lambda, s), lambda, H};
}

double harmonic_residual(const Mesh& mesh, const SpectralBasis& basis, int k, double gamma) {
  const auto v_field = interpolate(std::make_shared<const Mesh>(mesh), [&](const Vec2& x) {
    // At the vertex use the limit along r -> 0, which is psi_k(0) times
    // r^gamma at the smallest representable radius (0 unless gamma ~ 0).
    const double r = std::max(x.norm(), std::numeric_limits<double>::min());
    return std::pow(r, gamma) * basis.psi(k, x.norm() == 0.0 ? 0.0 : polar_angle(x));
  });
  const Eigen::VectorXd& v = v_field.values();
  const auto K = assemble_stiffness(mesh, [](const Vec2&) { return 1.0; });
  const Eigen::VectorXd Kv = K * v;
  Eigen::SparseMatrix<double> Kabs = K.cwiseAbs();
  const Eigen::VectorXd scale = Kabs * v.cwiseAbs();
  const auto fixed = dirichlet_nodes(mesh);
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (fixed[static_cast<std::size_t>(i)]) continue;
    num += Kv[i] * Kv[i];
    den += scale[i] * scale[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

BlowupResult classify_blowup(const SolutionField& field, const CoefficientSet& coeffs,
                             std::span<const double> lambda_list, const SpectralBasis& basis,
                             double gamma_hat) {
  const Mesh& mesh = field.mesh();
  if (lambda_list.size() < 3)
    fail(ErrorKind::Parameter, fmt::format("classify_blowup: {} lambdas, need at least 3", lambda_list.size()));
  for (std::size_t i = 1; i < lambda_list.size(); ++i)
    if (!(lambda_list[i] < lambda_list[i - 1]))
      fail(ErrorKind::Parameter, "classify_blowup: lambda_list must be decreasing");
  if (basis.size() < 6)
    fail(ErrorKind::Parameter, fmt::format("classify_blowup: basis has {} modes, need at least 6", basis.size()));
  if (basis.dimension != 2 || std::abs(basis.opening - mesh.opening) > 1e-12)
    fail(ErrorKind::Parameter, "classify_blowup: basis does not match the sector");
  const double lo = mesh.grading.r_min / 0.8;
  for (double l : lambda_list)
    if (!(l >= lo * (1.0 - 1e-12) && l <= 0.5 + 1e-12))
      fail(ErrorKind::Range, fmt::format("classify_blowup: lambda = {} outside [{}, 0.5]", l, lo));

  const int K = basis.size();
  BlowupResult res;
  res.levels.resize(lambda_list.size());
  parallel_for(lambda_list.size(), [&](std::size_t li) {
    const double lambda = lambda_list[li];
    const BallQuadrature bq = ball_quadrature(mesh, lambda);
    BlowupLevel lv;
    lv.lambda = lambda;
    double H = 0.0;
    for (const auto& p : bq.arc) {
      const double u = field.value_in(p.elem, p.x);
      H += p.w * coeffs.A(p.x) * u * u;
    }
    H /= lambda;
    if (!(H > 0.0))
      fail(ErrorKind::Degenerate, fmt::format("classify_blowup: H({}) = {} <= 0", lambda, H));
    const double s = std::sqrt(H);
    lv.coefficients.assign(static_cast<std::size_t>(K), 0.0);
    double mass = 0.0, plain = 0.0;
    for (const auto& p : bq.arc) {
      const double u = field.value_in(p.elem, p.x) / s;
      const double a = coeffs.A(p.x);
      const double prof = std::sqrt(a) * u;
      const double dtheta = p.w / lambda;
      lv.theta.push_back(p.theta);
      lv.profile.push_back(prof);
      mass += dtheta * prof * prof;
      plain += dtheta * u * u;
      for (int k = 1; k <= K; ++k)
        lv.coefficients[static_cast<std::size_t>(k - 1)] += dtheta * prof * basis.psi(k, p.theta);
    }
    lv.normalization_error = std::abs(mass - 1.0);
    lv.unweighted_mass = plain;
    for (double c : lv.coefficients) lv.bessel_sum += c * c;
    res.levels[li] = std::move(lv);
  });

  const auto& last = res.levels.back().coefficients;
  std::vector<int> order(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) order[static_cast<std::size_t>(k)] = k;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return last[static_cast<std::size_t>(a)] * last[static_cast<std::size_t>(a)] >
           last[static_cast<std::size_t>(b)] * last[static_cast<std::size_t>(b)];
  });
  const double top = last[static_cast<std::size_t>(order[0])] * last[static_cast<std::size_t>(order[0])];
  const double second = last[static_cast<std::size_t>(order[1])] * last[static_cast<std::size_t>(order[1])];
  if (top - second <= 0.01 * top)
    fail(ErrorKind::Multiplicity,
         fmt::format("classify_blowup: modes {} and {} carry squared coefficients {} and {} (within 1%)",
                     order[0] + 1, order[1] + 1, top, second));
  res.dominant_mode = order[0] + 1;
  res.dominant_sq = top;
  for (auto& lv : res.levels) {
    lv.subdominant_energy = 0.0;
    for (int k = 0; k < K; ++k)
      if (k != order[0]) lv.subdominant_energy += lv.coefficients[static_cast<std::size_t>(k)] *
                                                 lv.coefficients[static_cast<std::size_t>(k)];
    res.normalization_error = std::max(res.normalization_error, lv.normalization_error);
  }
  // Nonincreasing up to 5% relative noise plus an absolute floor of 1e-8.
  for (std::size_t i = 1; i < res.levels.size(); ++i)
    if (res.levels[i].subdominant_energy > 1.05 * res.levels[i - 1].subdominant_energy + 1e-8)
      res.subdominant_nonincreasing = false;
  res.gamma_hat = gamma_hat;
  res.gamma_k0 = basis.gamma[static_cast<std::size_t>(order[0])];
  res.gamma_check = std::abs(gamma_hat - res.gamma_k0);
  res.harmonic_residual = harmonic_residual(mesh, basis, res.dominant_mode, gamma_hat);
  return res;
}

void write_blowup_csv(std::ostream& os, const BlowupResult& result) {
  os << "lambda,k,coefficient\n";
  for (const auto& lv : result.levels)
    for (std::size_t k = 0; k < lv.coefficients.size(); ++k)
      os << fmt::format("{:.12e},{},{:.12e}\n", lv.lambda, k + 1, lv.coefficients[k]);
}

void write_blowup_summary(std::ostream& os, const BlowupResult& result) {
  os << fmt::format("k0={}\n", result.dominant_mode);
  os << fmt::format("dominant_sq={:.12e}\n", result.dominant_sq);
  os << fmt::format("gamma_hat={:.12e}\n", result.gamma_hat);
  os << fmt::format("gamma_k0={:.12e}\n", result.gamma_k0);
  os << fmt::format("gamma_check={:.12e}\n", result.gamma_check);
  os << fmt::format("normalization_error={:.12e}\n", result.normalization_error);
  os << fmt::format("subdominant_nonincreasing={}\n", result.subdominant_nonincreasing);
  os << fmt::format("harmonic_residual={:.12e}\n", result.harmonic_residual);
  for (const auto& lv : result.levels)
    os << fmt::format("level lambda={:.12e} subdominant={:.12e} bessel={:.12e} unweighted_mass={:.12e}\n",
                      lv.lambda, lv.subdominant_energy, lv.bessel_sum, lv.unweighted_mass);
}

}  // namespace conefreq
