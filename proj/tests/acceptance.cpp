// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Tolerances are fixed here on purpose;
// they are not read from any config.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "conefreq/blowup.hpp"
#include "conefreq/config.hpp"
#include "conefreq/error.hpp"
#include "conefreq/frequency.hpp"
#include "conefreq/geometry.hpp"
#include "conefreq/inequalities.hpp"
#include "conefreq/pipeline.hpp"
#include "conefreq/solver.hpp"
#include "conefreq/spectral.hpp"

using namespace conefreq;
namespace fs = std::filesystem;

namespace {

constexpr double kR1Tol = 2e-2;        // |N - 2|
constexpr double kGammaTol = 5e-2;     // |gamma_hat - sqrt(lambda_k)|
constexpr double kDominantSq = 0.99;   // squared blow-up coefficient of k0
constexpr double kDnuovaConst = 2e-2;  // A = 1
constexpr double kDnuovaPower = 5e-2;  // power_weight, delta = 0.5
constexpr double kDoublingTol = 5e-2;
constexpr double kC1Max = 1e3;
constexpr double kCapTol = 1e-3;
constexpr double kMarginFloor = -1e-10;
constexpr double kTraceStability = 0.2;
constexpr double kScalingTol = 2e-2;
constexpr double kOrthTol = 1e-12;

constexpr double kH = 0.02;
constexpr double kRMin = 1e-3;
constexpr double kGrading = 0.7;

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double worst_orthogonality = 0.0;
int meshes_checked = 0;

std::shared_ptr<const Mesh> make_mesh(double opening, double h) {
  auto m = std::make_shared<const Mesh>(generate_mesh(build_domain(2, opening), h, kGrading, kRMin));
  worst_orthogonality = std::max(worst_orthogonality, check_normal_orthogonality(*m));
  ++meshes_checked;
  return m;
}

double max_abs_N_minus(const FrequencyTrace& tr, double target) {
  double e = 0.0;
  for (const auto& s : tr.samples) e = std::max(e, std::abs(s.N - target));
  return e;
}

// Relative residual of D = r H'/2 - weight_term over interior radii; a
// vanishing D (constant data) falls back to H as the scale.
double dnuova_error(const FrequencyTrace& tr) {
  double e = 0.0;
  for (std::size_t i = 1; i + 1 < tr.samples.size(); ++i) {
    const auto& s = tr.samples[i];
    const double scale = std::abs(s.D) > 1e-8 * s.H ? std::abs(s.D) : s.H;
    e = std::max(e, std::abs(s.dnuova_residual) / scale);
  }
  return e;
}

std::map<std::string, std::string> read_bundle(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream is(entry.path(), std::ios::binary);
    out[entry.path().filename().string()] =
        std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  }
  return out;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = radius_grid(0.05, 0.8, 12, true);
  const auto A1 = make_preset("constant");

  // 1. Frequency of the homogeneous harmonic r^2 cos 2theta.
  {
    double err[2];
    const double hs[2] = {kH, kH / 2};
    for (int i = 0; i < 2; ++i) {
      const auto mesh = make_mesh(kPi / 2, hs[i]);
      const auto u = solve(mesh, A1, OuterData::eigen(2));
      err[i] = max_abs_N_minus(compute_trace(u, A1, grid), 2.0);
    }
    const bool ok = err[0] <= kR1Tol && err[1] <= kR1Tol / 2 && err[1] < err[0];
    verdict(1, ok,
            fmt::format("max|N-2| = {:.3e} at h={} (tol {:.0e}); {:.3e} at h={} (tol {:.0e}); ratio {:.3f}", err[0],
                        hs[0], kR1Tol, err[1], hs[1], kR1Tol / 2, err[1] / err[0]));
  }

  // 2-4 share the eigen:k runs on both openings.
  {
    const std::vector<double> lambdas{0.4, 0.2, 0.1};
    double worst_gamma = 0.0, worst_sq = 1.0, worst_dn = 0.0, worst_dbl = 0.0;
    bool modes_ok = true;
    std::string mode_detail;
    for (double omega : {kPi / 2, kPi}) {
      const auto mesh = make_mesh(omega, kH);
      const auto basis = arc_spectrum(omega, 8);
      for (int k = 1; k <= 3; ++k) {
        const auto u = solve(mesh, A1, OuterData::eigen(k));
        auto tr = compute_trace(u, A1, grid);
        const double g = estimate_gamma(tr).gamma_hat;
        const double exact = std::sqrt(basis.eigenvalues[static_cast<std::size_t>(k - 1)]);
        worst_gamma = std::max(worst_gamma, std::abs(g - exact));
        const auto b = classify_blowup(u, A1, lambdas, basis, g);
        if (b.dominant_mode != k) {
          modes_ok = false;
          mode_detail += fmt::format(" [omega={:.4f} k={} got k0={}]", omega, k, b.dominant_mode);
        }
        worst_sq = std::min(worst_sq, b.dominant_sq);
        worst_dn = std::max(worst_dn, dnuova_error(tr));
        if (k >= 2) {
          const auto d = doubling_constants(tr, 2.0);
          for (const auto& e : d.entries)
            worst_dbl = std::max(worst_dbl, std::abs(e.ratio / std::pow(2.0, 2.0 * g) - 1.0));
        }
      }
    }
    verdict(2, worst_gamma <= kGammaTol && modes_ok && worst_sq >= kDominantSq,
            fmt::format("max|gamma-sqrt(lambda_k)| = {:.3e} (tol {:.0e}); k0 = k {}; min dominant sq = {:.6f} (>= {})",
                        worst_gamma, kGammaTol, modes_ok ? "for all runs" : "violated" + mode_detail, worst_sq,
                        kDominantSq));

    const auto pw = make_preset("power_weight", {{"delta", 0.5}});
    const auto mesh = make_mesh(kPi / 2, kH);
    const double dn_pw = dnuova_error(compute_trace(solve(mesh, pw, OuterData::eigen(2)), pw, grid));
    verdict(3, worst_dn <= kDnuovaConst && dn_pw <= kDnuovaPower,
            fmt::format("A=1 max rel residual {:.3e} (tol {:.0e}); power_weight {:.3e} (tol {:.0e})", worst_dn,
                        kDnuovaConst, dn_pw, kDnuovaPower));
    verdict(4, worst_dbl <= kDoublingTol,
            fmt::format("max |H(2r)/H(r) / 2^(2 gamma) - 1| = {:.3e} (tol {:.0e})", worst_dbl, kDoublingTol));
  }

  // 5. Monotonicity with remainder.
  {
    const auto mesh = make_mesh(kPi / 2, kH);
    struct Case {
      const char* preset;
      ParamTable params;
    };
    bool ok = true;
    std::string detail;
    for (const auto& c : {Case{"power_weight", {{"delta", 0.5}}}, Case{"linear_neumann", {{"kappa", 0.1}, {"delta", 1.0}}}}) {
      const auto co = make_preset(c.preset, c.params);
      const auto tr = compute_trace(solve(mesh, co, OuterData::eigen(2)), co, grid);
      const auto rep = validate_hypotheses(co, *mesh, grid);
      double C1 = std::numeric_limits<double>::infinity();
      bool nondecreasing = false;
      try {
        const auto fit = fit_monotonicity_constant(tr, [&](double r) { return rep.epsilon_at(r); }, co.constants.delta);
        C1 = fit.C1;
        nondecreasing = std::is_sorted(fit.w.begin(), fit.w.end());
      } catch (const Error& e) {
        detail += fmt::format(" {} fit error: {};", c.preset, e.what());
      }
      const double np1 = min_N_plus_one(tr);
      ok = ok && std::isfinite(C1) && C1 < kC1Max && nondecreasing && np1 > 0.0;
      detail += fmt::format(" {}: C1={:.3f} w {} min(N+1)={:.4f};", c.preset, C1,
                            nondecreasing ? "nondecreasing" : "NOT nondecreasing", np1);
    }
    verdict(5, ok, fmt::format("C1 < {:.0e};{}", kC1Max, detail));
  }

  // 6. Hemisphere cap spectrum.
  {
    const auto cap = cap_axisymmetric_spectrum(kPi / 2, 3, 2000);
    const double expected[3] = {0.0, 6.0, 20.0};
    double err = 0.0;
    for (int k = 0; k < 3; ++k) err = std::max(err, std::abs(cap.eigenvalues[static_cast<std::size_t>(k)] - expected[k]));
    const double g = gamma_from_eigenvalue(3, 6.0);
    verdict(6, cap.size() == 3 && err <= kCapTol && g == 2.0,
            fmt::format("lambda = [{:.6f}, {:.6f}, {:.6f}] max err {:.3e} (tol {:.0e}); gamma(3, 6) = {:.17g}",
                        cap.eigenvalues[0], cap.eigenvalues[1], cap.eigenvalues[2], err, kCapTol, g));
  }

  // 7. Inequality suite under one refinement.
  {
    const auto coarse = randomized_suite(make_mesh(kPi / 2, 0.05), A1, 100, 42);
    const auto fine = randomized_suite(make_mesh(kPi / 2, 0.025), A1, 100, 42);
    const double minP = std::min({coarse.min_poincare_margin, coarse.min_lemma_margin, fine.min_poincare_margin,
                                  fine.min_lemma_margin});
    const double drift = std::abs(fine.calibrated_C - coarse.calibrated_C) / coarse.calibrated_C;
    verdict(7, minP >= kMarginFloor && drift <= kTraceStability,
            fmt::format("min Poincare margin {:.3e} (>= {:.0e}); trace C {:.6f} -> {:.6f}, drift {:.3e} (tol {})", minP,
                        kMarginFloor, coarse.calibrated_C, fine.calibrated_C, drift, kTraceStability));
  }

  // 8. Scaling identity N_lambda(r) = N(lambda r).
  {
    const auto mesh = make_mesh(kPi / 2, kH);
    const auto u = solve(mesh, A1, OuterData::eigen(2));
    double worst = 0.0;
    int compared = 0;
    for (double lambda : {0.4, 0.2}) {
      const auto rs = rescale_solution(u, A1, lambda);
      for (double r : grid) {
        if (lambda * r < mesh->grading.r_min || r < rs.field.mesh().grading.r_min) continue;
        const auto a = compute_radius(rs.field, rs.coeffs, r);
        const auto b = compute_radius(u, A1, lambda * r);
        worst = std::max(worst, std::abs(a.D / a.H - b.D / b.H));
        ++compared;
      }
    }
    verdict(8, compared > 0 && worst <= kScalingTol,
            fmt::format("max |N_lambda(r) - N(lambda r)| = {:.3e} over {} radii (tol {:.0e})", worst, compared,
                        kScalingTol));
  }

  // 9 covers every mesh generated above; the pipeline runs below check
  // their own mesh through mesh.normal_orthogonality.
  verdict(9, worst_orthogonality <= kOrthTol,
          fmt::format("max lateral |nu.x|/|x| = {:.3e} over {} meshes (tol {:.0e})", worst_orthogonality,
                      meshes_checked, kOrthTol));

  // 10. Determinism of the full pipeline bundle.
  {
    const fs::path base = fs::temp_directory_path() / fmt::format("conefreq_accept_{}", ::getpid());
    std::vector<std::map<std::string, std::string>> bundles;
    int status = 0;
    for (int run = 0; run < 2; ++run) {
      RunConfig cfg;
      cfg.cap_alpha = kPi / 2;
      cfg.out_dir = (base / fmt::format("run{}", run)).string();
      fs::remove_all(cfg.out_dir);
      status |= run_pipeline(cfg).status;
      bundles.push_back(read_bundle(cfg.out_dir));
    }
    fs::remove_all(base);
    const bool same = !bundles[0].empty() && bundles[0] == bundles[1];
    verdict(10, same,
            fmt::format("{} CSV files {} (pipeline status {})", bundles[0].size(),
                        same ? "byte-identical" : "DIFFER", status));
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("acceptance: %d failure(s), %.1f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
