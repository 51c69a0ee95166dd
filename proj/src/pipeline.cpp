#include "conefreq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include "conefreq/blowup.hpp"
#include "conefreq/error.hpp"
#include "conefreq/frequency.hpp"
#include "conefreq/inequalities.hpp"
#include "conefreq/parallel.hpp"
#include "conefreq/spectral.hpp"

namespace conefreq {

namespace fs = std::filesystem;

std::vector<std::string> PipelineResult::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed)
      out.push_back(fmt::format("{}: value {:.6e}, tolerance {:.6e}{}{}", c.name, c.value, c.tolerance,
                                c.detail.empty() ? "" : "; ", c.detail));
  return out;
}

namespace {

std::string num(double v) { return fmt::format("{:.12e}", v); }

bool is_soft(ErrorKind k) {
  return k == ErrorKind::Unreliable || k == ErrorKind::Monotonicity || k == ErrorKind::EmptyRange ||
         k == ErrorKind::Multiplicity;
}

class Pipeline {
 public:
  explicit Pipeline(const RunConfig& cfg) : cfg_(cfg), out_(cfg.out_dir) {
    coeffs_ = make_preset(cfg.preset, cfg.params);
    grid_ = radius_grid(cfg.r_lo, cfg.r_hi, cfg.points, cfg.geometric);
  }

  PipelineResult run() {
    fs::create_directories(out_);
    load_manifest();
    const std::string& s = cfg_.stage;
    const bool all = s == "all";
    if (all || s == "validate") stage_validate();
    if (all || s == "mesh") stage_mesh();
    if (all || s == "solve") stage_solve();
    if (all || s == "freq") stage_freq();
    if (all || s == "spectrum") stage_spectrum();
    if (all || s == "blowup") stage_blowup();
    if (all || s == "ineq") stage_ineq();
    res_.status = std::all_of(res_.checks.begin(), res_.checks.end(), [](auto& c) { return c.passed; }) ? 0 : 1;
    write_summary();
    save_manifest();
    return res_;
  }

 private:
  const RunConfig& cfg_;
  fs::path out_;
  PipelineResult res_;
  CoefficientSet coeffs_;
  std::vector<double> grid_;
  std::shared_ptr<const Mesh> mesh_;
  std::optional<SolutionField> field_;
  std::optional<HypothesisReport> hyp_;
  std::optional<FrequencyTrace> trace_;
  std::optional<double> gamma_hat_;
  std::map<std::string, std::string> manifest_;

  void kv(const std::string& key, const std::string& value) { res_.summary.emplace_back(key, value); }
  void kv(const std::string& key, double value) { kv(key, num(value)); }

  void check(const std::string& name, bool passed, double value, double tol, std::string detail = {}) {
    res_.checks.push_back({name, passed, value, tol, std::move(detail)});
  }

  void soft_failure(const std::string& name, const Error& e) {
    check(name, false, std::nan(""), 0.0, fmt::format("{} error: {}", error_kind_name(e.kind()), e.what()));
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(out_ / name, std::ios::binary);
    if (!os) fail(ErrorKind::Io, fmt::format("cannot write '{}'", (out_ / name).string()));
    body(os);
    if (!os) fail(ErrorKind::Io, fmt::format("write to '{}' failed", (out_ / name).string()));
    if (std::find(res_.files.begin(), res_.files.end(), name) == res_.files.end()) res_.files.push_back(name);
  }

  // Fingerprints decide whether exported artifacts may be reused.
  std::string mesh_key() const {
    return fmt::format("opening={:.17g} h={:.17g} grading={:.17g} r_min={:.17g}", cfg_.opening, cfg_.h,
                       cfg_.grading, cfg_.r_min);
  }
  std::string solve_key() const {
    std::string p;
    for (const auto& [k, v] : cfg_.params) p += fmt::format(" {}={:.17g}", k, v);
    return fmt::format("{} preset={}{} outer={} tol={:.17g} max_iter={}", mesh_key(), cfg_.preset, p, cfg_.outer,
                       cfg_.tol, cfg_.max_iter);
  }

  void load_manifest() {
    std::ifstream in(out_ / "manifest.txt");
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) manifest_[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }

  void save_manifest() {
    write("manifest.txt", [&](std::ostream& os) {
      for (const auto& [k, v] : manifest_) os << k << '=' << v << '\n';
    });
  }

  bool reusable(const std::string& what, const std::string& key, const char* file) const {
    if (cfg_.stage == "all") return false;
    const auto it = manifest_.find(what);
    return it != manifest_.end() && it->second == key && fs::exists(out_ / file);
  }

  const Mesh& mesh() {
    if (!mesh_) {
      if (cfg_.stage != "mesh" && reusable("mesh", mesh_key(), "mesh.txt")) {
        std::ifstream in(out_ / "mesh.txt");
        mesh_ = std::make_shared<const Mesh>(read_mesh(in));
      } else {
        mesh_ = std::make_shared<const Mesh>(
            generate_mesh(build_domain(cfg_.dimension, cfg_.opening), cfg_.h, cfg_.grading, cfg_.r_min));
      }
    }
    return *mesh_;
  }

  const SolutionField& field() {
    if (!field_) {
      mesh();
      if (cfg_.stage != "solve" && reusable("solve", solve_key(), "solution.txt")) {
        std::ifstream in(out_ / "solution.txt");
        field_.emplace(read_solution(in, mesh_));
      } else {
        field_.emplace(solve(mesh_, coeffs_, OuterData::parse(cfg_.outer), {cfg_.tol, cfg_.max_iter}));
      }
    }
    return *field_;
  }

  const HypothesisReport& hypotheses() {
    if (!hyp_) hyp_ = validate_hypotheses(coeffs_, mesh(), grid_, cfg_.r1);
    return *hyp_;
  }

  const FrequencyTrace& trace() {
    if (!trace_) trace_ = compute_trace(field(), coeffs_, grid_);
    return *trace_;
  }

  std::optional<double> gamma_hat() {
    if (!gamma_hat_) {
      try {
        const auto g = estimate_gamma(trace());
        gamma_hat_ = g.gamma_hat;
        kv("freq.gamma_hat", g.gamma_hat);
        kv("freq.gamma_extrapolated", g.extrapolated);
        check("freq.gamma", true, g.gamma_hat, -0.05);
      } catch (const Error& e) {
        if (!is_soft(e.kind())) throw;
        soft_failure("freq.gamma", e);
      }
    }
    return gamma_hat_;
  }

  void stage_validate() {
    const auto& rep = hypotheses();
    write("hypotheses.txt", [&](std::ostream& os) { write_hypothesis_report(os, rep); });
    for (const auto& r : rep.records) {
      kv("hypothesis." + r.name, r.satisfied ? "satisfied" : "violated");
      if (cfg_.require_hypotheses || r.satisfied)
        check("validate." + r.name, r.satisfied, r.worst_margin, 0.0,
              r.satisfied ? "" : fmt::format("worst point ({:.6g}, {:.6g})", r.worst_point.x(), r.worst_point.y()));
    }
  }

  void stage_mesh() {
    const Mesh& m = mesh();
    write("mesh.txt", [&](std::ostream& os) { write_mesh(os, m); });
    manifest_["mesh"] = mesh_key();
    kv("mesh.nodes", fmt::format("{}", m.nodes.size()));
    kv("mesh.elements", fmt::format("{}", m.elements.size()));
    kv("mesh.layers", fmt::format("{}", m.grading.layers));
    const double orth = check_normal_orthogonality(m);
    check("mesh.normal_orthogonality", orth <= 1e-12, orth, 1e-12);
    const auto bq = ball_quadrature(m, 1.0);
    const double area_err = std::abs(bq.volume_weight_sum() - 0.5 * m.opening);
    const double arc_err = std::abs(bq.arc_weight_sum() - m.opening);
    check("mesh.area", area_err <= 1e-10, area_err, 1e-10);
    check("mesh.arc_length", arc_err <= 1e-10, arc_err, 1e-10);
  }

  void stage_solve() {
    const SolutionField& f = field();
    write("solution.txt", [&](std::ostream& os) { write_solution(os, f); });
    write("solve_log.txt", [&](std::ostream& os) { write_solve_log(os, f.log()); });
    manifest_["mesh"] = mesh_key();
    manifest_["solve"] = solve_key();
    if (!fs::exists(out_ / "mesh.txt") || cfg_.stage == "solve")
      write("mesh.txt", [&](std::ostream& os) { write_mesh(os, *mesh_); });
    kv("solve.picard_steps", fmt::format("{}", f.log().picard_steps));
    kv("solve.final_residual", f.log().final_residual);
    kv("solve.max_abs_u", f.log().max_abs_u);
    check("solve.algebraic_residual", f.log().algebraic_residual <= 1e-8, f.log().algebraic_residual, 1e-8);
  }

  void stage_freq() {
    const auto& tr = trace();
    write("trace.csv", [&](std::ostream& os) { write_trace_csv(os, tr); });
    if (cfg_.svg) write("trace.svg", [&](std::ostream& os) { write_trace_svg(os, tr); });

    const double np1 = min_N_plus_one(tr);
    check("freq.N_plus_one_positive", np1 > 0.0, np1, 0.0);

    double dn = 0.0;
    for (std::size_t i = 1; i + 1 < tr.samples.size(); ++i) {
      const auto& s = tr.samples[i];
      // D vanishes for constant fields; fall back to H as the scale there.
      const double scale = std::abs(s.D) > 1e-8 * s.H ? std::abs(s.D) : s.H;
      dn = std::max(dn, std::abs(s.dnuova_residual) / scale);
    }
    const double dtol = cfg_.effective_dnuova_tol();
    check("freq.dnuova", dn <= dtol, dn, dtol);

    double emax = 0.0;
    for (const auto& s : tr.samples) emax = std::max(emax, s.E);
    const double excess = comparability_excess(tr, coeffs_.constants.C, coeffs_.constants.delta);
    const double etol = 1e-8 * std::max(1.0, emax);
    check("freq.comparability", excess <= etol, excess, etol);

    gamma_hat();

    try {
      const auto& rep = hypotheses();
      const auto fit = fit_monotonicity_constant(
          tr, [&](double r) { return rep.epsilon_at(r); }, coeffs_.constants.delta);
      kv("freq.C1_fit", fit.C1);
      bool nondecreasing = true;
      for (std::size_t i = 1; i < fit.w.size(); ++i)
        if (fit.w[i] < fit.w[i - 1] * (1.0 - 1e-12)) nondecreasing = false;
      if (cfg_.require_monotonicity)
        check("freq.monotonicity", fit.C1 < cfg_.c1_max && nondecreasing, fit.C1, cfg_.c1_max);
    } catch (const Error& e) {
      if (!is_soft(e.kind())) throw;
      kv("freq.C1_fit", "failed");
      if (cfg_.require_monotonicity) soft_failure("freq.monotonicity", e);
    }

    try {
      const auto d = doubling_constants(tr, cfg_.doubling_R);
      kv("freq.doubling_R", cfg_.doubling_R);
      kv("freq.doubling_max_ratio", d.max_ratio);
      check("freq.doubling", std::isfinite(d.max_ratio), d.max_ratio, 0.0);
    } catch (const Error& e) {
      if (!is_soft(e.kind())) throw;
      soft_failure("freq.doubling", e);
    }

    const auto v = vanishing_order_test(tr, cfg_.vanishing_k_max);
    kv("freq.vanishing_order", fmt::format("{}", v.certified_order));
    std::string floor;
    for (std::size_t k = 0; k < v.below_floor.size(); ++k)
      if (v.below_floor[k]) floor += fmt::format("{}{}", floor.empty() ? "" : ",", k);
    kv("freq.vanishing_below_floor", floor.empty() ? "none" : floor);
  }

  void stage_spectrum() {
    const auto basis = arc_spectrum(cfg_.opening, cfg_.k_max);
    write("spectrum.csv", [&](std::ostream& os) { write_spectrum_csv(os, basis); });
    double ortho = 0.0;
    for (int j = 1; j <= basis.size(); ++j)
      for (int k = 1; k <= basis.size(); ++k)
        ortho = std::max(ortho, std::abs(cap_inner_product(basis, j, k) - (j == k ? 1.0 : 0.0)));
    check("spectrum.orthonormality", ortho <= 1e-8, ortho, 1e-8);
    if (cfg_.cap_alpha > 0.0) {
      const auto cap = cap_axisymmetric_spectrum(cfg_.cap_alpha, cfg_.cap_k_max, cfg_.grid_n);
      write("cap_spectrum.csv", [&](std::ostream& os) { write_spectrum_csv(os, cap); });
      double res = 0.0, cortho = 0.0;
      for (int j = 1; j <= cap.size(); ++j) {
        res = std::max(res, cap_residual(cap, j));
        for (int k = 1; k <= cap.size(); ++k)
          cortho = std::max(cortho, std::abs(cap_inner_product(cap, j, k) - (j == k ? 1.0 : 0.0)));
      }
      check("spectrum.cap_residual", res <= 1e-4, res, 1e-4);
      check("spectrum.cap_orthonormality", cortho <= 1e-6, cortho, 1e-6);
      for (int k = 1; k <= cap.size(); ++k)
        kv(fmt::format("spectrum.cap_lambda_{}", k), cap.eigenvalues[static_cast<std::size_t>(k - 1)]);
    }
  }

  void stage_blowup() {
    const auto g = gamma_hat();
    if (!g) {
      check("blowup.classify", false, std::nan(""), 0.0, "no reliable gamma estimate");
      return;
    }
    const auto basis = arc_spectrum(cfg_.opening, cfg_.k_max);
    try {
      const auto b = classify_blowup(field(), coeffs_, cfg_.lambdas, basis, *g);
      write("blowup.csv", [&](std::ostream& os) { write_blowup_csv(os, b); });
      write("blowup_summary.txt", [&](std::ostream& os) { write_blowup_summary(os, b); });
      kv("blowup.k0", fmt::format("{}", b.dominant_mode));
      kv("blowup.gamma_hat", b.gamma_hat);
      kv("blowup.gamma_k0", b.gamma_k0);
      kv("blowup.gamma_discrepancy", b.gamma_check);
      kv("blowup.dominant_sq", b.dominant_sq);
      kv("blowup.harmonic_residual", b.harmonic_residual);
      check("blowup.gamma_match", b.gamma_check <= cfg_.gamma_tol, b.gamma_check, cfg_.gamma_tol);
      check("blowup.normalization", b.normalization_error <= 1e-6, b.normalization_error, 1e-6);
      double bessel = 0.0;
      for (const auto& lv : b.levels) bessel = std::max(bessel, lv.bessel_sum);
      check("blowup.bessel", bessel <= 1.0 + 1e-6, bessel, 1.0 + 1e-6);
      check("blowup.subdominant_trend", b.subdominant_nonincreasing, b.levels.back().subdominant_energy, 0.0);
    } catch (const Error& e) {
      if (!is_soft(e.kind())) throw;
      soft_failure("blowup.classify", e);
    }
  }

  void stage_ineq() {
    auto suite_at = [&](double h) {
      auto m = std::make_shared<const Mesh>(
          generate_mesh(build_domain(cfg_.dimension, cfg_.opening), h, cfg_.grading, cfg_.r_min));
      return randomized_suite(m, coeffs_, cfg_.ineq_count, cfg_.seed);
    };
    const auto rep = suite_at(cfg_.ineq_h);
    write("inequalities.csv", [&](std::ostream& os) { write_suite_csv(os, rep); });
    kv("ineq.count", fmt::format("{}", cfg_.ineq_count));
    kv("ineq.seed", fmt::format("{}", cfg_.seed));
    kv("ineq.calibrated_C", rep.calibrated_C);
    kv("ineq.max_random_fitted_C", rep.max_random_fitted_C);
    const double floor = cfg_.margin_floor;
    check("ineq.poincare", rep.min_poincare_margin >= floor, rep.min_poincare_margin, floor);
    check("ineq.poincare_lemma", rep.min_lemma_margin >= floor, rep.min_lemma_margin, floor);
    check("ineq.trace", rep.min_trace_margin >= floor, rep.min_trace_margin, floor);
    if (cfg_.ineq_refine) {
      const auto fine = suite_at(0.5 * cfg_.ineq_h);
      const double change = std::abs(fine.max_fitted_C / rep.max_fitted_C - 1.0);
      kv("ineq.refined_max_fitted_C", fine.max_fitted_C);
      check("ineq.trace_stability", change <= cfg_.trace_stability_tol, change, cfg_.trace_stability_tol);
    }
  }

  void write_summary() {
    write("summary.txt", [&](std::ostream& os) {
      os << "status=" << (res_.status == 0 ? "pass" : "fail") << '\n';
      os << "stage=" << cfg_.stage << '\n';
      os << "preset=" << cfg_.preset << '\n';
      os << "outer_data=" << cfg_.outer << '\n';
      for (const auto& [k, v] : res_.summary) os << k << '=' << v << '\n';
      for (const auto& c : res_.checks)
        os << fmt::format("check.{}={} value={} tolerance={}{}{}\n", c.name, c.passed ? "pass" : "fail", num(c.value),
                          num(c.tolerance), c.detail.empty() ? "" : " detail=", c.detail);
    });
  }
};

}  // namespace

PipelineResult run_pipeline(const RunConfig& config) {
  validate_config(config);
  set_max_threads(static_cast<unsigned>(config.threads));
  return Pipeline(config).run();
}

}  // namespace conefreq
