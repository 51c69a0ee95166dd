#include "conefreq/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>
#include <set>

#include "conefreq/error.hpp"

namespace conefreq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double param(const ParamTable& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void check_keys(const std::string& preset, const ParamTable& params,
                const std::set<std::string>& allowed) {
  for (const auto& [k, v] : params) {
    if (!allowed.count(k))
      fail(ErrorKind::Parameter, fmt::format("preset {}: unknown parameter '{}'", preset, k));
    if (!std::isfinite(v))
      fail(ErrorKind::Parameter, fmt::format("preset {}: parameter '{}' is not finite", preset, k));
  }
}

struct Weight {
  std::function<double(const Vec2&)> A;
  std::function<Vec2(const Vec2&)> gradA;
};

Weight power_weight(double a, double delta) {
  if (a == 0.0) return {[](const Vec2&) { return 1.0; }, [](const Vec2&) { return Vec2(0, 0); }};
  return {[a, delta](const Vec2& x) { return 1.0 + a * std::pow(x.norm(), delta); },
          [a, delta](const Vec2& x) -> Vec2 {
            const double r = x.norm();
            if (r == 0.0) return Vec2::Zero();
            return a * delta * std::pow(r, delta - 2.0) * x;
          }};
}

// A(x) = log|x| (cos(x_n/|x|) - 2); positive and unbounded inside B_1.
Weight log_weight() {
  return {[](const Vec2& x) {
            const double r = x.norm();
            return std::log(r) * (std::cos(x.y() / r) - 2.0);
          },
          [](const Vec2& x) -> Vec2 {
            const double r = x.norm();
            const double s = x.y() / r;
            const double r3 = r * r * r;
            const Vec2 grad_s(-x.x() * x.y() / r3, x.x() * x.x() / r3);
            return (std::cos(s) - 2.0) * x / (r * r) - std::log(r) * std::sin(s) * grad_s;
          }};
}

CoefficientSet assemble(const std::string& id, const Weight& w, double delta, double kappa_f,
                        double kappa_g) {
  CoefficientSet cs;
  cs.preset_id = id;
  cs.A = w.A;
  cs.gradA = w.gradA;
  cs.constants.delta = delta;
  cs.has_f = kappa_f != 0.0;
  cs.has_g = kappa_g != 0.0;
  auto A = w.A;
  auto gradA = w.gradA;
  if (cs.has_f) {
    cs.f = [A, delta, kappa_f](const Vec2& x, double t) {
      return kappa_f * A(x) * std::pow(x.norm(), delta - 1.0) * t;
    };
    cs.ft = [A, delta, kappa_f](const Vec2& x, double) {
      return kappa_f * A(x) * std::pow(x.norm(), delta - 1.0);
    };
    cs.F = [A, delta, kappa_f](const Vec2& x, double t) {
      return 0.5 * kappa_f * A(x) * std::pow(x.norm(), delta - 1.0) * t * t;
    };
    cs.gradx_f = [A, gradA, delta, kappa_f](const Vec2& x, double t) -> Vec2 {
      const double r = x.norm();
      return kappa_f * t *
             (gradA(x) * std::pow(r, delta - 1.0) +
              A(x) * (delta - 1.0) * std::pow(r, delta - 3.0) * x);
    };
  } else {
    cs.f = [](const Vec2&, double) { return 0.0; };
    cs.ft = cs.f;
    cs.F = cs.f;
    cs.gradx_f = [](const Vec2&, double) { return Vec2(0, 0); };
  }
  if (cs.has_g) {
    cs.g = [A, delta, kappa_g](const Vec2& x, double t) {
      return kappa_g * A(x) * std::pow(x.norm(), delta - 2.0) * t;
    };
  } else {
    cs.g = [](const Vec2&, double) { return 0.0; };
  }
  return cs;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"constant",       "power_weight",  "log_weight",
                                              "linear_neumann", "linear_volume", "combined"};
  return names;
}

CoefficientSet make_preset(const std::string& preset_id, const ParamTable& params) {
  const std::set<std::string> common{"delta", "c", "C"};
  auto with = [&common](std::initializer_list<const char*> extra) {
    std::set<std::string> s = common;
    for (const char* e : extra) s.insert(e);
    return s;
  };
  const double delta = param(params, "delta", 1.0);
  if (!(delta > 0.0))
    fail(ErrorKind::Parameter, fmt::format("preset {}: delta = {} must be positive", preset_id, delta));

  CoefficientSet cs;
  double a = 0.0;
  if (preset_id == "constant") {
    check_keys(preset_id, params, common);
    cs = assemble(preset_id, power_weight(0.0, delta), delta, 0.0, 0.0);
  } else if (preset_id == "power_weight") {
    check_keys(preset_id, params, with({"a"}));
    a = param(params, "a", 1.0);
    cs = assemble(preset_id, power_weight(a, delta), delta, 0.0, 0.0);
  } else if (preset_id == "log_weight") {
    check_keys(preset_id, params, common);
    cs = assemble(preset_id, log_weight(), delta, 0.0, 0.0);
    cs.validity_radius = std::exp(-1.0);
    cs.constants.c = param(params, "c", 0.25);
    cs.constants.C = param(params, "C", 10.0);
    return cs;
  } else if (preset_id == "linear_neumann") {
    check_keys(preset_id, params, with({"a", "kappa"}));
    a = param(params, "a", 0.0);
    cs = assemble(preset_id, power_weight(a, delta), delta, param(params, "kappa", 0.1), 0.0);
  } else if (preset_id == "linear_volume") {
    check_keys(preset_id, params, with({"a", "kappa"}));
    a = param(params, "a", 0.0);
    cs = assemble(preset_id, power_weight(a, delta), delta, 0.0, param(params, "kappa", 0.1));
  } else if (preset_id == "combined") {
    check_keys(preset_id, params, with({"a", "kappa", "kappa_f", "kappa_g"}));
    a = param(params, "a", 1.0);
    const double kappa = param(params, "kappa", 0.1);
    cs = assemble(preset_id, power_weight(a, delta), delta, param(params, "kappa_f", kappa),
                  param(params, "kappa_g", kappa));
  } else {
    fail(ErrorKind::Parameter, fmt::format("unknown preset '{}'", preset_id));
  }
  if (a < 0.0)
    fail(ErrorKind::Parameter, fmt::format("preset {}: amplitude a = {} must be >= 0", preset_id, a));
  // sup A = 1 + a on B_1; keep 10% headroom so the bound is not met with equality.
  cs.constants.c = param(params, "c", std::min(0.5, 0.9 / (1.0 + a)));
  cs.constants.C = param(params, "C", 10.0);
  if (!(cs.constants.c > 0.0 && cs.constants.C > 0.0))
    fail(ErrorKind::Parameter, fmt::format("preset {}: c and C must be positive", preset_id));
  return cs;
}

CoefficientSet rescale_coefficients(const CoefficientSet& base, double lambda, double scale) {
  CoefficientSet cs = base;
  cs.preset_id = fmt::format("{}@lambda={}", base.preset_id, lambda);
  const auto A = base.A;
  const auto gradA = base.gradA;
  const auto f = base.f, ft = base.ft, F = base.F, g = base.g;
  const auto gxf = base.gradx_f;
  const double l = lambda, s = scale;
  cs.A = [A, l](const Vec2& x) { return A(l * x); };
  cs.gradA = [gradA, l](const Vec2& x) -> Vec2 { return l * gradA(l * x); };
  cs.f = [f, l, s](const Vec2& x, double t) { return l * f(l * x, s * t) / s; };
  cs.ft = [ft, l, s](const Vec2& x, double t) { return l * ft(l * x, s * t); };
  cs.F = [F, l, s](const Vec2& x, double t) { return l * F(l * x, s * t) / (s * s); };
  cs.gradx_f = [gxf, l, s](const Vec2& x, double t) -> Vec2 { return l * l * gxf(l * x, s * t) / s; };
  cs.g = [g, l, s](const Vec2& x, double t) { return l * l * g(l * x, s * t) / s; };
  cs.validity_radius = base.validity_radius / lambda;
  return cs;
}

const HypothesisRecord& HypothesisReport::get(const std::string& name) const {
  for (const auto& r : records)
    if (r.name == name) return r;
  fail(ErrorKind::Parameter, fmt::format("no hypothesis named '{}'", name));
}

bool HypothesisReport::all_satisfied() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.satisfied; });
}

double HypothesisReport::epsilon_at(double r) const {
  if (r_grid.empty()) return 0.0;
  if (r <= r_grid.front()) return epsilon.front();
  if (r >= r_grid.back()) return epsilon.back();
  const auto it = std::upper_bound(r_grid.begin(), r_grid.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - r_grid.begin());
  const double s = (r - r_grid[i - 1]) / (r_grid[i] - r_grid[i - 1]);
  return (1.0 - s) * epsilon[i - 1] + s * epsilon[i];
}

namespace {

// Tracks the supremum of a sampled ratio together with its location.
struct SupTracker {
  double value = 0.0;
  Vec2 at = Vec2::Zero();
  void offer(double v, const Vec2& x) {
    if (v > value || !std::isfinite(v)) {
      value = v;
      at = x;
    }
  }
};

double log_margin(double declared, double fitted) {
  if (fitted == 0.0) return kInf;
  return std::log(declared / fitted);
}

}  // namespace

HypothesisReport validate_hypotheses(const CoefficientSet& coeffs, const Mesh& mesh,
                                     std::span<const double> r_grid, double r1) {
  if (r_grid.empty()) fail(ErrorKind::Range, "validate_hypotheses: empty r_grid");
  HypothesisReport report;
  report.r1 = r1;
  const double r_valid = std::min(1.0, coeffs.validity_radius);
  const double r_sample = std::max(mesh.grading.r_min, r_valid * (1.0 - 1e-9));
  const BallQuadrature bq = ball_quadrature(mesh, r_sample);

  std::vector<Vec2> points;
  for (const auto& q : bq.volume) points.push_back(q.x);
  std::vector<Vec2> boundary_points;
  for (const auto& q : bq.lateral) boundary_points.push_back(q.x);

  const StructuralConstants& k = coeffs.constants;
  const std::array<double, 6> t_grid{1.0, -1.0, 0.5, -0.5, 0.1, -0.1};

  // (MUCK): c <= A <= 1/c, margin in log units.
  {
    HypothesisRecord rec{"MUCK"};
    double worst = kInf;
    double amin = kInf, amax = 0.0;
    for (const Vec2& x : points) {
      const double a = coeffs.A(x);
      double m = a > 0.0 ? std::min(std::log(a / k.c), std::log(1.0 / (k.c * a))) : -kInf;
      if (!std::isfinite(a)) m = -kInf;
      amin = std::min(amin, a);
      amax = std::max(amax, a);
      if (m < worst) {
        worst = m;
        rec.worst_point = x;
      }
    }
    rec.worst_margin = worst;
    rec.satisfied = worst >= 0.0;
    rec.fitted_constant = amin > 0.0 ? std::min(amin, 1.0 / amax) : 0.0;
    report.records.push_back(rec);
  }

  // epsilon_r = sup_{B_r} |grad A . x| / A, made monotone as a running max.
  std::vector<double> grid(r_grid.begin(), r_grid.end());
  std::sort(grid.begin(), grid.end());
  report.r_grid = grid;
  std::vector<Vec2> eps_points;
  {
    SupTracker running;
    for (double r : grid) {
      if (r > 1.0 + 1e-12 || r < mesh.grading.r_min * (1.0 - 1e-12))
        fail(ErrorKind::Range, fmt::format("validate_hypotheses: r = {} outside [r_min, 1]", r));
      const BallQuadrature b = ball_quadrature(mesh, std::min(r, 1.0));
      auto offer = [&](const Vec2& x) {
        if (x.norm() >= coeffs.validity_radius) return;
        const double a = coeffs.A(x);
        running.offer(std::abs(coeffs.gradA(x).dot(x)) / a, x);
      };
      for (const auto& q : b.volume) offer(q.x);
      for (const auto& q : b.arc) offer(q.x);
      report.epsilon.push_back(running.value);
      eps_points.push_back(running.at);
    }
  }

  // (STR:HY1): epsilon_r decreases toward zero at the small-radius end.
  {
    HypothesisRecord rec{"STR:HY1"};
    std::size_t hi = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i] < coeffs.validity_radius) hi = i;
    const double eps_lo = report.epsilon.front(), eps_hi = report.epsilon[hi];
    rec.worst_margin = eps_lo == 0.0 ? kInf : std::log(0.5 * eps_hi / eps_lo);
    rec.worst_point = eps_points.front();
    rec.satisfied = rec.worst_margin >= 0.0 && std::isfinite(eps_lo);
    rec.fitted_constant = eps_lo;
    report.records.push_back(rec);
  }

  // (TANGE): |grad A| <= C A / |x|.
  {
    HypothesisRecord rec{"TANGE"};
    SupTracker sup;
    for (const Vec2& x : points) sup.offer(coeffs.gradA(x).norm() * x.norm() / coeffs.A(x), x);
    rec.fitted_constant = sup.value;
    rec.worst_point = sup.at;
    rec.worst_margin = log_margin(k.C, sup.value);
    rec.satisfied = rec.worst_margin >= 0.0;
    report.records.push_back(rec);
  }

  auto growth = [&](const char* name, const std::vector<Vec2>& pts, double power, auto&& lhs) {
    HypothesisRecord rec{name};
    SupTracker sup;
    for (const Vec2& x : pts) {
      const double scale = coeffs.A(x) * std::pow(x.norm(), k.delta + power);
      for (double t : t_grid) sup.offer(lhs(x, t) / (scale * std::abs(t)), x);
    }
    rec.fitted_constant = sup.value;
    rec.worst_point = sup.at;
    rec.worst_margin = log_margin(k.C, sup.value);
    rec.satisfied = rec.worst_margin >= 0.0;
    report.records.push_back(rec);
  };
  std::vector<Vec2> f_points = points;
  f_points.insert(f_points.end(), boundary_points.begin(), boundary_points.end());
  growth("STR:HY2", f_points, -1.0,
         [&](const Vec2& x, double t) { return std::abs(coeffs.f(x, t)); });
  growth("STR:HY2DER", f_points, -2.0,
         [&](const Vec2& x, double t) { return coeffs.gradx_f(x, t).norm(); });
  growth("g:grow", points, -2.0, [&](const Vec2& x, double t) { return std::abs(coeffs.g(x, t)); });

  // (L1): trapezoid of epsilon_r / r over [r_min, r1]; finite means satisfied.
  {
    HypothesisRecord rec{"L1"};
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      if (grid[i + 1] > r1 + 1e-12) break;
      integral += 0.5 * (report.epsilon[i] / grid[i] + report.epsilon[i + 1] / grid[i + 1]) *
                  (grid[i + 1] - grid[i]);
    }
    report.L1_integral = integral;
    rec.fitted_constant = integral;
    rec.worst_point = eps_points.front();
    constexpr double kL1Cap = 1e3;
    rec.worst_margin = integral == 0.0 ? kInf : std::log(kL1Cap / integral);
    rec.satisfied = std::isfinite(integral) && rec.worst_margin >= 0.0;
    report.records.push_back(rec);
  }
  return report;
}

void write_hypothesis_report(std::ostream& os, const HypothesisReport& report) {
  for (const auto& r : report.records) {
    os << fmt::format("hypothesis.{}.satisfied = {}\n", r.name, r.satisfied ? "true" : "false");
    os << fmt::format("hypothesis.{}.worst_margin = {:.12g}\n", r.name, r.worst_margin);
    os << fmt::format("hypothesis.{}.worst_point = {:.12g} {:.12g}\n", r.name, r.worst_point.x(),
                      r.worst_point.y());
    os << fmt::format("hypothesis.{}.fitted_constant = {:.12g}\n", r.name, r.fitted_constant);
  }
  for (std::size_t i = 0; i < report.r_grid.size(); ++i)
    os << fmt::format("epsilon.{:.12g} = {:.12g}\n", report.r_grid[i], report.epsilon[i]);
  os << fmt::format("L1_r1 = {:.12g}\n", report.r1);
  os << fmt::format("L1_integral = {:.12g}\n", report.L1_integral);
}

}  // namespace conefreq
