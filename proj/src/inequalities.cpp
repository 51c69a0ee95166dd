#include "conefreq/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>
#include <random>

#include "conefreq/error.hpp"
#include "conefreq/parallel.hpp"

namespace conefreq {

namespace {

constexpr int kDim = 2;

void check_radius(const Mesh& mesh, double r, const char* who) {
  if (!(r >= mesh.grading.r_min * (1.0 - 1e-12) && r <= 1.0 + 1e-12))
    fail(ErrorKind::Range, fmt::format("{}: r = {} outside [{}, 1]", who, r, mesh.grading.r_min));
}

void check_poincare(double mu, double c) {
  if (!(mu < 2.0)) fail(ErrorKind::Parameter, fmt::format("poincare: mu = {} must be < 2", mu));
  if (!(c > 0.0 && c < 0.5 * (kDim - mu)))
    fail(ErrorKind::Parameter, fmt::format("poincare: c = {} not in (0, {})", c, 0.5 * (kDim - mu)));
}

void check_trace(double gamma_exp) {
  if (!(gamma_exp < 1.0))
    fail(ErrorKind::Parameter, fmt::format("trace: gamma_exp = {} must be < 1", gamma_exp));
}

// Field-independent factors of every integrand on one ball, evaluated once
// and reused across the corpus.
struct PreparedBall {
  double r = 0.0;
  std::vector<double> mus, gammas;
  const BallQuadrature* bq = nullptr;
  std::vector<double> arc_wA;
  std::vector<double> vol_wA;
  std::vector<std::vector<double>> mass_mu;    // w A |x|^{-mu}
  std::vector<std::vector<double>> lemma_mu;   // w ((n-mu)/2 A + grad A . x) |x|^{-mu}
  std::vector<std::vector<double>> energy_mu;  // w A |x|^{2-mu}
  std::vector<std::vector<double>> mass_g;     // w A |x|^{-g-1}
  std::vector<std::vector<double>> lat_g;      // w A |x|^{-g} on lateral points
};

PreparedBall prepare(const BallQuadrature& bq, const CoefficientSet& coeffs, std::vector<double> mus,
                     std::vector<double> gammas) {
  PreparedBall pb;
  pb.r = bq.r;
  pb.bq = &bq;
  pb.mus = std::move(mus);
  pb.gammas = std::move(gammas);
  for (const auto& p : bq.arc) pb.arc_wA.push_back(p.w * coeffs.A(p.x));
  const std::size_t nv = bq.volume.size();
  pb.vol_wA.resize(nv);
  std::vector<double> rho(nv), axdot(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const auto& p = bq.volume[i];
    pb.vol_wA[i] = p.w * coeffs.A(p.x);
    rho[i] = p.x.norm();
    axdot[i] = p.w * coeffs.gradA(p.x).dot(p.x);
  }
  for (double mu : pb.mus) {
    std::vector<double> m(nv), l(nv), e(nv);
    for (std::size_t i = 0; i < nv; ++i) {
      const double wm = std::pow(rho[i], -mu);
      m[i] = pb.vol_wA[i] * wm;
      l[i] = (0.5 * (kDim - mu) * pb.vol_wA[i] + axdot[i]) * wm;
      e[i] = pb.vol_wA[i] * rho[i] * rho[i] * wm;
    }
    pb.mass_mu.push_back(std::move(m));
    pb.lemma_mu.push_back(std::move(l));
    pb.energy_mu.push_back(std::move(e));
  }
  for (double g : pb.gammas) {
    std::vector<double> m(nv), lat;
    for (std::size_t i = 0; i < nv; ++i) m[i] = pb.vol_wA[i] * std::pow(rho[i], -g - 1.0);
    for (const auto& p : bq.lateral) lat.push_back(p.w * coeffs.A(p.x) * std::pow(p.x.norm(), -g));
    pb.mass_g.push_back(std::move(m));
    pb.lat_g.push_back(std::move(lat));
  }
  return pb;
}

// Field samples on the prepared points.
struct FieldSamples {
  std::vector<double> arc_u, vol_u, vol_g2, lat_u;
};

FieldSamples sample(const SolutionField& f, const BallQuadrature& bq) {
  FieldSamples fs;
  fs.arc_u.reserve(bq.arc.size());
  for (const auto& p : bq.arc) fs.arc_u.push_back(f.value_in(p.elem, p.x));
  fs.vol_u.reserve(bq.volume.size());
  fs.vol_g2.reserve(bq.volume.size());
  for (const auto& p : bq.volume) {
    fs.vol_u.push_back(f.value_in(p.elem, p.x));
    fs.vol_g2.push_back(f.gradient(p.elem).squaredNorm());
  }
  fs.lat_u.reserve(bq.lateral.size());
  for (const auto& p : bq.lateral) fs.lat_u.push_back(f.value_in(p.elem, p.x));
  return fs;
}

double dot_sq(const std::vector<double>& w, const std::vector<double>& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * u[i] * u[i];
  return s;
}

double dot(const std::vector<double>& w, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * v[i];
  return s;
}

InequalityMargin poincare_from(const PreparedBall& pb, const FieldSamples& fs, std::size_t im, double c) {
  const double mu = pb.mus[im], r = pb.r;
  InequalityMargin m;
  m.name = "poincare";
  m.exponent = mu;
  m.r = r;
  m.c = c;
  m.lhs = c * dot_sq(pb.mass_mu[im], fs.vol_u);
  m.rhs_mass = std::pow(r, 1.0 - mu) * dot_sq(pb.arc_wA, fs.arc_u);
  m.rhs_energy = 2.0 * std::pow(r, 2.0 - mu) / (kDim - mu) * dot(pb.vol_wA, fs.vol_g2);
  m.rhs = m.rhs_mass + m.rhs_energy;
  m.margin = m.rhs - m.lhs;
  return m;
}

InequalityMargin lemma_from(const PreparedBall& pb, const FieldSamples& fs, std::size_t im) {
  const double mu = pb.mus[im], r = pb.r;
  InequalityMargin m;
  m.name = "poincare_lemma";
  m.exponent = mu;
  m.r = r;
  m.lhs = dot_sq(pb.lemma_mu[im], fs.vol_u);
  m.rhs_mass = std::pow(r, 1.0 - mu) * dot_sq(pb.arc_wA, fs.arc_u);
  m.rhs_energy = 2.0 / (kDim - mu) * dot(pb.energy_mu[im], fs.vol_g2);
  m.rhs = m.rhs_mass + m.rhs_energy;
  m.margin = m.rhs - m.lhs;
  return m;
}

InequalityMargin trace_from(const PreparedBall& pb, const FieldSamples& fs, std::size_t ig, double C) {
  const double g = pb.gammas[ig], r = pb.r;
  InequalityMargin m;
  m.name = "trace";
  m.exponent = g;
  m.r = r;
  m.lhs = dot_sq(pb.lat_g[ig], fs.lat_u);
  m.rhs_energy = std::pow(r, 1.0 - g) * dot(pb.vol_wA, fs.vol_g2);
  m.rhs_mass = dot_sq(pb.mass_g[ig], fs.vol_u);
  const double base = m.rhs_energy + m.rhs_mass;
  m.fitted_C = base > 0.0 ? m.lhs / base : 0.0;
  m.c = std::isnan(C) ? m.fitted_C : C;
  m.rhs = m.c * base;
  m.margin = m.rhs - m.lhs;
  return m;
}

}  // namespace

std::string InequalityMargin::params() const {
  if (name == "trace") return fmt::format("gamma_exp={};r={};C={:.6g}", exponent, r, c);
  if (name == "poincare") return fmt::format("mu={};r={};c={:.6g}", exponent, r, c);
  return fmt::format("mu={};r={}", exponent, r);
}

InequalityMargin poincare_margin(const SolutionField& field, const CoefficientSet& coeffs, double mu,
                                 double r, double c) {
  check_poincare(mu, c);
  check_radius(field.mesh(), r, "poincare");
  const auto bq = ball_quadrature(field.mesh(), r);
  return poincare_from(prepare(bq, coeffs, {mu}, {}), sample(field, bq), 0, c);
}

InequalityMargin poincare_lemma_margin(const SolutionField& field, const CoefficientSet& coeffs,
                                       double mu, double r) {
  if (!(mu < 2.0)) fail(ErrorKind::Parameter, fmt::format("poincare_lemma: mu = {} must be < 2", mu));
  check_radius(field.mesh(), r, "poincare_lemma");
  const auto bq = ball_quadrature(field.mesh(), r);
  return lemma_from(prepare(bq, coeffs, {mu}, {}), sample(field, bq), 0);
}

InequalityMargin trace_margin(const SolutionField& field, const CoefficientSet& coeffs, double gamma_exp,
                              double r, double C) {
  check_trace(gamma_exp);
  check_radius(field.mesh(), r, "trace");
  const auto bq = ball_quadrature(field.mesh(), r);
  return trace_from(prepare(bq, coeffs, {}, {gamma_exp}), sample(field, bq), 0, C);
}

namespace {

std::vector<std::function<double(const Vec2&)>> calibration_fields(double omega) {
  std::vector<std::function<double(const Vec2&)>> fields;
  fields.emplace_back([](const Vec2&) { return 1.0; });
  fields.emplace_back([](const Vec2& x) { return x.x(); });
  fields.emplace_back([](const Vec2& x) { return x.y(); });
  for (int k = 1; k <= 3; ++k) {
    const double g = k * kPi / omega;
    fields.emplace_back([g](const Vec2& x) {
      const double r = x.norm();
      return r == 0.0 ? 0.0 : std::pow(r, g) * std::cos(g * polar_angle(x));
    });
  }
  fields.emplace_back([](const Vec2& x) { return 1.0 + x.squaredNorm(); });
  return fields;
}

void evaluate_field(const SolutionField& f, const SuiteGrid& grid, const std::vector<PreparedBall>& balls,
                    double trace_C, std::vector<InequalityMargin>& out) {
  for (const auto& pb : balls) {
    const FieldSamples fs = sample(f, *pb.bq);
    for (std::size_t im = 0; im < pb.mus.size(); ++im) {
      out.push_back(poincare_from(pb, fs, im, grid.c_fraction * 0.5 * (kDim - pb.mus[im])));
      out.push_back(lemma_from(pb, fs, im));
    }
    for (std::size_t ig = 0; ig < pb.gammas.size(); ++ig) out.push_back(trace_from(pb, fs, ig, trace_C));
  }
}

}  // namespace

SuiteReport randomized_suite(std::shared_ptr<const Mesh> mesh, const CoefficientSet& coeffs, int count,
                             std::uint64_t seed, const SuiteGrid& grid) {
  if (count < 1) fail(ErrorKind::Parameter, "randomized_suite: count must be >= 1");
  for (double mu : grid.mu) check_poincare(mu, grid.c_fraction * 0.5 * (kDim - mu));
  for (double g : grid.gamma_exp) check_trace(g);
  std::vector<BallQuadrature> quads;
  for (double r : grid.radii) {
    check_radius(*mesh, r, "randomized_suite");
    quads.push_back(ball_quadrature(*mesh, r));
  }
  std::vector<PreparedBall> balls;
  for (const auto& bq : quads) balls.push_back(prepare(bq, coeffs, grid.mu, grid.gamma_exp));
  SuiteReport rep;

  const auto cal = calibration_fields(mesh->opening);
  std::vector<std::vector<InequalityMargin>> cal_rows(cal.size());
  parallel_for(cal.size(), [&](std::size_t i) {
    evaluate_field(interpolate(mesh, cal[i]), grid, balls, std::numeric_limits<double>::quiet_NaN(),
                   cal_rows[i]);
  });
  for (const auto& rows : cal_rows)
    for (const auto& m : rows)
      if (m.name == "trace") rep.calibrated_C = std::max(rep.calibrated_C, m.fitted_C);

  std::vector<std::vector<InequalityMargin>> rnd_rows(static_cast<std::size_t>(count));
  const std::size_t nn = mesh->nodes.size();
  parallel_for(rnd_rows.size(), [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(nn));
    for (std::size_t k = 0; k < nn; ++k) v[static_cast<Eigen::Index>(k)] = dist(rng);
    evaluate_field(SolutionField(mesh, std::move(v)), grid, balls, rep.calibrated_C, rnd_rows[i]);
  });

  rep.min_poincare_margin = rep.min_lemma_margin = rep.min_trace_margin =
      std::numeric_limits<double>::infinity();
  auto absorb = [&](int index, const std::vector<InequalityMargin>& rows, bool random) {
    for (const auto& m : rows) {
      rep.field_index.push_back(index);
      rep.rows.push_back(m);
      if (m.name == "poincare") rep.min_poincare_margin = std::min(rep.min_poincare_margin, m.margin);
      if (m.name == "poincare_lemma") rep.min_lemma_margin = std::min(rep.min_lemma_margin, m.margin);
      if (m.name == "trace") {
        rep.max_fitted_C = std::max(rep.max_fitted_C, m.fitted_C);
        if (random) {
          rep.min_trace_margin = std::min(rep.min_trace_margin, m.margin);
          rep.max_random_fitted_C = std::max(rep.max_random_fitted_C, m.fitted_C);
        }
      }
    }
  };
  for (std::size_t i = 0; i < cal_rows.size(); ++i) absorb(-1 - static_cast<int>(i), cal_rows[i], false);
  for (std::size_t i = 0; i < rnd_rows.size(); ++i) absorb(static_cast<int>(i), rnd_rows[i], true);
  return rep;
}

void write_suite_csv(std::ostream& os, const SuiteReport& report) {
  os << "# fields are continuous piecewise-linear (P1); negative field_index marks calibration fields\n";
  os << "field_index,inequality,params,lhs,rhs,margin\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& m = report.rows[i];
    os << fmt::format("{},{},{},{:.12e},{:.12e},{:.12e}\n", report.field_index[i], m.name, m.params(),
                      m.lhs, m.rhs, m.margin);
  }
}

}  // namespace conefreq
