#include "conefreq/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>

#include "conefreq/error.hpp"
#include "conefreq/parallel.hpp"

namespace conefreq {

namespace {
constexpr int kDim = 2;
}

RadiusQuantities compute_radius(const SolutionField& field, const CoefficientSet& coeffs, double r) {
  const Mesh& mesh = field.mesh();
  if (!(r >= mesh.grading.r_min * (1.0 - 1e-12) && r <= 1.0 + 1e-12))
    fail(ErrorKind::Range, fmt::format("frequency: r = {} outside [{}, 1]", r, mesh.grading.r_min));
  const BallQuadrature bq = ball_quadrature(mesh, r);
  RadiusQuantities q;
  q.r = bq.r;
  const double s_h = std::pow(q.r, 1 - kDim);
  const double s_d = std::pow(q.r, 2 - kDim);
  double arc_mass = 0.0, flux = 0.0, weight = 0.0;
  for (const auto& p : bq.arc) {
    const double u = field.value_in(p.elem, p.x);
    const double a = coeffs.A(p.x);
    const Vec2 nu = p.x / q.r;
    arc_mass += p.w * a * u * u;
    flux += p.w * a * u * field.gradient(p.elem).dot(nu);
    weight += p.w * coeffs.gradA(p.x).dot(nu) * u * u;
  }
  double energy = 0.0, volume_forcing = 0.0;
  for (const auto& p : bq.volume) {
    energy += p.w * coeffs.A(p.x) * field.gradient(p.elem).squaredNorm();
    if (coeffs.has_g) {
      const double u = field.value_in(p.elem, p.x);
      volume_forcing += p.w * coeffs.g(p.x, u) * u;
    }
  }
  double boundary_forcing = 0.0;
  if (coeffs.has_f) {
    for (const auto& p : bq.lateral) {
      const double u = field.value_in(p.elem, p.x);
      boundary_forcing += p.w * coeffs.f(p.x, u) * u;
    }
  }
  q.H = s_h * arc_mass;
  q.E = s_d * energy;
  q.boundary_forcing = boundary_forcing;
  q.volume_forcing = volume_forcing;
  q.D = q.E - s_d * boundary_forcing + s_d * volume_forcing;
  q.flux = flux;
  q.weight_term = 0.5 * s_d * weight;
  return q;
}

double compute_H(const SolutionField& field, const CoefficientSet& coeffs, double r) {
  return compute_radius(field, coeffs, r).H;
}

std::pair<double, double> compute_D_E(const SolutionField& field, const CoefficientSet& coeffs,
                                      double r) {
  const auto q = compute_radius(field, coeffs, r);
  return {q.D, q.E};
}

std::vector<double> FrequencyTrace::radii() const {
  std::vector<double> r;
  r.reserve(samples.size());
  for (const auto& s : samples) r.push_back(s.r);
  return r;
}

double FrequencyTrace::H_at(double r) const {
  if (samples.empty()) fail(ErrorKind::EmptyRange, "H_at: empty trace");
  const double lo = samples.front().r, hi = samples.back().r;
  if (r < lo * (1.0 - 1e-12) || r > hi * (1.0 + 1e-12))
    fail(ErrorKind::Range, fmt::format("H_at: r = {} outside the trace span [{}, {}]", r, lo, hi));
  std::size_t i = 1;
  while (i + 1 < samples.size() && samples[i].r < r) ++i;
  const auto& a = samples[i - 1];
  const auto& b = samples[i];
  const double s = std::log(r / a.r) / std::log(b.r / a.r);
  return std::exp((1.0 - s) * std::log(a.H) + s * std::log(b.H));
}

std::vector<double> radius_grid(double lo, double hi, int points, bool geometric) {
  if (points < 2 || !(lo > 0.0 && hi > lo))
    fail(ErrorKind::Range, fmt::format("radius_grid: bad spec [{}, {}] x {}", lo, hi, points));
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double s = static_cast<double>(i) / (points - 1);
    g[static_cast<std::size_t>(i)] =
        geometric ? lo * std::pow(hi / lo, s) : lo + s * (hi - lo);
  }
  g.back() = hi;
  return g;
}

FrequencyTrace compute_trace(const SolutionField& field, const CoefficientSet& coeffs,
                             std::span<const double> r_grid) {
  if (r_grid.size() < 8)
    fail(ErrorKind::Range, fmt::format("compute_trace: {} radii, need at least 8", r_grid.size()));
  const double r_min = field.mesh().grading.r_min;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (r_grid[i] < r_min * (1.0 - 1e-12) || r_grid[i] > 0.8 + 1e-12)
      fail(ErrorKind::Range, fmt::format("compute_trace: r = {} outside [{}, 0.8]", r_grid[i], r_min));
    if (i > 0 && !(r_grid[i] > r_grid[i - 1]))
      fail(ErrorKind::Range, "compute_trace: r_grid must be increasing");
  }
  std::vector<RadiusQuantities> q(r_grid.size());
  parallel_for(r_grid.size(), [&](std::size_t i) { q[i] = compute_radius(field, coeffs, r_grid[i]); });

  FrequencyTrace trace;
  trace.samples.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i].H > 0.0))
      fail(ErrorKind::Degenerate,
           fmt::format("compute_trace: H({}) = {} <= 0; the solution vanishes on that circle", q[i].r,
                       q[i].H));
    auto& s = trace.samples[i];
    s.r = q[i].r;
    s.H = q[i].H;
    s.D = q[i].D;
    s.E = q[i].E;
    s.N = q[i].D / q[i].H;
    s.weight_term = q[i].weight_term;
    s.flux_residual = q[i].flux - std::pow(s.r, kDim - 2) * s.D;
  }
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < n; ++i) {
    double slope;  // d log H / d log r
    if (i == 0 || i + 1 == n) {
      const std::size_t a = i == 0 ? 0 : n - 2, b = a + 1;
      slope = std::log(q[b].H / q[a].H) / std::log(q[b].r / q[a].r);
    } else {
      const double xm = std::log(q[i - 1].r), x0 = std::log(q[i].r), xp = std::log(q[i + 1].r);
      const double fm = std::log(q[i - 1].H), f0 = std::log(q[i].H), fp = std::log(q[i + 1].H);
      const double hm = x0 - xm, hp = xp - x0;
      slope = (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / (hm * hp * (hm + hp));
    }
    auto& s = trace.samples[i];
    s.Hprime = slope * s.H / s.r;
    s.dnuova_residual = s.D - (0.5 * s.r * s.Hprime - s.weight_term);
  }
  return trace;
}

GammaEstimate estimate_gamma(const FrequencyTrace& trace) {
  if (trace.samples.size() < 8) fail(ErrorKind::Range, "estimate_gamma: need at least 8 radii");
  double num = 0.0, den = 0.0, lo = std::numeric_limits<double>::max(), hi = -lo;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& s = trace.samples[i];
    num += s.N / s.r;
    den += 1.0 / s.r;
    lo = std::min(lo, s.N);
    hi = std::max(hi, s.N);
  }
  if (hi - lo > 1.0)
    fail(ErrorKind::Unreliable,
         fmt::format("estimate_gamma: N ranges over [{}, {}] on the smallest radii", lo, hi));
  GammaEstimate g;
  g.gamma_hat = num / den;
  const auto& a = trace.samples[0];
  const auto& b = trace.samples[1];
  g.extrapolated = (b.r * a.N - a.r * b.N) / (b.r - a.r);
  if (g.gamma_hat < -0.05)
    fail(ErrorKind::Unreliable, fmt::format("estimate_gamma: gamma_hat = {} < -0.05", g.gamma_hat));
  return g;
}

MonotonicityFit fit_monotonicity_constant(const FrequencyTrace& trace,
                                          const std::function<double(double)>& epsilon,
                                          double delta) {
  const auto& s = trace.samples;
  const std::size_t n = s.size();
  if (n < 2) fail(ErrorKind::Range, "fit_monotonicity_constant: trace too short");
  MonotonicityFit fit;
  fit.remainder_integral.assign(n, 0.0);
  // int max(s^delta, eps_s) d(log s), trapezoid on 32 log-uniform substeps per cell.
  constexpr int kSub = 32;
  auto h = [&](double r) { return std::max(std::pow(r, delta), epsilon(r)); };
  for (std::size_t i = n - 1; i-- > 0;) {
    const double a = std::log(s[i].r), b = std::log(s[i + 1].r);
    double cell = 0.0;
    for (int k = 0; k < kSub; ++k) {
      const double x0 = a + (b - a) * k / kSub, x1 = a + (b - a) * (k + 1) / kSub;
      cell += 0.5 * (h(std::exp(x0)) + h(std::exp(x1))) * (x1 - x0);
    }
    fit.remainder_integral[i] = fit.remainder_integral[i + 1] + cell;
  }
  double needed = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (!(2.0 + s[i].N > 0.0))
      fail(ErrorKind::Monotonicity, fmt::format("monotonicity: 2 + N({}) <= 0", s[i].r));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double drop = std::log((2.0 + s[i].N) / (2.0 + s[i + 1].N));
    if (drop <= 0.0) continue;
    const double gap = fit.remainder_integral[i] - fit.remainder_integral[i + 1];
    if (!(gap > 0.0))
      fail(ErrorKind::Monotonicity, "monotonicity: zero remainder weight across a decreasing step");
    needed = std::max(needed, drop / gap);
  }
  constexpr double kResolution = 1e-3;
  constexpr double kCap = 1e6;
  if (needed > 0.0) needed = std::ceil(needed / kResolution + 1e-9) * kResolution;
  if (needed > kCap)
    fail(ErrorKind::Monotonicity,
         fmt::format("monotonicity: no C1 <= {} makes the corrected weight nondecreasing", kCap));
  fit.C1 = needed;
  fit.w.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    fit.w[i] = (2.0 + s[i].N) * std::exp(-fit.C1 * fit.remainder_integral[i]);
  return fit;
}

DoublingTable doubling_constants(const FrequencyTrace& trace, double R) {
  if (!(R > 1.0)) fail(ErrorKind::Range, fmt::format("doubling: R = {} must exceed 1", R));
  DoublingTable t;
  const double r_max = trace.samples.back().r;
  for (const auto& s : trace.samples) {
    if (R * s.r > r_max * (1.0 + 1e-12)) break;
    DoublingEntry e{s.r, R, trace.H_at(std::min(R * s.r, r_max)) / s.H};
    t.max_ratio = std::max(t.max_ratio, e.ratio);
    t.entries.push_back(e);
  }
  if (t.entries.empty())
    fail(ErrorKind::EmptyRange, fmt::format("doubling: no radius r with {} r inside the grid", R));
  return t;
}

VanishingReport vanishing_order_test(const FrequencyTrace& trace, int k_max) {
  if (trace.samples.size() < 3) fail(ErrorKind::Range, "vanishing_order_test: trace too short");
  VanishingReport rep;
  const auto& a = trace.samples[0];
  const auto& c = trace.samples[2];
  for (int k = 0; k <= k_max; ++k) {
    double sup = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& s = trace.samples[i];
      sup = std::max(sup, s.H / std::pow(s.r, 2.0 * k));
    }
    const double qa = a.H / std::pow(a.r, 2.0 * k), qc = c.H / std::pow(c.r, 2.0 * k);
    const double growth = std::log(qa / qc) / std::log(c.r / a.r);
    rep.sup_ratio.push_back(sup);
    rep.growth.push_back(growth);
    rep.below_floor.push_back(sup < 1e-8);
    // Bounded up to half an order of slack.
    if (growth <= 1.0) rep.certified_order = k;
  }
  return rep;
}

double comparability_excess(const FrequencyTrace& trace, double C, double delta) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : trace.samples)
    worst = std::max(worst, s.E - 2.0 * (C * std::pow(s.r, delta) * s.H + s.D));
  return worst;
}

double min_N_plus_one(const FrequencyTrace& trace) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : trace.samples) m = std::min(m, s.N + 1.0);
  return m;
}

void write_trace_csv(std::ostream& os, const FrequencyTrace& trace) {
  os << "r,H,D,E,N,Hprime,dnuova_residual,flux_residual\n";
  for (const auto& s : trace.samples)
    os << fmt::format("{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n", s.r, s.H,
                      s.D, s.E, s.N, s.Hprime, s.dnuova_residual, s.flux_residual);
}

void write_trace_svg(std::ostream& os, const FrequencyTrace& trace) {
  constexpr double W = 360, Hgt = 260, pad = 40;
  const auto& s = trace.samples;
  auto panel = [&](double x0, const char* title, auto&& yv, bool logy) {
    double ymin = 1e300, ymax = -1e300;
    for (const auto& p : s) {
      const double y = logy ? std::log10(yv(p)) : yv(p);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
    if (ymax - ymin < 1e-9) {
      ymin -= 0.5;
      ymax += 0.5;
    }
    const double lx0 = std::log10(s.front().r), lx1 = std::log10(s.back().r);
    os << fmt::format("<g transform=\"translate({},0)\">\n", x0);
    os << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
                      pad, pad, W - 2 * pad, Hgt - 2 * pad);
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n", pad, pad - 10, title);
    os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : s) {
      const double y = logy ? std::log10(yv(p)) : yv(p);
      const double px = pad + (std::log10(p.r) - lx0) / (lx1 - lx0) * (W - 2 * pad);
      const double py = Hgt - pad - (y - ymin) / (ymax - ymin) * (Hgt - 2 * pad);
      os << fmt::format("{:.2f},{:.2f} ", px, py);
    }
    os << "\"/>\n";
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">{:.4g}</text>\n", 2, pad + 4,
                      logy ? std::pow(10.0, ymax) : ymax);
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">{:.4g}</text>\n", 2, Hgt - pad,
                      logy ? std::pow(10.0, ymin) : ymin);
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">r = {:.3g} .. {:.3g} (log)</text>\n",
                      pad, Hgt - pad + 16, s.front().r, s.back().r);
    os << "</g>\n";
  };
  os << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n", 2 * W, Hgt);
  panel(0, "H(r), log-log", [](const TraceSample& p) { return p.H; }, true);
  panel(W, "N(r)", [](const TraceSample& p) { return p.N; }, false);
  os << "</svg>\n";
}

}  // namespace conefreq
