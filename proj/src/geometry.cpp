#include "conefreq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "conefreq/error.hpp"
#include "quadrature_rules.hpp"

namespace conefreq {

namespace {

constexpr double kOnCircle = 1e-12;

double sector_angle(const Vec2& x) {
  double t = std::atan2(x.y(), x.x());
  // Sectors start at theta = 0; only openings beyond pi reach negative atan2.
  if (t < -1e-14) t += 2.0 * kPi;
  return std::max(t, 0.0);
}

}  // namespace

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Mesh: return "mesh";
    case ErrorKind::Range: return "range";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Diverged: return "diverged";
    case ErrorKind::Assembly: return "assembly";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Unreliable: return "unreliable";
    case ErrorKind::Monotonicity: return "monotonicity";
    case ErrorKind::EmptyRange: return "empty-range";
    case ErrorKind::Multiplicity: return "multiplicity";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

bool ConeDomain::contains(const Vec2& x) const {
  const double r = x.norm();
  if (r == 0.0 || r > outer_radius) return false;
  return sector_angle(x) <= opening;
}

ConeDomain build_domain(int dimension, double opening) {
  ConeDomain d;
  if (dimension != 2 && dimension != 3)
    fail(ErrorKind::Domain, fmt::format("dimension: expected 2 or 3, got {}", dimension));
  const double max_opening = dimension == 2 ? 2.0 * kPi : kPi;
  const bool ok = dimension == 2 ? (opening > 0.0 && opening < max_opening)
                                 : (opening > 0.0 && opening <= max_opening);
  if (!std::isfinite(opening) || !ok)
    fail(ErrorKind::Domain,
         fmt::format("opening: {} outside the admissible range for n = {}", opening, dimension));
  d.dimension = dimension;
  d.opening = opening;
  d.outer_radius = 1.0;
  d.cap_measure = dimension == 2 ? opening : 2.0 * kPi * (1.0 - std::cos(opening));
  return d;
}

const char* facet_tag_name(FacetTag tag) {
  return tag == FacetTag::Lateral ? "lateral" : "outer_arc";
}

double Mesh::element_area(int e) const {
  const auto& t = elements[static_cast<std::size_t>(e)];
  return 0.5 * cross(nodes[t[1]] - nodes[t[0]], nodes[t[2]] - nodes[t[0]]);
}

double Mesh::total_polygon_area() const {
  double s = 0.0;
  for (std::size_t e = 0; e < elements.size(); ++e) s += element_area(static_cast<int>(e));
  return s;
}

namespace {

// Tags boundary edges (edges owned by a single triangle).
void tag_boundary(Mesh& mesh) {
  std::map<std::pair<int, int>, std::pair<int, int>> owner;  // edge -> (elem, count)
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& t = mesh.elements[e];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      auto key = std::minmax(a, b);
      auto [it, inserted] = owner.try_emplace({key.first, key.second}, static_cast<int>(e), 0);
      it->second.second += 1;
    }
  }
  mesh.boundary_facets.clear();
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& t = mesh.elements[e];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      auto key = std::minmax(a, b);
      if (owner.at({key.first, key.second}).second != 1) continue;
      const bool outer = std::abs(mesh.nodes[a].norm() - 1.0) <= kOnCircle &&
                         std::abs(mesh.nodes[b].norm() - 1.0) <= kOnCircle;
      mesh.boundary_facets.push_back(
          {{a, b}, outer ? FacetTag::OuterArc : FacetTag::Lateral, static_cast<int>(e)});
    }
  }
}

}  // namespace

Mesh generate_mesh(const ConeDomain& domain, double target_h, double grading_ratio,
                   double r_min) {
  if (domain.dimension != 2)
    fail(ErrorKind::Mesh, "generate_mesh: only planar sectors (n = 2) are meshed");
  if (!(grading_ratio > 0.0 && grading_ratio < 1.0))
    fail(ErrorKind::Mesh, fmt::format("grading_ratio: {} not in (0, 1)", grading_ratio));
  if (!(r_min > 0.0 && r_min < 0.1))
    fail(ErrorKind::Mesh, fmt::format("r_min: {} not in (0, 0.1)", r_min));
  if (!(target_h > 0.0) || domain.opening / target_h < 4.0)
    fail(ErrorKind::Mesh,
         fmt::format("target_h: {} resolves fewer than 4 angular divisions of {}", target_h,
                     domain.opening));

  const double omega = domain.opening;
  const int m = static_cast<int>(std::ceil(omega / target_h - 1e-9));

  // Ring radii, outermost first. Layer radii are q^j, j = 0..L, with q^L <= r_min.
  // Each layer is split into log-uniform sub-rings whose log step matches
  // the angular step omega / m, so elements stay close to isotropic at every
  // scale and the discretization error in N(r) does not grow toward the vertex.
  const double log_q = std::log(grading_ratio);
  const int layers = static_cast<int>(std::ceil(std::log(r_min) / log_q - 1e-9));
  const int sub = std::max(1, static_cast<int>(std::ceil(-log_q / (omega / m) - 1e-9)));
  std::vector<double> radii;
  radii.push_back(1.0);
  for (int j = 0; j < layers; ++j)
    for (int s = 1; s <= sub; ++s)
      radii.push_back(std::exp(log_q * (j + static_cast<double>(s) / sub)));
  std::reverse(radii.begin(), radii.end());

  Mesh mesh;
  mesh.opening = omega;
  mesh.target_h = target_h;
  mesh.grading = {grading_ratio, layers, r_min};
  mesh.nodes.reserve(1 + radii.size() * (m + 1));
  mesh.nodes.emplace_back(0.0, 0.0);
  for (double rho : radii) {
    for (int j = 0; j <= m; ++j) {
      if (j == 0) {
        mesh.nodes.emplace_back(rho, 0.0);
      } else {
        const double th = j == m ? omega : omega * j / m;
        mesh.nodes.emplace_back(rho * std::cos(th), rho * std::sin(th));
      }
    }
  }
  auto id = [m](std::size_t ring, int j) { return static_cast<int>(1 + ring * (m + 1) + j); };

  for (int j = 0; j < m; ++j) mesh.elements.push_back({0, id(0, j), id(0, j + 1)});
  for (std::size_t ring = 0; ring + 1 < radii.size(); ++ring) {
    for (int j = 0; j < m; ++j) {
      const int a0 = id(ring, j), a1 = id(ring, j + 1);
      const int b0 = id(ring + 1, j), b1 = id(ring + 1, j + 1);
      if ((ring + j) % 2 == 0) {
        mesh.elements.push_back({a0, b0, b1});
        mesh.elements.push_back({a0, b1, a1});
      } else {
        mesh.elements.push_back({a0, b0, a1});
        mesh.elements.push_back({a1, b0, b1});
      }
    }
  }
  tag_boundary(mesh);
  return mesh;
}

Vec2 facet_normal(const Mesh& mesh, const Facet& facet) {
  const Vec2& a = mesh.nodes[facet.nodes[0]];
  const Vec2& b = mesh.nodes[facet.nodes[1]];
  Vec2 t = b - a;
  Vec2 n(t.y(), -t.x());
  n.normalize();
  const auto& el = mesh.elements[static_cast<std::size_t>(facet.element)];
  Vec2 c = (mesh.nodes[el[0]] + mesh.nodes[el[1]] + mesh.nodes[el[2]]) / 3.0;
  if (n.dot(c - a) > 0.0) n = -n;
  return n;
}

double check_normal_orthogonality(const Mesh& mesh) {
  double worst = 0.0;
  for (const auto& f : mesh.boundary_facets) {
    if (f.tag != FacetTag::Lateral) continue;
    const Vec2 mid = 0.5 * (mesh.nodes[f.nodes[0]] + mesh.nodes[f.nodes[1]]);
    const Vec2 n = facet_normal(mesh, f);
    worst = std::max(worst, std::abs(n.dot(mid)) / mid.norm());
  }
  return worst;
}

double BallQuadrature::volume_weight_sum() const {
  double s = 0.0;
  for (const auto& q : volume) s += q.w;
  return s;
}

double BallQuadrature::arc_weight_sum() const {
  double s = 0.0;
  for (const auto& q : arc) s += q.w;
  return s;
}

namespace {

struct Builder {
  double r;
  BallQuadrature* out;

  void add_triangle(const Vec2& a, const Vec2& b, const Vec2& c, int elem) {
    const double area = 0.5 * cross(b - a, c - a);
    if (area <= 0.0) return;
    const auto& rule = detail::triangle_rule_degree5();
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.bary[q];
      out->volume.push_back({l[0] * a + l[1] * b + l[2] * c, area * rule.weights[q], elem});
    }
  }

  // Region between the chord p->q and the circle of radius `rho_out`, for
  // polar angles in [phi0, phi1], restricted to radii below `rho_cap`.
  // `d` and `phi_mid` describe the chord line: rho_chord(phi) = d / cos(phi - phi_mid).
  void add_polar_sliver(double phi0, double phi1, double d, double phi_mid, double rho_cap,
                        int elem, bool emit_arc) {
    if (!(phi1 > phi0)) return;
    const auto& gphi = detail::gauss_legendre(8);
    const auto& grho = detail::gauss_legendre(4);
    const double dphi = phi1 - phi0;
    for (std::size_t i = 0; i < gphi.nodes.size(); ++i) {
      const double phi = phi0 + dphi * gphi.nodes[i];
      const double rho_c = d / std::cos(phi - phi_mid);
      const Vec2 dir(std::cos(phi), std::sin(phi));
      const double span = rho_cap - rho_c;
      if (span > 0.0) {
        for (std::size_t j = 0; j < grho.nodes.size(); ++j) {
          const double rho = rho_c + span * grho.nodes[j];
          out->volume.push_back(
              {rho * dir, dphi * gphi.weights[i] * span * grho.weights[j] * rho, elem});
        }
      }
      if (emit_arc) {
        out->arc.push_back({rho_cap * dir, rho_cap * dphi * gphi.weights[i], elem,
                            sector_angle(rho_cap * dir)});
      }
    }
  }

  // Circular segment cut off by the chord between two points on the circle
  // (counterclockwise from p to q), plus its arc rule.
  void add_segment(const Vec2& p, const Vec2& q, int elem) {
    const double dphi = std::atan2(cross(p, q), p.dot(q));
    if (!(dphi > 1e-15)) return;
    const double phi0 = std::atan2(p.y(), p.x());
    const double d = r * std::cos(0.5 * dphi);
    add_polar_sliver(phi0, phi0 + dphi, d, phi0 + 0.5 * dphi, r, elem, true);
  }

  void clip_triangle(const Mesh& mesh, int e) {
    const auto& t = mesh.elements[static_cast<std::size_t>(e)];
    const std::array<Vec2, 3> v{mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]};
    const double r2 = r * r;
    struct Piece {
      Vec2 start, end;
    };
    std::vector<Piece> inside;
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = v[k];
      const Vec2& b = v[(k + 1) % 3];
      const Vec2 ab = b - a;
      // |a + s ab|^2 = r^2
      const double qa = ab.squaredNorm();
      const double qb = 2.0 * a.dot(ab);
      const double qc = a.squaredNorm() - r2;
      std::vector<double> cuts{0.0};
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        // Stable root pair.
        const double qq = -0.5 * (qb + std::copysign(sq, qb));
        double s1 = qq / qa, s2 = qq != 0.0 ? qc / qq : s1;
        if (s1 > s2) std::swap(s1, s2);
        for (double s : {s1, s2})
          if (s > 1e-12 && s < 1.0 - 1e-12) cuts.push_back(s);
      }
      cuts.push_back(1.0);
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Vec2 mid = a + 0.5 * (cuts[i] + cuts[i + 1]) * ab;
        if (mid.squaredNorm() <= r2) {
          Vec2 s = a + cuts[i] * ab, en = a + cuts[i + 1] * ab;
          // Snap crossing points onto the circle.
          if (i > 0) s *= r / s.norm();
          if (i + 2 < cuts.size()) en *= r / en.norm();
          inside.push_back({s, en});
        }
      }
    }
    if (inside.empty()) return;
    std::vector<Vec2> poly;
    auto push = [&poly, this](const Vec2& p) {
      if (poly.empty() || (poly.back() - p).norm() > 1e-14 * r) poly.push_back(p);
    };
    for (const auto& piece : inside) {
      push(piece.start);
      push(piece.end);
    }
    if (poly.size() > 1 && (poly.front() - poly.back()).norm() <= 1e-14 * r) poly.pop_back();
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) add_triangle(poly[0], poly[i], poly[i + 1], e);
    for (std::size_t i = 0; i < inside.size(); ++i) {
      const Vec2& p = inside[i].end;
      const Vec2& q = inside[(i + 1) % inside.size()].start;
      if ((p - q).norm() > 1e-14 * r) add_segment(p, q, e);
    }
  }
};

void lateral_rule(const Mesh& mesh, double r, BallQuadrature& out) {
  const auto& g = detail::gauss_legendre(4);
  for (const auto& f : mesh.boundary_facets) {
    if (f.tag != FacetTag::Lateral) continue;
    Vec2 a = mesh.nodes[f.nodes[0]], b = mesh.nodes[f.nodes[1]];
    if (a.norm() > b.norm()) std::swap(a, b);
    if (a.norm() >= r) continue;
    Vec2 end = b;
    if (b.norm() > r) {
      const Vec2 ab = b - a;
      const double qa = ab.squaredNorm(), qb = 2.0 * a.dot(ab), qc = a.squaredNorm() - r * r;
      const double s = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
      end = a + s * ab;
    }
    const double len = (end - a).norm();
    if (len <= 0.0) continue;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
      out.lateral.push_back({a + g.nodes[i] * (end - a), len * g.weights[i], f.element});
  }
}

}  // namespace

BallQuadrature ball_quadrature(const Mesh& mesh, double r) {
  if (!(r >= mesh.grading.r_min * (1.0 - 1e-12) && r <= 1.0 + 1e-12))
    fail(ErrorKind::Range,
         fmt::format("ball_quadrature: r = {} outside [{}, 1]", r, mesh.grading.r_min));
  r = std::min(r, 1.0);
  BallQuadrature bq;
  bq.r = r;
  Builder builder{r, &bq};
  const auto& rule = detail::triangle_rule_degree5();
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& t = mesh.elements[e];
    const Vec2 &a = mesh.nodes[t[0]], &b = mesh.nodes[t[1]], &c = mesh.nodes[t[2]];
    const double rmax = std::max({a.norm(), b.norm(), c.norm()});
    if (rmax <= r * (1.0 + 1e-13)) {
      bq.interior_elements.push_back(static_cast<int>(e));
      const double area = mesh.element_area(static_cast<int>(e));
      for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        const auto& l = rule.bary[q];
        bq.volume.push_back({l[0] * a + l[1] * b + l[2] * c, area * rule.weights[q],
                             static_cast<int>(e)});
      }
      continue;
    }
    const double rmin = std::min({a.norm(), b.norm(), c.norm()});
    // Edge distances bound the triangle's nearest point from below well
    // enough for a prefilter: any triangle with a vertex inside is cut.
    auto seg_dist = [](const Vec2& p, const Vec2& q) {
      const Vec2 d = q - p;
      const double s = std::clamp(-p.dot(d) / d.squaredNorm(), 0.0, 1.0);
      return (p + s * d).norm();
    };
    const double dmin = std::min({rmin, seg_dist(a, b), seg_dist(b, c), seg_dist(c, a)});
    if (dmin >= r) continue;
    bq.cut_elements.push_back(static_cast<int>(e));
    builder.clip_triangle(mesh, static_cast<int>(e));
  }
  // Slivers between the outer chords and the unit circle.
  for (const auto& f : mesh.boundary_facets) {
    if (f.tag != FacetTag::OuterArc) continue;
    Vec2 p = mesh.nodes[f.nodes[0]], q = mesh.nodes[f.nodes[1]];
    if (cross(p, q) < 0.0) std::swap(p, q);
    p.normalize();
    q.normalize();
    const double dphi = std::atan2(cross(p, q), p.dot(q));
    const double d = std::cos(0.5 * dphi);
    if (r <= d) continue;
    const double phi0 = std::atan2(p.y(), p.x());
    const double phi_mid = phi0 + 0.5 * dphi;
    const double beta = std::acos(std::min(1.0, d / r));
    const double lo = std::max(phi0, phi_mid - beta), hi = std::min(phi0 + dphi, phi_mid + beta);
    builder.add_polar_sliver(lo, hi, d, phi_mid, r, f.element, true);
  }
  lateral_rule(mesh, r, bq);
  return bq;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << fmt::format("mesh opening {:.17g} h {:.17g} ratio {:.17g} layers {} r_min {:.17g}\n",
                    mesh.opening, mesh.target_h, mesh.grading.ratio, mesh.grading.layers,
                    mesh.grading.r_min);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    os << fmt::format("node {} {:.17g} {:.17g}\n", i, mesh.nodes[i].x(), mesh.nodes[i].y());
  for (std::size_t i = 0; i < mesh.elements.size(); ++i) {
    const auto& t = mesh.elements[i];
    os << fmt::format("elem {} {} {} {}\n", i, t[0], t[1], t[2]);
  }
  for (std::size_t i = 0; i < mesh.boundary_facets.size(); ++i) {
    const auto& f = mesh.boundary_facets[i];
    os << fmt::format("facet {} {} {} {} {}\n", i, f.nodes[0], f.nodes[1], facet_tag_name(f.tag),
                      f.element);
  }
}

Mesh read_mesh(std::istream& is) {
  Mesh mesh;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    bool ok = true;
    if (kind == "mesh") {
      std::string k1, k2, k3, k4, k5;
      ls >> k1 >> mesh.opening >> k2 >> mesh.target_h >> k3 >> mesh.grading.ratio >> k4 >>
          mesh.grading.layers >> k5 >> mesh.grading.r_min;
      ok = !ls.fail();
      header = true;
    } else if (kind == "node") {
      std::size_t i;
      double x, y;
      ls >> i >> x >> y;
      ok = !ls.fail() && i == mesh.nodes.size();
      mesh.nodes.emplace_back(x, y);
    } else if (kind == "elem") {
      std::size_t i;
      std::array<int, 3> t;
      ls >> i >> t[0] >> t[1] >> t[2];
      ok = !ls.fail() && i == mesh.elements.size();
      mesh.elements.push_back(t);
    } else if (kind == "facet") {
      std::size_t i;
      Facet f;
      std::string tag;
      ls >> i >> f.nodes[0] >> f.nodes[1] >> tag >> f.element;
      ok = !ls.fail() && i == mesh.boundary_facets.size() &&
           (tag == "lateral" || tag == "outer_arc");
      f.tag = tag == "lateral" ? FacetTag::Lateral : FacetTag::OuterArc;
      mesh.boundary_facets.push_back(f);
    } else {
      ok = false;
    }
    if (!ok) fail(ErrorKind::Io, fmt::format("mesh file line {}: malformed record", lineno));
  }
  if (!header) fail(ErrorKind::Io, "mesh file: missing header record");
  const int n = static_cast<int>(mesh.nodes.size());
  for (const auto& t : mesh.elements)
    for (int v : t)
      if (v < 0 || v >= n) fail(ErrorKind::Io, "mesh file: element references unknown node");
  return mesh;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  boxes_.reserve(mesh.elements.size());
  Box root{1e300, 1e300, -1e300, -1e300};
  for (const auto& t : mesh.elements) {
    Box b{1e300, 1e300, -1e300, -1e300};
    for (int v : t) {
      const Vec2& p = mesh.nodes[static_cast<std::size_t>(v)];
      b = {std::min(b.x0, p.x()), std::min(b.y0, p.y()), std::max(b.x1, p.x()), std::max(b.y1, p.y())};
    }
    boxes_.push_back(b);
    root = {std::min(root.x0, b.x0), std::min(root.y0, b.y0), std::max(root.x1, b.x1),
            std::max(root.y1, b.y1)};
  }
  std::vector<int> all(mesh.elements.size());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
  nodes_.push_back({root, {}, -1});
  build(0, std::move(all), 0);
}

void PointLocator::build(int node, std::vector<int> elems, int depth) {
  constexpr std::size_t kLeaf = 16;
  constexpr int kMaxDepth = 24;
  if (elems.size() <= kLeaf || depth >= kMaxDepth) {
    nodes_[static_cast<std::size_t>(node)].elems = std::move(elems);
    return;
  }
  const Box b = nodes_[static_cast<std::size_t>(node)].box;
  const double xm = 0.5 * (b.x0 + b.x1), ym = 0.5 * (b.y0 + b.y1);
  const Box quads[4] = {{b.x0, b.y0, xm, ym}, {xm, b.y0, b.x1, ym}, {b.x0, ym, xm, b.y1}, {xm, ym, b.x1, b.y1}};
  std::vector<int> parts[4];
  for (int e : elems) {
    const Box& eb = boxes_[static_cast<std::size_t>(e)];
    for (int q = 0; q < 4; ++q)
      if (eb.x0 <= quads[q].x1 && eb.x1 >= quads[q].x0 && eb.y0 <= quads[q].y1 && eb.y1 >= quads[q].y0)
        parts[q].push_back(e);
  }
  // Stop splitting when elements straddle every child.
  if (std::all_of(std::begin(parts), std::end(parts), [&](const auto& p) { return p.size() == elems.size(); })) {
    nodes_[static_cast<std::size_t>(node)].elems = std::move(elems);
    return;
  }
  const int first = static_cast<int>(nodes_.size());
  nodes_[static_cast<std::size_t>(node)].first_child = first;
  for (int q = 0; q < 4; ++q) nodes_.push_back({quads[q], {}, -1});
  for (int q = 0; q < 4; ++q) build(first + q, std::move(parts[q]), depth + 1);
}

double PointLocator::score(int e, const Vec2& x) const {
  const auto& t = mesh_->elements[static_cast<std::size_t>(e)];
  const Vec2 &a = mesh_->nodes[t[0]], &b = mesh_->nodes[t[1]], &c = mesh_->nodes[t[2]];
  const double area2 = cross(b - a, c - a);
  const double la = cross(b - x, c - x) / area2;
  const double lb = cross(c - x, a - x) / area2;
  return std::min({la, lb, 1.0 - la - lb});
}

int PointLocator::locate(const Vec2& x) const {
  int node = 0;
  const Box& rb = nodes_[0].box;
  if (x.x() >= rb.x0 && x.x() <= rb.x1 && x.y() >= rb.y0 && x.y() <= rb.y1) {
    while (nodes_[static_cast<std::size_t>(node)].first_child >= 0) {
      const int first = nodes_[static_cast<std::size_t>(node)].first_child;
      const Box& b = nodes_[static_cast<std::size_t>(node)].box;
      const int q = (x.x() > 0.5 * (b.x0 + b.x1) ? 1 : 0) + (x.y() > 0.5 * (b.y0 + b.y1) ? 2 : 0);
      node = first + q;
    }
    for (int e : nodes_[static_cast<std::size_t>(node)].elems)
      if (score(e, x) >= -1e-10) return e;
  }
  // Outside the mesh or on a leaf seam: nearest element by barycentric score.
  int best = -1;
  double best_score = -std::numeric_limits<double>::max();
  for (std::size_t e = 0; e < mesh_->elements.size(); ++e) {
    const double sc = score(static_cast<int>(e), x);
    if (sc >= -1e-10) return static_cast<int>(e);
    if (sc > best_score) {
      best_score = sc;
      best = static_cast<int>(e);
    }
  }
  return best;
}

}  // namespace conefreq
