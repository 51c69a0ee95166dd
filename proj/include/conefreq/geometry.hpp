#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "conefreq/types.hpp"

namespace conefreq {

// Cone with vertex at the origin, truncated at the unit ball. For n = 2 the
// opening is the sector angle; for n = 3 it is the colatitude of an
// axisymmetric cap (used by the spectral module only).
struct ConeDomain {
  int dimension = 2;
  double opening = kPi / 2;
  double outer_radius = 1.0;
  double cap_measure = kPi / 2;

  bool contains(const Vec2& x) const;
};

ConeDomain build_domain(int dimension, double opening);

enum class FacetTag { Lateral, OuterArc };

const char* facet_tag_name(FacetTag tag);

struct Facet {
  std::array<int, 2> nodes;
  FacetTag tag;
  int element;  // adjacent triangle
};

struct Grading {
  double ratio = 0.7;
  int layers = 0;
  double r_min = 1e-3;
};

struct Mesh {
  double opening = kPi / 2;
  double target_h = 0.05;
  Grading grading;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> elements;  // counterclockwise
  std::vector<Facet> boundary_facets;
  int quadrature_order = 5;

  double element_area(int e) const;
  double total_polygon_area() const;
};

Mesh generate_mesh(const ConeDomain& domain, double target_h,
                   double grading_ratio = 0.7, double r_min = 1e-3);

// Max over lateral facets of |nu . x| / |x| at the facet midpoint.
double check_normal_orthogonality(const Mesh& mesh);

// Outward unit normal of a boundary facet.
Vec2 facet_normal(const Mesh& mesh, const Facet& facet);

struct QuadPoint {
  Vec2 x;
  double w;
  int elem;
};

struct ArcPoint {
  Vec2 x;
  double w;  // arc-length weight
  int elem;
  double theta;
};

// Integration rules for B_r ∩ Omega, ∂B_r ∩ Omega and B_r ∩ ∂Omega.
// Cut triangles are split into a chord polygon (fan of sub-triangles) plus
// circular segments integrated in polar coordinates; the slivers between the
// outer chords and the unit circle are attached to their adjacent triangle,
// so volume and arc weights reproduce the exact sector measures.
struct BallQuadrature {
  double r = 0.0;
  std::vector<int> interior_elements;
  std::vector<int> cut_elements;
  std::vector<QuadPoint> volume;
  std::vector<ArcPoint> arc;
  std::vector<QuadPoint> lateral;

  double volume_weight_sum() const;
  double arc_weight_sum() const;
};

BallQuadrature ball_quadrature(const Mesh& mesh, double r);

// Plain-text mesh export, one record per line:
//   node <i> <x> <y>
//   elem <i> <a> <b> <c>
//   facet <i> <a> <b> <tag> <elem>
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

// Element containing x (barycentric tolerance 1e-10); points outside the
// mesh map to the element with the largest minimum barycentric coordinate.
// Quadtree over element bounding boxes, so graded meshes stay cheap.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  int locate(const Vec2& x) const;

 private:
  struct Box {
    double x0, y0, x1, y1;
  };
  struct Node {
    Box box;
    std::vector<int> elems;
    int first_child;
  };
  void build(int node, std::vector<int> elems, int depth);
  double score(int e, const Vec2& x) const;

  const Mesh* mesh_;
  std::vector<Box> boxes_;
  std::vector<Node> nodes_;
};

}  // namespace conefreq
