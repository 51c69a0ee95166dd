#include "conefreq/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "conefreq/error.hpp"
#include "conefreq/parallel.hpp"
#include "conefreq/spectral.hpp"
#include "quadrature_rules.hpp"

namespace conefreq {

OuterData OuterData::eigen(int k) {
  if (k < 1) fail(ErrorKind::Parameter, fmt::format("outer data: mode {} < 1", k));
  OuterData d;
  d.kind_ = Kind::Eigen;
  d.modes_ = {{k, 1.0}};
  return d;
}

OuterData OuterData::mixed(std::vector<std::pair<int, double>> modes) {
  if (modes.empty()) fail(ErrorKind::Parameter, "outer data: empty mode list");
  for (const auto& [k, c] : modes)
    if (k < 1) fail(ErrorKind::Parameter, fmt::format("outer data: mode {} < 1", k));
  OuterData d;
  d.kind_ = Kind::Mixed;
  d.modes_ = std::move(modes);
  return d;
}

OuterData OuterData::table(std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 2) fail(ErrorKind::Parameter, "outer data: table needs >= 2 samples");
  std::sort(samples.begin(), samples.end());
  OuterData d;
  d.kind_ = Kind::Table;
  d.table_ = std::move(samples);
  return d;
}

OuterData OuterData::zero() { return OuterData{}; }

OuterData OuterData::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  try {
    if (head == "zero") return zero();
    if (head == "eigen") return eigen(std::stoi(rest));
    if (head == "mixed") {
      std::vector<std::pair<int, double>> modes;
      std::stringstream ss(rest);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto c = item.find(':');
        if (c == std::string::npos) throw std::invalid_argument(item);
        modes.emplace_back(std::stoi(item.substr(0, c)), std::stod(item.substr(c + 1)));
      }
      return mixed(std::move(modes));
    }
    if (head == "table") {
      std::ifstream in(rest);
      if (!in) fail(ErrorKind::Io, fmt::format("outer data: cannot open table '{}'", rest));
      std::vector<std::pair<double, double>> samples;
      double t, v;
      while (in >> t >> v) samples.emplace_back(t, v);
      return table(std::move(samples));
    }
  } catch (const std::logic_error&) {
    fail(ErrorKind::Parameter, fmt::format("outer data: cannot parse '{}'", spec));
  }
  fail(ErrorKind::Parameter, fmt::format("outer data: unknown kind in '{}'", spec));
}

double OuterData::operator()(double theta, double omega) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Eigen:
    case Kind::Mixed: {
      double s = 0.0;
      for (const auto& [k, c] : modes_) {
        const double psi = k == 1 ? 1.0 / std::sqrt(omega)
                                  : std::sqrt(2.0 / omega) * std::cos((k - 1) * kPi * theta / omega);
        s += c * psi;
      }
      return s;
    }
    case Kind::Table: {
      if (theta <= table_.front().first) return table_.front().second;
      if (theta >= table_.back().first) return table_.back().second;
      auto it = std::upper_bound(table_.begin(), table_.end(), std::make_pair(theta, -1e300));
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (theta - lo.first) / (hi.first - lo.first);
      return (1.0 - w) * lo.second + w * hi.second;
    }
  }
  return 0.0;
}

std::string OuterData::describe() const {
  switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::Eigen: return fmt::format("eigen:{}", modes_.front().first);
    case Kind::Mixed: {
      std::string s = "mixed:";
      for (std::size_t i = 0; i < modes_.size(); ++i)
        s += fmt::format("{}{}:{}", i ? "," : "", modes_[i].first, modes_[i].second);
      return s;
    }
    case Kind::Table: return fmt::format("table({} samples)", table_.size());
  }
  return "";
}

namespace {

struct ElementGeometry {
  double area;
  std::array<Vec2, 3> grad;  // barycentric gradients
};

ElementGeometry element_geometry(const Mesh& mesh, int e) {
  const auto& t = mesh.elements[static_cast<std::size_t>(e)];
  const Vec2 &a = mesh.nodes[t[0]], &b = mesh.nodes[t[1]], &c = mesh.nodes[t[2]];
  ElementGeometry g;
  g.area = 0.5 * cross(b - a, c - a);
  const double inv = 1.0 / (2.0 * g.area);
  g.grad[0] = Vec2(b.y() - c.y(), c.x() - b.x()) * inv;
  g.grad[1] = Vec2(c.y() - a.y(), a.x() - c.x()) * inv;
  g.grad[2] = Vec2(a.y() - b.y(), b.x() - a.x()) * inv;
  return g;
}

}  // namespace

SolutionField::SolutionField(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values,
                             SolveLog log)
    : mesh_(std::move(mesh)), values_(std::move(values)), log_(std::move(log)) {
  if (static_cast<std::size_t>(values_.size()) != mesh_->nodes.size())
    fail(ErrorKind::Parameter, "solution: value count does not match mesh nodes");
  gradients_.resize(mesh_->elements.size());
  for (std::size_t e = 0; e < mesh_->elements.size(); ++e) {
    const auto g = element_geometry(*mesh_, static_cast<int>(e));
    const auto& t = mesh_->elements[e];
    gradients_[e] = values_[t[0]] * g.grad[0] + values_[t[1]] * g.grad[1] + values_[t[2]] * g.grad[2];
  }
  log_.max_abs_u = values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0;
}

double SolutionField::value_in(int elem, const Vec2& x) const {
  const auto& t = mesh_->elements[static_cast<std::size_t>(elem)];
  return values_[t[0]] + gradients_[static_cast<std::size_t>(elem)].dot(x - mesh_->nodes[t[0]]);
}

std::vector<Vec2> recover_gradient(const SolutionField& field) { return field.gradients(); }

SolutionField interpolate(std::shared_ptr<const Mesh> mesh,
                          const std::function<double(const Vec2&)>& fn) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->nodes.size()));
  for (std::size_t i = 0; i < mesh->nodes.size(); ++i) v[static_cast<Eigen::Index>(i)] = fn(mesh->nodes[i]);
  return SolutionField(std::move(mesh), std::move(v));
}

std::vector<bool> dirichlet_nodes(const Mesh& mesh) {
  std::vector<bool> mask(mesh.nodes.size(), false);
  for (const auto& f : mesh.boundary_facets)
    if (f.tag == FacetTag::OuterArc) mask[f.nodes[0]] = mask[f.nodes[1]] = true;
  return mask;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Element-chunked triplet assembly; chunks are concatenated in order so the
// result does not depend on the worker count.
Triplets stiffness_triplets(const Mesh& mesh, const std::function<double(const Vec2&)>& A) {
  const std::size_t ne = mesh.elements.size();
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(ne, 64));
  std::vector<Triplets> parts(chunks);
  const auto& rule = detail::triangle_rule_degree5();
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * ne / chunks, hi = (c + 1) * ne / chunks;
    auto& out = parts[c];
    out.reserve(9 * (hi - lo));
    for (std::size_t e = lo; e < hi; ++e) {
      const auto g = element_geometry(mesh, static_cast<int>(e));
      const auto& t = mesh.elements[e];
      double a_int = 0.0;
      for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        const auto& l = rule.bary[q];
        const Vec2 x = l[0] * mesh.nodes[t[0]] + l[1] * mesh.nodes[t[1]] + l[2] * mesh.nodes[t[2]];
        a_int += rule.weights[q] * A(x);
      }
      a_int *= g.area;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.emplace_back(t[i], t[j], a_int * g.grad[i].dot(g.grad[j]));
    }
  });
  Triplets all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

// Load vector of the frozen forcings: int_lateral f(x,u) phi - int g(x,u) phi.
Eigen::VectorXd forcing_load(const Mesh& mesh, const CoefficientSet& coeffs, const SolutionField& u) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.nodes.size()));
  if (coeffs.has_g) {
    const auto& rule = detail::triangle_rule_degree5();
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
      const auto& t = mesh.elements[e];
      const double area = mesh.element_area(static_cast<int>(e));
      for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        const auto& l = rule.bary[q];
        const Vec2 x = l[0] * mesh.nodes[t[0]] + l[1] * mesh.nodes[t[1]] + l[2] * mesh.nodes[t[2]];
        const double gv = coeffs.g(x, u.value_in(static_cast<int>(e), x)) * area * rule.weights[q];
        for (int i = 0; i < 3; ++i) b[t[i]] -= gv * l[i];
      }
    }
  }
  if (coeffs.has_f) {
    const auto& g = detail::gauss_legendre(4);
    for (const auto& f : mesh.boundary_facets) {
      if (f.tag != FacetTag::Lateral) continue;
      const Vec2& a = mesh.nodes[f.nodes[0]];
      const Vec2& c = mesh.nodes[f.nodes[1]];
      const double len = (c - a).norm();
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        const double s = g.nodes[q];
        const Vec2 x = a + s * (c - a);
        const double fv = coeffs.f(x, u.value_in(f.element, x)) * len * g.weights[q];
        b[f.nodes[0]] += fv * (1.0 - s);
        b[f.nodes[1]] += fv * s;
      }
    }
  }
  return b;
}

}  // namespace

Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh,
                                               const std::function<double(const Vec2&)>& A) {
  const auto n = static_cast<Eigen::Index>(mesh.nodes.size());
  Eigen::SparseMatrix<double> K(n, n);
  const Triplets t = stiffness_triplets(mesh, A);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

double energy_norm(const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                   const std::function<double(const Vec2&)>& A) {
  const auto& rule = detail::triangle_rule_degree5();
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto g = element_geometry(mesh, static_cast<int>(e));
    const auto& t = mesh.elements[e];
    Vec2 grad = Vec2::Zero();
    for (int i = 0; i < 3; ++i) grad += (u[t[i]] - (v.size() ? v[t[i]] : 0.0)) * g.grad[i];
    double a_int = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.bary[q];
      a_int += rule.weights[q] *
               A(l[0] * mesh.nodes[t[0]] + l[1] * mesh.nodes[t[1]] + l[2] * mesh.nodes[t[2]]);
    }
    s += a_int * g.area * grad.squaredNorm();
  }
  return std::sqrt(s);
}

SolutionField solve(std::shared_ptr<const Mesh> mesh_ptr, const CoefficientSet& coeffs,
                    const OuterData& outer, const SolveOptions& options) {
  if (!(options.tol > 0.0)) fail(ErrorKind::Parameter, "solve: tol must be positive");
  if (options.max_iter < 1) fail(ErrorKind::Parameter, "solve: max_iter must be >= 1");
  const Mesh& mesh = *mesh_ptr;
  const std::size_t n = mesh.nodes.size();
  const auto fixed = dirichlet_nodes(mesh);

  std::vector<int> dof(n, -1);
  int nfree = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!fixed[i]) dof[i] = nfree++;
  if (nfree == static_cast<int>(n)) fail(ErrorKind::Assembly, "solve: no Dirichlet nodes on the outer arc");

  Eigen::VectorXd u_full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    if (fixed[i]) {
      const Vec2& x = mesh.nodes[i];
      double th = std::atan2(x.y(), x.x());
      if (th < -1e-14) th += 2.0 * kPi;
      u_full[static_cast<Eigen::Index>(i)] = outer(std::max(th, 0.0), mesh.opening);
    }

  const Triplets all = stiffness_triplets(mesh, coeffs.A);
  Triplets ff, fd;
  ff.reserve(all.size());
  for (const auto& t : all) {
    const int r = dof[static_cast<std::size_t>(t.row())];
    if (r < 0) continue;
    const int c = dof[static_cast<std::size_t>(t.col())];
    if (c >= 0) ff.emplace_back(r, c, t.value());
    else fd.emplace_back(r, t.col(), t.value());
  }
  Eigen::SparseMatrix<double> Kff(nfree, nfree), Kfd(nfree, static_cast<Eigen::Index>(n));
  Kff.setFromTriplets(ff.begin(), ff.end());
  Kfd.setFromTriplets(fd.begin(), fd.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kff);
  if (ldlt.info() != Eigen::Success) fail(ErrorKind::Assembly, "solve: stiffness factorization failed");

  const Eigen::VectorXd b0 = -(Kfd * u_full);
  auto restrict = [&](const Eigen::VectorXd& full) {
    Eigen::VectorXd r(nfree);
    for (std::size_t i = 0; i < n; ++i)
      if (dof[i] >= 0) r[dof[i]] = full[static_cast<Eigen::Index>(i)];
    return r;
  };
  auto scatter = [&](const Eigen::VectorXd& free, Eigen::VectorXd& full) {
    for (std::size_t i = 0; i < n; ++i)
      if (dof[i] >= 0) full[static_cast<Eigen::Index>(i)] = free[dof[i]];
  };
  auto linear_solve = [&](const Eigen::VectorXd& rhs, double& alg_res) {
    Eigen::VectorXd x = ldlt.solve(rhs);
    const double nr = rhs.norm();
    auto residual = [&] { return nr > 0.0 ? (Kff * x - rhs).norm() / nr : (Kff * x).norm(); };
    alg_res = residual();
    for (int refine = 0; refine < 3 && alg_res > 1e-12; ++refine) {
      x += ldlt.solve(rhs - Kff * x);
      alg_res = residual();
    }
    if (!x.allFinite()) fail(ErrorKind::Assembly, "solve: non-finite solution");
    return x;
  };

  SolveLog log;
  const bool nonlinear = coeffs.has_f || coeffs.has_g;
  if (!nonlinear) {
    Eigen::VectorXd uf = linear_solve(b0, log.algebraic_residual);
    scatter(uf, u_full);
    log.picard_steps = 1;
    log.final_residual = log.algebraic_residual;
    log.residual_history = {log.final_residual};
    log.converged = true;
    return SolutionField(mesh_ptr, u_full, log);
  }

  // Picard iteration with the forcings frozen at the current iterate.
  auto nonlinear_rhs = [&](const Eigen::VectorXd& full) {
    SolutionField current(mesh_ptr, full);
    return Eigen::VectorXd(b0 + restrict(forcing_load(mesh, coeffs, current)));
  };
  Eigen::VectorXd uf = restrict(u_full);
  double damping = 1.0;
  double prev_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iter; ++it) {
    const Eigen::VectorXd rhs = nonlinear_rhs(u_full);
    const double nr = rhs.norm();
    const double res = nr > 0.0 ? (Kff * uf - rhs).norm() / nr : (Kff * uf).norm();
    log.residual_history.push_back(res);
    if (it > 0 && res > prev_res) damping *= 0.5;
    prev_res = res;
    const Eigen::VectorXd target = linear_solve(rhs, log.algebraic_residual);
    const Eigen::VectorXd next = uf + damping * (target - uf);
    const double denom = std::max(next.norm(), 1e-300);
    const double change = (next - uf).norm() / denom;
    uf = next;
    scatter(uf, u_full);
    log.picard_steps = it + 1;
    if (change <= options.tol) {
      const Eigen::VectorXd rhs_end = nonlinear_rhs(u_full);
      const double nre = rhs_end.norm();
      log.final_residual = nre > 0.0 ? (Kff * uf - rhs_end).norm() / nre : (Kff * uf).norm();
      if (log.final_residual <= std::max(options.tol, 1e-12) || next.norm() == 0.0) {
        log.converged = true;
        return SolutionField(mesh_ptr, u_full, log);
      }
    }
  }
  std::string hist;
  for (double r : log.residual_history) hist += fmt::format(" {:.3e}", r);
  fail(ErrorKind::Diverged,
       fmt::format("solve: Picard iteration did not converge in {} steps; residual history:{}",
                   options.max_iter, hist));
}

void write_solution(std::ostream& os, const SolutionField& field) {
  os << fmt::format("solution nodes {}\n", field.values().size());
  for (Eigen::Index i = 0; i < field.values().size(); ++i)
    os << fmt::format("node {} {:.17g}\n", i, field.values()[i]);
}

SolutionField read_solution(std::istream& is, std::shared_ptr<const Mesh> mesh) {
  std::string word;
  std::size_t count = 0;
  is >> word;
  std::string nodes_kw;
  is >> nodes_kw >> count;
  if (word != "solution" || nodes_kw != "nodes" || !is)
    fail(ErrorKind::Io, "solution file: missing header");
  if (count != mesh->nodes.size())
    fail(ErrorKind::Io, "solution file: node count does not match the mesh");
  Eigen::VectorXd v(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t idx;
    is >> word >> idx >> v[static_cast<Eigen::Index>(i)];
    if (!is || word != "node" || idx != i)
      fail(ErrorKind::Io, fmt::format("solution file: malformed record {}", i));
  }
  return SolutionField(std::move(mesh), std::move(v));
}

void write_solve_log(std::ostream& os, const SolveLog& log) {
  os << fmt::format("picard_steps = {}\n", log.picard_steps);
  os << fmt::format("final_residual = {:.6e}\n", log.final_residual);
  os << fmt::format("algebraic_residual = {:.6e}\n", log.algebraic_residual);
  os << fmt::format("converged = {}\n", log.converged ? "true" : "false");
  os << fmt::format("max_abs_u = {:.12g}\n", log.max_abs_u);
  for (std::size_t i = 0; i < log.residual_history.size(); ++i)
    os << fmt::format("residual.{} = {:.6e}\n", i, log.residual_history[i]);
}

}  // namespace conefreq
