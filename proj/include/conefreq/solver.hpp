#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "conefreq/coefficients.hpp"
#include "conefreq/geometry.hpp"

namespace conefreq {

// Dirichlet trace on the outer arc as a function of the polar angle.
class OuterData {
 public:
  enum class Kind { Eigen, Mixed, Table, Zero };

  static OuterData eigen(int k);
  static OuterData mixed(std::vector<std::pair<int, double>> modes);
  static OuterData table(std::vector<std::pair<double, double>> samples);
  static OuterData zero();
  // "eigen:K", "mixed:K:C,K:C,...", "table:PATH" (lines "theta value"), "zero".
  static OuterData parse(const std::string& spec);

  Kind kind() const { return kind_; }
  const std::vector<std::pair<int, double>>& modes() const { return modes_; }
  double operator()(double theta, double omega) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Zero;
  std::vector<std::pair<int, double>> modes_;
  std::vector<std::pair<double, double>> table_;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 50;
};

struct SolveLog {
  int picard_steps = 0;
  double final_residual = 0.0;
  double algebraic_residual = 0.0;
  std::vector<double> residual_history;
  bool converged = false;
  double max_abs_u = 0.0;
};

// Nodal P1 field with cached per-element gradients.
class SolutionField {
 public:
  SolutionField(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values, SolveLog log = {});

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  const SolveLog& log() const { return log_; }
  // Linear function of element `elem` evaluated (or extrapolated) at x.
  double value_in(int elem, const Vec2& x) const;
  const Vec2& gradient(int elem) const { return gradients_[static_cast<std::size_t>(elem)]; }
  const std::vector<Vec2>& gradients() const { return gradients_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  Eigen::VectorXd values_;
  std::vector<Vec2> gradients_;
  SolveLog log_;
};

SolutionField solve(std::shared_ptr<const Mesh> mesh, const CoefficientSet& coeffs,
                    const OuterData& outer, const SolveOptions& options = {});

std::vector<Vec2> recover_gradient(const SolutionField& field);

SolutionField interpolate(std::shared_ptr<const Mesh> mesh,
                          const std::function<double(const Vec2&)>& fn);

// Node flags for the outer-arc Dirichlet boundary.
std::vector<bool> dirichlet_nodes(const Mesh& mesh);

// Full stiffness matrix of the weight A (no boundary conditions).
Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh,
                                               const std::function<double(const Vec2&)>& A);

// (integral of A |grad(u - v)|^2)^{1/2} over the mesh; v may be empty.
double energy_norm(const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                   const std::function<double(const Vec2&)>& A);

// Nodal file "node <i> <value>" aligned with the mesh export.
void write_solution(std::ostream& os, const SolutionField& field);
SolutionField read_solution(std::istream& is, std::shared_ptr<const Mesh> mesh);
void write_solve_log(std::ostream& os, const SolveLog& log);

}  // namespace conefreq
