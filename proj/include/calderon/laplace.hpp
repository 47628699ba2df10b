#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "calderon/boundary_mesh.hpp"
#include "calderon/geometry.hpp"

namespace calderon::laplace {

class HarmonicField;

/// Second-kind double-layer Nystrom solver for the interior Dirichlet problem.
/// Holes get one logarithmic charge each, fixed by a zero-mean density
/// constraint on that component.
class LayerSolver : public std::enable_shared_from_this<LayerSolver> {
 public:
  static std::shared_ptr<const LayerSolver> create(BoundaryMesh mesh, double max_condition = 1e12);

  const BoundaryMesh& mesh() const { return mesh_; }
  int unknowns() const { return static_cast<int>(matrix_.rows()); }
  double condition_estimate() const { return condition_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  /// Dirichlet data at the mesh nodes.
  HarmonicField solve(const Eigen::VectorXcd& node_data) const;
  HarmonicField solve(const std::function<Complex(Vec2)>& g) const;
  /// Densities for several right-hand sides (one column each).
  Eigen::MatrixXcd solve_many(const Eigen::MatrixXcd& node_data) const;

  /// Real rows r with u(z) = r . coefficients (and the gradient components
  /// when requested). Rows have length unknowns().
  void evaluation_rows(Vec2 z, double* value, double* dx, double* dy) const;
  /// P x unknowns() matrix of value rows.
  Eigen::MatrixXd evaluation_matrix(const std::vector<Vec2>& points) const;
  /// Gradient rows, stacked as [d/dx1 ; d/dx2] (2P x unknowns()).
  Eigen::MatrixXd gradient_matrix(const std::vector<Vec2>& points) const;
  /// Outward normal derivative at the mesh nodes from the interior side.
  Eigen::VectorXcd normal_derivative(const Eigen::VectorXcd& coefficients) const;

  /// Arclength distance to the nearest node divided by the local node spacing.
  double spacing_ratio(Vec2 z) const;

 private:
  LayerSolver(BoundaryMesh mesh, double max_condition);

  BoundaryMesh mesh_;
  Eigen::MatrixXd matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double condition_ = 0.0;
};

/// Harmonic function represented by a solved density.
class HarmonicField {
 public:
  HarmonicField(std::shared_ptr<const LayerSolver> solver, Eigen::VectorXcd coefficients);

  Complex evaluate(Vec2 x) const;
  /// (du/dx1, du/dx2).
  std::array<Complex, 2> gradient(Vec2 x) const;
  std::vector<Complex> evaluate_many(const std::vector<Vec2>& points) const;

  /// Boundary values at the mesh nodes.
  Eigen::VectorXcd trace() const;
  /// Boundary value at parameter t of component c (panel interpolation).
  Complex trace_at(double t, int component = 0) const;
  /// Outward normal derivative at the mesh nodes.
  Eigen::VectorXcd normal_derivative() const;

  const Eigen::VectorXcd& coefficients() const { return coefficients_; }
  const LayerSolver& solver() const { return *solver_; }

 private:
  std::shared_ptr<const LayerSolver> solver_;
  Eigen::VectorXcd coefficients_;
};

/// Interior Dirichlet problem on a Domain2D with data sampled at its nodes.
struct DirichletProblem {
  const geometry::Domain2D* domain = nullptr;
  std::vector<Complex> boundary_data;
};

/// Panels used for a Domain2D with M nodes: M / 16 panels of order 16.
std::shared_ptr<const LayerSolver> make_solver(const geometry::Domain2D& domain);

/// Solves with data interpolated trigonometrically from the equispaced nodes.
HarmonicField solve_dirichlet(const DirichletProblem& problem);

/// Trigonometric interpolation of equispaced periodic samples at t.
Complex periodic_interpolate(const std::vector<Complex>& samples, double t);

/// H1(D) norm over an interior rule.
double h1_norm(const HarmonicField& u, const geometry::InteriorQuadrature& quad);
double h1_norm(const std::function<Complex(Vec2)>& value,
               const std::function<std::array<Complex, 2>(Vec2)>& gradient,
               const geometry::InteriorQuadrature& quad);

/// Dirichlet Green's function G(x, y) with -Laplace G = delta_y, G = 0 on the boundary.
class GreenKernel {
 public:
  struct Value {
    double value = 0.0;
    /// Set when x or y lies within two boundary-node spacings of the boundary.
    bool near_boundary = false;
  };

  /// Points closer than `flag_distance` to the boundary nodes are flagged;
  /// zero means two local panel-node spacings.
  explicit GreenKernel(std::shared_ptr<const LayerSolver> solver, double flag_distance = 0.0);

  Value operator()(Vec2 x, Vec2 y) const;
  /// Regular part H(., y) as a harmonic field.
  HarmonicField regular_part(Vec2 y) const;
  const LayerSolver& solver() const { return *solver_; }

 private:
  std::shared_ptr<const LayerSolver> solver_;
  double flag_distance_;

  bool near_boundary(Vec2 x) const;
};

/// Green kernel on a Domain2D. The log data is nearly singular for points
/// near the boundary, so the panels are four times finer than make_solver's.
GreenKernel green_kernel(const geometry::Domain2D& domain);

}  // namespace calderon::laplace
