#pragma once

#include <vector>

#include <Eigen/Dense>

#include "calderon/geometry.hpp"

namespace calderon::laplace {

/// Quadrature node of a panel discretization. `weight` integrates in the curve
/// parameter; ds = |d1| * weight.
struct MeshNode {
  Complex pos;
  Complex d1;
  Complex d2;
  double weight = 0.0;
  double t = 0.0;
  int component = 0;
};

/// Composite Gauss-Legendre discretization of one or more closed curves.
/// Each component is oriented with the domain on its left; components after
/// the first marked as holes carry a point strictly inside the hole.
class BoundaryMesh {
 public:
  struct Component {
    geometry::CurveParam curve;
    /// 0 = b_0 < b_1 < ... < b_n = 1.
    std::vector<double> breaks;
    bool hole = false;
    Complex hole_center{0.0, 0.0};
  };

  struct Panel {
    int component = 0;
    double t0 = 0.0;
    double t1 = 0.0;
    int first = 0;
    double arclength = 0.0;
  };

  BoundaryMesh(std::vector<Component> components, int order);

  /// Uniform panels in the boundary parameter of a Domain2D.
  static BoundaryMesh from_domain(const geometry::Domain2D& domain, int panels, int order = 16);

  int size() const { return static_cast<int>(nodes_.size()); }
  int order() const { return order_; }
  int hole_count() const { return static_cast<int>(holes_.size()); }
  const std::vector<MeshNode>& nodes() const { return nodes_; }
  const std::vector<Panel>& panels() const { return panels_; }
  const std::vector<Component>& components() const { return components_; }
  const std::vector<Complex>& hole_centers() const { return holes_; }
  /// Index of the hole unknown for component c, or -1.
  int hole_index(int component) const;

  /// d/dt on one panel's reference nodes, scaled to the parameter.
  const Eigen::MatrixXd& reference_differentiation() const { return diff_; }
  const std::vector<double>& reference_nodes() const { return ref_x_; }
  const std::vector<double>& reference_weights() const { return ref_w_; }
  /// Lagrange weights evaluating the panel interpolant at reference x in [-1,1].
  Eigen::RowVectorXd lagrange_row(double x) const;

  /// Parameter derivative of nodal samples, panel by panel.
  Eigen::VectorXcd differentiate(const Eigen::VectorXcd& values) const;
  /// Interpolates nodal samples of component c at parameter t.
  Complex interpolate(const Eigen::VectorXcd& values, int component, double t) const;

  /// Arclength integral of nodal samples.
  Complex integrate(const Eigen::VectorXcd& values) const;

 private:
  std::vector<Component> components_;
  int order_;
  std::vector<MeshNode> nodes_;
  std::vector<Panel> panels_;
  std::vector<Complex> holes_;
  std::vector<int> hole_of_component_;
  std::vector<double> ref_x_, ref_w_, bary_;
  Eigen::MatrixXd diff_;
};

}  // namespace calderon::laplace
