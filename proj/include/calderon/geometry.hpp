#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "calderon/types.hpp"

namespace calderon::geometry {

/// Position and parameter derivatives of a closed curve at one parameter value.
struct CurveSample {
  Complex pos;
  Complex d1;
  Complex d2;
};

/// Periodic parameterization t in [0,1) -> R^2 (as complex), counterclockwise.
using CurveParam = std::function<CurveSample(double)>;

enum class ShapeKind { Circle, Ellipse, SmoothedStadium, FourierCircle, SharedArcDisc };

/// Declarative description of an analytic star-shaped curve.
///
/// Circle: center, radius. Ellipse: center, semi_a, semi_b.
/// SmoothedStadium: quartic superellipse (x/a)^4 + (y/b)^4 = 1 around center.
/// FourierCircle: r(theta) = radius (1 + amplitude cos(mode theta)).
/// SharedArcDisc: r(theta) = radius on the arc |theta - arc_center| <= arc_half_width,
/// pulled in by `indent * radius` elsewhere through an erf transition of width
/// `transition`; used to build nested domains that share a boundary arc.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Circle;
  Vec2 center{0.0, 0.0};
  double radius = 1.0;
  double semi_a = 1.0;
  double semi_b = 1.0;
  double amplitude = 0.0;
  int mode = 0;
  double arc_center = kPi;
  double arc_half_width = 1.0;
  double indent = 0.3;
  double transition = 0.15;
};

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

/// Smooth closed boundary curve sampled at M equispaced parameter nodes.
class Domain2D {
 public:
  /// Validates closure, simplicity and star-shapedness with respect to `center`.
  Domain2D(CurveParam param, Vec2 center, int nodes, std::string label = "curve");

  int size() const { return static_cast<int>(samples_.size()); }
  double parameter(int j) const { return static_cast<double>(j) / size(); }
  const CurveSample& sample(int j) const { return samples_[j]; }
  CurveSample evaluate(double t) const { return param_(t); }
  const CurveParam& param() const { return param_; }

  Vec2 point(int j) const { return Vec2(samples_[j].pos); }
  /// Outward unit normal.
  Vec2 normal(int j) const;
  /// |d param / dt| at node j.
  double speed(int j) const { return std::abs(samples_[j].d1); }
  /// Signed curvature (positive for convex counterclockwise arcs).
  double curvature(int j) const;
  double curvature_at(double t) const;

  Vec2 center() const { return center_; }
  const std::string& label() const { return label_; }

  double length() const;
  double area() const;
  /// Largest arclength gap between neighbouring nodes.
  double max_spacing() const;
  /// Winding-number membership test against the fine boundary polygon.
  bool contains(Vec2 x) const;
  /// Distance from x to the sampled boundary (nearest node, refined by Newton).
  double distance_to_boundary(Vec2 x) const;
  /// Parameter of the boundary point nearest to x.
  double nearest_parameter(Vec2 x) const;

  /// CSV rows "t,x1,x2,nu1,nu2".
  std::string to_csv() const;

 private:
  CurveParam param_;
  Vec2 center_;
  std::string label_;
  std::vector<CurveSample> samples_;
};

Domain2D make_domain(const ShapeSpec& spec, int nodes);

/// Closed union of parameter intervals Gamma; Sigma is its complement.
/// Intervals may wrap (first > second means [first,1) U [0,second]).
class BoundaryPartition {
 public:
  explicit BoundaryPartition(std::vector<std::pair<double, double>> gamma_intervals);

  bool in_gamma(double t) const;
  bool in_sigma(double t) const { return !in_gamma(t); }
  const std::vector<std::pair<double, double>>& gamma() const { return gamma_; }

  /// Node-level mask (true on Gamma).
  std::vector<bool> gamma_mask(const Domain2D& domain) const;

 private:
  std::vector<std::pair<double, double>> gamma_;
};

/// Inversion in the circle of center a, radius r touching the domain at x0,
/// followed by the similarity y = k (psi(x) - x0) that sends x0 to the origin,
/// the outward normal at x0 to +e1 and the inversion disc to |y + e1| < 1.
struct ConformalNormalization {
  Vec2 a;
  double r = 1.0;
  Vec2 x0;
  Complex similarity{1.0, 0.0};

  /// The inversion psi(x) = (x-a) r^2/|x-a|^2 + a; an involution.
  Vec2 psi(Vec2 x) const;
  Vec2 to_normalized(Vec2 x) const;
  Vec2 from_normalized(Vec2 y) const;
  /// Jacobian factor of x -> to_normalized(x): |k|^2 r^4 |x-a|^-4.
  double weight(Vec2 x) const;
};

struct NormalizedDomain {
  Domain2D image;
  ConformalNormalization map;
};

/// Flattens `domain` against its tangent line at the boundary point of parameter t0.
/// When `radius` is given it is used instead of the curvature-based search.
NormalizedDomain normalize_at(const Domain2D& domain, double t0,
                              std::optional<double> radius = std::nullopt);

/// Pulls a field back from the normalized picture: u*(x) = u(to_normalized(x)).
/// In two dimensions the Kelvin power factor is 1.
ScalarField kelvin_transfer(ScalarField image_field, const ConformalNormalization& map);

/// H_K(xi) = max over K of x . xi.
double supporting_function(const std::vector<Vec2>& points, Vec2 xi);

/// Tensor Gauss-Legendre (radial) x trapezoid (boundary parameter) rule over a
/// star-shaped domain, x = c + rho (gamma(t) - c).
struct InteriorQuadrature {
  std::vector<Vec2> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const;
};

InteriorQuadrature interior_quadrature(const Domain2D& domain, int radial, int angular);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Sum with a fixed pairwise reduction order.
double pairwise_sum(const double* data, std::size_t n);
Complex pairwise_sum(const Complex* data, std::size_t n);

}  // namespace calderon::geometry
