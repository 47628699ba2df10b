#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calderon/geometry.hpp"
#include "calderon/laplace.hpp"
#include "calderon/report.hpp"

namespace calderon::runge {

/// Omega1 inside Omega2; `shared` marks Omega1 boundary nodes on the boundary of Omega2.
struct NestedPair {
  geometry::Domain2D omega1;
  geometry::Domain2D omega2;
  std::vector<bool> shared;
  /// Point sources in the closure of Omega2 minus Omega1.
  std::vector<Vec2> sources;

  std::size_t shared_count() const;
};

/// Validates inclusion (Omega1 nodes inside Omega2 or within shared_tol of its boundary)
/// and that no source lies in Omega1.
NestedPair make_nested_pair(geometry::Domain2D omega1, geometry::Domain2D omega2, std::vector<Vec2> sources,
                            double shared_tol = 1e-10);

/// First n points of a Halton sequence in Omega2 \ Omega1 kept `margin1` from the boundary
/// of Omega1 and `margin2` from that of Omega2. Prefixes are nested.
std::vector<Vec2> halton_sources(const geometry::Domain2D& omega1, const geometry::Domain2D& omega2, std::size_t n,
                                 double margin1, double margin2, std::size_t skip = 0);

/// Unit disc and the shared-arc disc indented by `indent` off the arc around theta = pi.
NestedPair shared_arc_pair(std::size_t n_sources = 800, int nodes = 256, double indent = 0.3, double margin1 = 0.05,
                           double margin2 = 0.1);

/// Green's function of Omega2 for unit disc Omega2 centred at `center` with radius `radius`, by images.
double disc_green(Vec2 x, Vec2 y, Vec2 center = {0.0, 0.0}, double radius = 1.0);
/// Gradient in x of disc_green.
Vec2 disc_green_gradient(Vec2 x, Vec2 y, Vec2 center = {0.0, 0.0}, double radius = 1.0);

/// Green kernels of Omega2 at the sources, sampled on Omega1.
class RungeProblem {
 public:
  explicit RungeProblem(NestedPair pair, int radial = 24, int angular = 128);

  const NestedPair& pair() const { return pair_; }
  const geometry::InteriorQuadrature& quadrature() const { return quad_; }
  const laplace::GreenKernel& green() const { return green_; }
  std::shared_ptr<const laplace::LayerSolver> omega1_solver() const { return solver1_; }

  /// G(x_q, y_j) at the Omega1 quadrature nodes (rows) for every source (columns).
  const Eigen::MatrixXd& quadrature_matrix() const { return gq_; }
  /// Same at the Omega1 mesh nodes.
  const Eigen::MatrixXd& boundary_matrix() const { return gb_; }
  /// G(x, y_j) at arbitrary points.
  Eigen::MatrixXd kernel_matrix(const std::vector<Vec2>& points) const;

 private:
  NestedPair pair_;
  geometry::InteriorQuadrature quad_;
  laplace::GreenKernel green_;
  std::shared_ptr<const laplace::LayerSolver> solver1_;
  Eigen::MatrixXd regular_;  // regular-part densities, one column per source
  Eigen::MatrixXd gq_, gb_;
};

struct SuperpositionField {
  /// Harmonic field on Omega1 with the boundary values of the superposition.
  laplace::HarmonicField field;
  /// max |sum a_j G(x, y_j)| over shared nodes, by cubic extrapolation along the normal.
  double shared_max = 0.0;
  /// max over quadrature nodes of |field - direct sum|.
  double harmonic_residual = 0.0;
};

/// sum_j a_j G(., y_j) with a over the first a.size() sources.
SuperpositionField green_superposition(const RungeProblem& problem, const Eigen::VectorXd& a);

/// p - H with H harmonic on Omega2 minus the closed disc K, H = p on the boundary of Omega2 and
/// H = 0 on the circle of K: harmonic off K and zero on the whole boundary of Omega2.
class AdjustedPolynomial {
 public:
  AdjustedPolynomial(const geometry::Domain2D& omega2, std::function<double(Vec2)> p, Vec2 center, double radius,
                     int hole_panels = 16);
  double operator()(Vec2 x) const;

 private:
  const geometry::Domain2D* omega2_;
  std::function<double(Vec2)> p_;
  std::shared_ptr<const laplace::LayerSolver> solver_;
  Eigen::VectorXd coefficients_;
};

/// Harmonic target on Omega1: Dirichlet solution for `data` on its boundary.
laplace::HarmonicField harmonic_target(const RungeProblem& problem, const std::function<double(Vec2)>& data);

struct RungeResult {
  std::size_t sources = 0;
  double lambda = 0.0;
  Eigen::VectorXd amplitudes;
  double l2_error = 0.0;
  double relative_error = 0.0;
  int rank = 0;
  /// Set when the least-squares matrix is rank deficient at lambda = 0.
  std::string advice;
};

/// Minimises |sum a_j G(., y_j) - u|^2_{L2(Omega1)} + lambda |a|^2 over the first n sources;
/// minimum-norm solution by complete orthogonal decomposition.
RungeResult runge_approximate(const RungeProblem& problem, const Eigen::VectorXd& target_at_quadrature,
                              std::size_t n_sources, double lambda = 0.0);
RungeResult runge_approximate(const RungeProblem& problem, const laplace::HarmonicField& target,
                              std::size_t n_sources, double lambda = 0.0);

/// CSV with columns n_sources, l2_error, relative_error, lambda.
std::string convergence_csv(const std::vector<RungeResult>& rows);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double relative = 0.0;
};

/// int_{Omega1} u v = -int_{dOmega1 \ dOmega2} (u dw/dn - w du/dn) ds with w = int G_{Omega2}(x, .) v(x) dx.
/// Both sides by independent quadrature; v should be negligible near the boundary of Omega1.
IdentityCheck verify_orthogonality_identity(const RungeProblem& problem, const ScalarField& v,
                                            const laplace::HarmonicField& u, int radial = 48, int angular = 256);

}  // namespace calderon::runge
