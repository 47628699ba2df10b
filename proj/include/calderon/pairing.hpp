#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "calderon/cgo.hpp"
#include "calderon/log_complex.hpp"
#include "calderon/report.hpp"

namespace calderon::pairing {

/// f sampled at the nodes of an interior quadrature of `domain`.
struct PotentialGrid {
  const geometry::Domain2D* domain = nullptr;
  geometry::InteriorQuadrature quad;
  std::vector<Complex> values;
  double sup = 0.0;

  std::size_t size() const { return values.size(); }
  PotentialGrid scaled(Complex alpha) const;
};

PotentialGrid sample_potential(const geometry::Domain2D& domain, const geometry::InteriorQuadrature& quad,
                               const ScalarField& f);

/// Evaluation rows of a solver at fixed nodes; harmonic fields become matrix-vector products.
class NodeSampler {
 public:
  NodeSampler(std::shared_ptr<const laplace::LayerSolver> solver, const std::vector<Vec2>& nodes);

  std::vector<Complex> values(const laplace::HarmonicField& w) const;
  /// u = plane wave + w at the nodes.
  std::vector<Complex> values(const cgo::CorrectedExponential& u) const;
  std::vector<Complex> plane_values(const cgo::CorrectedExponential& u) const;

  const std::vector<Vec2>& nodes() const { return nodes_; }

 private:
  std::shared_ptr<const laplace::LayerSolver> solver_;
  std::vector<Vec2> nodes_;
  Eigen::MatrixXd rows_;
};

/// Quadrature of int f u v with u, v given at the grid nodes; accumulated in log scale.
LogComplex pair(const PotentialGrid& f, const std::vector<Complex>& u, const std::vector<Complex>& v);
LogComplex pair(const PotentialGrid& f, const cgo::CorrectedExponential& u, const cgo::CorrectedExponential& v);

/// int f(x) e^{-i x.z/h} dx.
LogComplex fourier_moment(const PotentialGrid& f, const std::vector<Complex>& z, double h);

/// The identity  int f e_{zeta+eta} = pair(f, u_zeta, u_eta) - T1 - T2 - T3
/// with T1 = int f e_zeta w_eta, T2 = int f e_eta w_zeta, T3 = int f w_zeta w_eta.
struct IdentityCheck {
  Complex lhs;
  Complex moment;
  Complex t1, t2, t3;
  double residual = 0.0;
  /// residual / (|lhs| + |moment| + |t1| + |t2| + |t3|).
  double relative = 0.0;
};

/// `lhs_grid` evaluates the left side; `f` with `sampler` (same nodes) the right.
IdentityCheck moment_identity(const PotentialGrid& lhs_grid, const PotentialGrid& f, const NodeSampler& sampler,
                              const cgo::CorrectedExponential& u_zeta, const cgo::CorrectedExponential& u_eta);

struct FourierSetup {
  const geometry::Domain2D* domain = nullptr;
  cgo::CutoffSpec chi;
  int radial = 24;
  int angular = 384;
  double quad_tol = 1e-8;
  double slope_tol = 0.05;
};

struct FourierEstimateReport {
  /// log |int f e^{-ix.z/h}| (max over probe points z), bound_slope = -ca/2 + 2 C_meas eps a.
  DecayReport decay;
  /// Slope of log(h * bound side) against 1/h, and whether it matches bound_slope within 5%.
  double bound_side_slope = 0.0;
  bool bound_bookkeeping_ok = false;
  std::vector<double> residuals;
  std::vector<double> log_corrections;
  double c_meas = 0.0;
  bool identity_ok = false;
  bool pass = false;
};

/// Sampled C_meas over the sphere |z - 2ia e1| = 2 eps a (2D).
double measure_decomposition_constant(double a, double eps, int samples = 64, unsigned seed = 1);

/// Checks the Fourier-decay estimate along h_list at z near 2ia e1.
/// Rejects eps >= c / (8 C_meas) with std::invalid_argument.
FourierEstimateReport verify_fourier_estimate(const ScalarField& f, const FourierSetup& setup, double a, double eps,
                                              const std::vector<double>& h_list);

struct MomentEntry {
  cgo::NullVector zeta;
  cgo::NullVector eta;
  double h = 1.0;
  Complex moment;
};

struct MomentSet {
  std::vector<MomentEntry> entries;

  Json to_json() const;
  static MomentSet from_json(const Json& j);
};

struct PixelGrid {
  int nx = 16, ny = 16;
  double x_lo = -1, x_hi = 1, y_lo = -1, y_hi = 1;

  /// Pixel index of a point, or -1 outside the box.
  int index(Vec2 x) const;
  Vec2 center(int i) const;
  static PixelGrid bounding(const geometry::Domain2D& domain, int nx, int ny);
};

/// Everything the forward map needs: one solver, one quadrature, the pixel map.
struct ReconstructionSetup {
  const geometry::Domain2D* domain = nullptr;
  cgo::CutoffSpec chi;
  std::shared_ptr<const laplace::LayerSolver> solver;
  geometry::InteriorQuadrature quad;
  std::shared_ptr<const NodeSampler> sampler;
  PixelGrid grid;
  std::vector<int> pixel_of_node;

  static ReconstructionSetup create(const geometry::Domain2D& domain, const cgo::CutoffSpec& chi, int radial,
                                    int angular, const PixelGrid& grid);
};

/// Frequencies z = 2ia e1 + (k1, k2) on an n1 x n2 tensor grid with |k1| <= k1_max, |k2| <= k2_max <= 2a.
struct FrequencyGrid {
  double a = 3.0;
  double h = 1.0;
  int n1 = 20, n2 = 20;
  double k1_max = 6.0;
  double k2_max = 5.7;
};

std::vector<std::pair<cgo::NullVector, cgo::NullVector>> frequency_pairs(const FrequencyGrid& g);

/// `forward`, when given, receives the pixel forward matrix of the same pairs.
MomentSet generate_moments(const PotentialGrid& f, const ReconstructionSetup& setup, const FrequencyGrid& g,
                           Eigen::MatrixXcd* forward = nullptr);

/// Rows: moments; columns: pixels; entry = int over the pixel of u_zeta u_eta.
Eigen::MatrixXcd forward_matrix(const MomentSet& moments, const ReconstructionSetup& setup);

struct Reconstruction {
  /// Pixel values, row-major in x1 then x2 (index = ix * ny + iy).
  std::vector<Complex> pixels;
  PotentialGrid potential;
  double lambda = 0.0;
  double condition = 0.0;
  double moment_residual = 0.0;
};

/// Tikhonov least squares min |A c - m|^2 + lambda sigma_max(A)^2 |c|^2 over pixel values.
/// lambda unset: discrepancy principle against quad_tol |m| on a decade grid.
Reconstruction reconstruct(const MomentSet& moments, const ReconstructionSetup& setup,
                           std::optional<double> lambda = std::nullopt, double quad_tol = 1e-8,
                           const Eigen::MatrixXcd* forward = nullptr);

/// Area-weighted pixel averages of f over the setup's quadrature.
std::vector<Complex> pixel_average(const PotentialGrid& f, const ReconstructionSetup& setup);
/// Relative L2 error of reconstructed pixels against the pixel averages of f.
double relative_pixel_error(const Reconstruction& r, const PotentialGrid& f, const ReconstructionSetup& setup);

std::string pixels_csv(const Reconstruction& r, const PixelGrid& grid);

}  // namespace calderon::pairing
