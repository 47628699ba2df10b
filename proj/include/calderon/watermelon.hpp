#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "calderon/laplace.hpp"
#include "calderon/pairing.hpp"
#include "calderon/report.hpp"

namespace calderon::watermelon {

/// Semi-disc {Re s > cut, |s - cut| < R} with corners rounded at radius delta/10,
/// minus the closed disc D(L, b).
struct BarrierRegion {
  double delta = 0.05;
  double R = 10.0;
  double L = 2.0;
  double b = 0.5;
  /// Abscissa of the cut diameter; unset means -2 delta.
  std::optional<double> cut;

  double cut_x() const { return cut.value_or(-2.0 * delta); }
  double corner_radius() const { return delta / 10.0; }
  /// Height of the straight part of the cut.
  double corner_y() const;
  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;
  bool contains(Complex s) const;
};

struct MeshOptions {
  /// Multiplies every panel count (2 = all grids doubled).
  double scale = 1.0;
  /// Half-height of the finely resolved part of the cut.
  double fine_height = 1.5;
  int inner_panels = 24;
  int order = 16;
};

/// Dirichlet solve with constant data on each of two boundary components.
laplace::HarmonicField solve_two_values(std::shared_ptr<const laplace::LayerSolver> solver, double outer_value,
                                        double inner_value);

/// Layer solver on the barrier region: outer curve then the inner circle (a hole).
std::shared_ptr<const laplace::LayerSolver> barrier_solver(const BarrierRegion& region, const MeshOptions& options = {});

class BarrierFunction {
 public:
  BarrierFunction(BarrierRegion region, double outer_value, double inner_value,
                  std::shared_ptr<const laplace::LayerSolver> solver);

  const BarrierRegion& region() const { return region_; }
  double outer_value() const { return outer_; }
  double inner_value() const { return inner_; }
  /// c with inner value -c.
  double c() const { return -inner_; }
  const laplace::LayerSolver& solver() const { return *solver_; }
  std::shared_ptr<const laplace::LayerSolver> solver_ptr() const { return solver_; }

  double operator()(Complex s) const;
  std::vector<double> evaluate_many(const std::vector<Complex>& s) const;
  /// Outward normal derivative at the mesh nodes.
  Eigen::VectorXd normal_derivative() const;

  /// phi on an nx x ny box; points outside the region get NaN.
  std::string csv(double x_lo, double x_hi, double y_lo, double y_hi, int nx, int ny) const;

 private:
  BarrierRegion region_;
  double outer_, inner_;
  std::shared_ptr<const laplace::LayerSolver> solver_;
  laplace::HarmonicField field_;
};

/// phi = 4 delta^2 on the semi-disc boundary, -c on the inner circle.
BarrierFunction build_barrier(const BarrierRegion& region, double c, const MeshOptions& options = {});
/// Same mesh, given constants.
BarrierFunction build_barrier_values(const BarrierRegion& region, double outer_value, double inner_value,
                                     const MeshOptions& options = {});

struct MaximumPrincipleReport {
  std::size_t probes = 0;
  double min_value = 0.0;
  double max_value = 0.0;
  /// Largest excursion outside [min data, max data]; <= 0 when the principle holds.
  double violation = 0.0;
  bool pass = false;
};

MaximumPrincipleReport check_maximum_principle(const BarrierFunction& phi, std::size_t probes = 1000,
                                               unsigned seed = 1, double tol = 1e-8);

struct HopfReport {
  /// Minimum over |y| <= r of d(4 delta^2 - phi)/d(inward normal) on the cut.
  double min_derivative = 0.0;
  double at_y = 0.0;
  double max_derivative = 0.0;
  /// delta * min_derivative / 2, the constant the Hopf step produces before the strip estimate.
  double c_prime_hopf = 0.0;
  bool degenerate = false;
  bool pass = false;
};

/// Rejects r closer than five rounding radii to the corners.
HopfReport check_hopf(const BarrierFunction& phi, double r, int samples = 401);

struct HarnackReport {
  /// phi~ = 4 delta^2 - phi at L - b - delta^2, and |phi~ - c| there.
  double reference = 0.0;
  double deviation = 0.0;
  /// Range of phi~(iy) / reference over |y| <= r.
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  /// Same divided by delta: phi~(iy) vanishes linearly at the cut, 2 delta away.
  double normalized_min = 0.0;
  double normalized_max = 0.0;
  bool degenerate = false;
};

HarnackReport check_harnack(const BarrierFunction& phi, double r, int samples = 201);

/// Raised when F breaks a hypothesis bound at a boundary sample.
class HypothesisViolation : public std::invalid_argument {
 public:
  HypothesisViolation(const std::string& what, Complex sample, double excess)
      : std::invalid_argument(what), sample_(sample), excess_(excess) {}
  Complex sample() const { return sample_; }
  double excess() const { return excess_; }

 private:
  Complex sample_;
  double excess_;
};

struct PropagateOptions {
  /// Strip |Re s| <= delta, |Im s| <= r.
  double r = 1.0;
  int strip_nx = 11;
  int strip_ny = 101;
  double tol = 1e-8;
};

struct Propagation {
  double h = 0.0;
  double c_prime = 0.0;
  /// max over the strip of f - phi, f = 2h log|F| - (Im s)^2 + (Re s)^2.
  double max_slack = 0.0;
  /// max over outer samples of 2h log|F| - Phi, and over inner samples of 2h log|F| - Phi + c.
  double outer_hypothesis = 0.0;
  double inner_hypothesis = 0.0;
  std::size_t boundary_samples = 0;
  /// 2h log|F| <= Phi(s) - c' on the strip (checked when the verdict passes).
  bool conclusion_holds = false;
  bool pass = false;

  Json to_json(double delta, double c) const;
};

/// F given by log|F(s)| (-inf for F(s) = 0).
Propagation propagate_decay(const BarrierFunction& phi, const std::function<double(Complex)>& log_abs_F, double h,
                            const PropagateOptions& options = {});

struct StripBound {
  double h = 0.0;
  /// log of the bound on (2 pi h)^{-1} |Tf| over the strip obtained from propagate_decay (log |f| when it does not apply).
  double log_certified = 0.0;
  /// log of (2 pi h)^{-1} max |Tf| over strip points by direct quadrature.
  double log_measured = 0.0;
  bool propagated = false;
  double c_prime = 0.0;
};

struct VanishingConclusion {
  std::vector<StripBound> bounds;
  double limit_certified = 0.0;
  double limit_measured = 0.0;
  /// min of the two extrapolations.
  double limit = 0.0;
  bool monotone = true;
  bool inconclusive = false;
  std::string note;

  Json to_json() const;
};

/// Extrapolates per-h strip bounds (at least three, h decreasing) to h -> 0: fits log B = alpha + beta / h; beta < 0
/// with a monotone sequence gives 0, otherwise linear Richardson in h from the last two values.
VanishingConclusion conclude_vanishing(const std::vector<StripBound>& bounds);

struct PipelineSetup {
  BarrierRegion region{0.01, 10.0, 2.0, 0.5, std::nullopt};
  double c = 0.2;
  double r = 0.5;
  std::vector<double> h_list{0.04, 0.02, 0.01};
  int slices = 5;
  int radial = 24;
  int angular = 384;
  /// Strip points per slice for the measured bound.
  int strip_points = 6;
  MeshOptions mesh;
};

struct PipelineReport {
  double c_prime = 0.0;
  std::vector<Propagation> propagations;
  std::vector<std::string> rejections;
  VanishingConclusion conclusion;
  double sup_f = 0.0;
  double strip_max_f = 0.0;
};

/// propagate_decay applied to F(s) = Tf(s, x2) / (2 pi h |f|) for x2 across the strip of `domain`
/// (a domain in x1 <= 0 tangent to x1 = 0), then conclude_vanishing over h_list.
PipelineReport run_vanishing_pipeline(const geometry::Domain2D& domain, const ScalarField& f,
                                      const PipelineSetup& setup);

}  // namespace calderon::watermelon
