#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "calderon/geometry.hpp"
#include "calderon/laplace.hpp"
#include "calderon/report.hpp"

namespace calderon::cgo {

/// Complex vector with zeta . zeta = 0 (bilinear square, no conjugation).
struct NullVector {
  std::vector<Complex> zeta;

  NullVector() = default;
  explicit NullVector(std::vector<Complex> z) : zeta(std::move(z)) {}

  std::size_t dim() const { return zeta.size(); }
  Complex square() const;
  double norm() const;
  bool is_null(double rel_tol = 1e-12) const;
  Complex operator[](std::size_t k) const { return zeta[k]; }
};

/// gamma = i e1 + e2 in dimension n (zero-padded).
NullVector gamma_vector(std::size_t n = 2, double scale = 1.0);
/// Componentwise conjugate of gamma_vector.
NullVector gamma_bar(std::size_t n = 2, double scale = 1.0);

struct NullPair {
  NullVector zeta;
  NullVector eta;
  /// max(|zeta - a gamma|, |eta + a gamma_bar|) / (eps a) with eps = |z - 2ia e1| / 2a.
  double c_meas = 0.0;
  int newton_steps = 0;
};

/// z = zeta + eta with zeta on the gamma line and eta on the gamma_bar line.
NullPair null_decompose_2d(const Complex2& z);

/// Decomposition near 2ia e1. n = 3 uses minimum-norm Newton seeded at (a gamma, -a gamma_bar).
NullPair null_decompose_near(const std::vector<Complex>& z, double a, double eps_max = 0.25);

/// Quintic smoothstep: 1 for x1 <= -2c, 0 for x1 >= -c.
/// `vanishing` switches to the chi = 0 profile.
struct CutoffSpec {
  double c = 0.2;
  bool vanishing = false;

  double operator()(double x1) const;
};

class CorrectedExponential {
 public:
  CorrectedExponential(double h, NullVector zeta, CutoffSpec chi, laplace::HarmonicField w);

  double h() const { return h_; }
  const NullVector& zeta() const { return zeta_; }
  const CutoffSpec& chi() const { return chi_; }
  const laplace::HarmonicField& w() const { return w_; }

  /// -i x . zeta / h.
  Complex exponent(Vec2 x) const;
  Complex plane(Vec2 x) const { return std::exp(exponent(x)); }
  Complex evaluate(Vec2 x) const { return plane(x) + w_.evaluate(x); }
  std::array<Complex, 2> gradient(Vec2 x) const;

  /// Largest |u| over the boundary nodes of `domain` with chi = 1.
  double gamma_residual(const geometry::Domain2D& domain) const;
  /// Largest |w + e chi| over the solver's mesh nodes.
  double data_residual() const;

 private:
  double h_;
  NullVector zeta_;
  CutoffSpec chi_;
  laplace::HarmonicField w_;
};

/// Solver on `domain` with extra panel breaks where the cutoff profile
/// starts and stops (x1 = -c, -2c), so each panel sees a smooth data piece.
std::shared_ptr<const laplace::LayerSolver> make_cgo_solver(const geometry::Domain2D& domain, const CutoffSpec& chi);

/// Raises std::invalid_argument if the boundary nodes of `domain` or of the
/// solver mesh are coarser than a tenth of the wavelength h / |Re zeta|.
void check_resolution(const geometry::Domain2D& domain, const laplace::LayerSolver& solver,
                      const NullVector& zeta, double h);

CorrectedExponential build_corrected_exponential(const geometry::Domain2D& domain,
                                                 std::shared_ptr<const laplace::LayerSolver> solver,
                                                 const NullVector& zeta, double h, const CutoffSpec& chi);
CorrectedExponential build_corrected_exponential(const geometry::Domain2D& domain, const NullVector& zeta,
                                                 double h, const CutoffSpec& chi);

struct WBoundOptions {
  double slope_tol = 0.05;
  int radial = 16;
  int angular = 256;
};

/// ||w||_{H1} along a ray zeta fixed, h decreasing; slope of log||w|| vs 1/h
/// against -c Im zeta_1 + |Im zeta'|.
DecayReport verify_w_bound(const geometry::Domain2D& domain, const NullVector& zeta, const CutoffSpec& chi,
                           const std::vector<double>& h_list, const WBoundOptions& options = {});

/// Fitted constant C2: max over h of ||w|| / ((1+|zeta|/h)^{1/2} e^{-c Im zeta_1/h} e^{|Im zeta'|/h}).
double fitted_c2(const DecayReport& report, const NullVector& zeta, double c);

}  // namespace calderon::cgo
