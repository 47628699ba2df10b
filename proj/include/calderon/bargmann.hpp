#pragma once

#include <functional>
#include <vector>

#include "calderon/log_complex.hpp"
#include "calderon/pairing.hpp"
#include "calderon/report.hpp"

namespace calderon::bargmann {

/// Potential on the line, smooth on [lo, hi] and zero outside; lo, hi may be infinite.
/// With `entire` set, f restricted to [lo, hi] extends to an entire function and the
/// transform integrates along Im y = Im z, which avoids the e^{|Im z|^2/2h} cancellation.
struct LinePotential {
  std::function<Complex(Complex)> f;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double sup = 1.0;
  bool entire = false;

  static LinePotential constant(Complex value = 1.0);
  /// Indicator of (-inf, edge].
  static LinePotential half_line(double edge = 0.0);
};

/// Tf(z) = int e^{-(z-y)^2/2h} f(y) dy on the line.
LogComplex transform(const LinePotential& f, Complex z, double h);
/// Same on the plane; f given at interior quadrature nodes.
LogComplex transform(const pairing::PotentialGrid& f, const Complex2& z, double h);

/// Tf at a list of nodes; dim 1 for line potentials, 2 for planar ones.
struct BargmannGrid {
  double h = 1.0;
  int dim = 2;
  std::vector<std::vector<Complex>> z_nodes;
  std::vector<LogComplex> values;
  double sup = 0.0;
  /// Largest x1 with f != 0 (-inf for f = 0).
  double support_x1_max = 0.0;

  std::string csv() const;
};

BargmannGrid evaluate_grid(const LinePotential& f, const std::vector<Complex>& z, double h);
BargmannGrid evaluate_grid(const pairing::PotentialGrid& f, const std::vector<Complex2>& z, double h);

/// Nodes x + i y on an nx x ny tensor grid (z2 = z2_fixed in the planar case).
std::vector<Complex> box_grid(double x_lo, double x_hi, double y_lo, double y_hi, int nx, int ny);

struct BoundRow {
  std::size_t node = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// rhs - lhs in log units; +inf where Tf = 0.
  double slack = 0.0;
};

struct BoundCheck {
  BoundReport report;
  std::vector<BoundRow> rows;

  Json to_json() const;
};

/// |Tf(z)| <= (2 pi h)^{n/2} e^{|Im z|^2 / 2h} |f|.
BoundCheck check_apriori_bound(const BargmannGrid& grid, double tol = 1e-8);

/// |Tf(z)| <= (2 pi h)^{n/2} e^{(|Im z|^2 - |Re z1|^2) / 2h} |f| at nodes with Re z1 >= 0.
/// measured_slope: least-squares slope of log|Tf| - |Im z|^2/2h against |Re z1|^2/2h.
/// Rejects f with support reaching x1 > 0.
BoundCheck check_halfspace_bound(const BargmannGrid& grid, double tol = 1e-8);

/// |Im z1|^2 for Re z1 <= 0, |Im z1|^2 - |Re z1|^2 otherwise.
double weight_phi(Complex z1);

struct Superposition {
  /// Contribution of |t| <= t_split.
  LogComplex inner;
  /// Quadrature of |t| >= t_split (truncated at the Gaussian tail).
  LogComplex tail;
  /// e^{(|Im z|^2 - |Re z|^2)/2h} sqrt2 e^{|Re z'|/h} e^{-t_split^2/4h} int |f|.
  LogComplex tail_bound;
  /// Bound on the discarded |t| > t_max part, relative to the kept terms.
  double truncation = 0.0;
  int t_nodes = 0;
};

/// Tf(z) = (2 pi h)^{-1} e^{-z^2/2h} int e^{-t^2/2h} int f(y) e^{-i y.(t + iz)/h} dy dt, split at |t| = t_split.
Superposition superposed_transform(const pairing::PotentialGrid& f, const Complex2& z, double h, double t_split);

struct ImprovedBoundSetup {
  double c = 0.2;
  double eps = 0.0;
  double a = 0.0;
  /// Nodes across each x1 slice; the oracle run doubles it and halves the slice width.
  int slice_nodes = 32;
  double slope_tol = 0.05;
};

struct ImprovedBoundReport {
  DecayReport decay;
  double c_meas = 0.0;
  double eps_max = 0.0;
  double a_min = 0.0;
  /// Largest |log value - refined log value| over h_list.
  double refinement_gap = 0.0;
};

/// Tf(z) on `domain` by x1 slices, Gauss-Legendre across each chord. Slices are
/// narrow enough for the Laplace rate |z|/h; for real z right of the domain the
/// sweep stops once the remaining slices are 60 log units below the running max.
LogComplex sliced_transform(const geometry::Domain2D& domain, const ScalarField& f, const Complex2& z, double h,
                            int slice_nodes = 32, double width_scale = 1.0);

/// Smallest admissible a for eps: (c + 4 eps) / eps^2.
double minimal_a(double c, double eps);

/// log(e^{-Phi(z1)/2h} |Tf(z)|) at z = 2a e1 against 1/h, bound slope -ca/4.
/// f must vanish for x1 >= 0 on `domain`; the parameter rule eps < c/8C, a > (c+4eps)/eps^2 is checked first.
ImprovedBoundReport check_improved_bound(const geometry::Domain2D& domain, const ScalarField& f,
                                         const ImprovedBoundSetup& setup, const std::vector<double>& h_list);

}  // namespace calderon::bargmann
