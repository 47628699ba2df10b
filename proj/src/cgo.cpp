#include "calderon/cgo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "calderon/parallel.hpp"

namespace calderon::cgo {

namespace {
constexpr Complex I(0.0, 1.0);

double max_log_range() { return std::log(1e300); }
}  // namespace

Complex NullVector::square() const {
  Complex s = 0.0;
  for (auto z : zeta) s += z * z;
  return s;
}

double NullVector::norm() const {
  double s = 0.0;
  for (auto z : zeta) s += std::norm(z);
  return std::sqrt(s);
}

bool NullVector::is_null(double rel_tol) const {
  const double n = norm();
  return std::abs(square()) <= rel_tol * n * n;
}

NullVector gamma_vector(std::size_t n, double scale) {
  std::vector<Complex> z(n, 0.0);
  z[0] = I * scale;
  z[1] = scale;
  return NullVector(z);
}

NullVector gamma_bar(std::size_t n, double scale) {
  std::vector<Complex> z(n, 0.0);
  z[0] = -I * scale;
  z[1] = scale;
  return NullVector(z);
}

NullPair null_decompose_2d(const Complex2& z) {
  const Complex alpha = (z[1] - I * z[0]) / 2.0;
  const Complex beta = (z[1] + I * z[0]) / 2.0;
  NullPair p;
  p.zeta = NullVector({I * alpha, alpha});
  p.eta = NullVector({-I * beta, beta});
  return p;
}

namespace {

double measured_constant(const std::vector<Complex>& z, const NullPair& p, double a) {
  const std::size_t n = z.size();
  double dist = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Complex target = (k == 0 ? 2.0 * I * a : 0.0);
    dist += std::norm(z[k] - target);
  }
  const double eps = std::sqrt(dist) / (2.0 * a);
  if (eps == 0.0) return 0.0;
  const NullVector g = gamma_vector(n, a), gb = gamma_bar(n, a);
  double dz = 0.0, de = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    dz += std::norm(p.zeta[k] - g[k]);
    de += std::norm(p.eta[k] + gb[k]);
  }
  return std::max(std::sqrt(dz), std::sqrt(de)) / (eps * a);
}

}  // namespace

NullPair null_decompose_near(const std::vector<Complex>& z, double a, double eps_max) {
  const std::size_t n = z.size();
  if (n != 2 && n != 3) throw std::invalid_argument("null_decompose_near: dimension must be 2 or 3");
  if (!(a > 0.0)) throw std::invalid_argument("null_decompose_near: a must be positive");
  double dist = 0.0;
  for (std::size_t k = 0; k < n; ++k) dist += std::norm(z[k] - (k == 0 ? 2.0 * I * a : 0.0));
  dist = std::sqrt(dist);
  if (!(dist < 2.0 * eps_max * a)) {
    throw std::invalid_argument("null_decompose_near: |z - 2ia e1| >= 2 eps_max a");
  }

  NullPair p;
  if (n == 2) {
    p = null_decompose_2d({z[0], z[1]});
  } else {
    Eigen::Vector3cd zv(z[0], z[1], z[2]);
    Eigen::Vector3cd zeta(I * a, a, 0.0);
    const double tol = 1e-15 * a * a;
    int step = 0;
    bool converged = false;
    for (; step < 50; ++step) {
      const Eigen::Vector3cd rest = zv - zeta;
      Eigen::Vector2cd F(zeta.transpose() * zeta, rest.transpose() * rest);
      if (F.cwiseAbs().maxCoeff() <= tol) {
        converged = true;
        break;
      }
      Eigen::Matrix<Complex, 2, 3> J;
      J.row(0) = 2.0 * zeta.transpose();
      J.row(1) = -2.0 * rest.transpose();
      const Eigen::Matrix2cd JJ = J * J.adjoint();
      const Eigen::Vector2cd y = JJ.fullPivLu().solve(F);
      zeta -= J.adjoint() * y;
      if (!zeta.allFinite()) break;
    }
    if (!converged) {
      throw NumericalError("null_decompose_near: Newton did not converge in 50 steps", static_cast<double>(step));
    }
    p.zeta = NullVector({zeta[0], zeta[1], zeta[2]});
    const Eigen::Vector3cd eta = zv - zeta;
    p.eta = NullVector({eta[0], eta[1], eta[2]});
    p.newton_steps = step;
  }
  p.c_meas = measured_constant(z, p, a);
  return p;
}

double CutoffSpec::operator()(double x1) const {
  if (vanishing) return 0.0;
  const double s = (-c - x1) / c;
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return std::clamp(s * s * s * (10.0 + s * (-15.0 + 6.0 * s)), 0.0, 1.0);
}

CorrectedExponential::CorrectedExponential(double h, NullVector zeta, CutoffSpec chi, laplace::HarmonicField w)
    : h_(h), zeta_(std::move(zeta)), chi_(chi), w_(std::move(w)) {}

Complex CorrectedExponential::exponent(Vec2 x) const {
  return -I * (x.x1 * zeta_[0] + x.x2 * zeta_[1]) / h_;
}

std::array<Complex, 2> CorrectedExponential::gradient(Vec2 x) const {
  const Complex e = plane(x);
  auto g = w_.gradient(x);
  g[0] += -I * zeta_[0] / h_ * e;
  g[1] += -I * zeta_[1] / h_ * e;
  return g;
}

double CorrectedExponential::gamma_residual(const geometry::Domain2D& domain) const {
  double worst = 0.0;
  for (int j = 0; j < domain.size(); ++j) {
    const Vec2 x = domain.point(j);
    if (chi_(x.x1) != 1.0) continue;
    // Mesh component 0 shares the Domain2D parameter.
    const Complex u = plane(x) + w_.trace_at(domain.parameter(j), 0);
    worst = std::max(worst, std::abs(u));
  }
  return worst;
}

double CorrectedExponential::data_residual() const {
  const auto trace = w_.trace();
  const auto& nodes = w_.solver().mesh().nodes();
  double worst = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Vec2 x(nodes[i].pos);
    worst = std::max(worst, std::abs(trace[i] + plane(x) * chi_(x.x1)));
  }
  return worst;
}

std::shared_ptr<const laplace::LayerSolver> make_cgo_solver(const geometry::Domain2D& domain, const CutoffSpec& chi) {
  const int panels = std::max(1, domain.size() / 16);
  std::vector<double> breaks;
  for (int k = 0; k <= panels; ++k) breaks.push_back(static_cast<double>(k) / panels);
  if (!chi.vanishing) {
    const int m = domain.size();
    for (double level : {-chi.c, -2.0 * chi.c}) {
      const auto f = [&](double t) { return domain.evaluate(t).pos.real() - level; };
      for (int j = 0; j < m; ++j) {
        double a = domain.parameter(j), b = static_cast<double>(j + 1) / m;
        double fa = f(a), fb = f(b);
        if (fa == 0.0) {
          breaks.push_back(a);
          continue;
        }
        if (fa * fb >= 0.0) continue;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (a + b);
          const double fm = f(mid);
          if (fa * fm <= 0.0) {
            b = mid;
          } else {
            a = mid;
            fa = fm;
          }
        }
        breaks.push_back(0.5 * (a + b));
      }
    }
  }
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> merged;
  for (double b : breaks) {
    if (merged.empty() || b - merged.back() > 1e-9) merged.push_back(b);
  }
  if (merged.back() < 1.0 - 1e-9) merged.push_back(1.0);
  merged.back() = 1.0;
  merged.front() = 0.0;
  laplace::BoundaryMesh::Component comp;
  comp.curve = domain.param();
  comp.breaks = merged;
  return laplace::LayerSolver::create(laplace::BoundaryMesh({comp}, 16));
}

void check_resolution(const geometry::Domain2D& domain, const laplace::LayerSolver& solver, const NullVector& zeta,
                      double h) {
  double re = 0.0;
  for (auto z : zeta.zeta) re += z.real() * z.real();
  re = std::sqrt(re);
  if (re == 0.0) return;
  const double wavelength = h / re;
  const double need = wavelength / 10.0;
  if (domain.max_spacing() > need) {
    throw std::invalid_argument("boundary nodes too coarse for the oscillation: spacing " +
                                std::to_string(domain.max_spacing()) + " > wavelength/10 = " + std::to_string(need));
  }
  const auto& mesh = solver.mesh();
  for (const auto& p : mesh.panels()) {
    if (p.arclength / mesh.order() > need) {
      throw std::invalid_argument("solver panels too coarse for the oscillation: mean node gap " +
                                  std::to_string(p.arclength / mesh.order()) + " > " + std::to_string(need));
    }
  }
}

CorrectedExponential build_corrected_exponential(const geometry::Domain2D& domain,
                                                 std::shared_ptr<const laplace::LayerSolver> solver,
                                                 const NullVector& zeta, double h, const CutoffSpec& chi) {
  if (zeta.dim() != 2) throw std::invalid_argument("build_corrected_exponential: zeta must lie in C^2");
  if (!zeta.is_null()) throw std::invalid_argument("build_corrected_exponential: zeta is not a null vector");
  if (zeta[0].imag() < 0.0) throw std::invalid_argument("build_corrected_exponential: requires Im zeta_1 >= 0");
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("build_corrected_exponential: h must lie in (0, 1]");
  if (!(chi.c > 0.0)) throw std::invalid_argument("build_corrected_exponential: clearance c must be positive");

  const auto& nodes = solver->mesh().nodes();
  const auto exponent = [&](Complex p) { return -I * (p.real() * zeta[0] + p.imag() * zeta[1]) / h; };
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& n : nodes) {
    if (chi(n.pos.real()) == 0.0) continue;
    const double re = exponent(n.pos).real();
    lo = std::min(lo, re);
    hi = std::max(hi, re);
  }
  if (hi > lo && (hi - lo > max_log_range() || hi > max_log_range())) {
    throw NumericalError("boundary data dynamic range exceeds 1e300; use a larger h or a smaller |zeta|/h",
                         hi - lo);
  }

  check_resolution(domain, *solver, zeta, h);

  Eigen::VectorXcd data(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x = chi(nodes[i].pos.real());
    data[i] = x == 0.0 ? Complex(0.0) : -std::exp(exponent(nodes[i].pos)) * x;
  }
  return CorrectedExponential(h, zeta, chi, solver->solve(data));
}

CorrectedExponential build_corrected_exponential(const geometry::Domain2D& domain, const NullVector& zeta,
                                                 double h, const CutoffSpec& chi) {
  return build_corrected_exponential(domain, make_cgo_solver(domain, chi), zeta, h, chi);
}

DecayReport verify_w_bound(const geometry::Domain2D& domain, const NullVector& zeta, const CutoffSpec& chi,
                           const std::vector<double>& h_list, const WBoundOptions& options) {
  if (h_list.size() < 3) throw std::invalid_argument("verify_w_bound: need at least 3 values of h");
  for (std::size_t k = 1; k < h_list.size(); ++k) {
    if (!(h_list[k] < h_list[k - 1])) throw std::invalid_argument("verify_w_bound: h_list must be decreasing");
  }
  if (!(zeta[0].imag() > 0.0)) throw std::invalid_argument("verify_w_bound: requires Im zeta_1 > 0");

  DecayReport r;
  r.h_list = h_list;
  r.slope_tol = options.slope_tol;
  r.bound_slope = -chi.c * zeta[0].imag() + std::abs(zeta[1].imag());
  const auto solver = make_cgo_solver(domain, chi);
  const auto quad = geometry::interior_quadrature(domain, options.radial, options.angular);
  r.log_norms.resize(h_list.size());
  for (std::size_t k = 0; k < h_list.size(); ++k) {
    const auto u = build_corrected_exponential(domain, solver, zeta, h_list[k], chi);
    const double norm = laplace::h1_norm(u.w(), quad);
    r.log_norms[k] = norm > 0.0 ? std::log(norm) : -std::numeric_limits<double>::infinity();
  }
  fit_decay(r);
  return r;
}

double fitted_c2(const DecayReport& report, const NullVector& zeta, double c) {
  double best = 0.0;
  for (std::size_t k = 0; k < report.h_list.size(); ++k) {
    const double h = report.h_list[k];
    const double log_bound =
        0.5 * std::log1p(zeta.norm() / h) - c * zeta[0].imag() / h + std::abs(zeta[1].imag()) / h;
    best = std::max(best, std::exp(report.log_norms[k] - log_bound));
  }
  return best;
}

}  // namespace calderon::cgo
