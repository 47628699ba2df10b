#include "calderon/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "calderon/parallel.hpp"

namespace calderon::pairing {

namespace {

constexpr Complex I(0.0, 1.0);
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_abs(Complex z) { return z == Complex(0.0) ? kNegInf : std::log(std::abs(z)); }

Json complex_list(const std::vector<Complex>& v) {
  Json a = Json::array();
  for (auto z : v) a.push_back(to_json(z));
  return a;
}

std::vector<Complex> complex_list(const Json& j) {
  std::vector<Complex> v;
  for (const auto& e : j) v.emplace_back(json_to_double(e.at(0)), json_to_double(e.at(1)));
  return v;
}

}  // namespace

PotentialGrid PotentialGrid::scaled(Complex alpha) const {
  PotentialGrid g = *this;
  for (auto& v : g.values) v *= alpha;
  g.sup = std::abs(alpha) * sup;
  return g;
}

PotentialGrid sample_potential(const geometry::Domain2D& domain, const geometry::InteriorQuadrature& quad,
                               const ScalarField& f) {
  PotentialGrid g;
  g.domain = &domain;
  g.quad = quad;
  g.values.resize(quad.size());
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const Complex v = f(quad.nodes[q]);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("potential is not finite at an interior node");
    }
    g.values[q] = v;
    g.sup = std::max(g.sup, std::abs(v));
  }
  return g;
}

NodeSampler::NodeSampler(std::shared_ptr<const laplace::LayerSolver> solver, const std::vector<Vec2>& nodes)
    : solver_(std::move(solver)), nodes_(nodes), rows_(solver_->evaluation_matrix(nodes)) {}

std::vector<Complex> NodeSampler::values(const laplace::HarmonicField& w) const {
  const Eigen::VectorXd re = rows_ * w.coefficients().real();
  const Eigen::VectorXd im = rows_ * w.coefficients().imag();
  std::vector<Complex> out(nodes_.size());
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = {re[q], im[q]};
  return out;
}

std::vector<Complex> NodeSampler::plane_values(const cgo::CorrectedExponential& u) const {
  std::vector<Complex> out(nodes_.size());
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = u.plane(nodes_[q]);
  return out;
}

std::vector<Complex> NodeSampler::values(const cgo::CorrectedExponential& u) const {
  auto out = values(u.w());
  for (std::size_t q = 0; q < out.size(); ++q) out[q] += u.plane(nodes_[q]);
  return out;
}

LogComplex pair(const PotentialGrid& f, const std::vector<Complex>& u, const std::vector<Complex>& v) {
  if (u.size() != f.size() || v.size() != f.size()) throw std::invalid_argument("pair: node count mismatch");
  std::vector<Complex> exps(f.size()), coef(f.size());
  for (std::size_t q = 0; q < f.size(); ++q) {
    const Complex wf = f.quad.weights[q] * f.values[q];
    if (wf == Complex(0.0) || u[q] == Complex(0.0) || v[q] == Complex(0.0)) {
      coef[q] = 0.0;
      continue;
    }
    // log u + log v keeps the product finite when u and v are individually large.
    const LogComplex lu = LogComplex::from(u[q]), lv = LogComplex::from(v[q]);
    exps[q] = {lu.log_mod + lv.log_mod, lu.phase + lv.phase};
    coef[q] = wf;
  }
  return log_sum_exp(exps, coef);
}

LogComplex pair(const PotentialGrid& f, const cgo::CorrectedExponential& u, const cgo::CorrectedExponential& v) {
  std::vector<Complex> uv(f.size()), vv(f.size());
  const auto& nodes = f.quad.nodes;
  parallel_for(f.size(), [&](std::size_t q) {
    uv[q] = u.evaluate(nodes[q]);
    vv[q] = v.evaluate(nodes[q]);
  });
  return pair(f, uv, vv);
}

LogComplex fourier_moment(const PotentialGrid& f, const std::vector<Complex>& z, double h) {
  if (z.size() != 2) throw std::invalid_argument("fourier_moment: frequency must lie in C^2");
  std::vector<Complex> exps(f.size()), coef(f.size());
  for (std::size_t q = 0; q < f.size(); ++q) {
    const Vec2 x = f.quad.nodes[q];
    exps[q] = -I * (x.x1 * z[0] + x.x2 * z[1]) / h;
    coef[q] = f.quad.weights[q] * f.values[q];
  }
  return log_sum_exp(exps, coef);
}

IdentityCheck moment_identity(const PotentialGrid& lhs_grid, const PotentialGrid& f, const NodeSampler& sampler,
                              const cgo::CorrectedExponential& u_zeta, const cgo::CorrectedExponential& u_eta) {
  if (sampler.nodes().size() != f.size()) throw std::invalid_argument("moment_identity: sampler/grid mismatch");
  if (u_zeta.h() != u_eta.h()) throw std::invalid_argument("moment_identity: both exponentials need the same h");
  const auto ez = sampler.plane_values(u_zeta), ee = sampler.plane_values(u_eta);
  const auto wz = sampler.values(u_zeta.w()), we = sampler.values(u_eta.w());
  std::vector<Complex> uz(f.size()), ue(f.size());
  for (std::size_t q = 0; q < f.size(); ++q) {
    uz[q] = ez[q] + wz[q];
    ue[q] = ee[q] + we[q];
  }
  std::vector<Complex> z(2);
  for (int k = 0; k < 2; ++k) z[k] = u_zeta.zeta()[k] + u_eta.zeta()[k];

  IdentityCheck c;
  c.lhs = fourier_moment(lhs_grid, z, u_zeta.h()).to_complex();
  c.moment = pair(f, uz, ue).to_complex();
  c.t1 = pair(f, ez, we).to_complex();
  c.t2 = pair(f, ee, wz).to_complex();
  c.t3 = pair(f, wz, we).to_complex();
  c.residual = std::abs(c.lhs - (c.moment - c.t1 - c.t2 - c.t3));
  const double scale = std::abs(c.lhs) + std::abs(c.moment) + std::abs(c.t1) + std::abs(c.t2) + std::abs(c.t3);
  c.relative = scale > 0.0 ? c.residual / scale : 0.0;
  return c;
}

double measure_decomposition_constant(double a, double eps, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Complex d0(n(rng), n(rng)), d1(n(rng), n(rng));
    const double norm = std::sqrt(std::norm(d0) + std::norm(d1));
    const double r = 2.0 * eps * a * 0.999 / norm;
    const auto p = cgo::null_decompose_near({2.0 * I * a + r * d0, r * d1}, a, eps);
    worst = std::max(worst, p.c_meas);
  }
  // the extremal direction d = (1, i)/sqrt(2) is not hit by random sampling
  const double r = 2.0 * eps * a * 0.999 / std::sqrt(2.0);
  worst = std::max(worst, cgo::null_decompose_near({2.0 * I * a + r, I * r}, a, eps).c_meas);
  return worst;
}

FourierEstimateReport verify_fourier_estimate(const ScalarField& f, const FourierSetup& setup, double a, double eps,
                                              const std::vector<double>& h_list) {
  if (setup.domain == nullptr) throw std::invalid_argument("verify_fourier_estimate: no domain");
  if (h_list.size() < 3) throw std::invalid_argument("verify_fourier_estimate: need at least 3 values of h");
  for (std::size_t k = 1; k < h_list.size(); ++k) {
    if (!(h_list[k] < h_list[k - 1])) throw std::invalid_argument("verify_fourier_estimate: h_list must decrease");
  }
  FourierEstimateReport rep;
  rep.c_meas = measure_decomposition_constant(a, eps);
  const double c = setup.chi.c;
  if (!(eps < c / (8.0 * rep.c_meas))) {
    throw std::invalid_argument("verify_fourier_estimate: eps >= c / (8 C_meas) = " +
                                std::to_string(c / (8.0 * rep.c_meas)));
  }

  const auto& domain = *setup.domain;
  const auto solver = cgo::make_cgo_solver(domain, setup.chi);
  const auto quad = geometry::interior_quadrature(domain, setup.radial, setup.angular);
  const auto fine = geometry::interior_quadrature(domain, setup.radial * 3 / 2, setup.angular * 3 / 2);
  const auto grid = sample_potential(domain, quad, f);
  const auto fine_grid = sample_potential(domain, fine, f);
  const NodeSampler sampler(solver, quad.nodes);

  // base point and four points at half the admissible radius
  std::vector<std::vector<Complex>> probes{{2.0 * I * a, 0.0}};
  const double r = eps * a;
  for (const Complex2 d : {Complex2{1.0, 0.0}, Complex2{I, 0.0}, Complex2{0.0, 1.0}, Complex2{0.0, I}}) {
    probes.push_back({2.0 * I * a + r * d[0], r * d[1]});
  }

  rep.decay.h_list = h_list;
  rep.decay.slope_tol = setup.slope_tol;
  rep.decay.bound_slope = -c * a / 2.0 + 2.0 * rep.c_meas * eps * a;
  rep.identity_ok = true;
  std::vector<double> log_bound;
  for (double h : h_list) {
    double log_lhs = kNegInf, log_corr = kNegInf, residual = 0.0;
    for (const auto& z : probes) {
      const auto p = cgo::null_decompose_near(z, a, eps);
      const auto uz = cgo::build_corrected_exponential(domain, solver, p.zeta, h, setup.chi);
      const auto ue = cgo::build_corrected_exponential(domain, solver, p.eta, h, setup.chi);
      const auto chk = moment_identity(fine_grid, grid, sampler, uz, ue);
      log_lhs = std::max(log_lhs, log_abs(chk.lhs));
      log_corr = std::max(log_corr, log_abs(std::abs(chk.t1) + std::abs(chk.t2) + std::abs(chk.t3)));
      residual = std::max(residual, chk.residual);
    }
    rep.decay.log_norms.push_back(log_lhs);
    rep.log_corrections.push_back(log_corr);
    rep.residuals.push_back(residual);
    rep.identity_ok = rep.identity_ok && residual <= setup.quad_tol * grid.sup;
    // h times the bound side C4 h^-1 |f| e^{-ca/2h} e^{2 C eps a / h}, C4 = 1
    log_bound.push_back(std::log(std::max(grid.sup, 1e-300)) + rep.decay.bound_slope / h);
  }
  fit_decay(rep.decay);
  DecayReport b;
  b.h_list = h_list;
  b.log_norms = log_bound;
  fit_decay(b);
  rep.bound_side_slope = b.fitted_slope;
  rep.bound_bookkeeping_ok =
      std::abs(rep.bound_side_slope - rep.decay.bound_slope) <= 0.05 * std::abs(rep.decay.bound_slope);
  rep.pass = rep.identity_ok && rep.decay.pass && rep.bound_bookkeeping_ok;
  return rep;
}

Json MomentSet::to_json() const {
  Json a = Json::array();
  for (const auto& e : entries) {
    a.push_back(Json{{"zeta", complex_list(e.zeta.zeta)},
                     {"eta", complex_list(e.eta.zeta)},
                     {"h", e.h},
                     {"moment", calderon::to_json(e.moment)}});
  }
  return Json{{"moments", a}};
}

MomentSet MomentSet::from_json(const Json& j) {
  MomentSet m;
  for (const auto& e : j.at("moments")) {
    MomentEntry x;
    x.zeta = cgo::NullVector(complex_list(e.at("zeta")));
    x.eta = cgo::NullVector(complex_list(e.at("eta")));
    x.h = e.at("h").get<double>();
    x.moment = {json_to_double(e.at("moment").at(0)), json_to_double(e.at("moment").at(1))};
    if (!x.zeta.is_null() || !x.eta.is_null()) throw std::invalid_argument("moment entry is not a null pair");
    if (!std::isfinite(x.moment.real()) || !std::isfinite(x.moment.imag()) || !(x.h > 0.0)) {
      throw std::invalid_argument("moment entry has a non-finite moment or h <= 0");
    }
    m.entries.push_back(std::move(x));
  }
  return m;
}

int PixelGrid::index(Vec2 x) const {
  const int ix = static_cast<int>(std::floor((x.x1 - x_lo) / (x_hi - x_lo) * nx));
  const int iy = static_cast<int>(std::floor((x.x2 - y_lo) / (y_hi - y_lo) * ny));
  if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) return -1;
  return ix * ny + iy;
}

Vec2 PixelGrid::center(int i) const {
  const int ix = i / ny, iy = i % ny;
  return {x_lo + (ix + 0.5) * (x_hi - x_lo) / nx, y_lo + (iy + 0.5) * (y_hi - y_lo) / ny};
}

PixelGrid PixelGrid::bounding(const geometry::Domain2D& domain, int nx, int ny) {
  PixelGrid g;
  g.nx = nx;
  g.ny = ny;
  g.x_lo = g.y_lo = std::numeric_limits<double>::infinity();
  g.x_hi = g.y_hi = -g.x_lo;
  for (int j = 0; j < domain.size(); ++j) {
    const Vec2 p = domain.point(j);
    g.x_lo = std::min(g.x_lo, p.x1);
    g.x_hi = std::max(g.x_hi, p.x1);
    g.y_lo = std::min(g.y_lo, p.x2);
    g.y_hi = std::max(g.y_hi, p.x2);
  }
  const double pad = 1e-9 * std::max(g.x_hi - g.x_lo, g.y_hi - g.y_lo);
  g.x_lo -= pad;
  g.x_hi += pad;
  g.y_lo -= pad;
  g.y_hi += pad;
  return g;
}

ReconstructionSetup ReconstructionSetup::create(const geometry::Domain2D& domain, const cgo::CutoffSpec& chi,
                                                int radial, int angular, const PixelGrid& grid) {
  ReconstructionSetup s;
  s.domain = &domain;
  s.chi = chi;
  s.solver = cgo::make_cgo_solver(domain, chi);
  s.quad = geometry::interior_quadrature(domain, radial, angular);
  s.sampler = std::make_shared<NodeSampler>(s.solver, s.quad.nodes);
  s.grid = grid;
  s.pixel_of_node.resize(s.quad.size());
  for (std::size_t q = 0; q < s.quad.size(); ++q) s.pixel_of_node[q] = grid.index(s.quad.nodes[q]);
  return s;
}

std::vector<std::pair<cgo::NullVector, cgo::NullVector>> frequency_pairs(const FrequencyGrid& g) {
  if (!(g.k2_max <= 2.0 * g.a)) throw std::invalid_argument("frequency grid: k2_max must not exceed 2a");
  std::vector<std::pair<cgo::NullVector, cgo::NullVector>> out;
  for (int i = 0; i < g.n1; ++i) {
    const double k1 = g.n1 == 1 ? 0.0 : -g.k1_max + 2.0 * g.k1_max * i / (g.n1 - 1);
    for (int j = 0; j < g.n2; ++j) {
      const double k2 = g.n2 == 1 ? 0.0 : -g.k2_max + 2.0 * g.k2_max * j / (g.n2 - 1);
      const auto p = cgo::null_decompose_2d({2.0 * I * g.a + k1, Complex(k2)});
      out.emplace_back(p.zeta, p.eta);
    }
  }
  return out;
}

namespace {

struct ProductRows {
  std::vector<std::vector<Complex>> u, v;
};

ProductRows sample_pairs(const std::vector<std::pair<cgo::NullVector, cgo::NullVector>>& pairs,
                         const std::vector<double>& hs, const ReconstructionSetup& setup) {
  ProductRows r;
  r.u.resize(pairs.size());
  r.v.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t m) {
    const auto uz = cgo::build_corrected_exponential(*setup.domain, setup.solver, pairs[m].first, hs[m], setup.chi);
    const auto ue = cgo::build_corrected_exponential(*setup.domain, setup.solver, pairs[m].second, hs[m], setup.chi);
    r.u[m] = setup.sampler->values(uz);
    r.v[m] = setup.sampler->values(ue);
  });
  return r;
}

}  // namespace

namespace {

Eigen::MatrixXcd assemble_forward(const ProductRows& rows, const ReconstructionSetup& setup) {
  const int npix = setup.grid.nx * setup.grid.ny;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.u.size()), npix);
  for (std::size_t k = 0; k < rows.u.size(); ++k) {
    for (std::size_t q = 0; q < setup.quad.size(); ++q) {
      const int p = setup.pixel_of_node[q];
      if (p >= 0) A(static_cast<Eigen::Index>(k), p) += setup.quad.weights[q] * rows.u[k][q] * rows.v[k][q];
    }
  }
  return A;
}

}  // namespace

MomentSet generate_moments(const PotentialGrid& f, const ReconstructionSetup& setup, const FrequencyGrid& g,
                           Eigen::MatrixXcd* forward) {
  if (f.size() != setup.quad.size()) throw std::invalid_argument("generate_moments: potential not on setup nodes");
  const auto pairs = frequency_pairs(g);
  const std::vector<double> hs(pairs.size(), g.h);
  const auto rows = sample_pairs(pairs, hs, setup);
  MomentSet set;
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    set.entries.push_back({pairs[m].first, pairs[m].second, g.h, pair(f, rows.u[m], rows.v[m]).to_complex()});
  }
  if (forward) *forward = assemble_forward(rows, setup);
  return set;
}

Eigen::MatrixXcd forward_matrix(const MomentSet& moments, const ReconstructionSetup& setup) {
  std::vector<std::pair<cgo::NullVector, cgo::NullVector>> pairs;
  std::vector<double> hs;
  for (const auto& e : moments.entries) {
    pairs.emplace_back(e.zeta, e.eta);
    hs.push_back(e.h);
  }
  return assemble_forward(sample_pairs(pairs, hs, setup), setup);
}

Reconstruction reconstruct(const MomentSet& moments, const ReconstructionSetup& setup, std::optional<double> lambda,
                           double quad_tol, const Eigen::MatrixXcd* forward) {
  const int npix = setup.grid.nx * setup.grid.ny;
  std::vector<double> area(npix, 0.0);
  for (std::size_t q = 0; q < setup.quad.size(); ++q) {
    if (setup.pixel_of_node[q] >= 0) area[setup.pixel_of_node[q]] += setup.quad.weights[q];
  }
  const int active = static_cast<int>(std::count_if(area.begin(), area.end(), [](double a) { return a > 0.0; }));
  const int count = static_cast<int>(moments.entries.size());
  if (4 * count < active) throw std::invalid_argument("reconstruct: need at least unknowns/4 moments");
  if (lambda && !(*lambda > 0.0)) throw std::invalid_argument("reconstruct: lambda must be positive");

  Eigen::VectorXcd m(count);
  for (int k = 0; k < count; ++k) m[k] = moments.entries[k].moment;
  if (forward && (forward->rows() != count || forward->cols() != npix)) {
    throw std::invalid_argument("reconstruct: forward matrix does not match moments and grid");
  }
  const Eigen::MatrixXcd A = forward ? *forward : forward_matrix(moments, setup);

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  Reconstruction out;
  if (smax == 0.0 || m.norm() == 0.0) {
    out.pixels.assign(npix, 0.0);
  } else {
    const Eigen::VectorXcd beta = svd.matrixU().adjoint() * m;
    const double smin = sv.size() < npix ? 0.0 : sv[sv.size() - 1];
    auto solve = [&](double lam) -> Eigen::VectorXcd {
      const double l = lam * smax * smax;
      Eigen::VectorXcd g(sv.size());
      for (int k = 0; k < sv.size(); ++k) g[k] = beta[k] * sv[k] / (sv[k] * sv[k] + l);
      return svd.matrixV() * g;
    };
    double chosen;
    if (lambda) {
      chosen = *lambda;
    } else {
      std::vector<double> grid, res;
      for (int e = -2; e >= -12; --e) {
        grid.push_back(std::pow(10.0, e));
        res.push_back((A * solve(grid.back()) - m).norm());
      }
      const double best = *std::min_element(res.begin(), res.end());
      const double target = std::max(2.0 * quad_tol * m.norm(), 1.1 * best);
      chosen = grid.back();
      for (std::size_t k = 0; k < grid.size(); ++k) {
        if (res[k] <= target) {
          chosen = grid[k];
          break;
        }
      }
    }
    const double l = chosen * smax * smax;
    out.condition = (smax * smax + l) / (smin * smin + l);
    if (out.condition > 1e14) {
      throw NumericalError("reconstruct: normal equations conditioned beyond 1e14; increase lambda", out.condition);
    }
    out.lambda = chosen;
    const Eigen::VectorXcd c = solve(chosen);
    out.pixels.assign(c.data(), c.data() + c.size());
    out.moment_residual = (A * c - m).norm() / m.norm();
  }
  if (out.lambda == 0.0) out.lambda = lambda.value_or(0.0);
  out.potential.domain = setup.domain;
  out.potential.quad = setup.quad;
  out.potential.values.resize(setup.quad.size());
  for (std::size_t q = 0; q < setup.quad.size(); ++q) {
    const int p = setup.pixel_of_node[q];
    out.potential.values[q] = p >= 0 ? out.pixels[p] : Complex(0.0);
    out.potential.sup = std::max(out.potential.sup, std::abs(out.potential.values[q]));
  }
  return out;
}

std::vector<Complex> pixel_average(const PotentialGrid& f, const ReconstructionSetup& setup) {
  const int npix = setup.grid.nx * setup.grid.ny;
  std::vector<Complex> sum(npix, 0.0);
  std::vector<double> area(npix, 0.0);
  for (std::size_t q = 0; q < setup.quad.size(); ++q) {
    const int p = setup.pixel_of_node[q];
    if (p < 0) continue;
    sum[p] += setup.quad.weights[q] * f.values[q];
    area[p] += setup.quad.weights[q];
  }
  for (int p = 0; p < npix; ++p) sum[p] = area[p] > 0.0 ? sum[p] / area[p] : Complex(0.0);
  return sum;
}

double relative_pixel_error(const Reconstruction& r, const PotentialGrid& f, const ReconstructionSetup& setup) {
  const auto avg = pixel_average(f, setup);
  const int npix = setup.grid.nx * setup.grid.ny;
  std::vector<double> area(npix, 0.0);
  for (std::size_t q = 0; q < setup.quad.size(); ++q) {
    if (setup.pixel_of_node[q] >= 0) area[setup.pixel_of_node[q]] += setup.quad.weights[q];
  }
  double num = 0.0, den = 0.0;
  for (int p = 0; p < npix; ++p) {
    num += area[p] * std::norm(r.pixels[p] - avg[p]);
    den += area[p] * std::norm(avg[p]);
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

std::string pixels_csv(const Reconstruction& r, const PixelGrid& grid) {
  std::vector<std::vector<double>> rows;
  for (int p = 0; p < grid.nx * grid.ny; ++p) {
    const Vec2 c = grid.center(p);
    rows.push_back({c.x1, c.x2, r.pixels[p].real(), r.pixels[p].imag()});
  }
  return csv_table({"x1", "x2", "re", "im"}, rows);
}

}  // namespace calderon::pairing
