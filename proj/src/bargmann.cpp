#include "calderon/bargmann.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "calderon/parallel.hpp"

namespace calderon::bargmann {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kPanelOrder = 16;

const std::vector<double>& gl_nodes(int n, std::vector<double>* weights_out = nullptr) {
  thread_local std::vector<double> x, w;
  thread_local int cached = 0;
  if (cached != n) {
    geometry::gauss_legendre(n, x, w);
    cached = n;
  }
  if (weights_out) *weights_out = w;
  return x;
}

double log_of(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

double im_norm2(const std::vector<Complex>& z) {
  double s = 0.0;
  for (auto c : z) s += c.imag() * c.imag();
  return s;
}

// Least-squares slope of y against x; 0 for fewer than two distinct x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double det = n * sxx - sx * sx;
  return std::abs(det) < 1e-300 ? 0.0 : (n * sxy - sx * sy) / det;
}

// Crossings of the vertical line x1 = y1 with the boundary, paired into chords.
std::vector<std::pair<double, double>> chords(const geometry::Domain2D& d, double y1) {
  std::vector<double> x2;
  const int m = d.size();
  for (int j = 0; j < m; ++j) {
    const int k = (j + 1) % m;
    const double f0 = d.point(j).x1 - y1, f1 = d.point(k).x1 - y1;
    if ((f0 < 0.0) == (f1 < 0.0)) continue;
    const double t0 = d.parameter(j), t1 = k == 0 ? 1.0 : d.parameter(k);
    // Newton from the chord interpolant, kept inside the bracketing interval
    double t = t0 + (t1 - t0) * f0 / (f0 - f1);
    for (int it = 0; it < 8; ++it) {
      const auto cs = d.evaluate(t);
      const double g = cs.pos.real() - y1, dg = cs.d1.real();
      if (g == 0.0 || dg == 0.0) break;
      const double next = std::clamp(t - g / dg, t0, t1);
      if (std::abs(next - t) < 1e-15) break;
      t = next;
    }
    x2.push_back(d.evaluate(t).pos.imag());
  }
  std::sort(x2.begin(), x2.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k + 1 < x2.size(); k += 2) out.emplace_back(x2[k], x2[k + 1]);
  return out;
}

BoundReport summarize(const std::string& name, const std::vector<BoundRow>& rows, double tol, double slope) {
  BoundReport r;
  r.name = name;
  r.nodes = rows.size();
  r.tolerance = tol;
  r.min_slack = kInf;
  for (const auto& row : rows) {
    if (row.slack < r.min_slack) {
      r.min_slack = row.slack;
      r.worst_node = row.node;
    }
  }
  r.measured_slope = slope;
  r.pass = !std::isnan(r.min_slack) && r.min_slack >= -tol;
  return r;
}

}  // namespace

LinePotential LinePotential::constant(Complex value) {
  LinePotential p;
  p.f = [value](Complex) { return value; };
  p.sup = std::abs(value);
  p.entire = true;
  return p;
}

LinePotential LinePotential::half_line(double edge) {
  LinePotential p;
  p.f = [](Complex) { return Complex(1.0); };
  p.hi = edge;
  p.sup = 1.0;
  p.entire = true;
  return p;
}

namespace {

// Appends Gauss-Legendre terms of int e^{-(z-y)^2/2h} f(y) dy along y = from + s (to - from), s in [0, 1].
void add_segment(const LinePotential& f, Complex z, double h, Complex from, Complex to, double len,
                 std::vector<Complex>& ex, std::vector<Complex>& co) {
  const double length = std::abs(to - from);
  if (length == 0.0) return;
  const int panels = std::max(1, static_cast<int>(std::ceil(length / len)));
  std::vector<double> w;
  const auto& t = gl_nodes(kPanelOrder, &w);
  const Complex step = (to - from) / static_cast<double>(panels);
  for (int p = 0; p < panels; ++p) {
    const Complex mid = from + (p + 0.5) * step;
    for (int k = 0; k < kPanelOrder; ++k) {
      const Complex y = mid + 0.5 * t[k] * step;
      const Complex d = z - y;
      ex.push_back(-d * d / (2.0 * h));
      co.push_back(0.5 * w[k] * step * f.f(y));
    }
  }
}

}  // namespace

LogComplex transform(const LinePotential& f, Complex z, double h) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("transform: h must lie in (0, 1]");
  if (!(f.lo < f.hi) || f.sup == 0.0) return LogComplex::zero();
  const double x = z.real();
  const double tau = f.entire ? z.imag() : 0.0;
  const double osc = f.entire ? 0.0 : std::abs(z.imag());
  const double c = std::clamp(x, f.lo, f.hi);
  // e^{-50} below the peak at either window end
  const double window = std::sqrt(100.0 * h);
  const double A = std::max(f.lo, c - window), B = std::min(f.hi, c + window);
  std::vector<Complex> ex, co;
  const double len = std::min(0.5 * std::sqrt(h), 2.0 * h / (osc + std::abs(x - c) + std::sqrt(h)));
  add_segment(f, z, h, Complex(A, tau), Complex(B, tau), len, ex, co);
  if (tau != 0.0) {
    // vertical legs at finite ends close the contour back to the real axis
    auto vlen = [&](double end) {
      return std::min(0.5 * std::sqrt(h), 2.0 * h / (std::abs(tau) + std::abs(x - end) + std::sqrt(h)));
    };
    if (std::isfinite(f.lo)) add_segment(f, z, h, Complex(f.lo, 0.0), Complex(f.lo, tau), vlen(f.lo), ex, co);
    if (std::isfinite(f.hi)) add_segment(f, z, h, Complex(f.hi, tau), Complex(f.hi, 0.0), vlen(f.hi), ex, co);
  }
  return log_sum_exp(ex, co);
}

LogComplex transform(const pairing::PotentialGrid& f, const Complex2& z, double h) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("transform: h must lie in (0, 1]");
  std::vector<Complex> ex, co;
  ex.reserve(f.size());
  co.reserve(f.size());
  for (std::size_t q = 0; q < f.size(); ++q) {
    if (f.values[q] == Complex(0.0)) continue;
    const Vec2 y = f.quad.nodes[q];
    const Complex d1 = z[0] - y.x1, d2 = z[1] - y.x2;
    ex.push_back(-(d1 * d1 + d2 * d2) / (2.0 * h));
    co.push_back(f.quad.weights[q] * f.values[q]);
  }
  return log_sum_exp(ex, co);
}

std::string BargmannGrid::csv() const {
  std::vector<std::string> header{"re_z1", "im_z1"};
  if (dim == 2) {
    header.push_back("re_z2");
    header.push_back("im_z2");
  }
  header.push_back("log_mod");
  header.push_back("phase");
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < z_nodes.size(); ++k) {
    std::vector<double> r;
    for (auto c : z_nodes[k]) {
      r.push_back(c.real());
      r.push_back(c.imag());
    }
    r.push_back(values[k].log_mod);
    r.push_back(values[k].phase);
    rows.push_back(std::move(r));
  }
  return csv_table(header, rows);
}

BargmannGrid evaluate_grid(const LinePotential& f, const std::vector<Complex>& z, double h) {
  BargmannGrid g;
  g.h = h;
  g.dim = 1;
  g.sup = f.sup;
  g.support_x1_max = f.sup > 0.0 ? f.hi : kNegInf;
  g.values.resize(z.size());
  for (auto c : z) g.z_nodes.push_back({c});
  parallel_for(z.size(), [&](std::size_t k) { g.values[k] = transform(f, z[k], h); });
  return g;
}

BargmannGrid evaluate_grid(const pairing::PotentialGrid& f, const std::vector<Complex2>& z, double h) {
  BargmannGrid g;
  g.h = h;
  g.dim = 2;
  g.sup = f.sup;
  g.support_x1_max = kNegInf;
  for (std::size_t q = 0; q < f.size(); ++q) {
    if (f.values[q] != Complex(0.0)) g.support_x1_max = std::max(g.support_x1_max, f.quad.nodes[q].x1);
  }
  g.values.resize(z.size());
  for (const auto& c : z) g.z_nodes.push_back({c[0], c[1]});
  parallel_for(z.size(), [&](std::size_t k) { g.values[k] = transform(f, z[k], h); });
  return g;
}

std::vector<Complex> box_grid(double x_lo, double x_hi, double y_lo, double y_hi, int nx, int ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("box_grid: need at least 2 x 2 nodes");
  std::vector<Complex> out;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      out.emplace_back(x_lo + (x_hi - x_lo) * i / (nx - 1), y_lo + (y_hi - y_lo) * j / (ny - 1));
    }
  }
  return out;
}

Json BoundCheck::to_json() const {
  Json rows_j = Json::array();
  for (const auto& r : rows) {
    rows_j.push_back(Json{{"node", r.node},
                          {"lhs", json_number(r.lhs)},
                          {"rhs", json_number(r.rhs)},
                          {"slack", json_number(r.slack)}});
  }
  return Json{{"report", calderon::to_json(report)}, {"rows", rows_j}};
}

BoundCheck check_apriori_bound(const BargmannGrid& grid, double tol) {
  BoundCheck out;
  const double base = 0.5 * grid.dim * std::log(2.0 * kPi * grid.h) + log_of(grid.sup);
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < grid.values.size(); ++k) {
    BoundRow r;
    r.node = k;
    r.lhs = grid.values[k].log_mod;
    const double im2 = im_norm2(grid.z_nodes[k]) / (2.0 * grid.h);
    r.rhs = base + im2;
    r.slack = grid.values[k].is_zero() ? kInf : r.rhs - r.lhs;
    if (std::isfinite(r.lhs)) {
      xs.push_back(im2);
      ys.push_back(r.lhs);
    }
    out.rows.push_back(r);
  }
  out.report = summarize("apriori", out.rows, tol, ls_slope(xs, ys));
  return out;
}

BoundCheck check_halfspace_bound(const BargmannGrid& grid, double tol) {
  if (grid.support_x1_max > 0.0) {
    throw std::invalid_argument("check_halfspace_bound: f is not supported in x1 <= 0");
  }
  BoundCheck out;
  const double norm = 0.5 * grid.dim * std::log(2.0 * kPi * grid.h);
  const double base = norm + log_of(grid.sup);
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < grid.values.size(); ++k) {
    const double re1 = grid.z_nodes[k][0].real();
    if (re1 < 0.0) continue;
    BoundRow r;
    r.node = k;
    r.lhs = grid.values[k].log_mod;
    const double im2 = im_norm2(grid.z_nodes[k]) / (2.0 * grid.h);
    const double re2 = re1 * re1 / (2.0 * grid.h);
    r.rhs = base + im2 - re2;
    r.slack = grid.values[k].is_zero() ? kInf : r.rhs - r.lhs;
    if (std::isfinite(r.lhs)) {
      xs.push_back(re2);
      ys.push_back(r.lhs - im2 - norm);
    }
    out.rows.push_back(r);
  }
  out.report = summarize("halfspace", out.rows, tol, ls_slope(xs, ys));
  return out;
}

double weight_phi(Complex z1) {
  const double im2 = z1.imag() * z1.imag();
  return z1.real() <= 0.0 ? im2 : im2 - z1.real() * z1.real();
}

Superposition superposed_transform(const pairing::PotentialGrid& f, const Complex2& z, double h, double t_split) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("superposed_transform: h must lie in (0, 1]");
  if (!(t_split >= 0.0)) throw std::invalid_argument("superposed_transform: t_split must be >= 0");
  Superposition out;

  // per node: w f e^{y.z/h}, rescaled by the largest modulus
  std::vector<Vec2> ys;
  std::vector<Complex> b;
  double abs_mass = 0.0, ymax = 1e-3;
  for (std::size_t q = 0; q < f.size(); ++q) {
    if (f.values[q] == Complex(0.0)) continue;
    const Vec2 y = f.quad.nodes[q];
    ys.push_back(y);
    b.push_back(std::log(Complex(f.quad.weights[q]) * f.values[q]) + (y.x1 * z[0] + y.x2 * z[1]) / h);
    abs_mass += f.quad.weights[q] * std::abs(f.values[q]);
    ymax = std::max(ymax, y.norm());
  }
  if (ys.empty()) return out;
  double shift = kNegInf;
  for (auto v : b) shift = std::max(shift, v.real());
  std::vector<Complex> s(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) s[k] = std::exp(b[k] - shift);

  // polar t-grid: Gauss-Legendre panels in rho aligned with t_split, trapezoid in angle
  const double t_max = t_split + std::sqrt(90.0 * h);
  const double len = std::min(0.5 * std::sqrt(h), 2.0 * h / ymax);
  std::vector<double> gw;
  const auto& gx = gl_nodes(kPanelOrder, &gw);
  struct Ring {
    double rho, weight;
    bool inner;
  };
  std::vector<Ring> rings;
  auto add_interval = [&](double r0, double r1, bool inner) {
    if (!(r1 > r0)) return;
    const int panels = std::max(1, static_cast<int>(std::ceil((r1 - r0) / len)));
    const double pl = (r1 - r0) / panels;
    for (int p = 0; p < panels; ++p) {
      for (int k = 0; k < kPanelOrder; ++k) {
        rings.push_back({r0 + (p + 0.5 + 0.5 * gx[k]) * pl, 0.5 * pl * gw[k], inner});
      }
    }
  };
  add_interval(0.0, t_split, true);
  add_interval(t_split, t_max, false);

  std::vector<Complex> ring_sum(rings.size());
  std::vector<int> ring_nodes(rings.size());
  parallel_for(rings.size(), [&](std::size_t r) {
    const double rho = rings[r].rho;
    const int n = 2 * static_cast<int>(std::ceil(rho * ymax / h)) + 32;
    std::vector<Complex> terms(n);
    for (int j = 0; j < n; ++j) {
      const double th = 2.0 * kPi * j / n;
      const double t1 = rho * std::cos(th), t2 = rho * std::sin(th);
      Complex g = 0.0;
      for (std::size_t k = 0; k < ys.size(); ++k) {
        const double ph = -(ys[k].x1 * t1 + ys[k].x2 * t2) / h;
        g += s[k] * Complex(std::cos(ph), std::sin(ph));
      }
      terms[j] = g;
    }
    ring_sum[r] = geometry::pairwise_sum(terms.data(), terms.size()) * (2.0 * kPi / n) * rho * rings[r].weight *
                  std::exp(-rho * rho / (2.0 * h));
    ring_nodes[r] = n;
  });
  std::vector<Complex> in_terms, tail_terms;
  for (std::size_t r = 0; r < rings.size(); ++r) {
    (rings[r].inner ? in_terms : tail_terms).push_back(ring_sum[r]);
    out.t_nodes += ring_nodes[r];
  }
  const Complex zz = z[0] * z[0] + z[1] * z[1];
  const LogComplex pre = LogComplex::exp(-std::log(2.0 * kPi * h) - zz / (2.0 * h) + shift);
  out.inner = pre * LogComplex::from(geometry::pairwise_sum(in_terms.data(), in_terms.size()));
  out.tail = pre * LogComplex::from(geometry::pairwise_sum(tail_terms.data(), tail_terms.size()));

  const double re2 = z[0].real() * z[0].real() + z[1].real() * z[1].real();
  const double im2 = z[0].imag() * z[0].imag() + z[1].imag() * z[1].imag();
  out.tail_bound.log_mod = (im2 - re2) / (2.0 * h) + 0.5 * std::log(2.0) + std::abs(z[1].real()) / h -
                           t_split * t_split / (4.0 * h) + std::log(abs_mass);
  out.truncation = std::exp(-t_max * t_max / (2.0 * h));
  return out;
}

LogComplex sliced_transform(const geometry::Domain2D& domain, const ScalarField& f, const Complex2& z, double h,
                            int slice_nodes, double width_scale) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("sliced_transform: h must lie in (0, 1]");
  double lo = kInf, hi = -kInf, lo2 = kInf, hi2 = -kInf;
  for (int j = 0; j < domain.size(); ++j) {
    lo = std::min(lo, domain.point(j).x1);
    hi = std::max(hi, domain.point(j).x1);
    lo2 = std::min(lo2, domain.point(j).x2);
    hi2 = std::max(hi2, domain.point(j).x2);
  }
  const double rate = std::abs(z[0]) + std::abs(z[1]) + 2.0;
  const double len = width_scale * std::min(0.5 * std::sqrt(h), 2.0 * h / rate);
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / len)));
  const double pl = (hi - lo) / panels;
  std::vector<double> gw, cw;
  const std::vector<double> gx = gl_nodes(kPanelOrder, &gw);
  std::vector<double> cx;
  geometry::gauss_legendre(slice_nodes, cx, cw);
  // e^{-(z1-y1)^2/2h} decreases leftward when z is real and right of the domain
  const bool monotone = z[0].imag() == 0.0 && z[1].imag() == 0.0 && z[0].real() >= hi;
  double sup_f = 0.0;
  LogComplex total;
  double running = kNegInf;
  for (int p = panels - 1; p >= 0; --p) {
    const double mid = lo + (p + 0.5) * pl;
    if (monotone && std::isfinite(running)) {
      const double y1 = mid + 0.5 * pl;
      const double d1 = z[0].real() - y1;
      // sup of f over the slices seen so far stands in for the unknown global sup
      const double cap = -d1 * d1 / (2.0 * h) + std::log(std::max(sup_f, 1e-300) * (y1 - lo) * 1.1 * (hi2 - lo2));
      if (cap < running - 60.0) break;
    }
    std::vector<Complex> ex, co;
    for (int k = 0; k < kPanelOrder; ++k) {
      const double y1 = mid + 0.5 * pl * gx[k];
      for (const auto& [a, b] : chords(domain, y1)) {
        for (int m = 0; m < slice_nodes; ++m) {
          const double y2 = 0.5 * (a + b) + 0.5 * (b - a) * cx[m];
          const Complex v = f(Vec2(y1, y2));
          if (v == Complex(0.0)) continue;
          sup_f = std::max(sup_f, std::abs(v));
          const Complex d1 = z[0] - y1, d2 = z[1] - y2;
          ex.push_back(-(d1 * d1 + d2 * d2) / (2.0 * h));
          co.push_back(0.25 * pl * gw[k] * (b - a) * cw[m] * v);
        }
      }
    }
    const LogComplex part = log_sum_exp(ex, co);
    if (!part.is_zero()) {
      total = total + part;
      running = std::max(running, part.log_mod);
    }
  }
  return total;
}

double minimal_a(double c, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("minimal_a: eps must be positive");
  return (c + 4.0 * eps) / (eps * eps);
}

ImprovedBoundReport check_improved_bound(const geometry::Domain2D& domain, const ScalarField& f,
                                         const ImprovedBoundSetup& setup, const std::vector<double>& h_list) {
  ImprovedBoundReport rep;
  if (!(setup.eps > 0.0) || !(setup.c > 0.0)) throw std::invalid_argument("check_improved_bound: need c, eps > 0");
  if (h_list.size() < 2) throw std::invalid_argument("check_improved_bound: need at least 2 values of h");
  rep.c_meas = pairing::measure_decomposition_constant(setup.a > 0.0 ? setup.a : 1.0, setup.eps);
  rep.eps_max = setup.c / (8.0 * rep.c_meas);
  rep.a_min = minimal_a(setup.c, setup.eps);
  if (!(setup.eps < rep.eps_max)) {
    throw std::invalid_argument("check_improved_bound: eps >= c / (8 C_meas) = " + std::to_string(rep.eps_max));
  }
  if (!(setup.a > rep.a_min)) {
    throw std::invalid_argument("check_improved_bound: a <= (c + 4 eps) / eps^2 = " + std::to_string(rep.a_min));
  }

  const Complex2 z{2.0 * setup.a, 0.0};
  rep.decay.h_list = h_list;
  rep.decay.slope_tol = setup.slope_tol;
  rep.decay.bound_slope = -setup.c * setup.a / 4.0;
  for (double h : h_list) {
    const double weight = -weight_phi(z[0]) / (2.0 * h);
    const LogComplex v = sliced_transform(domain, f, z, h, setup.slice_nodes, 1.0);
    const LogComplex fine = sliced_transform(domain, f, z, h, 2 * setup.slice_nodes, 0.5);
    const double lv = v.is_zero() ? kNegInf : weight + v.log_mod;
    const double lf = fine.is_zero() ? kNegInf : weight + fine.log_mod;
    if (std::isfinite(lv) && std::isfinite(lf)) {
      rep.refinement_gap = std::max(rep.refinement_gap, std::abs(lv - lf));
    } else if (std::isfinite(lv) != std::isfinite(lf)) {
      rep.refinement_gap = kInf;
    }
    rep.decay.log_norms.push_back(lf);
  }
  // the log values scale like a/h; judge the fit residual relative to them
  double scale = 1.0;
  for (double v : rep.decay.log_norms) {
    if (std::isfinite(v)) scale = std::max(scale, 1e-2 * std::abs(v));
  }
  fit_decay(rep.decay, scale);
  return rep;
}

}  // namespace calderon::bargmann
