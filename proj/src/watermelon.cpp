#include "calderon/watermelon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "calderon/bargmann.hpp"
#include "calderon/parallel.hpp"

namespace calderon::watermelon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Outer boundary by arclength: big arc, top corner, cut (downward), bottom corner.
struct OuterCurve {
  struct Piece {
    bool arc = true;
    Complex center;
    double radius = 0.0;
    double theta0 = 0.0;
    Complex start, dir;
    double s0 = 0.0, length = 0.0;
  };
  std::vector<Piece> pieces;
  double total = 0.0;
  double yc = 0.0, theta_c = 0.0, rho = 0.0, cut = 0.0;
  Complex top_center, bottom_center;

  explicit OuterCurve(const BarrierRegion& g) {
    rho = g.corner_radius();
    cut = g.cut_x();
    yc = g.corner_y();
    theta_c = std::atan2(yc, rho);
    top_center = Complex(cut + rho, yc);
    bottom_center = Complex(cut + rho, -yc);
    auto add_arc = [&](Complex c, double r, double t0, double t1) {
      Piece p;
      p.center = c;
      p.radius = r;
      p.theta0 = t0;
      p.length = r * (t1 - t0);
      pieces.push_back(p);
    };
    add_arc(Complex(cut, 0.0), g.R, -theta_c, theta_c);
    add_arc(top_center, rho, theta_c, kPi);
    Piece seg;
    seg.arc = false;
    seg.start = Complex(cut, yc);
    seg.dir = Complex(0.0, -1.0);
    seg.length = 2.0 * yc;
    pieces.push_back(seg);
    add_arc(bottom_center, rho, kPi, 2.0 * kPi - theta_c);
    for (auto& p : pieces) {
      p.s0 = total;
      total += p.length;
    }
  }

  // position and arclength derivatives
  geometry::CurveSample at_s(double s) const {
    std::size_t k = 0;
    while (k + 1 < pieces.size() && s >= pieces[k + 1].s0) ++k;
    const Piece& p = pieces[k];
    const double u = s - p.s0;
    if (!p.arc) return {p.start + u * p.dir, p.dir, Complex(0.0)};
    const Complex e = std::exp(Complex(0.0, p.theta0 + u / p.radius));
    return {p.center + p.radius * e, Complex(0.0, 1.0) * e, -e / p.radius};
  }

  geometry::CurveParam param() const {
    return [c = *this](double t) {
      const double S = c.total;
      auto q = c.at_s(std::clamp(t - std::floor(t), 0.0, 1.0) * S);
      return geometry::CurveSample{q.pos, q.d1 * S, q.d2 * (S * S)};
    };
  }

  // parameter of the cut point (cut, y)
  double cut_parameter(double y) const { return (pieces[2].s0 + (yc - y)) / total; }

  std::vector<double> breaks(const MeshOptions& o) const {
    const double hmax = 1.0 / o.scale, fine = 0.25 / o.scale;
    auto size = [&](Complex p) {
      const double dc = std::max(0.0, std::min(std::abs(p - top_center), std::abs(p - bottom_center)) - rho);
      double l = std::min(hmax, (rho + 0.5 * dc) / o.scale);
      if (std::abs(p.real() - cut) < 1e-12 && std::abs(p.imag()) <= o.fine_height) l = std::min(l, fine);
      return l;
    };
    std::vector<double> out{0.0};
    for (const auto& p : pieces) {
      double s = p.s0;
      const double end = p.s0 + p.length;
      while (true) {
        double step = size(at_s(s).pos);
        for (int it = 0; it < 2; ++it) step = size(at_s(std::min(s + 0.5 * step, end)).pos);
        if (s + 1.3 * step >= end) {
          // finish with one or two equal panels
          if (end - s > step) out.push_back((s + 0.5 * (end - s)) / total);
          break;
        }
        s += step;
        out.push_back(s / total);
      }
      out.push_back(end / total);
    }
    out.back() = 1.0;
    return out;
  }
};

std::vector<Complex> strip_points(const BarrierRegion& g, const PropagateOptions& o) {
  std::vector<Complex> pts;
  for (int i = 0; i < o.strip_nx; ++i) {
    const double x = o.strip_nx == 1 ? 0.0 : -g.delta + 2.0 * g.delta * i / (o.strip_nx - 1);
    for (int j = 0; j < o.strip_ny; ++j) {
      const double y = o.strip_ny == 1 ? 0.0 : -o.r + 2.0 * o.r * j / (o.strip_ny - 1);
      pts.emplace_back(x, y);
    }
  }
  return pts;
}

std::string sample_text(Complex s) {
  std::ostringstream os;
  os.precision(10);
  os << "(" << s.real() << ", " << s.imag() << ")";
  return os.str();
}

// least-squares slope and intercept of y against x
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double beta = sxx > 0 ? sxy / sxx : 0.0;
  return {beta, my - beta * mx};
}

struct Limit {
  double value = 0.0;
  bool monotone = true;
  bool decaying = false;
};

Limit extrapolate(const std::vector<double>& h, const std::vector<double>& logb) {
  Limit out;
  const std::size_t n = h.size();
  for (std::size_t i = 1; i < n; ++i) out.monotone = out.monotone && logb[i] <= logb[i - 1] + 1e-12;
  if (std::all_of(logb.begin(), logb.end(), [](double v) { return v == -kInf; })) {
    out.decaying = true;
    return out;
  }
  if (std::any_of(logb.begin(), logb.end(), [](double v) { return v == -kInf; })) {
    // exact zero at the finest steps
    out.decaying = logb.back() == -kInf;
    out.value = out.decaying ? 0.0 : std::exp(logb.back());
    return out;
  }
  std::vector<double> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[i] = 1.0 / h[i];
  const auto [beta, alpha] = line_fit(inv, logb);
  (void)alpha;
  if (beta < 0.0 && out.monotone) {
    out.decaying = true;
    return out;
  }
  const double h1 = h[n - 2], h2 = h[n - 1];
  const double b1 = std::exp(logb[n - 2]), b2 = std::exp(logb[n - 1]);
  out.value = std::max(0.0, (h1 * b2 - h2 * b1) / (h1 - h2));
  return out;
}

}  // namespace

double BarrierRegion::corner_y() const {
  const double rho = corner_radius();
  return std::sqrt((R - rho) * (R - rho) - rho * rho);
}

void BarrierRegion::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("BarrierRegion: delta must be positive");
  if (!(R > 4.0 * corner_radius())) throw std::invalid_argument("BarrierRegion: R must exceed the corner rounding");
  if (!(b > 0.0)) throw std::invalid_argument("BarrierRegion: b must be positive");
  if (!(cut_x() <= -delta)) throw std::invalid_argument("BarrierRegion: the cut must lie at or left of -delta");
  if (!(L - b > 0.0)) throw std::invalid_argument("BarrierRegion: the excluded disc must lie in Re s > 0");
  if (!(L + b < cut_x() + R)) throw std::invalid_argument("BarrierRegion: the excluded disc must lie inside the semi-disc");
}

bool BarrierRegion::contains(Complex s) const {
  const double cut = cut_x();
  const Complex o(cut, 0.0);
  if (!(s.real() > cut) || !(std::abs(s - o) < R) || !(std::abs(s - L) > b)) return false;
  const double rho = corner_radius(), yc = corner_y();
  const double theta_c = std::atan2(yc, rho);
  // cusp between the corner arc, the cut and the big arc
  const Complex d = Complex(s.real(), std::abs(s.imag())) - Complex(cut + rho, yc);
  const double ang = std::atan2(d.imag(), d.real());
  return !(ang > theta_c && std::abs(d) > rho);
}

laplace::HarmonicField solve_two_values(std::shared_ptr<const laplace::LayerSolver> solver, double outer_value,
                                        double inner_value) {
  const auto& nodes = solver->mesh().nodes();
  Eigen::VectorXcd data(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) data[k] = nodes[k].component == 0 ? outer_value : inner_value;
  return solver->solve(data);
}

std::shared_ptr<const laplace::LayerSolver> barrier_solver(const BarrierRegion& region, const MeshOptions& options) {
  region.validate();
  if (!(options.scale > 0.0) || options.inner_panels < 4 || options.order < 4)
    throw std::invalid_argument("barrier_solver: invalid mesh options");
  const OuterCurve outer(region);
  laplace::BoundaryMesh::Component c0{outer.param(), outer.breaks(options), false, Complex(0.0)};

  const double L = region.L, b = region.b;
  laplace::BoundaryMesh::Component c1;
  // clockwise: the region lies outside the circle
  c1.curve = [L, b](double t) {
    const double w = 2.0 * kPi;
    const Complex e = std::exp(Complex(0.0, -w * t));
    return geometry::CurveSample{L + b * e, Complex(0.0, -w) * b * e, -w * w * b * e};
  };
  const int n = static_cast<int>(std::ceil(options.inner_panels * options.scale));
  for (int k = 0; k <= n; ++k) c1.breaks.push_back(static_cast<double>(k) / n);
  c1.hole = true;
  c1.hole_center = Complex(L, 0.0);
  return laplace::LayerSolver::create(laplace::BoundaryMesh({c0, c1}, options.order));
}

BarrierFunction::BarrierFunction(BarrierRegion region, double outer_value, double inner_value,
                                 std::shared_ptr<const laplace::LayerSolver> solver)
    : region_(region),
      outer_(outer_value),
      inner_(inner_value),
      solver_(solver),
      field_(solve_two_values(solver, outer_value, inner_value)) {}

double BarrierFunction::operator()(Complex s) const { return field_.evaluate(Vec2(s)).real(); }

std::vector<double> BarrierFunction::evaluate_many(const std::vector<Complex>& s) const {
  std::vector<Vec2> p;
  p.reserve(s.size());
  for (auto z : s) p.emplace_back(z);
  const auto v = field_.evaluate_many(p);
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k].real();
  return out;
}

Eigen::VectorXd BarrierFunction::normal_derivative() const { return field_.normal_derivative().real(); }

std::string BarrierFunction::csv(double x_lo, double x_hi, double y_lo, double y_hi, int nx, int ny) const {
  if (nx < 2 || ny < 2) throw std::invalid_argument("BarrierFunction::csv: need at least 2 x 2 nodes");
  std::vector<Complex> pts, inside;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      pts.emplace_back(x_lo + (x_hi - x_lo) * i / (nx - 1), y_lo + (y_hi - y_lo) * j / (ny - 1));
  for (auto p : pts)
    if (region_.contains(p)) inside.push_back(p);
  const auto v = evaluate_many(inside);
  std::vector<std::vector<double>> rows;
  std::size_t k = 0;
  for (auto p : pts) {
    const double phi = region_.contains(p) ? v[k++] : std::numeric_limits<double>::quiet_NaN();
    rows.push_back({p.real(), p.imag(), phi});
  }
  return csv_table({"x", "y", "phi"}, rows);
}

BarrierFunction build_barrier(const BarrierRegion& region, double c, const MeshOptions& options) {
  if (!(c > 0.0)) throw std::invalid_argument("build_barrier: c must be positive");
  return build_barrier_values(region, 4.0 * region.delta * region.delta, -c, options);
}

BarrierFunction build_barrier_values(const BarrierRegion& region, double outer_value, double inner_value,
                                     const MeshOptions& options) {
  return BarrierFunction(region, outer_value, inner_value, barrier_solver(region, options));
}

MaximumPrincipleReport check_maximum_principle(const BarrierFunction& phi, std::size_t probes, unsigned seed,
                                               double tol) {
  const auto& g = phi.region();
  std::mt19937_64 rng(seed);
  const double cut = g.cut_x();
  // half over the semi-disc, half near the cut and the excluded disc
  std::uniform_real_distribution<double> wx(cut, cut + g.R), wy(-g.R, g.R);
  std::uniform_real_distribution<double> nx(cut, g.L + g.b + 1.0), ny(-g.b - 1.0, g.b + 1.0);
  std::vector<Complex> pts;
  while (pts.size() < probes) {
    const bool wide = pts.size() % 2 == 0;
    const Complex s = wide ? Complex(wx(rng), wy(rng)) : Complex(nx(rng), ny(rng));
    if (g.contains(s)) pts.push_back(s);
  }
  const auto v = phi.evaluate_many(pts);
  MaximumPrincipleReport r;
  r.probes = probes;
  r.min_value = kInf;
  r.max_value = -kInf;
  for (double x : v) {
    r.min_value = std::min(r.min_value, x);
    r.max_value = std::max(r.max_value, x);
  }
  const double lo = std::min(phi.outer_value(), phi.inner_value()), hi = std::max(phi.outer_value(), phi.inner_value());
  r.violation = std::max(lo - r.min_value, r.max_value - hi);
  r.pass = r.violation <= tol;
  return r;
}

HopfReport check_hopf(const BarrierFunction& phi, double r, int samples) {
  const auto& g = phi.region();
  if (!(r > 0.0) || r > g.corner_y() - 5.0 * g.corner_radius())
    throw std::invalid_argument("check_hopf: r must be positive and clear of the rounded corners");
  if (samples < 2) throw std::invalid_argument("check_hopf: need at least 2 samples");
  const OuterCurve outer(g);
  const Eigen::VectorXcd dn = phi.normal_derivative().cast<Complex>();
  HopfReport out;
  out.min_derivative = kInf;
  out.max_derivative = -kInf;
  for (int k = 0; k < samples; ++k) {
    const double y = -r + 2.0 * r * k / (samples - 1);
    // inward derivative of 4 delta^2 - phi equals the outward derivative of phi
    const double d = phi.solver().mesh().interpolate(dn, 0, outer.cut_parameter(y)).real();
    if (d < out.min_derivative) {
      out.min_derivative = d;
      out.at_y = y;
    }
    out.max_derivative = std::max(out.max_derivative, d);
  }
  out.degenerate = phi.outer_value() == phi.inner_value();
  out.c_prime_hopf = 0.5 * g.delta * out.min_derivative;
  out.pass = !out.degenerate && out.min_derivative > 0.0;
  return out;
}

HarnackReport check_harnack(const BarrierFunction& phi, double r, int samples) {
  const auto& g = phi.region();
  if (!(r > 0.0) || samples < 2) throw std::invalid_argument("check_harnack: need r > 0 and samples >= 2");
  const double top = phi.outer_value();
  HarnackReport out;
  out.reference = top - phi(Complex(g.L - g.b - g.delta * g.delta, 0.0));
  out.deviation = std::abs(out.reference - phi.c());
  out.degenerate = phi.outer_value() == phi.inner_value() || std::abs(out.reference) <= 1e-12;
  std::vector<Complex> pts;
  for (int k = 0; k < samples; ++k) pts.emplace_back(0.0, -r + 2.0 * r * k / (samples - 1));
  const auto v = phi.evaluate_many(pts);
  out.ratio_min = kInf;
  out.ratio_max = -kInf;
  for (double x : v) {
    const double ratio = out.degenerate ? 0.0 : (top - x) / out.reference;
    out.ratio_min = std::min(out.ratio_min, ratio);
    out.ratio_max = std::max(out.ratio_max, ratio);
  }
  out.normalized_min = out.ratio_min / g.delta;
  out.normalized_max = out.ratio_max / g.delta;
  return out;
}

Json Propagation::to_json(double delta, double c) const {
  Json j;
  j["h"] = h;
  j["delta"] = delta;
  j["c"] = c;
  j["c_prime"] = json_number(c_prime);
  j["max_slack"] = json_number(max_slack);
  j["outer_hypothesis"] = json_number(outer_hypothesis);
  j["inner_hypothesis"] = json_number(inner_hypothesis);
  j["boundary_samples"] = boundary_samples;
  j["conclusion_holds"] = conclusion_holds;
  j["pass"] = pass;
  return j;
}

Propagation propagate_decay(const BarrierFunction& phi, const std::function<double(Complex)>& log_abs_F, double h,
                            const PropagateOptions& options) {
  if (!(h > 0.0)) throw std::invalid_argument("propagate_decay: h must be positive");
  if (!(options.r > 0.0) || options.strip_nx < 1 || options.strip_ny < 1)
    throw std::invalid_argument("propagate_decay: invalid strip");
  const auto& nodes = phi.solver().mesh().nodes();
  Propagation out;
  out.h = h;
  out.boundary_samples = nodes.size();

  std::vector<double> excess(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t k) {
    const Complex s = nodes[k].pos;
    const double e = 2.0 * h * log_abs_F(s) - bargmann::weight_phi(s);
    excess[k] = nodes[k].component == 0 ? e : e + phi.c();
  });
  out.outer_hypothesis = out.inner_hypothesis = -kInf;
  std::size_t worst_outer = 0, worst_inner = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].component == 0 && excess[k] > out.outer_hypothesis) {
      out.outer_hypothesis = excess[k];
      worst_outer = k;
    }
    if (nodes[k].component != 0 && excess[k] > out.inner_hypothesis) {
      out.inner_hypothesis = excess[k];
      worst_inner = k;
    }
  }
  if (out.outer_hypothesis > options.tol)
    throw HypothesisViolation("propagate_decay: 2h log|F| exceeds Phi at outer sample " +
                                  sample_text(nodes[worst_outer].pos),
                              nodes[worst_outer].pos, out.outer_hypothesis);
  if (out.inner_hypothesis > options.tol)
    throw HypothesisViolation("propagate_decay: 2h log|F| exceeds Phi - c at inner sample " +
                                  sample_text(nodes[worst_inner].pos),
                              nodes[worst_inner].pos, out.inner_hypothesis);

  const auto pts = strip_points(phi.region(), options);
  const auto ph = phi.evaluate_many(pts);
  std::vector<double> sub(pts.size());
  parallel_for(pts.size(), [&](std::size_t k) { sub[k] = 2.0 * h * log_abs_F(pts[k]) - bargmann::weight_phi(pts[k]); });
  double phimax = -kInf, submax = -kInf;
  out.max_slack = -kInf;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    phimax = std::max(phimax, ph[k]);
    submax = std::max(submax, sub[k]);
    out.max_slack = std::max(out.max_slack, sub[k] - ph[k]);
  }
  out.c_prime = -phimax;
  out.pass = out.max_slack <= options.tol;
  out.conclusion_holds = out.pass && submax <= -out.c_prime + options.tol;
  return out;
}

Json VanishingConclusion::to_json() const {
  Json j;
  j["bounds"] = Json::array();
  for (const auto& b : bounds) {
    j["bounds"].push_back({{"h", b.h},
                           {"log_certified", json_number(b.log_certified)},
                           {"log_measured", json_number(b.log_measured)},
                           {"propagated", b.propagated},
                           {"c_prime", json_number(b.c_prime)}});
  }
  j["limit_certified"] = json_number(limit_certified);
  j["limit_measured"] = json_number(limit_measured);
  j["limit"] = json_number(limit);
  j["monotone"] = monotone;
  j["inconclusive"] = inconclusive;
  j["note"] = note;
  return j;
}

VanishingConclusion conclude_vanishing(const std::vector<StripBound>& bounds) {
  if (bounds.size() < 3) throw std::invalid_argument("conclude_vanishing: need at least three h values");
  std::vector<double> h, lc, lm;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!(bounds[i].h > 0.0)) throw std::invalid_argument("conclude_vanishing: h must be positive");
    if (i > 0 && !(bounds[i].h < bounds[i - 1].h))
      throw std::invalid_argument("conclude_vanishing: h must be strictly decreasing");
    h.push_back(bounds[i].h);
    lc.push_back(bounds[i].log_certified);
    lm.push_back(bounds[i].log_measured);
  }
  VanishingConclusion out;
  out.bounds = bounds;
  const auto c = extrapolate(h, lc), m = extrapolate(h, lm);
  out.limit_certified = c.value;
  out.limit_measured = m.value;
  out.limit = std::min(c.value, m.value);
  out.monotone = m.monotone;
  out.inconclusive = !c.monotone || !m.monotone;
  if (c.decaying)
    out.note = "certified bound decays like e^{-c'/2h}";
  else if (m.decaying)
    out.note = "measured strip values decay exponentially in 1/h";
  else
    out.note = "no exponential decay; Richardson limit in h";
  return out;
}

PipelineReport run_vanishing_pipeline(const geometry::Domain2D& domain, const ScalarField& f,
                                      const PipelineSetup& setup) {
  if (setup.h_list.size() < 3) throw std::invalid_argument("run_vanishing_pipeline: need at least three h values");
  if (setup.slices < 1 || setup.strip_points < 1) throw std::invalid_argument("run_vanishing_pipeline: empty strip");
  const auto& g = setup.region;
  const double delta = g.delta;

  PipelineReport out;
  const auto quad = geometry::interior_quadrature(domain, setup.radial, setup.angular);
  const auto grid = pairing::sample_potential(domain, quad, f);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const double a = std::abs(grid.values[q]);
    out.sup_f = std::max(out.sup_f, a);
    if (quad.nodes[q].x1 >= -delta) out.strip_max_f = std::max(out.strip_max_f, a);
  }

  // x2 range of the strip -delta <= x1 <= 0 inside the domain
  double y_lo = kInf, y_hi = -kInf;
  for (int j = 0; j < domain.size(); ++j) {
    const Vec2 p = domain.point(j);
    if (p.x1 >= -delta) {
      y_lo = std::min(y_lo, p.x2);
      y_hi = std::max(y_hi, p.x2);
    }
  }
  if (!(y_lo <= y_hi)) throw std::invalid_argument("run_vanishing_pipeline: domain does not reach the strip");
  std::vector<double> slices;
  for (int k = 0; k < setup.slices; ++k)
    slices.push_back(setup.slices == 1 ? 0.5 * (y_lo + y_hi) : y_lo + (y_hi - y_lo) * (k + 0.5) / setup.slices);

  const auto phi = build_barrier(g, setup.c, setup.mesh);
  PropagateOptions popt;
  popt.r = setup.r;
  std::vector<StripBound> bounds;
  for (double h : setup.h_list) {
    StripBound sb;
    sb.h = h;
    const double log_norm = std::log(2.0 * kPi * h) + std::log(out.sup_f);
    bool applied = out.sup_f > 0.0;
    double c_prime = kInf;
    for (double x2 : slices) {
      if (!applied) break;
      auto logF = [&](Complex s) { return bargmann::transform(grid, {s, Complex(x2)}, h).log_mod - log_norm; };
      try {
        const auto p = propagate_decay(phi, logF, h, popt);
        out.propagations.push_back(p);
        applied = p.pass;
        c_prime = std::min(c_prime, p.c_prime);
      } catch (const HypothesisViolation& e) {
        out.rejections.push_back(e.what());
        applied = false;
      }
    }
    sb.propagated = applied;
    sb.c_prime = applied ? c_prime : 0.0;
    if (out.sup_f == 0.0) {
      sb.log_certified = -kInf;
    } else {
      sb.log_certified = std::log(out.sup_f) - (applied ? c_prime / (2.0 * h) : 0.0);
    }

    // direct values at strip points inside the domain
    std::vector<Vec2> pts;
    for (double x2 : slices)
      for (int i = 0; i < setup.strip_points; ++i) {
        const Vec2 p{setup.strip_points == 1 ? 0.0 : -delta + delta * i / (setup.strip_points - 1), x2};
        if (domain.contains(p)) pts.push_back(p);
      }
    std::vector<double> lv(pts.size());
    parallel_for(pts.size(), [&](std::size_t k) {
      lv[k] = bargmann::transform(grid, {Complex(pts[k].x1), Complex(pts[k].x2)}, h).log_mod;
    });
    sb.log_measured = -kInf;
    for (double v : lv) sb.log_measured = std::max(sb.log_measured, v - std::log(2.0 * kPi * h));
    bounds.push_back(sb);
  }
  const auto v = phi.evaluate_many(strip_points(g, popt));
  out.c_prime = -*std::max_element(v.begin(), v.end());
  out.conclusion = conclude_vanishing(bounds);
  return out;
}

}  // namespace calderon::watermelon
