#include "calderon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace calderon {

double Vec2::norm() const { return std::hypot(x1, x2); }

}  // namespace calderon

namespace calderon::geometry {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

/// Radial curve c + r(theta) e^{i theta}, theta = 2 pi t, from r and two derivatives in theta.
CurveParam radial_curve(Vec2 center, std::function<std::array<double, 3>(double)> radius) {
  const Complex c = center.as_complex();
  return [c, radius](double t) {
    const double theta = kTwoPi * t;
    const auto [r, dr, ddr] = radius(theta);
    const Complex e = std::polar(1.0, theta);
    const Complex I(0.0, 1.0);
    return CurveSample{c + r * e, kTwoPi * (dr + I * r) * e,
                       kTwoPi * kTwoPi * (ddr + 2.0 * I * dr - r) * e};
  };
}

double wrap_angle(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - kPi;
}

}  // namespace

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Ellipse: return "ellipse";
    case ShapeKind::SmoothedStadium: return "smoothed-stadium";
    case ShapeKind::FourierCircle: return "fourier-perturbed-circle";
    case ShapeKind::SharedArcDisc: return "shared-arc-disc";
  }
  return "unknown";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  for (auto k : {ShapeKind::Circle, ShapeKind::Ellipse, ShapeKind::SmoothedStadium,
                 ShapeKind::FourierCircle, ShapeKind::SharedArcDisc}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown shape '" + name + "'");
}

Domain2D::Domain2D(CurveParam param, Vec2 center, int nodes, std::string label)
    : param_(std::move(param)), center_(center), label_(std::move(label)) {
  if (nodes < 64 || nodes % 2 != 0) {
    throw std::invalid_argument("boundary node count must be even and >= 64");
  }
  samples_.reserve(nodes);
  for (int j = 0; j < nodes; ++j) samples_.push_back(param_(static_cast<double>(j) / nodes));

  const CurveSample end = param_(1.0);
  const double scale = std::abs(samples_[0].d1);
  if (std::abs(end.pos - samples_[0].pos) > 1e-12 * std::max(1.0, scale)) {
    throw std::invalid_argument(label_ + ": curve is not closed");
  }

  // Star-shaped (and counterclockwise) w.r.t. center on a 4x oversampled grid.
  const Complex c = center_.as_complex();
  double worst = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 4 * nodes; ++j) {
    const CurveSample s = param_(static_cast<double>(j) / (4 * nodes));
    worst = std::min(worst, cross(s.pos - c, s.d1) / (std::abs(s.pos - c) * std::abs(s.d1)));
  }
  if (!(worst > 0.0)) {
    std::ostringstream msg;
    msg << label_ << ": not star-shaped with respect to (" << center_.x1 << ", " << center_.x2
        << "); minimum visibility sine " << worst;
    throw std::invalid_argument(msg.str());
  }

  // Simplicity on the sampled nodes: no two non-adjacent nodes coincide.
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 2; j < nodes; ++j) {
      if (i == 0 && j == nodes - 1) continue;
      min_gap = std::min(min_gap, std::abs(samples_[i].pos - samples_[j].pos));
    }
  }
  if (!(min_gap > 0.0)) throw std::invalid_argument(label_ + ": curve is not simple");
}

Vec2 Domain2D::normal(int j) const {
  const Complex d = samples_[j].d1 / std::abs(samples_[j].d1);
  return {d.imag(), -d.real()};
}

double Domain2D::curvature(int j) const {
  const auto& s = samples_[j];
  return cross(s.d1, s.d2) / std::pow(std::abs(s.d1), 3);
}

double Domain2D::curvature_at(double t) const {
  const auto s = param_(t);
  return cross(s.d1, s.d2) / std::pow(std::abs(s.d1), 3);
}

double Domain2D::length() const {
  std::vector<double> v(samples_.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::abs(samples_[j].d1);
  return pairwise_sum(v.data(), v.size()) / size();
}

double Domain2D::area() const {
  std::vector<double> v(samples_.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = 0.5 * cross(samples_[j].pos, samples_[j].d1);
  return pairwise_sum(v.data(), v.size()) / size();
}

double Domain2D::max_spacing() const {
  double m = 0.0;
  for (int j = 0; j < size(); ++j) m = std::max(m, speed(j) / size());
  return m;
}

bool Domain2D::contains(Vec2 x) const {
  // Winding number of the 4x oversampled polygon around x.
  const int n = 4 * size();
  const Complex z = x.as_complex();
  double winding = 0.0;
  Complex prev = param_(0.0).pos - z;
  for (int j = 1; j <= n; ++j) {
    const Complex cur = param_(static_cast<double>(j) / n).pos - z;
    winding += std::arg(cur / prev);
    prev = cur;
  }
  return std::abs(winding) > kPi;
}

double Domain2D::nearest_parameter(Vec2 x) const {
  const Complex z = x.as_complex();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < size(); ++j) {
    const double d = std::abs(samples_[j].pos - z);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  // Newton on g(t) = Re(conj(gamma(t) - z) gamma'(t)) = 0.
  double t = parameter(best);
  const double h = 1.0 / size();
  for (int it = 0; it < 30; ++it) {
    const auto s = param_(t);
    const double g = std::real(std::conj(s.pos - z) * s.d1);
    const double dg = std::norm(s.d1) + std::real(std::conj(s.pos - z) * s.d2);
    if (dg <= 0) break;
    const double step = std::clamp(g / dg, -h, h);
    t -= step;
    if (std::abs(step) < 1e-15) break;
  }
  t = std::fmod(t, 1.0);
  if (t < 0) t += 1.0;
  return t;
}

double Domain2D::distance_to_boundary(Vec2 x) const {
  return std::abs(param_(nearest_parameter(x)).pos - x.as_complex());
}

std::string Domain2D::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "t,x1,x2,nu1,nu2\n";
  for (int j = 0; j < size(); ++j) {
    const Vec2 p = point(j);
    const Vec2 n = normal(j);
    out << parameter(j) << ',' << p.x1 << ',' << p.x2 << ',' << n.x1 << ',' << n.x2 << '\n';
  }
  return out.str();
}

Domain2D make_domain(const ShapeSpec& spec, int nodes) {
  switch (spec.kind) {
    case ShapeKind::Circle: {
      if (spec.radius <= 0) throw std::invalid_argument("circle radius must be positive");
      const double R = spec.radius;
      return Domain2D(radial_curve(spec.center, [R](double) { return std::array<double, 3>{R, 0, 0}; }),
                      spec.center, nodes, "circle");
    }
    case ShapeKind::Ellipse: {
      if (spec.semi_a <= 0 || spec.semi_b <= 0) throw std::invalid_argument("ellipse axes must be positive");
      const Complex c = spec.center.as_complex();
      const double a = spec.semi_a, b = spec.semi_b;
      CurveParam p = [c, a, b](double t) {
        const double th = kTwoPi * t, cs = std::cos(th), sn = std::sin(th);
        return CurveSample{c + Complex(a * cs, b * sn), kTwoPi * Complex(-a * sn, b * cs),
                           -kTwoPi * kTwoPi * Complex(a * cs, b * sn)};
      };
      return Domain2D(std::move(p), spec.center, nodes, "ellipse");
    }
    case ShapeKind::SmoothedStadium: {
      if (spec.semi_a <= 0 || spec.semi_b <= 0) throw std::invalid_argument("stadium axes must be positive");
      const double A4 = std::pow(spec.semi_a, 4), B4 = std::pow(spec.semi_b, 4);
      auto radius = [A4, B4](double th) {
        const double c = std::cos(th), s = std::sin(th);
        const double q = c * c * c * c / A4 + s * s * s * s / B4;
        const double dq = -4 * c * c * c * s / A4 + 4 * s * s * s * c / B4;
        const double ddq = (12 * c * c * s * s - 4 * c * c * c * c) / A4 +
                           (12 * s * s * c * c - 4 * s * s * s * s) / B4;
        const double r = std::pow(q, -0.25);
        const double dr = -0.25 * std::pow(q, -1.25) * dq;
        const double ddr = (5.0 / 16.0) * std::pow(q, -2.25) * dq * dq - 0.25 * std::pow(q, -1.25) * ddq;
        return std::array<double, 3>{r, dr, ddr};
      };
      return Domain2D(radial_curve(spec.center, radius), spec.center, nodes, "smoothed-stadium");
    }
    case ShapeKind::FourierCircle: {
      const double R = spec.radius, eps = spec.amplitude;
      const int m = spec.mode;
      if (R <= 0 || std::abs(eps) >= 1.0) throw std::invalid_argument("fourier circle needs R > 0, |amplitude| < 1");
      auto radius = [R, eps, m](double th) {
        return std::array<double, 3>{R * (1 + eps * std::cos(m * th)), -R * eps * m * std::sin(m * th),
                                     -R * eps * m * m * std::cos(m * th)};
      };
      return Domain2D(radial_curve(spec.center, radius), spec.center, nodes, "fourier-perturbed-circle");
    }
    case ShapeKind::SharedArcDisc: {
      const double R = spec.radius, beta = spec.indent, alpha = spec.arc_half_width,
                   sigma = spec.transition, mid = spec.arc_center;
      if (R <= 0 || beta <= 0 || beta >= 1 || alpha <= 0 || sigma <= 0 || (kPi - alpha) < 6 * sigma) {
        throw std::invalid_argument("shared-arc disc needs 0<indent<1 and (pi - half width) >= 6 transition");
      }
      auto radius = [=](double th) {
        const double d = wrap_angle(th - mid);
        const double up = (d + alpha) / sigma, dn = (d - alpha) / sigma;
        const double k = 1.0 / std::sqrt(kPi);
        const double s = 0.5 * (std::erf(up) - std::erf(dn));
        const double ds = k / sigma * (std::exp(-up * up) - std::exp(-dn * dn));
        const double dds = k / (sigma * sigma) * (-2 * up * std::exp(-up * up) + 2 * dn * std::exp(-dn * dn));
        return std::array<double, 3>{R * (1 - beta * (1 - s)), R * beta * ds, R * beta * dds};
      };
      return Domain2D(radial_curve(spec.center, radius), spec.center, nodes, "shared-arc-disc");
    }
  }
  throw std::invalid_argument("unsupported shape");
}

BoundaryPartition::BoundaryPartition(std::vector<std::pair<double, double>> gamma_intervals)
    : gamma_(std::move(gamma_intervals)) {
  for (const auto& [a, b] : gamma_) {
    if (a < 0 || a >= 1 || b < 0 || b >= 1) {
      throw std::invalid_argument("Gamma interval endpoints must lie in [0,1)");
    }
  }
  // Sigma must be nonempty: probe a fine grid.
  bool sigma_found = false;
  for (int j = 0; j < 4096 && !sigma_found; ++j) sigma_found = !in_gamma(j / 4096.0);
  if (!sigma_found) throw std::invalid_argument("Gamma must be a proper subset of the boundary");
}

bool BoundaryPartition::in_gamma(double t) const {
  for (const auto& [a, b] : gamma_) {
    if (a <= b ? (t >= a && t <= b) : (t >= a || t <= b)) return true;
  }
  return false;
}

std::vector<bool> BoundaryPartition::gamma_mask(const Domain2D& domain) const {
  std::vector<bool> mask(domain.size());
  for (int j = 0; j < domain.size(); ++j) mask[j] = in_gamma(domain.parameter(j));
  return mask;
}

Vec2 ConformalNormalization::psi(Vec2 x) const {
  const Vec2 d = x - a;
  const double n2 = d.dot(d);
  if (n2 == 0.0) throw std::invalid_argument("inversion is undefined at its center");
  return a + d * (r * r / n2);
}

Vec2 ConformalNormalization::to_normalized(Vec2 x) const {
  return Vec2(similarity * (psi(x) - x0).as_complex());
}

Vec2 ConformalNormalization::from_normalized(Vec2 y) const {
  return psi(Vec2(y.as_complex() / similarity) + x0);
}

double ConformalNormalization::weight(Vec2 x) const {
  const double d = (x - a).norm();
  return std::norm(similarity) * std::pow(r, 4) / std::pow(d, 4);
}

namespace {

/// Smallest gap |x_j - a| - r over nodes away from x0, and the local
/// second-order condition curvature + 1/r > 0 at x0.
double inversion_clearance(const Domain2D& domain, int j0, Vec2 a, double r) {
  const double spacing = domain.max_spacing();
  const Vec2 x0 = domain.point(j0);
  double clearance = domain.curvature(j0) + 1.0 / r > 0 ? std::numeric_limits<double>::infinity()
                                                          : -1.0;
  for (int j = 0; j < domain.size(); ++j) {
    if ((domain.point(j) - x0).norm() < 4 * spacing) continue;
    clearance = std::min(clearance, (domain.point(j) - a).norm() - r);
  }
  return clearance;
}

}  // namespace

NormalizedDomain normalize_at(const Domain2D& domain, double t0, std::optional<double> radius) {
  const CurveSample s0 = domain.evaluate(t0);
  const Vec2 x0(s0.pos);
  const Complex tangent = s0.d1 / std::abs(s0.d1);
  const Vec2 nu(tangent.imag(), -tangent.real());

  // Work with the node closest to x0 for clearance bookkeeping.
  const int j0 = static_cast<int>(std::lround(t0 * domain.size())) % domain.size();

  double chosen = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  if (radius) {
    if (*radius <= 0) throw std::invalid_argument("inversion radius must be positive");
    const double cl = inversion_clearance(domain, j0, x0 + nu * *radius, *radius);
    if (cl < 1e-6) throw NumericalError("requested inversion radius violates clearance", cl);
    chosen = *radius;
  } else {
    const double kappa = domain.curvature_at(t0);
    const double r_max = std::abs(kappa) > 1e-12 ? 1.0 / std::abs(kappa) : domain.length() / kPi;
    constexpr int kSteps = 16;
    for (int k = 0; k <= kSteps; ++k) {
      const double r = r_max * std::pow(0.1, static_cast<double>(k) / kSteps);
      const double cl = inversion_clearance(domain, j0, x0 + nu * r, r);
      if (cl >= 1e-6) {
        chosen = r;
        break;
      }
      worst = std::min(worst, cl);
    }
    if (chosen == 0.0) {
      throw NumericalError("no admissible inversion ball at x0; smallest violated clearance", worst);
    }
  }

  ConformalNormalization map;
  map.r = chosen;
  map.a = x0 + nu * chosen;
  map.x0 = x0;
  // psi(Omega) lies in B(a,r) and its outward normal at x0 is (x0 - a)/r = -nu.
  // Rotate -nu to +e1 and scale r to 1.
  map.similarity = std::conj(Complex(-nu.x1, -nu.x2)) / chosen;

  const Complex a = map.a.as_complex();
  const Complex k = map.similarity;
  const Complex shift = k * (a - x0.as_complex());
  const Complex K = k * chosen * chosen;
  const CurveParam original = domain.param();
  // Inversion reverses orientation; reparameterize with s = 1 - t (shifted so s=0 is x0).
  CurveParam image = [original, a, K, shift, t0](double s) {
    double t = t0 - s;
    t -= std::floor(t);
    const CurveSample c = original(t);
    const Complex w = std::conj(c.pos - a);
    const Complex dw = std::conj(c.d1);
    const Complex ddw = std::conj(c.d2);
    const Complex pos = shift + K / w;
    const Complex d1 = -K * dw / (w * w);
    const Complex d2 = -K * (ddw / (w * w) - 2.0 * dw * dw / (w * w * w));
    return CurveSample{pos, -d1, d2};
  };

  Vec2 center = map.to_normalized(domain.center());
  try {
    return NormalizedDomain{Domain2D(image, center, domain.size(), domain.label() + "-normalized"), map};
  } catch (const std::invalid_argument&) {
    // Fall back to the centroid of the image nodes.
    Complex sum = 0.0;
    for (int j = 0; j < domain.size(); ++j) sum += image(static_cast<double>(j) / domain.size()).pos;
    center = Vec2(sum / static_cast<double>(domain.size()));
    return NormalizedDomain{Domain2D(image, center, domain.size(), domain.label() + "-normalized"), map};
  }
}

ScalarField kelvin_transfer(ScalarField image_field, const ConformalNormalization& map) {
  return [field = std::move(image_field), map](Vec2 x) {
    if ((x - map.a).norm() == 0.0) {
      throw std::invalid_argument("Kelvin transfer evaluated at the inversion center");
    }
    return field(map.to_normalized(x));
  };
}

double supporting_function(const std::vector<Vec2>& points, Vec2 xi) {
  if (points.empty()) throw std::invalid_argument("supporting function of an empty set");
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) h = std::max(h, p.dot(xi));
  return h;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

double InteriorQuadrature::total_weight() const { return pairwise_sum(weights.data(), weights.size()); }

InteriorQuadrature interior_quadrature(const Domain2D& domain, int radial, int angular) {
  if (radial < 1 || angular < 3) throw std::invalid_argument("quadrature resolution too small");
  std::vector<double> gx, gw;
  gauss_legendre(radial, gx, gw);
  const Complex c = domain.center().as_complex();
  InteriorQuadrature q;
  q.nodes.reserve(static_cast<std::size_t>(radial) * angular);
  q.weights.reserve(q.nodes.capacity());
  for (int k = 0; k < angular; ++k) {
    const CurveSample s = domain.evaluate(static_cast<double>(k) / angular);
    const Complex rel = s.pos - c;
    const double jac = cross(rel, s.d1) / angular;
    for (int i = 0; i < radial; ++i) {
      const double rho = 0.5 * (gx[i] + 1.0);
      q.nodes.emplace_back(c + rho * rel);
      q.weights.push_back(0.5 * gw[i] * rho * jac);
    }
  }
  return q;
}

template <typename T>
static T pairwise_impl(const T* data, std::size_t n) {
  if (n == 0) return T(0);
  if (n <= 8) {
    T s = data[0];
    for (std::size_t i = 1; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_impl(data, half) + pairwise_impl(data + half, n - half);
}

double pairwise_sum(const double* data, std::size_t n) { return pairwise_impl(data, n); }
Complex pairwise_sum(const Complex* data, std::size_t n) { return pairwise_impl(data, n); }

}  // namespace calderon::geometry
