#include <doctest.h>

#include <cmath>
#include <random>

#include "calderon/laplace.hpp"

using namespace calderon;
using namespace calderon::geometry;
using namespace calderon::laplace;

namespace {

std::vector<Complex> sample(const Domain2D& d, const std::function<Complex(Vec2)>& g) {
  std::vector<Complex> out;
  for (int j = 0; j < d.size(); ++j) out.push_back(g(d.point(j)));
  return out;
}

std::vector<Vec2> disc_probes(double rmax, int n) {
  std::vector<Vec2> pts;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < n; ++k) {
    const double r = rmax * std::sqrt(u(rng)), th = 2 * kPi * u(rng);
    pts.emplace_back(r * std::cos(th), r * std::sin(th));
  }
  return pts;
}

// Method of images for the unit disc.
double disc_green(Vec2 x, Vec2 y) {
  const double ny = y.norm();
  if (ny == 0.0) return -std::log(x.norm()) / (2 * kPi);
  const Vec2 ystar = y * (1.0 / (ny * ny));
  return -(std::log((x - y).norm()) - std::log(ny * (x - ystar).norm())) / (2 * kPi);
}

}  // namespace

TEST_CASE("disc with cos theta data gives x1") {
  const auto d = make_domain(ShapeSpec{}, 128);
  const auto u = solve_dirichlet({&d, sample(d, [](Vec2 x) { return Complex(x.x1, 0.0); })});
  double err = 0.0;
  for (const auto& p : disc_probes(0.999, 300)) err = std::max(err, std::abs(u.evaluate(p) - p.x1));
  CHECK(err <= 1e-10);
}

TEST_CASE("constant data gives a constant") {
  ShapeSpec s;
  s.kind = ShapeKind::FourierCircle;
  s.amplitude = 0.2;
  s.mode = 3;
  const auto d = make_domain(s, 128);
  const auto u = solve_dirichlet({&d, std::vector<Complex>(128, Complex(1.0, 0.0))});
  for (const auto& p : disc_probes(0.75, 100)) CHECK(std::abs(u.evaluate(p) - 1.0) < 1e-12);
}

TEST_CASE("disc with cos 3 theta data gives r^3 cos 3 theta") {
  const auto d = make_domain(ShapeSpec{}, 128);
  auto exact = [](Vec2 x) { return std::pow(x.as_complex(), 3).real(); };
  const auto u = solve_dirichlet({&d, sample(d, [&](Vec2 x) { return Complex(exact(x), 0.0); })});
  for (const auto& p : disc_probes(0.999, 300)) CHECK(std::abs(u.evaluate(p) - exact(p)) <= 1e-8);
}

TEST_CASE("complex data and trace reproduction on an ellipse") {
  ShapeSpec s;
  s.kind = ShapeKind::Ellipse;
  s.semi_a = 1.4;
  s.semi_b = 0.6;
  const auto d = make_domain(s, 256);
  auto exact = [](Vec2 x) {
    const Complex z = x.as_complex();
    return Complex(std::exp(z).real(), (z * z * z).imag());
  };
  const auto u = solve_dirichlet({&d, sample(d, exact)});
  const auto& mesh = u.solver().mesh();
  const auto tr = u.trace();
  for (int j = 0; j < mesh.size(); ++j) CHECK(std::abs(tr(j) - exact(Vec2(mesh.nodes()[j].pos))) < 1e-11);
  for (int j = 0; j < d.size(); j += 7) CHECK(std::abs(u.trace_at(d.parameter(j)) - exact(d.point(j))) < 1e-11);
  // Close to the boundary.
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    for (int j = 0; j < d.size(); j += 13) {
      const Vec2 x = d.point(j) - d.normal(j) * eps;
      CHECK(std::abs(u.evaluate(x) - exact(x)) < 1e-9);
    }
  }
}

TEST_CASE("gradient and normal derivative") {
  ShapeSpec s;
  s.kind = ShapeKind::SmoothedStadium;
  s.semi_a = 1.3;
  s.semi_b = 0.8;
  const auto d = make_domain(s, 512);
  auto exact = [](Vec2 x) { return Complex(std::exp(x.x1) * std::cos(x.x2), 0.0); };
  auto grad = [](Vec2 x) {
    return std::array<Complex, 2>{std::exp(x.x1) * std::cos(x.x2), -std::exp(x.x1) * std::sin(x.x2)};
  };
  const auto u = make_solver(d)->solve(exact);
  for (const auto& p : disc_probes(0.75, 50)) {
    const auto g = u.gradient(p), e = grad(p);
    CHECK(std::abs(g[0] - e[0]) + std::abs(g[1] - e[1]) < 1e-10);
  }
  const auto dn = u.normal_derivative();
  const auto& nodes = u.solver().mesh().nodes();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const Vec2 x(nodes[j].pos);
    const Complex t = nodes[j].d1 / std::abs(nodes[j].d1);
    const auto e = grad(x);
    CHECK(std::abs(dn(j) - (e[0] * t.imag() - e[1] * t.real())) < 1e-8);
  }
}

TEST_CASE("annulus with a logarithmic solution") {
  const double r0 = 0.4;
  BoundaryMesh::Component outer, inner;
  outer.curve = [](double t) {
    const Complex e = std::polar(1.0, 2 * kPi * t);
    return CurveSample{e, Complex(0, 2 * kPi) * e, -4 * kPi * kPi * e};
  };
  inner.curve = [r0](double t) {
    const Complex e = std::polar(r0, -2 * kPi * t);
    return CurveSample{e, Complex(0, -2 * kPi) * e, -4 * kPi * kPi * e};
  };
  inner.hole = true;
  for (int k = 0; k <= 12; ++k) {
    outer.breaks.push_back(k / 12.0);
    inner.breaks.push_back(k / 12.0);
  }
  outer.breaks.back() = inner.breaks.back() = 1.0;
  const auto solver = LayerSolver::create(BoundaryMesh({outer, inner}, 16));
  auto exact = [r0](Vec2 x) { return std::log(x.norm() / r0) / std::log(1 / r0) + 0.3 * x.x1 / (x.norm() * x.norm()); };
  const auto u = solver->solve([&](Vec2 x) { return Complex(exact(x), 0.0); });
  for (double r : {0.4001, 0.5, 0.7, 0.95, 0.9999}) {
    const Vec2 x(0.6 * r, 0.8 * r);
    CHECK(std::abs(u.evaluate(x).real() - exact(x)) < 1e-10);
  }
  const auto dn = u.normal_derivative();
  const auto& nodes = solver->mesh().nodes();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const Vec2 x(nodes[j].pos);
    const double r = x.norm();
    const double c = x.x1 / r;
    // d/dr of the exact field.
    const double dr = 1.0 / (r * std::log(1 / r0)) - 0.3 * c / (r * r);
    const double expected = nodes[j].component == 0 ? dr : -dr;
    CHECK(std::abs(dn(j).real() - expected) < 1e-8);
  }
}

TEST_CASE("maximum principle on probe grids") {
  ShapeSpec s;
  s.kind = ShapeKind::FourierCircle;
  s.amplitude = 0.15;
  s.mode = 4;
  const auto d = make_domain(s, 256);
  std::mt19937 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Complex> g;
    for (int j = 0; j < d.size(); ++j) {
      const double t = d.parameter(j);
      g.emplace_back(std::cos(2 * kPi * (trial + 1) * t + n(rng) * 0.0) + 0.5 * std::sin(2 * kPi * 3 * t),
                     std::sin(2 * kPi * (trial + 2) * t));
    }
    const auto u = solve_dirichlet({&d, g});
    double bmax = 0.0, imax = 0.0;
    const auto tr = u.trace();
    for (int j = 0; j < tr.size(); ++j) bmax = std::max(bmax, std::abs(tr(j)));
    for (int i = -20; i <= 20; ++i) {
      for (int k = -20; k <= 20; ++k) {
        const Vec2 x(i / 18.0, k / 18.0);
        if (d.contains(x)) imax = std::max(imax, std::abs(u.evaluate(x)));
      }
    }
    CHECK(imax <= bmax + 1e-8);
  }
}

TEST_CASE("spectral convergence on the disc") {
  auto exact = [](Vec2 x) { return Complex((1.0 / (Complex(1.6, 0.3) - x.as_complex())).real(), 0.0); };
  std::vector<double> errors;
  for (int m : {64, 128, 256}) {
    const auto d = make_domain(ShapeSpec{}, m);
    const auto u = make_solver(d)->solve(exact);
    double err = 0.0;
    for (const auto& p : disc_probes(0.9, 100)) err = std::max(err, std::abs(u.evaluate(p) - exact(p)));
    errors.push_back(err);
  }
  // Faster than a fixed power: successive reduction factors grow.
  CHECK(errors[1] < errors[0] / 50.0);
  CHECK((errors[2] < 1e-13 || errors[0] / errors[1] < errors[1] / errors[2]));
}

TEST_CASE("green kernel on the disc against images") {
  const auto d = make_domain(ShapeSpec{}, 128);
  const auto g = green_kernel(d);
  for (const auto& y : disc_probes(0.8, 10)) {
    CHECK(std::abs(g({0.0, 0.0}, y).value + std::log(y.norm()) / (2 * kPi)) < 1e-10);
  }
  const Vec2 x(0.3, 0.0), y(-0.2, 0.4);
  CHECK(std::abs(g(x, y).value - disc_green(x, y)) < 1e-8);
  CHECK_FALSE(g(x, y).near_boundary);
  CHECK(g(x, Vec2(0.999, 0.0)).near_boundary);
  // Vanishing on the boundary: the regular part cancels the logarithm there.
  const auto h = g.regular_part(y);
  const auto tr = h.trace();
  for (int j = 0; j < tr.size(); ++j) {
    const Vec2 b(g.solver().mesh().nodes()[j].pos);
    CHECK(std::abs(-std::log((b - y).norm()) / (2 * kPi) + tr(j).real()) < 1e-12);
  }
  // Logarithmic blow-up: G + log|x - y| / 2 pi stays bounded as x -> y.
  const double g1 = g(y + Vec2(1e-3, 0.0), y).value, g2 = g(y + Vec2(1e-6, 0.0), y).value;
  CHECK(g2 > g1);
  CHECK(std::abs((g2 + std::log(1e-6) / (2 * kPi)) - (g1 + std::log(1e-3) / (2 * kPi))) < 1e-2);
}

TEST_CASE("green reciprocity") {
  ShapeSpec s;
  s.kind = ShapeKind::Ellipse;
  s.semi_a = 1.2;
  s.semi_b = 0.7;
  const auto d = make_domain(s, 128);
  const auto g = green_kernel(d);
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vec2 x(u(rng) * 1.6, u(rng)), y(u(rng) * 1.6, u(rng));
    if (!d.contains(x) || !d.contains(y) || g(x, y).near_boundary) {
      --k;
      continue;
    }
    worst = std::max(worst, std::abs(g(x, y).value - g(y, x).value));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("h1 norm") {
  const auto d = make_domain(ShapeSpec{}, 128);
  const auto q = interior_quadrature(d, 40, 128);
  const auto one = solve_dirichlet({&d, std::vector<Complex>(128, Complex(1.0, 0.0))});
  CHECK(std::abs(h1_norm(one, q) - std::sqrt(kPi)) < 1e-10);
  const auto x1 = solve_dirichlet({&d, sample(d, [](Vec2 x) { return Complex(x.x1, 0.0); })});
  CHECK(std::abs(h1_norm(x1, q) - std::sqrt(kPi / 4 + kPi)) < 1e-10);
  const auto x2 = solve_dirichlet({&d, sample(d, [](Vec2 x) { return Complex(2 * x.x1, 0.0); })});
  CHECK(std::abs(h1_norm(x2, q) - 2 * h1_norm(x1, q)) < 1e-10);
}

TEST_CASE("errors") {
  const auto d = make_domain(ShapeSpec{}, 64);
  CHECK_THROWS_AS(solve_dirichlet({&d, std::vector<Complex>(10)}), std::invalid_argument);
  std::vector<Complex> bad(64, 0.0);
  bad[3] = Complex(std::numeric_limits<double>::infinity(), 0.0);
  CHECK_THROWS_AS(solve_dirichlet({&d, bad}), NumericalError);
  // Nearly coincident boundary components make the system singular.
  BoundaryMesh::Component outer, inner;
  outer.curve = [](double t) {
    const Complex e = std::polar(1.0, 2 * kPi * t);
    return CurveSample{e, Complex(0, 2 * kPi) * e, -4 * kPi * kPi * e};
  };
  inner.curve = [](double t) {
    const Complex e = std::polar(1.0, -2 * kPi * t);
    return CurveSample{e, Complex(0, -2 * kPi) * e, -4 * kPi * kPi * e};
  };
  inner.hole = true;
  outer.breaks = inner.breaks = {0.0, 0.25, 0.5, 0.75, 1.0};
  CHECK_THROWS_AS(LayerSolver::create(BoundaryMesh({outer, inner}, 16)), NumericalError);
}
