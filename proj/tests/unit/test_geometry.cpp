#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "calderon/geometry.hpp"

using namespace calderon;
using namespace calderon::geometry;

namespace {

Domain2D tangent_disc(int m) {
  ShapeSpec s;
  s.center = {-1.0, 0.0};
  return make_domain(s, m);
}

// Fourth-order five-point-per-axis Laplacian.
double fd_laplacian(const ScalarField& u, Vec2 x, double h) {
  auto d2 = [&](Vec2 e) {
    const Complex v = -u(x + e * 2.0) + 16.0 * u(x + e) - 30.0 * u(x) + 16.0 * u(x - e * 1.0) - u(x - e * 2.0);
    return v / (12.0 * h * h);
  };
  return std::abs(d2({h, 0.0}) + d2({0.0, h}));
}

// Random harmonic polynomial Re/Im of sum c_k z^k.
ScalarField random_harmonic(std::mt19937& rng, int degree) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Complex> c(degree + 1);
  for (auto& v : c) v = Complex(n(rng), n(rng));
  return [c](Vec2 x) {
    Complex z = x.as_complex(), p = 0.0, zk = 1.0;
    for (const auto& ck : c) {
      p += ck * zk;
      zk *= z;
    }
    return Complex(p.real(), 0.0);
  };
}

}  // namespace

TEST_CASE("tangent disc passes through the origin with normal e1") {
  const auto d = tangent_disc(128);
  CHECK(d.point(0).norm() < 1e-15);
  CHECK(std::abs(d.normal(0).x1 - 1.0) < 1e-15);
  CHECK(std::abs(d.normal(0).x2) < 1e-15);
}

TEST_CASE("degenerate ellipse equals the circle") {
  ShapeSpec e;
  e.kind = ShapeKind::Ellipse;
  const auto de = make_domain(e, 128);
  const auto dc = make_domain(ShapeSpec{}, 128);
  for (int j = 0; j < 128; ++j) CHECK(std::abs(de.sample(j).pos - dc.sample(j).pos) < 1e-15);
}

TEST_CASE("fourier circle length against adaptive quadrature") {
  ShapeSpec s;
  s.kind = ShapeKind::FourierCircle;
  s.amplitude = 0.1;
  s.mode = 3;
  const auto d = make_domain(s, 256);
  auto speed = [](double th) {
    const double r = 1.0 + 0.1 * std::cos(3 * th), dr = -0.3 * std::sin(3 * th);
    return std::sqrt(r * r + dr * dr);
  };
  const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(speed, 0.0, 2 * kPi, 15, 1e-15);
  CHECK(std::abs(d.length() - oracle) < 1e-10);
}

TEST_CASE("normals are orthogonal to tangents") {
  for (auto kind : {ShapeKind::Circle, ShapeKind::Ellipse, ShapeKind::SmoothedStadium, ShapeKind::FourierCircle}) {
    ShapeSpec s;
    s.kind = kind;
    s.semi_a = 1.4;
    s.semi_b = 0.7;
    s.amplitude = 0.2;
    s.mode = 4;
    const auto d = make_domain(s, 128);
    for (int j = 0; j < d.size(); ++j) {
      const Complex t = d.sample(j).d1 / std::abs(d.sample(j).d1);
      CHECK(std::abs(d.normal(j).dot(Vec2(t))) < 1e-12);
    }
  }
}

TEST_CASE("derivative samples match finite differences") {
  ShapeSpec s;
  s.kind = ShapeKind::SmoothedStadium;
  s.semi_a = 1.5;
  s.semi_b = 0.8;
  const auto d = make_domain(s, 128);
  const double h = 1e-5;
  for (double t : {0.03, 0.21, 0.5, 0.77}) {
    const auto p = d.evaluate(t), pp = d.evaluate(t + h), pm = d.evaluate(t - h);
    CHECK(std::abs((pp.pos - pm.pos) / (2 * h) - p.d1) < 1e-6 * std::abs(p.d1));
    CHECK(std::abs((pp.d1 - pm.d1) / (2 * h) - p.d2) < 1e-5 * std::abs(p.d2) + 1e-5);
  }
}

TEST_CASE("invalid shapes and node counts are rejected") {
  ShapeSpec s;
  s.kind = ShapeKind::FourierCircle;
  s.amplitude = 1.2;
  s.mode = 3;
  CHECK_THROWS_AS(make_domain(s, 128), std::invalid_argument);
  CHECK_THROWS_AS(make_domain(ShapeSpec{}, 63), std::invalid_argument);
  CHECK_THROWS_AS(make_domain(ShapeSpec{}, 32), std::invalid_argument);
  // A circle is not star-shaped about a point outside it.
  const auto disc = make_domain(ShapeSpec{}, 64);
  CHECK_THROWS_AS(Domain2D(disc.param(), {5.0, 0.0}, 64), std::invalid_argument);
}

TEST_CASE("boundary partition") {
  BoundaryPartition p({{0.9, 0.1}});
  CHECK(p.in_gamma(0.95));
  CHECK(p.in_gamma(0.0));
  CHECK(p.in_gamma(0.1));
  CHECK(p.in_sigma(0.5));
  CHECK_THROWS_AS(BoundaryPartition({{0.0, 0.0}, {-0.1, 0.2}}), std::invalid_argument);
}

TEST_CASE("inversion is an involution and fixes x0") {
  const auto d = make_domain(ShapeSpec{}, 128);
  const auto n = normalize_at(d, 0.0);
  CHECK((n.map.psi(n.map.x0) - n.map.x0).norm() < 1e-14);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec2 x(u(rng), u(rng));
    worst = std::max(worst, (n.map.psi(n.map.psi(x)) - x).norm());
    worst = std::max(worst, (n.map.from_normalized(n.map.to_normalized(x)) - x).norm());
  }
  CHECK(worst <= 1e-12);
  for (int k = 0; k < 100; ++k) {
    Vec2 x(3.0 * u(rng), 3.0 * u(rng));
    if ((x - n.map.a).norm() < n.map.r) continue;
    CHECK((n.map.psi(x) - n.map.a).norm() <= n.map.r * (1 + 1e-14));
  }
}

TEST_CASE("normalized image is tangent at the origin inside the unit ball") {
  ShapeSpec s;
  s.kind = ShapeKind::Ellipse;
  s.semi_a = 1.3;
  s.semi_b = 0.7;
  const auto d = make_domain(s, 256);
  for (double t0 : {0.0, 0.2, 0.55}) {
    const auto n = normalize_at(d, t0);
    CHECK(n.image.point(0).norm() < 1e-12);
    CHECK(std::abs(n.image.normal(0).x1 - 1.0) < 1e-12);
    for (int j = 0; j < n.image.size(); ++j) {
      CHECK((n.image.point(j) - Vec2(-1.0, 0.0)).norm() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("disc tangent at origin with a large inversion radius stays a disc in x1 <= 0") {
  const auto d = tangent_disc(128);
  const auto n = normalize_at(d, 0.0, 2.5);
  for (int j = 0; j < n.image.size(); ++j) CHECK(n.image.point(j).x1 <= 1e-12);
  // Inversion maps circles to circles: the image points are equidistant from
  // the midpoint of the leftmost and rightmost image points.
  double left = 0.0;
  for (int j = 0; j < n.image.size(); ++j) left = std::min(left, n.image.point(j).x1);
  const Vec2 c(0.5 * left, 0.0);
  for (int j = 0; j < n.image.size(); ++j) CHECK(std::abs((n.image.point(j) - c).norm() + 0.5 * left) < 1e-10);
}

TEST_CASE("image area equals the weighted area (Monte Carlo oracle)") {
  ShapeSpec s;
  s.kind = ShapeKind::FourierCircle;
  s.amplitude = 0.1;
  s.mode = 3;
  const auto d = make_domain(s, 256);
  const auto n = normalize_at(d, 0.1);
  const double image_area = n.image.area();

  const auto q = interior_quadrature(d, 64, 256);
  double weighted = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) weighted += q.weights[k] * n.map.weight(q.nodes[k]);
  CHECK(std::abs(weighted - image_area) < 1e-9 * image_area);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.1, 1.1);
  const int samples = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec2 x(u(rng), u(rng));
    const double w = d.contains(x) ? n.map.weight(x) * 2.2 * 2.2 : 0.0;
    sum += w;
    sum2 += w * w;
  }
  const double mean = sum / samples;
  const double sigma = std::sqrt((sum2 / samples - mean * mean) / samples);
  CHECK(std::abs(mean - image_area) < 4.0 * sigma);
}

TEST_CASE("kelvin transfer") {
  const auto d = make_domain(ShapeSpec{}, 128);
  const auto n = normalize_at(d, 0.0);
  const auto one = kelvin_transfer([](Vec2) { return Complex(1.0, 0.0); }, n.map);
  CHECK(one(Vec2(0.3, 0.2)) == Complex(1.0, 0.0));
  const auto first = kelvin_transfer([](Vec2 y) { return Complex(y.x1, 0.0); }, n.map);
  const Vec2 x(-0.2, 0.4);
  CHECK(std::abs(first(x).real() - n.map.to_normalized(x).x1) < 1e-15);
  CHECK_THROWS(first(n.map.a));
}

TEST_CASE("kelvin transfer preserves harmonicity") {
  ShapeSpec s;
  s.kind = ShapeKind::Ellipse;
  s.semi_a = 1.2;
  s.semi_b = 0.8;
  const auto d = make_domain(s, 256);
  const auto n = normalize_at(d, 0.0);
  std::mt19937 rng(3);
  const double h = 1e-2;
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_harmonic(rng, 3 + trial % 4);
    const auto ustar = kelvin_transfer(u, n.map);
    // The residual of an exactly harmonic function is pure truncation error:
    // it drops by about 2^4 when the step is halved.
    double coarse = 0.0, fine = 0.0;
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 50; ++j) {
        const Vec2 x(-1.1 + 2.2 * (i + 0.5) / 50, -0.7 + 1.4 * (j + 0.5) / 50);
        if (!d.contains(x) || d.distance_to_boundary(x) < 3 * h) continue;
        coarse = std::max(coarse, fd_laplacian(ustar, x, h));
        fine = std::max(fine, fd_laplacian(ustar, x, h / 2));
      }
    }
    CHECK(coarse <= 1e-5);
    CHECK((fine <= coarse / 10.0 || fine <= 1e-9));
  }
}

TEST_CASE("supporting function") {
  const std::vector<Vec2> single{{0.3, -0.7}};
  CHECK(supporting_function(single, {2.0, 1.0}) == doctest::Approx(0.6 - 0.7));
  std::vector<Vec2> circle;
  for (int k = 0; k < 4096; ++k) circle.emplace_back(std::cos(2 * kPi * k / 4096), std::sin(2 * kPi * k / 4096));
  CHECK(std::abs(supporting_function(circle, {0.0, 3.0}) - 3.0) < 1e-12);
  for (double lam : {0.5, 2.0, 8.0}) {
    CHECK(supporting_function(circle, Vec2(0.3, 0.4) * lam) == lam * supporting_function(circle, {0.3, 0.4}));
  }
  // Arc {x1 <= -c} of the tangent disc.
  const auto d = tangent_disc(512);
  const double c = 0.2;
  std::vector<Vec2> arc;
  double direct = -1e300;
  for (int j = 0; j < d.size(); ++j) {
    if (d.point(j).x1 <= -c) {
      arc.push_back(d.point(j));
      direct = std::max(direct, -d.point(j).x1);
    }
  }
  CHECK(supporting_function(arc, {-1.0, 0.0}) == direct);
  CHECK_THROWS(supporting_function({}, {1.0, 0.0}));
}

TEST_CASE("interior quadrature") {
  const auto disc = make_domain(ShapeSpec{}, 128);
  const auto q = interior_quadrature(disc, 40, 128);
  CHECK(std::abs(q.total_weight() - kPi) < 1e-10);
  double m1 = 0.0, ex = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    m1 += q.weights[k] * q.nodes[k].x1;
    ex += q.weights[k] * std::exp(q.nodes[k].x1);
    CHECK(disc.contains(q.nodes[k]));
  }
  CHECK(std::abs(m1) < 1e-12);
  // int_disc e^{x1} = 2 pi I_1(1), I_1 from its power series.
  double i1 = 0.0, term = 0.5;
  for (int k = 0; k < 30; ++k) {
    i1 += term;
    term *= 0.25 / ((k + 1.0) * (k + 2.0));
  }
  CHECK(std::abs(ex - 2 * kPi * i1) < 1e-12);

  ShapeSpec s;
  s.kind = ShapeKind::FourierCircle;
  s.amplitude = 0.15;
  s.mode = 5;
  const auto f = make_domain(s, 256);
  CHECK(std::abs(interior_quadrature(f, 200, 200).total_weight() - f.area()) < 1e-8 * f.area());
}

TEST_CASE("radial quadrature converges at least at fourth order") {
  ShapeSpec s;
  s.kind = ShapeKind::Ellipse;
  s.semi_a = 1.3;
  s.semi_b = 0.6;
  const auto d = make_domain(s, 256);
  auto integral = [&](int nr) {
    const auto q = interior_quadrature(d, nr, 256);
    double v = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) v += q.weights[k] * std::exp(q.nodes[k].x1 + q.nodes[k].x2);
    return v;
  };
  const double ref = integral(64);
  double prev = std::abs(integral(2) - ref);
  for (int nr = 4; nr <= 16; nr *= 2) {
    const double err = std::abs(integral(nr) - ref);
    CHECK((err <= prev / 16.0 || err < 1e-13));
    prev = err;
  }
}

TEST_CASE("csv export") {
  const auto d = make_domain(ShapeSpec{}, 64);
  const auto csv = d.to_csv();
  CHECK(csv.rfind("t,x1,x2,nu1,nu2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);
}
