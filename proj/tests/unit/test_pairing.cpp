#include <doctest.h>

#include <cmath>
#include <random>

#include "calderon/pairing.hpp"

using namespace calderon;
using namespace calderon::pairing;

namespace {

constexpr Complex I(0.0, 1.0);

geometry::Domain2D disc(Vec2 center, double radius, int m) {
  geometry::ShapeSpec s;
  s.center = center;
  s.radius = radius;
  return geometry::make_domain(s, m);
}

geometry::Domain2D tangent_disc(int m) { return disc({-1.0, 0.0}, 1.0, m); }

std::vector<Complex> on_nodes(const geometry::InteriorQuadrature& q, const ScalarField& g) {
  std::vector<Complex> v;
  for (const auto& x : q.nodes) v.push_back(g(x));
  return v;
}

// Smooth, compactly supported bump of radius rho around c.
ScalarField bump(Vec2 c, double rho, Complex amp = 1.0) {
  return [=](Vec2 x) {
    const double t = ((x.x1 - c.x1) * (x.x1 - c.x1) + (x.x2 - c.x2) * (x.x2 - c.x2)) / (rho * rho);
    return t < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - t)) : Complex(0.0);
  };
}

// Gaussian cut to x1 <= x1_max; the jump there is below 1e-7.
ScalarField gaussian(Vec2 c, double sigma, double x1_max = 1.0) {
  return [=](Vec2 x) {
    if (x.x1 > x1_max) return Complex(0.0);
    const double r2 = (x.x1 - c.x1) * (x.x1 - c.x1) + (x.x2 - c.x2) * (x.x2 - c.x2);
    return Complex(std::exp(-r2 / (2 * sigma * sigma)));
  };
}

ScalarField gaussian_mix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::array<double, 5>> g;
  for (int j = 0; j < 3; ++j) {
    g.push_back({-1.0 + 0.6 * (2 * u(rng) - 1), 0.6 * (2 * u(rng) - 1), 0.2 + 0.3 * u(rng), 2 * u(rng) - 1,
                 2 * u(rng) - 1});
  }
  return [g](Vec2 x) {
    Complex v = 0.0;
    for (const auto& q : g) {
      const double r2 = (x.x1 - q[0]) * (x.x1 - q[0]) + (x.x2 - q[1]) * (x.x2 - q[1]);
      v += Complex(q[3], q[4]) * std::exp(-r2 / (q[2] * q[2]));
    }
    return v;
  };
}

double c_half(const FourierSetup& s, double a) { return s.chi.c * a / 2.0; }

}  // namespace

TEST_CASE("pair: area and polar integral on the unit disc") {
  const auto d = disc({0.0, 0.0}, 1.0, 128);
  const auto q = geometry::interior_quadrature(d, 16, 64);
  const auto one = sample_potential(d, q, [](Vec2) { return Complex(1.0); });
  const auto ones = on_nodes(q, [](Vec2) { return Complex(1.0); });
  CHECK(std::abs(pair(one, ones, ones).to_complex() - M_PI) < 1e-10);

  const auto u = on_nodes(q, [](Vec2 x) { return Complex(x.x1, x.x2); });
  const auto v = on_nodes(q, [](Vec2 x) { return Complex(x.x1, -x.x2); });
  CHECK(std::abs(pair(one, u, v).to_complex() - M_PI / 2) < 1e-10);

  const auto zero = sample_potential(d, q, [](Vec2) { return Complex(0.0); });
  CHECK(pair(zero, u, v).is_zero());
}

TEST_CASE("pair: bilinear and symmetric") {
  const auto d = tangent_disc(128);
  const auto q = geometry::interior_quadrature(d, 12, 48);
  std::mt19937_64 rng(11);
  const auto f = sample_potential(d, q, gaussian_mix(rng));
  const auto u = on_nodes(q, [](Vec2 x) { return std::exp(Complex(x.x1, x.x2)); });
  const auto v = on_nodes(q, [](Vec2 x) { return Complex(x.x1 * x.x1 - x.x2 * x.x2, 2 * x.x1 * x.x2); });
  const auto w = on_nodes(q, [](Vec2 x) { return Complex(x.x2, -x.x1); });
  const Complex alpha(0.3, -1.7), beta(-2.0, 0.4);
  std::vector<Complex> mix(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) mix[k] = alpha * u[k] + beta * w[k];
  const Complex lhs = pair(f, mix, v).to_complex();
  const Complex rhs = alpha * pair(f, u, v).to_complex() + beta * pair(f, w, v).to_complex();
  CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + std::abs(lhs)));
  CHECK(std::abs(pair(f, u, v).to_complex() - pair(f, v, u).to_complex()) <= 1e-14 * std::abs(pair(f, u, v).to_complex()));

  const auto fs = f.scaled(alpha);
  CHECK(std::abs(pair(fs, u, v).to_complex() - alpha * pair(f, u, v).to_complex()) <=
        1e-13 * std::abs(pair(fs, u, v).to_complex()));
}

TEST_CASE("pair: products beyond double range stay finite in log scale") {
  const auto d = disc({0.0, 0.0}, 1.0, 64);
  const auto q = geometry::interior_quadrature(d, 8, 32);
  const auto one = sample_potential(d, q, [](Vec2) { return Complex(1.0); });
  std::vector<Complex> big(q.size(), std::exp(Complex(600.0, 0.0)));
  const auto p = pair(one, big, big);
  CHECK(std::isfinite(p.log_mod));
  CHECK(p.log_mod == doctest::Approx(1200.0 + std::log(M_PI)).epsilon(1e-12));
}

TEST_CASE("fourier_moment: zero frequency and disc indicator oracle") {
  const auto d = disc({0.0, 0.0}, 0.5, 128);
  const auto q = geometry::interior_quadrature(d, 24, 96);
  const auto one = sample_potential(d, q, [](Vec2) { return Complex(1.0); });
  CHECK(std::abs(fourier_moment(one, {0.0, 0.0}, 1.0).to_complex() - M_PI / 4) < 1e-12);

  const auto zero = sample_potential(d, q, [](Vec2) { return Complex(0.0); });
  CHECK(fourier_moment(zero, {1.0, 2.0}, 0.5).is_zero());

  // int_{|x|<R} e^{-i x.k} = 2 pi R J1(|k| R) / |k|
  const double R = 0.5;
  for (const Complex2 z : {Complex2{3.0, 0.0}, Complex2{1.0, -2.0}, Complex2{5.5, 4.0}}) {
    const double h = 0.7;
    const double k = std::hypot(z[0].real(), z[1].real()) / h;
    const double oracle = 2.0 * M_PI * R * std::cyl_bessel_j(1.0, k * R) / k;
    CHECK(std::abs(fourier_moment(one, {z[0], z[1]}, h).to_complex() - oracle) < 1e-12);
  }
}

TEST_CASE("moment identity on random smooth potentials") {
  const auto d = tangent_disc(512);
  const cgo::CutoffSpec chi{0.2};
  const auto solver = cgo::make_cgo_solver(d, chi);
  const auto quad = geometry::interior_quadrature(d, 24, 256);
  const auto fine = geometry::interior_quadrature(d, 36, 384);
  const NodeSampler sampler(solver, quad.nodes);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 6; ++k) {
    const auto f = gaussian_mix(rng);
    const auto fg = sample_potential(d, quad, f), ff = sample_potential(d, fine, f);
    const double a = 1.0 + u(rng);
    const double h = 0.3;
    const auto uz = cgo::build_corrected_exponential(d, solver, cgo::gamma_vector(2, a), h, chi);
    const auto ue = cgo::build_corrected_exponential(d, solver, cgo::gamma_bar(2, -a), h, chi);
    const auto c = moment_identity(ff, fg, sampler, uz, ue);
    CHECK(c.relative <= 1e-8);
    CHECK(c.residual <= 1e-8 * fg.sup);
  }
}

TEST_CASE("fourier estimate: zero, vanishing configuration, and a non-vanishing potential") {
  const auto d = tangent_disc(1024);
  FourierSetup setup;
  setup.domain = &d;
  setup.chi = {0.6};
  const double a = 2.0, eps = 0.01;
  const std::vector<double> hs{0.3, 0.2, 0.15};

  const auto zero = verify_fourier_estimate([](Vec2) { return Complex(0.0); }, setup, a, eps, hs);
  CHECK(zero.decay.exact_zero);
  CHECK(zero.pass);
  for (double r : zero.residuals) CHECK(r == 0.0);

  // support in x1 <= -1/2
  const auto vanishing = verify_fourier_estimate(gaussian({-1.4, 0.0}, 0.15, -0.5), setup, a, eps, hs);
  CHECK(vanishing.identity_ok);
  CHECK(vanishing.bound_bookkeeping_ok);
  CHECK(vanishing.decay.pass);
  CHECK(vanishing.pass);
  CHECK(vanishing.c_meas <= 2.0 + 1e-9);
  CHECK(vanishing.decay.bound_slope == doctest::Approx(-c_half(setup, a) + 2.0 * vanishing.c_meas * eps * a));

  // f = 1 reaches the tangent point; its moments decay only polynomially in h
  const auto loud = verify_fourier_estimate([](Vec2) { return Complex(1.0); }, setup, a, eps, hs);
  CHECK(loud.identity_ok);
  CHECK(loud.bound_bookkeeping_ok);
  CHECK_FALSE(loud.decay.pass);
  CHECK_FALSE(loud.pass);

  CHECK_THROWS_AS(verify_fourier_estimate(gaussian({-1.4, 0.0}, 0.15), setup, a, 0.05, hs), std::invalid_argument);
  CHECK_THROWS_AS(verify_fourier_estimate(gaussian({-1.4, 0.0}, 0.15), setup, a, eps, {0.15, 0.2, 0.3}),
                  std::invalid_argument);
}

TEST_CASE("decomposition constant respects the 2d bound") {
  for (double eps : {0.01, 0.05, 0.1}) {
    const double cm = measure_decomposition_constant(2.0, eps);
    CHECK(cm > 0.5);
    CHECK(cm <= 2.0 + 1e-9);
  }
}

TEST_CASE("moment set json round trip and validation") {
  MomentSet set;
  const auto p = cgo::null_decompose_2d({2.0 * I + 0.3, Complex(-0.7)});
  set.entries.push_back({p.zeta, p.eta, 0.4, Complex(1.25, -3.5e-7)});
  set.entries.push_back({cgo::gamma_vector(2, 2.0), cgo::gamma_bar(2, -2.0), 1.0, Complex(0.0)});
  const auto back = MomentSet::from_json(Json::parse(set.to_json().dump()));
  REQUIRE(back.entries.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back.entries[k].h == set.entries[k].h);
    CHECK(back.entries[k].moment == set.entries[k].moment);
    for (int c = 0; c < 2; ++c) {
      CHECK(back.entries[k].zeta[c] == set.entries[k].zeta[c]);
      CHECK(back.entries[k].eta[c] == set.entries[k].eta[c]);
    }
  }
  auto j = set.to_json();
  j["moments"][0]["zeta"] = Json::array({Json::array({1.0, 0.0}), Json::array({1.0, 0.0})});
  CHECK_THROWS_AS(MomentSet::from_json(j), std::invalid_argument);
}

TEST_CASE("reconstruction: zero data, round trip, and preconditions") {
  const auto d = tangent_disc(512);
  const cgo::CutoffSpec chi{0.6};
  const auto setup = ReconstructionSetup::create(d, chi, 16, 128, PixelGrid::bounding(d, 8, 8));
  FrequencyGrid g;
  g.n1 = g.n2 = 8;

  const auto zero = sample_potential(d, setup.quad, [](Vec2) { return Complex(0.0); });
  Eigen::MatrixXcd A;
  const auto ms0 = generate_moments(zero, setup, g, &A);
  CHECK(ms0.entries.size() == 64);
  const auto r0 = reconstruct(ms0, setup, 1e-6, 1e-8, &A);
  for (const auto& v : r0.pixels) CHECK(std::abs(v) <= 1e-10);

  // pixel-constant potential: the forward model is exact, so moments re-generate
  const auto f = sample_potential(d, setup.quad, bump({-1.0, 0.0}, 0.8));
  const auto ms = generate_moments(f, setup, g, &A);
  const auto r = reconstruct(ms, setup, std::nullopt, 1e-8, &A);
  CHECK(r.lambda > 0.0);
  CHECK(r.condition <= 1e14);
  const auto again = generate_moments(r.potential, setup, g);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < ms.entries.size(); ++k) {
    num += std::norm(again.entries[k].moment - ms.entries[k].moment);
    den += std::norm(ms.entries[k].moment);
  }
  CHECK(std::sqrt(num / den) == doctest::Approx(r.moment_residual).epsilon(1e-6));
  CHECK(r.moment_residual <= 1e-3);

  CHECK_THROWS_AS(reconstruct(ms, setup, -1.0), std::invalid_argument);
  MomentSet few;
  few.entries.assign(ms.entries.begin(), ms.entries.begin() + 3);
  CHECK_THROWS_AS(reconstruct(few, setup), std::invalid_argument);
  FrequencyGrid bad = g;
  bad.k2_max = 2.0 * bad.a + 0.1;
  CHECK_THROWS_AS(frequency_pairs(bad), std::invalid_argument);
}
