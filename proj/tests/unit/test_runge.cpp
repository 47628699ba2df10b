#include <doctest.h>

#include <cmath>
#include <random>

#include "calderon/runge.hpp"

using namespace calderon;
using namespace calderon::runge;

namespace {

double cubic(Vec2 x) { return x.x1 * x.x1 * x.x1 - 3.0 * x.x1 * x.x2 * x.x2 + x.x2; }

const RungeProblem& problem() {
  static const RungeProblem p(shared_arc_pair(400, 256, 0.3, 0.1, 0.1));
  return p;
}

const AdjustedPolynomial& adjusted() {
  static const AdjustedPolynomial u(problem().pair().omega2, cubic, {0.85, 0.0}, 0.08);
  return u;
}

const laplace::HarmonicField& target() {
  static const auto u = harmonic_target(problem(), [](Vec2 x) { return adjusted()(x); });
  return u;
}

Complex bump(Vec2 x) {
  const double d = (x.x1 + 0.2) * (x.x1 + 0.2) + (x.x2 - 0.1) * (x.x2 - 0.1);
  return std::exp(-d / 0.02);
}

}  // namespace

TEST_CASE("nested pair validation") {
  const auto& pair = problem().pair();
  CHECK(pair.shared_count() > 0);
  CHECK(pair.sources.size() == 400);
  for (const auto& y : pair.sources) {
    CHECK_FALSE(pair.omega1.contains(y));
    CHECK(pair.omega2.contains(y));
  }

  geometry::ShapeSpec big;
  big.radius = 1.2;
  CHECK_THROWS_AS(make_nested_pair(geometry::make_domain(big, 64), pair.omega2, {}), std::invalid_argument);
  CHECK_THROWS_AS(make_nested_pair(pair.omega1, pair.omega2, {Vec2{0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_nested_pair(pair.omega1, pair.omega2, {Vec2{1.5, 0.0}}), std::invalid_argument);

  const auto a = halton_sources(pair.omega1, pair.omega2, 50, 0.1, 0.1);
  const auto b = halton_sources(pair.omega1, pair.omega2, 100, 0.1, 0.1);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k] - b[k]).norm() == 0.0);
  CHECK_THROWS_AS(halton_sources(pair.omega1, pair.omega2, 10, 0.6, 0.6), std::invalid_argument);
}

TEST_CASE("Green kernel against images") {
  const auto& p = problem();
  const auto& q = p.quadrature();
  for (std::size_t j : {0, 17, 399}) {
    double err = 0.0;
    for (std::size_t k = 0; k < q.size(); k += 7)
      err = std::max(err, std::abs(p.quadrature_matrix()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) -
                                   disc_green(q.nodes[k], p.pair().sources[j])));
    CHECK(err < 1e-10);
  }
  // symmetry and the gradient formula
  const Vec2 x{0.2, -0.3}, y{-0.5, 0.4};
  CHECK(disc_green(x, y) == doctest::Approx(disc_green(y, x)).epsilon(1e-14));
  const double e = 1e-6;
  const Vec2 g = disc_green_gradient(x, y);
  CHECK(g.x1 == doctest::Approx((disc_green({x.x1 + e, x.x2}, y) - disc_green({x.x1 - e, x.x2}, y)) / (2 * e)).epsilon(1e-7));
  CHECK(g.x2 == doctest::Approx((disc_green({x.x1, x.x2 + e}, y) - disc_green({x.x1, x.x2 - e}, y)) / (2 * e)).epsilon(1e-7));
}

TEST_CASE("superposition fields") {
  const auto& p = problem();
  const auto zero = green_superposition(p, Eigen::VectorXd::Zero(400));
  CHECK(zero.shared_max == 0.0);
  CHECK(std::abs(zero.field.evaluate(Vec2{0.1, 0.2})) == 0.0);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd a(400);
  for (auto& v : a) v = unit(rng);
  const auto s = green_superposition(p, a);
  CHECK(s.shared_max <= 1e-8);
  CHECK(s.harmonic_residual <= 1e-4);
  CHECK_THROWS_AS(green_superposition(p, Eigen::VectorXd::Zero(401)), std::invalid_argument);
}

TEST_CASE("adjusted polynomial vanishes on the outer boundary") {
  const auto& u = adjusted();
  for (double t : {0.0, 1.0, 2.5, 3.14, 4.0, 5.5}) {
    CHECK(std::abs(u(Vec2(std::polar(1.0 - 1e-4, t)))) < 1e-3);
    CHECK(std::abs(u(Vec2(std::polar(0.5, t)))) > 0.0);
  }
  // discrete Laplacian
  const Vec2 x{-0.3, 0.2};
  const double e = 1e-3;
  const double lap = u({x.x1 + e, x.x2}) + u({x.x1 - e, x.x2}) + u({x.x1, x.x2 + e}) + u({x.x1, x.x2 - e}) - 4.0 * u(x);
  CHECK(std::abs(lap) / (e * e) < 1e-3);
  CHECK_THROWS_AS(AdjustedPolynomial(problem().pair().omega2, cubic, {0.95, 0.0}, 0.08), std::invalid_argument);
}

TEST_CASE("least-squares approximation") {
  const auto& p = problem();
  std::vector<RungeResult> rows;
  for (std::size_t n : {50, 100, 200, 400}) rows.push_back(runge_approximate(p, target(), n));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].l2_error <= rows[i - 1].l2_error * (1.0 + 1e-9));
  CHECK(rows.back().relative_error <= 1e-3);

  // lambda only adds a penalty
  CHECK(runge_approximate(p, target(), 100, 1e-2).l2_error >= rows[1].l2_error);

  // a target in the span is recovered
  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(20, -1.0, 1.0);
  const Eigen::VectorXd in_span = p.quadrature_matrix().leftCols(20) * a;
  const auto rec = runge_approximate(p, in_span, 20, 1e-12);
  CHECK(rec.relative_error <= 1e-6);
  CHECK(rec.rank == 20);

  // the residual is linear at lambda = 0
  const Eigen::VectorXd u1 = p.quadrature_matrix().col(399);
  Eigen::VectorXd u2(p.quadrature().size());
  for (std::size_t k = 0; k < p.quadrature().size(); ++k) u2(static_cast<Eigen::Index>(k)) = target().evaluate(p.quadrature().nodes[k]).real();
  const double e1 = runge_approximate(p, u1, 100).l2_error, e2 = runge_approximate(p, u2, 100).l2_error;
  CHECK(runge_approximate(p, Eigen::VectorXd(u1 + u2), 100).l2_error <= e1 + e2 + 1e-12);

  const auto csv = convergence_csv(rows);
  CHECK(csv.rfind("n_sources,l2_error,relative_error,lambda\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  CHECK_THROWS_AS(runge_approximate(p, target(), 401), std::invalid_argument);
  CHECK_THROWS_AS(runge_approximate(p, target(), 10, -1.0), std::invalid_argument);
}

TEST_CASE("rank deficiency is reported") {
  const auto& pair = problem().pair();
  std::vector<Vec2> twice(pair.sources.begin(), pair.sources.begin() + 5);
  twice.insert(twice.end(), pair.sources.begin(), pair.sources.begin() + 5);
  const RungeProblem p(make_nested_pair(pair.omega1, pair.omega2, twice), 12, 64);
  const auto r = runge_approximate(p, Eigen::VectorXd(p.quadrature_matrix().col(0)), 10);
  CHECK(r.rank < 10);
  CHECK_FALSE(r.advice.empty());
}

TEST_CASE("orthogonality identity") {
  const auto id = verify_orthogonality_identity(problem(), bump, target());
  CHECK(id.relative <= 1e-6);
  CHECK(std::abs(id.lhs) > 1e-4);

  // no shared arc, u = 1: Green's second identity
  geometry::ShapeSpec inner;
  inner.radius = 0.5;
  auto o1 = geometry::make_domain(inner, 128);
  auto o2 = geometry::make_domain(geometry::ShapeSpec{}, 256);
  auto src = halton_sources(o1, o2, 10, 0.1, 0.1);
  const RungeProblem p(make_nested_pair(std::move(o1), std::move(o2), std::move(src)));
  CHECK(p.pair().shared_count() == 0);
  const auto one = harmonic_target(p, [](Vec2) { return 1.0; });
  const auto g = verify_orthogonality_identity(p, [](Vec2 x) { return Complex(std::exp(-100.0 * (x.x1 * x.x1 + x.x2 * x.x2))); }, one);
  CHECK(g.relative <= 1e-8);
}
