#include "calderon/runge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "calderon/parallel.hpp"

namespace calderon::runge {

namespace {

double halton(std::size_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

std::vector<Vec2> mesh_points(const laplace::LayerSolver& s) {
  std::vector<Vec2> p;
  for (const auto& n : s.mesh().nodes()) p.emplace_back(n.pos);
  return p;
}

// outward unit normal at a mesh node (components oriented with the domain on the left)
Vec2 mesh_normal(const laplace::MeshNode& n) {
  const Complex t = n.d1 / std::abs(n.d1);
  return Vec2(Complex(t.imag(), -t.real()));
}

}  // namespace

std::size_t NestedPair::shared_count() const { return static_cast<std::size_t>(std::count(shared.begin(), shared.end(), true)); }

NestedPair make_nested_pair(geometry::Domain2D omega1, geometry::Domain2D omega2, std::vector<Vec2> sources,
                            double shared_tol) {
  std::vector<bool> shared(omega1.size());
  for (int j = 0; j < omega1.size(); ++j) {
    const Vec2 p = omega1.point(j);
    const double d = omega2.distance_to_boundary(p);
    shared[j] = d <= shared_tol;
    if (!shared[j] && !omega2.contains(p))
      throw std::invalid_argument("make_nested_pair: Omega1 boundary node " + std::to_string(j) + " lies outside Omega2");
  }
  for (std::size_t k = 0; k < sources.size(); ++k) {
    if (omega1.contains(sources[k]))
      throw std::invalid_argument("make_nested_pair: source " + std::to_string(k) + " lies inside Omega1");
    if (!omega2.contains(sources[k]))
      throw std::invalid_argument("make_nested_pair: source " + std::to_string(k) + " lies outside Omega2");
  }
  return NestedPair{std::move(omega1), std::move(omega2), std::move(shared), std::move(sources)};
}

std::vector<Vec2> halton_sources(const geometry::Domain2D& omega1, const geometry::Domain2D& omega2, std::size_t n,
                                 double margin1, double margin2, std::size_t skip) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (int j = 0; j < omega2.size(); ++j) {
    const Vec2 p = omega2.point(j);
    x0 = std::min(x0, p.x1);
    x1 = std::max(x1, p.x1);
    y0 = std::min(y0, p.x2);
    y1 = std::max(y1, p.x2);
  }
  std::vector<Vec2> out;
  const std::size_t limit = skip + 1000 * (n + 10);
  for (std::size_t i = skip + 1; out.size() < n; ++i) {
    if (i > limit) throw std::invalid_argument("halton_sources: source region is empty at these margins");
    const Vec2 p{x0 + (x1 - x0) * halton(i, 2), y0 + (y1 - y0) * halton(i, 3)};
    if (!omega2.contains(p) || omega1.contains(p)) continue;
    if (omega2.distance_to_boundary(p) < margin2 || omega1.distance_to_boundary(p) < margin1) continue;
    out.push_back(p);
  }
  return out;
}

NestedPair shared_arc_pair(std::size_t n_sources, int nodes, double indent, double margin1, double margin2) {
  geometry::ShapeSpec s2;
  auto omega2 = geometry::make_domain(s2, nodes);
  geometry::ShapeSpec s1;
  s1.kind = geometry::ShapeKind::SharedArcDisc;
  s1.indent = indent;
  auto omega1 = geometry::make_domain(s1, nodes);
  auto src = halton_sources(omega1, omega2, n_sources, margin1, margin2);
  return make_nested_pair(std::move(omega1), std::move(omega2), std::move(src));
}

double disc_green(Vec2 x, Vec2 y, Vec2 center, double radius) {
  const Complex a = (x - center).as_complex() / radius, b = (y - center).as_complex() / radius;
  // -log|a - b| / 2pi + log|1 - conj(b) a| / 2pi
  return (std::log(std::abs(1.0 - std::conj(b) * a)) - std::log(std::abs(a - b))) / (2.0 * kPi);
}

Vec2 disc_green_gradient(Vec2 x, Vec2 y, Vec2 center, double radius) {
  const Complex a = (x - center).as_complex() / radius, b = (y - center).as_complex() / radius;
  // d/da of the complex logarithms, then grad = conj(derivative) / radius
  const Complex d = (-std::conj(b) / (1.0 - std::conj(b) * a) - 1.0 / (a - b)) / (2.0 * kPi);
  return Vec2(std::conj(d) / radius);
}

RungeProblem::RungeProblem(NestedPair pair, int radial, int angular)
    : pair_(std::move(pair)),
      quad_(geometry::interior_quadrature(pair_.omega1, radial, angular)),
      green_(laplace::green_kernel(pair_.omega2)),
      solver1_(laplace::make_solver(pair_.omega1)) {
  const auto& s2 = green_.solver();
  const auto& nodes2 = s2.mesh().nodes();
  const std::size_t m = pair_.sources.size();
  Eigen::MatrixXcd data(nodes2.size(), m);
  for (std::size_t j = 0; j < m; ++j) {
    const Complex y = pair_.sources[j].as_complex();
    for (std::size_t k = 0; k < nodes2.size(); ++k) data(k, j) = std::log(std::abs(nodes2[k].pos - y)) / (2.0 * kPi);
  }
  regular_ = s2.solve_many(data).real();
  gq_ = kernel_matrix(quad_.nodes);
  gb_ = kernel_matrix(mesh_points(*solver1_));
}

Eigen::MatrixXd RungeProblem::kernel_matrix(const std::vector<Vec2>& points) const {
  // G vanishes on the boundary of Omega2, where layer evaluation is singular
  std::vector<Vec2> inner;
  std::vector<Eigen::Index> row;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (pair_.omega2.distance_to_boundary(points[i]) <= 1e-12) continue;
    inner.push_back(points[i]);
    row.push_back(static_cast<Eigen::Index>(i));
  }
  const Eigen::MatrixXd reg = green_.solver().evaluation_matrix(inner) * regular_;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), reg.cols());
  for (std::size_t k = 0; k < inner.size(); ++k)
    for (std::size_t j = 0; j < pair_.sources.size(); ++j)
      g(row[k], j) = reg(k, j) - std::log((inner[k] - pair_.sources[j]).norm()) / (2.0 * kPi);
  return g;
}

SuperpositionField green_superposition(const RungeProblem& problem, const Eigen::VectorXd& a) {
  const auto n = a.size();
  if (n > static_cast<Eigen::Index>(problem.pair().sources.size()))
    throw std::invalid_argument("green_superposition: more amplitudes than sources");
  const Eigen::VectorXd boundary = problem.boundary_matrix().leftCols(n) * a;
  auto field = problem.omega1_solver()->solve(Eigen::VectorXcd(boundary.cast<Complex>()));

  SuperpositionField out{field, 0.0, 0.0};
  const auto& pair = problem.pair();
  // layer evaluation loses digits within ~1e-8 of the boundary: extrapolate from 1..4 steps inside
  const double eps = 1e-4;
  const double weight[4] = {4.0, -6.0, 4.0, -1.0};
  std::vector<Vec2> probe;
  for (int j = 0; j < pair.omega1.size(); ++j)
    if (pair.shared[j])
      for (int i = 1; i <= 4; ++i) probe.push_back(pair.omega1.point(j) - pair.omega1.normal(j) * (i * eps));
  if (!probe.empty()) {
    const Eigen::VectorXd value = problem.kernel_matrix(probe).leftCols(n) * a;
    for (Eigen::Index k = 0; k + 3 < value.size(); k += 4)
      out.shared_max = std::max(out.shared_max, std::abs(weight[0] * value(k) + weight[1] * value(k + 1) +
                                                         weight[2] * value(k + 2) + weight[3] * value(k + 3)));
  }

  const Eigen::VectorXd direct = problem.quadrature_matrix().leftCols(n) * a;
  const auto values = field.evaluate_many(problem.quadrature().nodes);
  for (std::size_t q = 0; q < values.size(); ++q)
    out.harmonic_residual = std::max(out.harmonic_residual, std::abs(values[q].real() - direct(static_cast<Eigen::Index>(q))));
  return out;
}

AdjustedPolynomial::AdjustedPolynomial(const geometry::Domain2D& omega2, std::function<double(Vec2)> p, Vec2 center,
                                       double radius, int hole_panels)
    : omega2_(&omega2), p_(std::move(p)) {
  if (!(radius > 0.0) || !omega2.contains(center) || omega2.distance_to_boundary(center) <= radius)
    throw std::invalid_argument("AdjustedPolynomial: K must lie inside Omega2");
  const int panels = std::max(8, omega2.size() / 16);
  laplace::BoundaryMesh::Component outer{omega2.param(), {}, false, Complex(0.0)};
  for (int k = 0; k <= panels; ++k) outer.breaks.push_back(static_cast<double>(k) / panels);
  laplace::BoundaryMesh::Component hole;
  const Complex c = center.as_complex();
  hole.curve = [c, radius](double t) {
    const double w = 2.0 * kPi;
    const Complex e = std::exp(Complex(0.0, -w * t));
    return geometry::CurveSample{c + radius * e, Complex(0.0, -w) * radius * e, -w * w * radius * e};
  };
  for (int k = 0; k <= hole_panels; ++k) hole.breaks.push_back(static_cast<double>(k) / hole_panels);
  hole.hole = true;
  hole.hole_center = c;
  solver_ = laplace::LayerSolver::create(laplace::BoundaryMesh({outer, hole}, 16));
  const auto& nodes = solver_->mesh().nodes();
  Eigen::VectorXcd data(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) data[k] = nodes[k].component == 0 ? p_(Vec2(nodes[k].pos)) : 0.0;
  coefficients_ = solver_->solve(data).coefficients().real();
}

double AdjustedPolynomial::operator()(Vec2 x) const {
  if (omega2_->distance_to_boundary(x) <= 1e-12) return 0.0;
  std::vector<double> row(static_cast<std::size_t>(solver_->unknowns()));
  solver_->evaluation_rows(x, row.data(), nullptr, nullptr);
  return p_(x) - Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())).dot(coefficients_);
}

laplace::HarmonicField harmonic_target(const RungeProblem& problem, const std::function<double(Vec2)>& data) {
  return problem.omega1_solver()->solve([&](Vec2 x) { return Complex(data(x)); });
}

RungeResult runge_approximate(const RungeProblem& problem, const Eigen::VectorXd& target, std::size_t n_sources,
                              double lambda) {
  const auto& quad = problem.quadrature();
  if (static_cast<std::size_t>(target.size()) != quad.size())
    throw std::invalid_argument("runge_approximate: target must be sampled at the quadrature nodes");
  if (n_sources == 0 || n_sources > problem.pair().sources.size())
    throw std::invalid_argument("runge_approximate: source count out of range");
  if (!(lambda >= 0.0)) throw std::invalid_argument("runge_approximate: lambda must be >= 0");

  const Eigen::Index q = static_cast<Eigen::Index>(quad.size()), n = static_cast<Eigen::Index>(n_sources);
  Eigen::VectorXd sw(q);
  for (Eigen::Index i = 0; i < q; ++i) sw(i) = std::sqrt(quad.weights[i]);
  const Eigen::Index extra = lambda > 0.0 ? n : 0;
  Eigen::MatrixXd A(q + extra, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q + extra);
  A.topRows(q) = sw.asDiagonal() * problem.quadrature_matrix().leftCols(n);
  rhs.head(q) = sw.cwiseProduct(target);
  if (extra > 0) A.bottomRows(n) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(n, n);

  // minimum-norm solution: the kernel columns are numerically dependent
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> qr(A);
  RungeResult r;
  r.sources = n_sources;
  r.lambda = lambda;
  r.amplitudes = qr.solve(rhs);
  r.rank = static_cast<int>(qr.rank());
  if (!r.amplitudes.allFinite())
    throw NumericalError("runge_approximate: least-squares solve broke down; use lambda > 0");
  if (lambda == 0.0 && r.rank < n)
    r.advice = "design matrix rank " + std::to_string(r.rank) + " < " + std::to_string(n) + "; consider lambda > 0";

  const Eigen::VectorXd resid = A.topRows(q) * r.amplitudes - rhs.head(q);
  r.l2_error = resid.norm();
  const double norm = rhs.head(q).norm();
  r.relative_error = norm > 0.0 ? r.l2_error / norm : r.l2_error;
  return r;
}

RungeResult runge_approximate(const RungeProblem& problem, const laplace::HarmonicField& target,
                              std::size_t n_sources, double lambda) {
  const auto v = target.evaluate_many(problem.quadrature().nodes);
  Eigen::VectorXd t(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) t(static_cast<Eigen::Index>(i)) = v[i].real();
  return runge_approximate(problem, t, n_sources, lambda);
}

std::string convergence_csv(const std::vector<RungeResult>& rows) {
  std::vector<std::vector<double>> r;
  for (const auto& x : rows) r.push_back({static_cast<double>(x.sources), x.l2_error, x.relative_error, x.lambda});
  return csv_table({"n_sources", "l2_error", "relative_error", "lambda"}, r);
}

IdentityCheck verify_orthogonality_identity(const RungeProblem& problem, const ScalarField& v,
                                            const laplace::HarmonicField& u, int radial, int angular) {
  const auto& pair = problem.pair();
  const auto quad = geometry::interior_quadrature(pair.omega1, radial, angular);
  std::vector<double> mass(quad.size());
  IdentityCheck out;
  const auto uq = u.evaluate_many(quad.nodes);
  std::vector<double> terms(quad.size());
  for (std::size_t q = 0; q < quad.size(); ++q) {
    mass[q] = quad.weights[q] * v(quad.nodes[q]).real();
    terms[q] = mass[q] * uq[q].real();
  }
  out.lhs = geometry::pairwise_sum(terms.data(), terms.size());

  // w = Newtonian part + regular part, the latter one Dirichlet solve on Omega2
  const auto& s2 = problem.green().solver();
  const auto w_reg = s2.solve([&](Vec2 z) {
    std::vector<double> t(quad.size());
    for (std::size_t q = 0; q < quad.size(); ++q) t[q] = mass[q] * std::log((z - quad.nodes[q]).norm());
    return Complex(geometry::pairwise_sum(t.data(), t.size()) / (2.0 * kPi));
  });

  const auto& s1 = *problem.omega1_solver();
  const auto& nodes = s1.mesh().nodes();
  const auto pts = mesh_points(s1);
  const Eigen::VectorXcd du = u.normal_derivative();
  const Eigen::VectorXcd ub = u.trace();
  const Eigen::MatrixXd grad = s2.gradient_matrix(pts) * w_reg.coefficients().real();
  const Eigen::VectorXd wreg = s2.evaluation_matrix(pts) * w_reg.coefficients().real();
  const std::size_t m = nodes.size();
  Eigen::VectorXcd integrand = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m));
  parallel_for(m, [&](std::size_t k) {
    const Vec2 y = pts[k];
    // the shared part carries u = w = 0
    if (pair.omega2.distance_to_boundary(y) <= 1e-8) return;
    std::vector<double> val(quad.size()), gx(quad.size()), gy(quad.size());
    for (std::size_t q = 0; q < quad.size(); ++q) {
      const Vec2 d = y - quad.nodes[q];
      const double r2 = d.dot(d);
      val[q] = -mass[q] * std::log(r2) / (4.0 * kPi);
      gx[q] = -mass[q] * d.x1 / (2.0 * kPi * r2);
      gy[q] = -mass[q] * d.x2 / (2.0 * kPi * r2);
    }
    const Eigen::Index i = static_cast<Eigen::Index>(k);
    const double w = geometry::pairwise_sum(val.data(), val.size()) + wreg(i);
    const Vec2 g{geometry::pairwise_sum(gx.data(), gx.size()) + grad(i), geometry::pairwise_sum(gy.data(), gy.size()) + grad(static_cast<Eigen::Index>(m) + i)};
    const double dw = g.dot(mesh_normal(nodes[k]));
    integrand(i) = ub(i).real() * dw - w * du(i).real();
  });
  out.rhs = -s1.mesh().integrate(integrand).real();
  out.residual = std::abs(out.lhs - out.rhs);
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.relative = scale > 0.0 ? out.residual / scale : 0.0;
  return out;
}

}  // namespace calderon::runge
