#include "calderon/laplace.hpp"

#include <cmath>
#include <sstream>
#include <tuple>

#include "calderon/parallel.hpp"

namespace calderon::laplace {

namespace {

Eigen::MatrixXd split_columns(const Eigen::MatrixXcd& data) {
  Eigen::MatrixXd out(data.rows(), 2 * data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    out.col(2 * c) = data.col(c).real();
    out.col(2 * c + 1) = data.col(c).imag();
  }
  return out;
}

}  // namespace

std::shared_ptr<const LayerSolver> LayerSolver::create(BoundaryMesh mesh, double max_condition) {
  return std::shared_ptr<const LayerSolver>(new LayerSolver(std::move(mesh), max_condition));
}

LayerSolver::LayerSolver(BoundaryMesh mesh, double max_condition) : mesh_(std::move(mesh)) {
  const int n = mesh_.size();
  const int h = mesh_.hole_count();
  const auto& nodes = mesh_.nodes();
  matrix_ = Eigen::MatrixXd::Zero(n + h, n + h);

  parallel_for(n, [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    const Complex ti = nodes[i].pos;
    for (int j = 0; j < n; ++j) {
      double k;
      if (i == j) {
        k = std::imag(nodes[i].d2 / nodes[i].d1) / (4.0 * kPi);
      } else {
        k = std::imag(nodes[j].d1 / (nodes[j].pos - ti)) / (2.0 * kPi);
      }
      matrix_(i, j) = k * nodes[j].weight + (i == j ? 0.5 : 0.0);
    }
    for (int k = 0; k < h; ++k) matrix_(i, n + k) = std::log(std::abs(ti - mesh_.hole_centers()[k]));
  });
  for (int j = 0; j < n; ++j) {
    const int k = mesh_.hole_index(nodes[j].component);
    if (k >= 0) matrix_(n + k, j) = std::abs(nodes[j].d1) * nodes[j].weight;
  }

  lu_.compute(matrix_);
  const double rc = lu_.rcond();
  condition_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(condition_ <= max_condition)) {
    std::ostringstream msg;
    msg << "condition estimate " << condition_ << " exceeds " << max_condition;
    throw NumericalError("layer system is ill-conditioned", msg.str());
  }
}

HarmonicField LayerSolver::solve(const Eigen::VectorXcd& node_data) const {
  if (node_data.size() != mesh_.size()) throw std::invalid_argument("data length does not match mesh");
  Eigen::MatrixXcd data(node_data.size(), 1);
  data.col(0) = node_data;
  return HarmonicField(shared_from_this(), solve_many(data).col(0));
}

HarmonicField LayerSolver::solve(const std::function<Complex(Vec2)>& g) const {
  Eigen::VectorXcd data(mesh_.size());
  for (int j = 0; j < mesh_.size(); ++j) data(j) = g(Vec2(mesh_.nodes()[j].pos));
  return solve(data);
}

Eigen::MatrixXcd LayerSolver::solve_many(const Eigen::MatrixXcd& node_data) const {
  const int n = mesh_.size();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(unknowns(), 2 * node_data.cols());
  rhs.topRows(n) = split_columns(node_data);
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    if (!rhs.col(c).allFinite()) throw NumericalError("boundary data is not finite", "column " + std::to_string(c / 2));
  }
  const Eigen::MatrixXd sol = lu_.solve(rhs);
  Eigen::MatrixXcd out(unknowns(), node_data.cols());
  for (Eigen::Index c = 0; c < node_data.cols(); ++c) {
    out.col(c).real() = sol.col(2 * c);
    out.col(c).imag() = sol.col(2 * c + 1);
  }
  return out;
}

void LayerSolver::evaluation_rows(Vec2 z, double* value, double* dx, double* dy) const {
  const int n = mesh_.size();
  const int h = mesh_.hole_count();
  const int p = mesh_.order();
  const auto& nodes = mesh_.nodes();
  const Complex zc = z.as_complex();

  int nearest = 0;
  double dmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const double d = std::abs(nodes[j].pos - zc);
    if (d < dmin) {
      dmin = d;
      nearest = j;
    }
  }
  if (dmin <= 1e-14 * (1.0 + std::abs(zc))) {
    if (dx != nullptr || dy != nullptr) {
      throw NumericalError("gradient requested on a boundary node", "node " + std::to_string(nearest));
    }
    for (int j = 0; j < n + h; ++j) value[j] = matrix_(nearest, j);
    return;
  }

  std::vector<Complex> q(n, 0.0), g(n, 0.0);
  Complex den = 0.0, gsum = 0.0;
  const auto& rx = mesh_.reference_nodes();
  const auto& rw = mesh_.reference_weights();
  for (const auto& panel : mesh_.panels()) {
    double dpanel = std::numeric_limits<double>::infinity();
    for (int j = panel.first; j < panel.first + p; ++j) dpanel = std::min(dpanel, std::abs(nodes[j].pos - zc));
    if (dpanel >= panel.arclength) {
      for (int j = panel.first; j < panel.first + p; ++j) {
        const Complex r = 1.0 / (nodes[j].pos - zc);
        const Complex k = nodes[j].d1 * nodes[j].weight * r;
        q[j] += k;
        g[j] += k * r;
        den += k;
        gsum += k * r;
      }
      continue;
    }

    // Bisect the reference interval until every piece is at least its own
    // length away from z; each piece is integrated with the panel's Gauss rule
    // and the density is carried by Lagrange interpolation.
    const auto& curve = mesh_.components()[panel.component].curve;
    const double half = 0.5 * (panel.t1 - panel.t0);
    std::vector<std::tuple<double, double, int>> stack{{-1.0, 1.0, 0}};
    std::vector<geometry::CurveSample> samples(p);
    while (!stack.empty()) {
      const auto [a, b, depth] = stack.back();
      stack.pop_back();
      double dmin_piece = std::numeric_limits<double>::infinity();
      double len = 0.0;
      for (int j = 0; j < p; ++j) {
        const double x = a + 0.5 * (b - a) * (rx[j] + 1.0);
        samples[j] = curve(panel.t0 + half * (x + 1.0));
        dmin_piece = std::min(dmin_piece, std::abs(samples[j].pos - zc));
        len += std::abs(samples[j].d1) * half * 0.5 * (b - a) * rw[j];
      }
      if (dmin_piece < len && depth < 48) {
        const double mid = 0.5 * (a + b);
        stack.emplace_back(a, mid, depth + 1);
        stack.emplace_back(mid, b, depth + 1);
        continue;
      }
      for (int j = 0; j < p; ++j) {
        const double x = a + 0.5 * (b - a) * (rx[j] + 1.0);
        const Complex r = 1.0 / (samples[j].pos - zc);
        const Complex k = samples[j].d1 * (half * 0.5 * (b - a) * rw[j]) * r;
        den += k;
        gsum += k * r;
        const Eigen::RowVectorXd l = mesh_.lagrange_row(x);
        for (int c = 0; c < p; ++c) {
          q[panel.first + c] += k * l(c);
          g[panel.first + c] += k * r * l(c);
        }
      }
    }
  }

  const Complex s = gsum / den;
  for (int j = 0; j < n; ++j) {
    const Complex qj = q[j] / den;
    value[j] = qj.real();
    if (dx != nullptr) {
      const Complex pj = g[j] / den - s * qj;
      dx[j] = pj.real();
      dy[j] = -pj.imag();
    }
  }
  for (int k = 0; k < h; ++k) {
    const Complex d = zc - mesh_.hole_centers()[k];
    value[n + k] = std::log(std::abs(d));
    if (dx != nullptr) {
      const Complex inv = 1.0 / d;
      dx[n + k] = inv.real();
      dy[n + k] = -inv.imag();
    }
  }
}

Eigen::MatrixXd LayerSolver::evaluation_matrix(const std::vector<Vec2>& points) const {
  Eigen::MatrixXd rows(unknowns(), points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    evaluation_rows(points[i], rows.col(static_cast<Eigen::Index>(i)).data(), nullptr, nullptr);
  });
  return rows.transpose();
}

Eigen::MatrixXd LayerSolver::gradient_matrix(const std::vector<Vec2>& points) const {
  const auto np = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd gx(unknowns(), np), gy(unknowns(), np);
  parallel_for(points.size(), [&](std::size_t i) {
    std::vector<double> v(unknowns());
    const auto c = static_cast<Eigen::Index>(i);
    evaluation_rows(points[i], v.data(), gx.col(c).data(), gy.col(c).data());
  });
  Eigen::MatrixXd out(2 * np, unknowns());
  out.topRows(np) = gx.transpose();
  out.bottomRows(np) = gy.transpose();
  return out;
}

Eigen::VectorXcd LayerSolver::normal_derivative(const Eigen::VectorXcd& coefficients) const {
  const int n = mesh_.size();
  const int h = mesh_.hole_count();
  const auto& nodes = mesh_.nodes();

  // Derivative of the Cauchy integral from the interior, applied to the real
  // and imaginary parts of the density separately.
  auto boundary_derivative = [&](const Eigen::VectorXd& mu) {
    // Interior boundary values of F, then F' = (dF/dt) / tau'.
    const Eigen::VectorXcd mu_c = mu.cast<Complex>();
    const Eigen::VectorXcd mu_t = mesh_.differentiate(mu_c);
    Eigen::VectorXcd f(n);
    parallel_for(n, [&](std::size_t ii) {
      const int i = static_cast<int>(ii);
      Complex s = mu_t(i) * nodes[i].weight;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        s += (mu_c(j) - mu_c(i)) * nodes[j].d1 * nodes[j].weight / (nodes[j].pos - nodes[i].pos);
      }
      f(i) = mu_c(i) + s / Complex(0.0, 2.0 * kPi);
    });
    Eigen::VectorXcd out = mesh_.differentiate(f);
    for (int i = 0; i < n; ++i) out(i) /= nodes[i].d1;
    return out;
  };

  const Eigen::VectorXd mu_r = coefficients.head(n).real();
  const Eigen::VectorXd mu_i = coefficients.head(n).imag();
  const Eigen::VectorXcd fr = boundary_derivative(mu_r);
  const Eigen::VectorXcd fi = boundary_derivative(mu_i);

  Eigen::VectorXcd dn(n);
  for (int i = 0; i < n; ++i) {
    const Complex nu = Complex(0.0, -1.0) * nodes[i].d1 / std::abs(nodes[i].d1);
    Complex v(std::real(nu * fr(i)), std::real(nu * fi(i)));
    for (int k = 0; k < h; ++k) {
      v += coefficients(n + k) * std::real(nu / (nodes[i].pos - mesh_.hole_centers()[k]));
    }
    dn(i) = v;
  }
  return dn;
}

double LayerSolver::spacing_ratio(Vec2 z) const {
  const int p = mesh_.order();
  const auto& nodes = mesh_.nodes();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& panel : mesh_.panels()) {
    const double spacing = panel.arclength / p;
    for (int j = panel.first; j < panel.first + p; ++j) {
      best = std::min(best, std::abs(nodes[j].pos - z.as_complex()) / spacing);
    }
  }
  return best;
}

HarmonicField::HarmonicField(std::shared_ptr<const LayerSolver> solver, Eigen::VectorXcd coefficients)
    : solver_(std::move(solver)), coefficients_(std::move(coefficients)) {}

Complex HarmonicField::evaluate(Vec2 x) const {
  std::vector<double> row(solver_->unknowns());
  solver_->evaluation_rows(x, row.data(), nullptr, nullptr);
  Complex s = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * coefficients_(static_cast<Eigen::Index>(j));
  return s;
}

std::array<Complex, 2> HarmonicField::gradient(Vec2 x) const {
  const int m = solver_->unknowns();
  std::vector<double> v(m), gx(m), gy(m);
  solver_->evaluation_rows(x, v.data(), gx.data(), gy.data());
  Complex a = 0.0, b = 0.0;
  for (int j = 0; j < m; ++j) {
    a += gx[j] * coefficients_(j);
    b += gy[j] * coefficients_(j);
  }
  return {a, b};
}

std::vector<Complex> HarmonicField::evaluate_many(const std::vector<Vec2>& points) const {
  std::vector<Complex> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) { out[i] = evaluate(points[i]); });
  return out;
}

Eigen::VectorXcd HarmonicField::trace() const {
  const int n = solver_->mesh().size();
  return (solver_->matrix().topRows(n).cast<Complex>() * coefficients_).eval();
}

Complex HarmonicField::trace_at(double t, int component) const {
  return solver_->mesh().interpolate(trace(), component, t);
}

Eigen::VectorXcd HarmonicField::normal_derivative() const { return solver_->normal_derivative(coefficients_); }

std::shared_ptr<const LayerSolver> make_solver(const geometry::Domain2D& domain) {
  const int panels = std::max(4, domain.size() / 16);
  return LayerSolver::create(BoundaryMesh::from_domain(domain, panels));
}

Complex periodic_interpolate(const std::vector<Complex>& samples, double t) {
  const int m = static_cast<int>(samples.size());
  if (m == 0 || m % 2 != 0) throw std::invalid_argument("periodic interpolation needs an even sample count");
  Complex s = 0.0;
  for (int j = 0; j < m; ++j) {
    double tau = t - static_cast<double>(j) / m;
    tau -= std::round(tau);
    double w;
    if (std::abs(tau) < 1e-15) {
      w = 1.0;
    } else {
      w = std::sin(m * kPi * tau) / (m * std::tan(kPi * tau));
    }
    s += w * samples[j];
  }
  return s;
}

HarmonicField solve_dirichlet(const DirichletProblem& problem) {
  if (problem.domain == nullptr) throw std::invalid_argument("Dirichlet problem without a domain");
  const auto& domain = *problem.domain;
  if (static_cast<int>(problem.boundary_data.size()) != domain.size()) {
    throw std::invalid_argument("boundary data must have one value per domain node");
  }
  const auto solver = make_solver(domain);
  Eigen::VectorXcd data(solver->mesh().size());
  for (int j = 0; j < solver->mesh().size(); ++j) {
    data(j) = periodic_interpolate(problem.boundary_data, solver->mesh().nodes()[j].t);
  }
  return solver->solve(data);
}

double h1_norm(const std::function<Complex(Vec2)>& value,
               const std::function<std::array<Complex, 2>(Vec2)>& gradient,
               const geometry::InteriorQuadrature& quad) {
  std::vector<double> terms(quad.size());
  parallel_for(quad.size(), [&](std::size_t q) {
    const Complex u = value(quad.nodes[q]);
    const auto g = gradient(quad.nodes[q]);
    terms[q] = quad.weights[q] * (std::norm(u) + std::norm(g[0]) + std::norm(g[1]));
  });
  return std::sqrt(geometry::pairwise_sum(terms.data(), terms.size()));
}

double h1_norm(const HarmonicField& u, const geometry::InteriorQuadrature& quad) {
  return h1_norm([&](Vec2 x) { return u.evaluate(x); }, [&](Vec2 x) { return u.gradient(x); }, quad);
}

GreenKernel green_kernel(const geometry::Domain2D& domain) {
  return GreenKernel(LayerSolver::create(BoundaryMesh::from_domain(domain, std::max(8, domain.size() / 4))),
                     2.0 * domain.max_spacing());
}

GreenKernel::GreenKernel(std::shared_ptr<const LayerSolver> solver, double flag_distance)
    : solver_(std::move(solver)), flag_distance_(flag_distance) {}

bool GreenKernel::near_boundary(Vec2 x) const {
  if (flag_distance_ <= 0.0) return solver_->spacing_ratio(x) < 2.0;
  for (const auto& node : solver_->mesh().nodes()) {
    if (std::abs(node.pos - x.as_complex()) < flag_distance_) return true;
  }
  return false;
}

HarmonicField GreenKernel::regular_part(Vec2 y) const {
  const Complex yc = y.as_complex();
  return solver_->solve([yc](Vec2 x) { return Complex(std::log(std::abs(x.as_complex() - yc)) / (2.0 * kPi), 0.0); });
}

GreenKernel::Value GreenKernel::operator()(Vec2 x, Vec2 y) const {
  Value v;
  const double r = std::abs(x.as_complex() - y.as_complex());
  if (r == 0.0) throw std::invalid_argument("Green's function evaluated on the diagonal");
  v.value = -std::log(r) / (2.0 * kPi) + regular_part(y).evaluate(x).real();
  v.near_boundary = near_boundary(x) || near_boundary(y);
  return v;
}

}  // namespace calderon::laplace
