#include "calderon/boundary_mesh.hpp"

#include <algorithm>
#include <cmath>

namespace calderon::laplace {

BoundaryMesh::BoundaryMesh(std::vector<Component> components, int order)
    : components_(std::move(components)), order_(order) {
  if (order_ < 2) throw std::invalid_argument("panel order must be >= 2");
  if (components_.empty()) throw std::invalid_argument("boundary mesh needs a component");
  geometry::gauss_legendre(order_, ref_x_, ref_w_);

  bary_.assign(order_, 1.0);
  for (int j = 0; j < order_; ++j) {
    for (int k = 0; k < order_; ++k) {
      if (k != j) bary_[j] /= (ref_x_[j] - ref_x_[k]);
    }
  }
  diff_ = Eigen::MatrixXd::Zero(order_, order_);
  for (int i = 0; i < order_; ++i) {
    for (int j = 0; j < order_; ++j) {
      if (i == j) continue;
      diff_(i, j) = (bary_[j] / bary_[i]) / (ref_x_[i] - ref_x_[j]);
      diff_(i, i) -= diff_(i, j);
    }
  }

  hole_of_component_.assign(components_.size(), -1);
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& comp = components_[c];
    if (comp.breaks.size() < 2 || comp.breaks.front() != 0.0 || comp.breaks.back() != 1.0) {
      throw std::invalid_argument("panel breaks must start at 0 and end at 1");
    }
    if (comp.hole) {
      hole_of_component_[c] = static_cast<int>(holes_.size());
      holes_.push_back(comp.hole_center);
    }
    for (std::size_t k = 0; k + 1 < comp.breaks.size(); ++k) {
      const double t0 = comp.breaks[k], t1 = comp.breaks[k + 1];
      if (!(t1 > t0)) throw std::invalid_argument("panel breaks must increase");
      Panel panel{static_cast<int>(c), t0, t1, size(), 0.0};
      for (int j = 0; j < order_; ++j) {
        const double t = t0 + 0.5 * (t1 - t0) * (ref_x_[j] + 1.0);
        const auto s = comp.curve(t);
        const double w = 0.5 * (t1 - t0) * ref_w_[j];
        nodes_.push_back(MeshNode{s.pos, s.d1, s.d2, w, t, static_cast<int>(c)});
        panel.arclength += std::abs(s.d1) * w;
      }
      panels_.push_back(panel);
    }
  }
}

BoundaryMesh BoundaryMesh::from_domain(const geometry::Domain2D& domain, int panels, int order) {
  if (panels < 2) throw std::invalid_argument("need at least two panels");
  Component comp;
  comp.curve = domain.param();
  comp.breaks.resize(panels + 1);
  for (int k = 0; k <= panels; ++k) comp.breaks[k] = static_cast<double>(k) / panels;
  comp.breaks.back() = 1.0;
  return BoundaryMesh({comp}, order);
}

int BoundaryMesh::hole_index(int component) const { return hole_of_component_.at(component); }

Eigen::RowVectorXd BoundaryMesh::lagrange_row(double x) const {
  Eigen::RowVectorXd row(order_);
  for (int j = 0; j < order_; ++j) {
    if (x == ref_x_[j]) {
      row.setZero();
      row(j) = 1.0;
      return row;
    }
  }
  double den = 0.0;
  for (int j = 0; j < order_; ++j) {
    row(j) = bary_[j] / (x - ref_x_[j]);
    den += row(j);
  }
  return row / den;
}

Eigen::VectorXcd BoundaryMesh::differentiate(const Eigen::VectorXcd& values) const {
  Eigen::VectorXcd out(values.size());
  for (const auto& p : panels_) {
    const double scale = 2.0 / (p.t1 - p.t0);
    out.segment(p.first, order_) = scale * (diff_ * values.segment(p.first, order_));
  }
  return out;
}

Complex BoundaryMesh::interpolate(const Eigen::VectorXcd& values, int component, double t) const {
  t -= std::floor(t);
  for (const auto& p : panels_) {
    if (p.component != component) continue;
    if (t >= p.t0 && t <= p.t1) {
      const double x = 2.0 * (t - p.t0) / (p.t1 - p.t0) - 1.0;
      return lagrange_row(x).cast<Complex>() * values.segment(p.first, order_);
    }
  }
  throw std::invalid_argument("parameter outside every panel");
}

Complex BoundaryMesh::integrate(const Eigen::VectorXcd& values) const {
  Complex s = 0.0;
  for (int j = 0; j < size(); ++j) s += values(j) * std::abs(nodes_[j].d1) * nodes_[j].weight;
  return s;
}

}  // namespace calderon::laplace
