#include "dendrite/spaces.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>

#include <Eigen/LU>

#include "dendrite/error.hpp"

namespace dendrite {

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  const Point& p0 = mesh.vertices()[static_cast<std::size_t>(tri[0])];
  const Point& p1 = mesh.vertices()[static_cast<std::size_t>(tri[1])];
  const Point& p2 = mesh.vertices()[static_cast<std::size_t>(tri[2])];
  ElementGeometry g;
  g.origin = p0;
  g.jacobian.col(0) = p1 - p0;
  g.jacobian.col(1) = p2 - p0;
  g.det = g.jacobian.determinant();
  g.inv_transpose = g.jacobian.inverse().transpose();
  return g;
}

FunctionSpace::FunctionSpace(std::shared_ptr<const Mesh> mesh, int order, int n_components,
                             Constraint constraint)
    : mesh_(std::move(mesh)), element_(order), n_components_(n_components), constraint_(constraint) {
  if (!mesh_) throw ValidationError("space: null mesh");
  if (n_components != 1 && n_components != 2) {
    throw ValidationError("space: n_components must be 1 or 2");
  }
  const int l = order;
  const int nv = static_cast<int>(mesh_->n_vertices());
  const int ne = static_cast<int>(mesh_->edges().size());
  const int nt = static_cast<int>(mesh_->n_triangles());
  const int per_edge = element_.nodes_per_edge();
  const int per_cell = element_.interior_nodes();
  const int n_nodes = nv + ne * per_edge + nt * per_cell;
  const int nb = element_.n_basis();

  element_nodes_.resize(static_cast<std::size_t>(nt * nb));
  node_coords_.assign(static_cast<std::size_t>(n_nodes), Point::Zero());
  std::vector<bool> placed(static_cast<std::size_t>(n_nodes), false);

  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh_->triangles()[static_cast<std::size_t>(t)];
    int* nodes = element_nodes_.data() + static_cast<std::size_t>(t * nb);
    int local = 0;
    for (int v = 0; v < 3; ++v) nodes[local++] = tri[v];
    for (int e = 0; e < 3; ++e) {
      const int edge_id = mesh_->triangle_edge(t, e);
      const Edge& edge = mesh_->edges()[static_cast<std::size_t>(edge_id)];
      const bool forward = tri[(e + 1) % 3] == edge.vertices[0];
      for (int s = 1; s < l; ++s) {
        const int k = forward ? s - 1 : l - 1 - s;
        nodes[local++] = nv + edge_id * per_edge + k;
      }
    }
    for (int k = 0; k < per_cell; ++k) nodes[local++] = nv + ne * per_edge + t * per_cell + k;

    const ElementGeometry geo = element_geometry(*mesh_, t);
    for (int i = 0; i < nb; ++i) {
      const auto node = static_cast<std::size_t>(nodes[i]);
      if (placed[node]) continue;
      node_coords_[node] = geo.map(element_.nodes()[static_cast<std::size_t>(i)]);
      placed[node] = true;
    }
  }

  boundary_node_.assign(static_cast<std::size_t>(n_nodes), false);
  for (int v = 0; v < nv; ++v) boundary_node_[static_cast<std::size_t>(v)] = mesh_->is_boundary_vertex(v);
  for (int edge_id : mesh_->boundary_edges()) {
    for (int k = 0; k < per_edge; ++k) {
      boundary_node_[static_cast<std::size_t>(nv + edge_id * per_edge + k)] = true;
    }
  }
  for (int n = 0; n < n_nodes; ++n) {
    if (boundary_node_[static_cast<std::size_t>(n)]) boundary_nodes_.push_back(n);
  }
}

std::vector<int> FunctionSpace::constrained_dofs() const {
  std::vector<int> dofs;
  if (constraint_ != Constraint::zero_boundary) return dofs;
  dofs.reserve(boundary_nodes_.size() * static_cast<std::size_t>(n_components_));
  for (int node : boundary_nodes_) {
    for (int c = 0; c < n_components_; ++c) dofs.push_back(dof(node, c));
  }
  return dofs;
}

int FunctionSpace::n_free_dofs() const {
  return n_dofs() - static_cast<int>(constrained_dofs().size());
}

std::shared_ptr<const FunctionSpace> build_space(std::shared_ptr<const Mesh> mesh, int order,
                                                 int n_components, Constraint constraint) {
  return std::make_shared<const FunctionSpace>(std::move(mesh), order, n_components, constraint);
}

FEFunction::FEFunction(std::shared_ptr<const FunctionSpace> space)
    : space_(std::move(space)), coefficients_(Eigen::VectorXd::Zero(space_->n_dofs())) {}

FEFunction::FEFunction(std::shared_ptr<const FunctionSpace> space, Eigen::VectorXd coefficients)
    : space_(std::move(space)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != space_->n_dofs()) {
    throw ValidationError("FEFunction: coefficient length does not match the space");
  }
}

double FEFunction::value(int t, const Barycentric& b, int component) const {
  std::array<double, kMaxBasis> phi{};
  space_->element().evaluate(b, phi, {});
  const auto nodes = space_->element_nodes(t);
  double v = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    v += phi[i] * coefficients_[space_->dof(nodes[i], component)];
  }
  return v;
}

Eigen::Vector2d FEFunction::gradient(int t, const Barycentric& b, int component) const {
  std::array<Eigen::Vector2d, kMaxBasis> dphi;
  space_->element().evaluate(b, {}, dphi);
  const auto nodes = space_->element_nodes(t);
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    g += dphi[i] * coefficients_[space_->dof(nodes[i], component)];
  }
  return element_geometry(space_->mesh(), t).inv_transpose * g;
}

double FEFunction::value_at(const Point& p, int component) const {
  const int t = space_->mesh().locate(p, 1e-10);
  if (t < 0) throw ValidationError("FEFunction: point outside the mesh");
  const ElementGeometry geo = element_geometry(space_->mesh(), t);
  const Eigen::Vector2d ref = geo.jacobian.inverse() * (p - geo.origin);
  return value(t, {1.0 - ref.x() - ref.y(), ref.x(), ref.y()}, component);
}

FEFunction interpolate(std::shared_ptr<const FunctionSpace> space, const FieldFunction& field,
                       double t) {
  FEFunction f(space);
  for (int n = 0; n < space->n_nodes(); ++n) {
    for (int c = 0; c < space->n_components(); ++c) {
      f.coefficients()[space->dof(n, c)] = field(space->node_coordinates(n), t, c);
    }
  }
  for (int d : space->constrained_dofs()) f.coefficients()[d] = 0.0;
  return f;
}

double l2_error(const FEFunction& f, const FieldFunction& exact, double t, int quad_degree) {
  const FunctionSpace& space = f.space();
  const QuadratureRule rule =
      quadrature(quad_degree > 0 ? quad_degree : std::min(10, 2 * space.order() + 2));
  const int nb = space.element().n_basis();
  std::vector<std::array<double, kMaxBasis>> phi(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) space.element().evaluate(rule.points[q], phi[q], {});

  double sum = 0.0;
  for (int t_id = 0; t_id < static_cast<int>(space.mesh().n_triangles()); ++t_id) {
    const ElementGeometry geo = element_geometry(space.mesh(), t_id);
    const auto nodes = space.element_nodes(t_id);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = geo.map(rule.points[q]);
      for (int c = 0; c < space.n_components(); ++c) {
        double v = 0.0;
        for (int i = 0; i < nb; ++i) v += phi[q][static_cast<std::size_t>(i)] * f.coefficients()[space.dof(nodes[static_cast<std::size_t>(i)], c)];
        const double diff = v - exact(x, t, c);
        sum += rule.weights[q] * std::abs(geo.det) * diff * diff;
      }
    }
  }
  return std::sqrt(sum);
}

double integral(const FEFunction& f, int component) {
  const FunctionSpace& space = f.space();
  const QuadratureRule rule = quadrature(std::max(1, space.order()));
  const int nb = space.element().n_basis();
  std::vector<std::array<double, kMaxBasis>> phi(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) space.element().evaluate(rule.points[q], phi[q], {});
  double sum = 0.0;
  for (int t = 0; t < static_cast<int>(space.mesh().n_triangles()); ++t) {
    const double det = std::abs(element_geometry(space.mesh(), t).det);
    const auto nodes = space.element_nodes(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double v = 0.0;
      for (int i = 0; i < nb; ++i) v += phi[q][static_cast<std::size_t>(i)] * f.coefficients()[space.dof(nodes[static_cast<std::size_t>(i)], component)];
      sum += rule.weights[q] * det * v;
    }
  }
  return sum;
}

void remove_mean(FEFunction& f) {
  if (f.space().n_components() != 1) throw ValidationError("remove_mean: scalar spaces only");
  const double mean = integral(f) / f.space().mesh().domain().area();
  f.coefficients().array() -= mean;
}

void save_function(std::ostream& out, const FEFunction& f) {
  out << f.space().n_dofs() << ' ' << f.space().family() << ' ' << f.space().n_components() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < f.coefficients().size(); ++i) out << f.coefficients()[i] << '\n';
}

FEFunction load_function(std::istream& in, std::shared_ptr<const FunctionSpace> space) {
  int n_dofs = -1;
  std::string family;
  int n_components = 0;
  if (!(in >> n_dofs >> family >> n_components)) throw ValidationError("function file: bad header");
  if (n_dofs != space->n_dofs() || family != space->family() ||
      n_components != space->n_components()) {
    throw ValidationError("function file: header does not match the target space");
  }
  Eigen::VectorXd coeffs(n_dofs);
  for (int i = 0; i < n_dofs; ++i) {
    if (!(in >> coeffs[i])) throw ValidationError("function file: truncated coefficient list");
  }
  return FEFunction(std::move(space), std::move(coeffs));
}

}  // namespace dendrite
