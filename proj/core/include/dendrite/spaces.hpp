#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dendrite/elements.hpp"
#include "dendrite/mesh.hpp"

namespace dendrite {

enum class Constraint { none, zero_boundary, zero_mean };

/// Affine map from the reference triangle onto mesh triangle t.
struct ElementGeometry {
  Point origin;
  Eigen::Matrix2d jacobian;      // columns p1 - p0, p2 - p0
  Eigen::Matrix2d inv_transpose;  // maps reference gradients to physical ones
  double det = 0.0;              // 2 * area

  [[nodiscard]] Point map(const Barycentric& b) const {
    return origin + jacobian * Eigen::Vector2d(b[1], b[2]);
  }
};

[[nodiscard]] ElementGeometry element_geometry(const Mesh& mesh, int t);

/// Continuous Lagrange space P_l (scalar or 2-vector) over a mesh.
///
/// Global nodes are numbered vertices first, then edge nodes (edge by edge,
/// ordered from the lower vertex index), then interior nodes. Vector DOFs are
/// interleaved: dof(node, c) = n_components * node + c.
class FunctionSpace {
 public:
  FunctionSpace(std::shared_ptr<const Mesh> mesh, int order, int n_components,
                Constraint constraint);

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  [[nodiscard]] const ReferenceElement& element() const { return element_; }
  [[nodiscard]] int order() const { return element_.order(); }
  [[nodiscard]] int n_components() const { return n_components_; }
  [[nodiscard]] Constraint constraint() const { return constraint_; }
  [[nodiscard]] std::string family() const { return "P" + std::to_string(order()); }

  [[nodiscard]] int n_nodes() const { return static_cast<int>(node_coords_.size()); }
  [[nodiscard]] int n_dofs() const { return n_nodes() * n_components_; }
  [[nodiscard]] int dof(int node, int component) const { return node * n_components_ + component; }

  /// Global node ids of triangle t in local basis order.
  [[nodiscard]] std::span<const int> element_nodes(int t) const {
    const auto nb = static_cast<std::size_t>(element_.n_basis());
    return {element_nodes_.data() + static_cast<std::size_t>(t) * nb, nb};
  }
  [[nodiscard]] const Point& node_coordinates(int node) const { return node_coords_[node]; }
  [[nodiscard]] bool is_boundary_node(int node) const { return boundary_node_[node]; }

  /// Nodes on the domain boundary (always computed; constrained only for
  /// zero-boundary spaces).
  [[nodiscard]] const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }

  /// DOFs fixed to zero by the constraint (empty unless zero-boundary).
  [[nodiscard]] std::vector<int> constrained_dofs() const;
  [[nodiscard]] int n_free_dofs() const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  ReferenceElement element_;
  int n_components_;
  Constraint constraint_;
  std::vector<int> element_nodes_;
  std::vector<Point> node_coords_;
  std::vector<bool> boundary_node_;
  std::vector<int> boundary_nodes_;
};

[[nodiscard]] std::shared_ptr<const FunctionSpace> build_space(std::shared_ptr<const Mesh> mesh,
                                                               int order, int n_components,
                                                               Constraint constraint);

/// Closed-form field f(x, t) evaluated per component.
using FieldFunction = std::function<double(const Point&, double t, int component)>;

/// Coefficient vector over a FunctionSpace.
class FEFunction {
 public:
  explicit FEFunction(std::shared_ptr<const FunctionSpace> space);
  FEFunction(std::shared_ptr<const FunctionSpace> space, Eigen::VectorXd coefficients);

  [[nodiscard]] const FunctionSpace& space() const { return *space_; }
  [[nodiscard]] const std::shared_ptr<const FunctionSpace>& space_ptr() const { return space_; }
  [[nodiscard]] Eigen::VectorXd& coefficients() { return coefficients_; }
  [[nodiscard]] const Eigen::VectorXd& coefficients() const { return coefficients_; }

  /// Component value at reference point `b` of triangle t.
  [[nodiscard]] double value(int t, const Barycentric& b, int component = 0) const;
  /// Physical gradient of a component at reference point `b` of triangle t.
  [[nodiscard]] Eigen::Vector2d gradient(int t, const Barycentric& b, int component = 0) const;
  /// Component value at a physical point (linear search for the triangle).
  [[nodiscard]] double value_at(const Point& p, int component = 0) const;

 private:
  std::shared_ptr<const FunctionSpace> space_;
  Eigen::VectorXd coefficients_;
};

/// Nodal interpolant of `field` at time t. Constrained DOFs are set to zero.
[[nodiscard]] FEFunction interpolate(std::shared_ptr<const FunctionSpace> space,
                                     const FieldFunction& field, double t);

/// sqrt(int_Omega |f - exact|^2), summed over components. quad_degree <= 0
/// selects 2l + 2.
[[nodiscard]] double l2_error(const FEFunction& f, const FieldFunction& exact, double t,
                              int quad_degree = 0);

/// int_Omega of one component.
[[nodiscard]] double integral(const FEFunction& f, int component = 0);

/// Subtracts the mean so that int_Omega f = 0 (scalar spaces).
void remove_mean(FEFunction& f);

/// Text format: `n_dofs family n_components`, then one coefficient per line.
void save_function(std::ostream& out, const FEFunction& f);
[[nodiscard]] FEFunction load_function(std::istream& in, std::shared_ptr<const FunctionSpace> space);

}  // namespace dendrite
