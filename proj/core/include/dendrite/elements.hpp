#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace dendrite {

/// Upper bound on basis functions per element (P3).
inline constexpr int kMaxBasis = 10;

using Barycentric = std::array<double, 3>;

/// Lagrange P1/P2/P3 element on the reference triangle (0,0), (1,0), (0,1).
///
/// Local node order: the three vertices, then the nodes of edge 0, 1, 2
/// (edge e joins local vertices e+1 and e+2, nodes ordered from the first to
/// the second), then interior nodes. Basis functions are products of
/// Silvester polynomials in the barycentric coordinates.
class ReferenceElement {
 public:
  explicit ReferenceElement(int order);

  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] int n_basis() const { return static_cast<int>(indices_.size()); }
  [[nodiscard]] int nodes_per_edge() const { return order_ - 1; }
  [[nodiscard]] int interior_nodes() const { return (order_ - 1) * (order_ - 2) / 2; }

  /// Barycentric coordinates of the Lagrange nodes.
  [[nodiscard]] const std::vector<Barycentric>& nodes() const { return nodes_; }

  /// Unchecked evaluation at barycentric point `b`; gradients are taken with
  /// respect to the reference coordinates (xi, eta) = (b[1], b[2]).
  void evaluate(const Barycentric& b, std::span<double> values,
                std::span<Eigen::Vector2d> gradients) const;

 private:
  int order_;
  std::vector<std::array<int, 3>> indices_;
  std::vector<Barycentric> nodes_;
};

struct ShapeValues {
  std::vector<double> values;
  std::vector<Eigen::Vector2d> gradients;
};

/// Basis values and reference gradients at reference point (xi, eta).
/// Throws ValidationError for points outside the closed triangle by > 1e-12.
[[nodiscard]] ShapeValues shape_eval(const ReferenceElement& element, const Eigen::Vector2d& point);

struct QuadratureRule {
  std::vector<Barycentric> points;
  std::vector<double> weights;  // reference measure, sums to 1/2
  int exact_degree = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Triangle rule exact for total degree <= exact_degree, 1 <= exact_degree <= 10.
[[nodiscard]] QuadratureRule quadrature(int exact_degree);

struct GaussRule1D {
  std::vector<double> points;  // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1].
[[nodiscard]] GaussRule1D gauss_legendre(int n);

}  // namespace dendrite
