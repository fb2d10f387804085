#include "dendrite/elements.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dendrite/error.hpp"

namespace dendrite {

ReferenceElement::ReferenceElement(int order) : order_(order) {
  if (order < 1 || order > 3) throw ValidationError("element: order must be 1, 2 or 3");
  const int l = order;
  indices_.push_back({l, 0, 0});
  indices_.push_back({0, l, 0});
  indices_.push_back({0, 0, l});
  for (int e = 0; e < 3; ++e) {
    const int a = (e + 1) % 3;
    const int b = (e + 2) % 3;
    for (int s = 1; s < l; ++s) {
      std::array<int, 3> idx{0, 0, 0};
      idx[a] = l - s;
      idx[b] = s;
      indices_.push_back(idx);
    }
  }
  for (int i = 1; i < l; ++i) {
    for (int j = 1; i + j < l; ++j) indices_.push_back({i, j, l - i - j});
  }
  for (const auto& idx : indices_) {
    nodes_.push_back({static_cast<double>(idx[0]) / l, static_cast<double>(idx[1]) / l,
                      static_cast<double>(idx[2]) / l});
  }
}

void ReferenceElement::evaluate(const Barycentric& b, std::span<double> values,
                                std::span<Eigen::Vector2d> gradients) const {
  const int l = order_;
  // Silvester polynomials R_m(lambda) and their derivatives, per coordinate.
  double r[3][4];
  double dr[3][4];
  for (int a = 0; a < 3; ++a) {
    r[a][0] = 1.0;
    dr[a][0] = 0.0;
    const double s = l * b[a];
    for (int m = 1; m <= l; ++m) {
      r[a][m] = r[a][m - 1] * (s - (m - 1)) / m;
      dr[a][m] = (dr[a][m - 1] * (s - (m - 1)) + r[a][m - 1] * l) / m;
    }
  }
  for (std::size_t n = 0; n < indices_.size(); ++n) {
    const auto& [i, j, k] = indices_[n];
    const double v0 = r[0][i];
    const double v1 = r[1][j];
    const double v2 = r[2][k];
    if (!values.empty()) values[n] = v0 * v1 * v2;
    if (!gradients.empty()) {
      const double d0 = dr[0][i] * v1 * v2;
      const double d1 = v0 * dr[1][j] * v2;
      const double d2 = v0 * v1 * dr[2][k];
      gradients[n] = Eigen::Vector2d(d1 - d0, d2 - d0);
    }
  }
}

ShapeValues shape_eval(const ReferenceElement& element, const Eigen::Vector2d& point) {
  const double tol = 1e-12;
  const Barycentric b{1.0 - point.x() - point.y(), point.x(), point.y()};
  if (!std::isfinite(point.x()) || !std::isfinite(point.y()) || b[0] < -tol || b[1] < -tol ||
      b[2] < -tol) {
    throw ValidationError("shape_eval: point outside the reference triangle");
  }
  ShapeValues out;
  out.values.resize(static_cast<std::size_t>(element.n_basis()));
  out.gradients.resize(static_cast<std::size_t>(element.n_basis()));
  element.evaluate(b, out.values, out.gradients);
  return out;
}

GaussRule1D gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: need at least one point");
  GaussRule1D rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Ascending order on [0, 1].
    rule.points[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (x + 1.0);
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
  }
  return rule;
}

QuadratureRule quadrature(int exact_degree) {
  if (exact_degree < 1 || exact_degree > 10) {
    throw ValidationError("quadrature: unsupported degree " + std::to_string(exact_degree));
  }
  QuadratureRule rule;
  rule.exact_degree = exact_degree;
  if (exact_degree == 1) {
    rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    rule.weights.push_back(0.5);
    return rule;
  }
  if (exact_degree == 2) {
    const double a = 2.0 / 3.0;
    const double b = 1.0 / 6.0;
    rule.points = {{a, b, b}, {b, a, b}, {b, b, a}};
    rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return rule;
  }
  // Collapsed (Duffy) tensor Gauss rule: xi = u, eta = v (1 - u), dJ = (1 - u).
  const int n = (exact_degree + 3) / 2;
  const GaussRule1D g = gauss_legendre(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = g.points[static_cast<std::size_t>(i)];
      const double v = g.points[static_cast<std::size_t>(j)];
      const double xi = u;
      const double eta = v * (1.0 - u);
      rule.points.push_back({1.0 - xi - eta, xi, eta});
      rule.weights.push_back(g.weights[static_cast<std::size_t>(i)] *
                             g.weights[static_cast<std::size_t>(j)] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace dendrite
