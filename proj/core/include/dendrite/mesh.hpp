#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace dendrite {

using Point = Eigen::Vector2d;

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rectangle {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  [[nodiscard]] double width() const { return x1 - x0; }
  [[nodiscard]] double height() const { return y1 - y0; }
  [[nodiscard]] double area() const { return width() * height(); }
  [[nodiscard]] bool contains(const Point& p, double tol = 1e-12) const;
};

/// Mesh edge. `triangles[1]` is -1 for boundary edges. `local[k]` is the local
/// edge index inside `triangles[k]` (local edge e is opposite local vertex e).
struct Edge {
  std::array<int, 2> vertices{};  // vertices[0] < vertices[1]
  std::array<int, 2> triangles{-1, -1};
  std::array<int, 2> local{-1, -1};

  [[nodiscard]] bool on_boundary() const { return triangles[1] < 0; }
};

using Triangle = std::array<int, 3>;

/// Conforming triangulation of a rectangle. Immutable after construction;
/// every boundary edge carries the single "wall" tag.
class Mesh {
 public:
  /// Validates orientation (positive signed area) and conformity, then
  /// derives edges and h.
  Mesh(Rectangle domain, std::vector<Point> vertices, std::vector<Triangle> triangles);

  [[nodiscard]] const Rectangle& domain() const { return domain_; }
  [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Triangle>& triangles() const { return triangles_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::vector<int>& boundary_edges() const { return boundary_edges_; }

  /// Global edge index of local edge e of triangle t.
  [[nodiscard]] int triangle_edge(int t, int e) const { return triangle_edges_[t][e]; }

  [[nodiscard]] std::size_t n_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t n_triangles() const { return triangles_.size(); }

  /// Maximum over triangles of the longest edge.
  [[nodiscard]] double h() const { return h_; }
  [[nodiscard]] double signed_area(int t) const;
  [[nodiscard]] bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }

  /// Index of a triangle containing p (closed, tolerance tol), or -1.
  [[nodiscard]] int locate(const Point& p, double tol = 1e-12) const;

 private:
  Rectangle domain_;
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<int> boundary_edges_;
  std::vector<bool> boundary_vertex_;
  double h_ = 0.0;
};

struct MeshStatistics {
  double h = 0.0;
  std::size_t n_elements = 0;
  std::size_t n_boundary_edges = 0;
};

/// Cells per side of the structured grid chosen so that a unit square mesh
/// reaches h <= h_target.
[[nodiscard]] int subdivisions_for(double h_target);

/// Structured nx x ny grid, each cell cut along its (x0,y0)-(x1,y1) diagonal.
[[nodiscard]] Mesh generate_rect_mesh(const Rectangle& domain, int nx, int ny);

/// Structured mesh of `domain` with h <= h_target.
[[nodiscard]] Mesh generate_rect_mesh(const Rectangle& domain, double h_target);

/// Red refinement: every triangle split into 4 congruent children.
[[nodiscard]] Mesh refine_uniform(const Mesh& mesh);

[[nodiscard]] MeshStatistics mesh_statistics(const Mesh& mesh);

/// Plain text: `nv nt`, nv lines `x y`, nt lines `i j k` (0-based).
void write_mesh(std::ostream& out, const Mesh& mesh);
[[nodiscard]] Mesh read_mesh(std::istream& in);

}  // namespace dendrite
