#include "dendrite/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_map>

#include "dendrite/error.hpp"

namespace dendrite {

namespace {

bool on_same_side(const Rectangle& d, const Point& a, const Point& b) {
  const double tol = 1e-12 * std::max(d.width(), d.height());
  auto near = [tol](double u, double v) { return std::abs(u - v) <= tol; };
  return (near(a.x(), d.x0) && near(b.x(), d.x0)) || (near(a.x(), d.x1) && near(b.x(), d.x1)) ||
         (near(a.y(), d.y0) && near(b.y(), d.y0)) || (near(a.y(), d.y1) && near(b.y(), d.y1));
}

}  // namespace

bool Rectangle::contains(const Point& p, double tol) const {
  return p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol;
}

Mesh::Mesh(Rectangle domain, std::vector<Point> vertices, std::vector<Triangle> triangles)
    : domain_(domain), vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (!(domain_.x1 > domain_.x0) || !(domain_.y1 > domain_.y0)) {
    throw ValidationError("mesh: degenerate or inverted domain");
  }
  if (triangles_.empty()) throw ValidationError("mesh: no triangles");
  const int nv = static_cast<int>(vertices_.size());

  double area_sum = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= nv) throw ValidationError("mesh: triangle references missing vertex");
    }
    const double a = signed_area(static_cast<int>(t));
    if (!(a > 0.0)) {
      throw ValidationError("mesh: triangle " + std::to_string(t) + " is not counterclockwise");
    }
    area_sum += a;
  }
  if (std::abs(area_sum - domain_.area()) > 1e-12 * domain_.area()) {
    throw ValidationError("mesh: triangle areas do not sum to the domain area");
  }

  // Edges in order of first appearance, keyed by the sorted vertex pair.
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(triangles_.size() * 2);
  triangle_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int e = 0; e < 3; ++e) {
      int a = tri[(e + 1) % 3];
      int b = tri[(e + 2) % 3];
      if (a > b) std::swap(a, b);
      const auto key = static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(nv) +
                       static_cast<std::uint64_t>(b);
      auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        Edge edge;
        edge.vertices = {a, b};
        edge.triangles[0] = static_cast<int>(t);
        edge.local[0] = e;
        edges_.push_back(edge);
      } else {
        Edge& edge = edges_[it->second];
        if (edge.triangles[1] >= 0) {
          throw ValidationError("mesh: edge shared by more than two triangles");
        }
        edge.triangles[1] = static_cast<int>(t);
        edge.local[1] = e;
      }
      triangle_edges_[t][e] = it->second;
    }
  }

  boundary_vertex_.assign(vertices_.size(), false);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& edge = edges_[i];
    const Point& a = vertices_[edge.vertices[0]];
    const Point& b = vertices_[edge.vertices[1]];
    h_ = std::max(h_, (b - a).norm());
    if (!edge.on_boundary()) continue;
    if (!on_same_side(domain_, a, b)) {
      throw ValidationError("mesh: boundary edge in the interior (hanging node)");
    }
    boundary_edges_.push_back(static_cast<int>(i));
    boundary_vertex_[edge.vertices[0]] = true;
    boundary_vertex_[edge.vertices[1]] = true;
  }
}

double Mesh::signed_area(int t) const {
  const auto& tri = triangles_[t];
  const Point& a = vertices_[tri[0]];
  const Point& b = vertices_[tri[1]];
  const Point& c = vertices_[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

int Mesh::locate(const Point& p, double tol) const {
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    const Point& a = vertices_[tri[0]];
    const Point& b = vertices_[tri[1]];
    const Point& c = vertices_[tri[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    const double l1 = ((p.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (p.y() - a.y())) / det;
    const double l2 = ((b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y())) / det;
    const double l0 = 1.0 - l1 - l2;
    if (l0 >= -tol && l1 >= -tol && l2 >= -tol) return static_cast<int>(t);
  }
  return -1;
}

int subdivisions_for(double h_target) {
  if (!(h_target > 0.0) || !std::isfinite(h_target)) {
    throw ValidationError("mesh: h_target must be positive");
  }
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(2.0) / h_target - 1e-9)));
}

Mesh generate_rect_mesh(const Rectangle& domain, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ValidationError("mesh: need at least one cell per side");
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) {
    throw ValidationError("mesh: degenerate or inverted domain");
  }
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    // Endpoints are set exactly so boundary tests are not polluted by rounding.
    const double y = j == ny ? domain.y1 : domain.y0 + domain.height() * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? domain.x1 : domain.x0 + domain.width() * i / nx;
      vertices.emplace_back(x, y);
    }
  }
  std::vector<Triangle> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh(domain, std::move(vertices), std::move(triangles));
}

Mesh generate_rect_mesh(const Rectangle& domain, double h_target) {
  if (!(h_target > 0.0) || !std::isfinite(h_target)) {
    throw ValidationError("mesh: h_target must be positive");
  }
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) {
    throw ValidationError("mesh: degenerate or inverted domain");
  }
  const double cell = h_target / std::sqrt(2.0);
  const int nx = std::max(1, static_cast<int>(std::ceil(domain.width() / cell - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(domain.height() / cell - 1e-9)));
  return generate_rect_mesh(domain, nx, ny);
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Point> vertices = mesh.vertices();
  const int nv = static_cast<int>(vertices.size());
  for (const Edge& edge : mesh.edges()) {
    vertices.push_back(0.5 * (mesh.vertices()[edge.vertices[0]] + mesh.vertices()[edge.vertices[1]]));
  }
  std::vector<Triangle> triangles;
  triangles.reserve(4 * mesh.n_triangles());
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const auto& [a, b, c] = mesh.triangles()[t];
    const int ma = nv + mesh.triangle_edge(static_cast<int>(t), 0);
    const int mb = nv + mesh.triangle_edge(static_cast<int>(t), 1);
    const int mc = nv + mesh.triangle_edge(static_cast<int>(t), 2);
    triangles.push_back({a, mc, mb});
    triangles.push_back({mc, b, ma});
    triangles.push_back({mb, ma, c});
    triangles.push_back({ma, mb, mc});
  }
  return Mesh(mesh.domain(), std::move(vertices), std::move(triangles));
}

MeshStatistics mesh_statistics(const Mesh& mesh) {
  return {mesh.h(), mesh.n_triangles(), mesh.boundary_edges().size()};
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.n_vertices() << ' ' << mesh.n_triangles() << '\n';
  out << std::setprecision(17);
  for (const Point& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  for (const Triangle& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Mesh read_mesh(std::istream& in) {
  long nv = -1;
  long nt = -1;
  if (!(in >> nv >> nt) || nv < 3 || nt < 1) throw ValidationError("mesh file: bad header");
  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  Rectangle box{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (auto& p : vertices) {
    double x = 0.0;
    double y = 0.0;
    if (!(in >> x >> y)) throw ValidationError("mesh file: truncated vertex list");
    p = Point(x, y);
    box.x0 = std::min(box.x0, x);
    box.y0 = std::min(box.y0, y);
    box.x1 = std::max(box.x1, x);
    box.y1 = std::max(box.y1, y);
  }
  std::vector<Triangle> triangles(static_cast<std::size_t>(nt));
  for (auto& t : triangles) {
    if (!(in >> t[0] >> t[1] >> t[2])) throw ValidationError("mesh file: truncated triangle list");
  }
  return Mesh(box, std::move(vertices), std::move(triangles));
}

}  // namespace dendrite
