#include "vem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace vem {

namespace {

double cross(const Point& u, const Point& v) { return u.x() * v.y() - u.y() * v.x(); }

double signed_area(std::span<const Point> poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

// Closed-segment intersection test.
bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2,
                        double tol) {
  auto orient = [&](const Point& a, const Point& b, const Point& c) {
    const double v = cross(b - a, c - a);
    return std::abs(v) <= tol ? 0 : (v > 0 ? 1 : -1);
  };
  auto on_segment = [&](const Point& a, const Point& b, const Point& c) {
    return std::min(a.x(), b.x()) - tol <= c.x() && c.x() <= std::max(a.x(), b.x()) + tol &&
           std::min(a.y(), b.y()) - tol <= c.y() && c.y() <= std::max(a.y(), b.y()) + tol;
  };
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
         (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

void check_dimensions(double a, double b, int n, int min_n) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("mesh: domain lengths must be positive");
  if (n < min_n)
    throw std::invalid_argument("mesh: N must be >= " + std::to_string(min_n));
}

}  // namespace

ElementGeometry ElementGeometry::from_polygon(std::vector<Point> vertices,
                                              const std::vector<bool>& reversed) {
  const std::size_t n = vertices.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  if (!reversed.empty() && reversed.size() != n)
    throw std::invalid_argument("polygon: orientation flags do not match edge count");

  ElementGeometry g;
  g.area = signed_area(vertices);
  double diameter = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      diameter = std::max(diameter, (vertices[i] - vertices[j]).norm());
  g.diameter = diameter;
  if (!(g.area > 1e-14 * diameter * diameter))
    throw std::invalid_argument("polygon is degenerate or not counter-clockwise");

  const double tol = 1e-13 * diameter * diameter;
  for (std::size_t i = 0; i < n; ++i) {
    if ((vertices[(i + 1) % n] - vertices[i]).norm() <= 1e-14 * diameter)
      throw std::invalid_argument("polygon has a zero-length edge");
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap-around
      if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j],
                             vertices[(j + 1) % n], tol))
        throw std::invalid_argument("polygon is not simple");
    }
  }

  Point c = Point::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = vertices[i];
    const Point& q = vertices[(i + 1) % n];
    c += cross(p, q) * (p + q);
  }
  g.center = c / (6.0 * g.area);

  g.edges.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    EdgeGeometry& e = g.edges[i];
    e.start = vertices[i];
    e.end = vertices[(i + 1) % n];
    const Point t = e.end - e.start;
    e.length = t.norm();
    e.normal = Point(t.y(), -t.x()) / e.length;
    e.reversed = reversed.empty() ? false : reversed[i];
  }
  g.vertices = std::move(vertices);
  return g;
}

MeshFamily parse_family(const std::string& name) {
  if (name == "tri" || name == "triangular") return MeshFamily::triangular;
  if (name == "rect" || name == "rectangular") return MeshFamily::rectangular;
  if (name == "hex" || name == "hexagonal") return MeshFamily::hexagonal;
  throw std::invalid_argument("unknown mesh family '" + name + "'");
}

std::string to_string(MeshFamily family) {
  switch (family) {
    case MeshFamily::triangular: return "tri";
    case MeshFamily::rectangular: return "rect";
    case MeshFamily::hexagonal: return "hex";
  }
  return "?";
}

PolygonalMesh::PolygonalMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  if (vertices_.empty() || cells_.empty()) throw std::invalid_argument("mesh: empty input");

  xmin_ = ymin_ = std::numeric_limits<double>::infinity();
  xmax_ = ymax_ = -std::numeric_limits<double>::infinity();
  for (const Point& p : vertices_) {
    xmin_ = std::min(xmin_, p.x());
    xmax_ = std::max(xmax_, p.x());
    ymin_ = std::min(ymin_, p.y());
    ymax_ = std::max(ymax_, p.y());
  }

  std::map<std::pair<int, int>, int> edge_ids;
  for (const auto& cell : cells_) {
    if (cell.size() < 3) throw std::invalid_argument("mesh: cell with fewer than 3 vertices");
    for (std::size_t i = 0; i < cell.size(); ++i) {
      const int u = cell[i], v = cell[(i + 1) % cell.size()];
      if (u < 0 || v < 0 || u >= num_vertices() || v >= num_vertices())
        throw std::invalid_argument("mesh: vertex index out of range");
      if (u == v) throw std::invalid_argument("mesh: repeated vertex in cell");
      edge_ids.emplace(std::minmax(u, v), 0);
    }
  }
  edges_.reserve(edge_ids.size());
  for (auto& [key, id] : edge_ids) {
    id = static_cast<int>(edges_.size());
    edges_.push_back({key.first, key.second});
  }

  edge_cells_.assign(edges_.size(), {-1, -1});
  std::vector<int> incidence(edges_.size(), 0);
  cell_edges_.resize(cells_.size());
  for (int c = 0; c < num_cells(); ++c) {
    const auto& cell = cells_[c];
    for (std::size_t i = 0; i < cell.size(); ++i) {
      const int u = cell[i], v = cell[(i + 1) % cell.size()];
      const int e = edge_ids.at(std::minmax(u, v));
      // The CCW outward normal is the tangent rotated by -90 deg, the global
      // normal is the (a -> b) tangent rotated by +90 deg: they agree iff the
      // cell traverses the edge from b to a.
      const int sign = u < v ? -1 : 1;
      cell_edges_[c].push_back({e, sign});
      if (incidence[e] >= 2) throw std::invalid_argument("mesh: edge shared by more than 2 cells");
      edge_cells_[e][incidence[e]++] = c;
    }
    ElementGeometry::from_polygon([&] {
      std::vector<Point> poly;
      for (int v : cell) poly.push_back(vertices_[v]);
      return poly;
    }());
  }
  boundary_.resize(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    boundary_[e] = incidence[e] == 1;
    if (incidence[e] == 2) {
      const int c0 = edge_cells_[e][0], c1 = edge_cells_[e][1];
      int s0 = 0, s1 = 0;
      for (const auto& ce : cell_edges_[c0])
        if (ce.edge == static_cast<int>(e)) s0 = ce.sign;
      for (const auto& ce : cell_edges_[c1])
        if (ce.edge == static_cast<int>(e)) s1 = ce.sign;
      if (s0 + s1 != 0) throw std::invalid_argument("mesh: inconsistent cell orientation");
    }
  }
}

int PolygonalMesh::num_internal_edges() const {
  return static_cast<int>(std::count(boundary_.begin(), boundary_.end(), false));
}

int PolygonalMesh::num_internal_vertices() const {
  std::vector<bool> on_boundary(vertices_.size(), false);
  for (int e = 0; e < num_edges(); ++e)
    if (boundary_[e]) on_boundary[edges_[e].a] = on_boundary[edges_[e].b] = true;
  return static_cast<int>(std::count(on_boundary.begin(), on_boundary.end(), false));
}

Point PolygonalMesh::edge_normal(int edge) const {
  const Point t = vertices_[edges_[edge].b] - vertices_[edges_[edge].a];
  return Point(-t.y(), t.x()) / t.norm();
}

double PolygonalMesh::edge_length(int edge) const {
  return (vertices_[edges_[edge].b] - vertices_[edges_[edge].a]).norm();
}

ElementGeometry PolygonalMesh::geometry(int cell) const {
  const auto& ids = cells_[cell];
  std::vector<Point> poly;
  poly.reserve(ids.size());
  std::vector<bool> reversed(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    poly.push_back(vertices_[ids[i]]);
    reversed[i] = ids[i] > ids[(i + 1) % ids.size()];
  }
  return ElementGeometry::from_polygon(std::move(poly), reversed);
}

double PolygonalMesh::mesh_size() const {
  double h = 0.0;
  for (const auto& cell : cells_)
    for (std::size_t i = 0; i < cell.size(); ++i)
      for (std::size_t j = i + 1; j < cell.size(); ++j)
        h = std::max(h, (vertices_[cell[i]] - vertices_[cell[j]]).norm());
  return h;
}

PolygonalMesh generate_rectangular(double a, double b, int n) {
  check_dimensions(a, b, n, 1);
  std::vector<Point> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices.emplace_back(a * i / n, b * j / n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return PolygonalMesh(std::move(vertices), std::move(cells));
}

PolygonalMesh generate_triangular(double a, double b, int n) {
  check_dimensions(a, b, n, 1);
  std::vector<Point> vertices;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices.emplace_back(a * i / n, b * j / n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(2 * n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return PolygonalMesh(std::move(vertices), std::move(cells));
}

PolygonalMesh generate_hexagonal(double a, double b, int n) {
  check_dimensions(a, b, n, 2);
  const double hx = a / n;
  const double hy = b / n;
  // Vertical offset of the zig-zag between rows; hy/6 gives walls of height
  // 2hy/3 as in a regular honeycomb.
  const double delta = hy / 6.0;
  const int last = 2 * n;  // x positions are multiples of hx/2: q = 0..2n

  auto is_wall = [&](int row, int q) {
    if (row < 0 || row >= n) return false;
    if (q == 0 || q == last) return true;
    return row % 2 == 0 ? q % 2 == 0 : q % 2 == 1;
  };
  std::vector<Point> vertices;
  std::map<std::pair<int, int>, int> index;  // (line, q) -> vertex
  auto vertex = [&](int line, int q) {
    auto [it, fresh] = index.emplace(std::make_pair(line, q), 0);
    if (fresh) {
      double y = hy * line;
      if (line > 0 && line < n && q > 0 && q < last) y += is_wall(line - 1, q) ? -delta : delta;
      if (line == n) y = b;
      const double x = q == last ? a : 0.5 * hx * q;
      it->second = static_cast<int>(vertices.size());
      vertices.emplace_back(x, y);
    }
    return it->second;
  };
  auto on_line = [&](int line, int q) { return is_wall(line - 1, q) || is_wall(line, q); };

  std::vector<std::vector<int>> cells;
  for (int row = 0; row < n; ++row) {
    std::vector<int> walls;
    for (int q = 0; q <= last; ++q)
      if (is_wall(row, q)) walls.push_back(q);
    for (std::size_t t = 0; t + 1 < walls.size(); ++t) {
      std::vector<int> cell;
      for (int q = walls[t]; q <= walls[t + 1]; ++q)
        if (on_line(row, q)) cell.push_back(vertex(row, q));
      for (int q = walls[t + 1]; q >= walls[t]; --q)
        if (on_line(row + 1, q)) cell.push_back(vertex(row + 1, q));
      cells.push_back(std::move(cell));
    }
  }
  return PolygonalMesh(std::move(vertices), std::move(cells));
}

PolygonalMesh generate_mesh(MeshFamily family, double a, double b, int n) {
  switch (family) {
    case MeshFamily::triangular: return generate_triangular(a, b, n);
    case MeshFamily::rectangular: return generate_rectangular(a, b, n);
    case MeshFamily::hexagonal: return generate_hexagonal(a, b, n);
  }
  throw std::invalid_argument("unknown mesh family");
}

bool chebyshev_center(std::span<const Point> polygon, Point& center, double& radius) {
  // maximize r subject to n_i . (x - p_i) >= r for every edge (inward n_i).
  // Three unknowns: the optimum sits on a vertex of the feasible region, so
  // enumerate all triples of active constraints.
  const std::size_t m = polygon.size();
  std::vector<Point> normals(m);
  std::vector<double> offsets(m);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Point t = polygon[(i + 1) % m] - polygon[i];
    normals[i] = Point(-t.y(), t.x()) / t.norm();
    offsets[i] = normals[i].dot(polygon[i]);
    scale = std::max(scale, t.norm());
  }
  const double tol = 1e-12 * scale;
  bool found = false;
  radius = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = j + 1; k < m; ++k) {
        Eigen::Matrix3d A;
        Eigen::Vector3d rhs;
        const std::size_t idx[3] = {i, j, k};
        for (int r = 0; r < 3; ++r) {
          A(r, 0) = normals[idx[r]].x();
          A(r, 1) = normals[idx[r]].y();
          A(r, 2) = -1.0;
          rhs(r) = offsets[idx[r]];
        }
        Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
        if (!lu.isInvertible()) continue;
        const Eigen::Vector3d sol = lu.solve(rhs);
        const Point x(sol(0), sol(1));
        const double r = sol(2);
        if (r <= tol) continue;
        bool feasible = true;
        for (std::size_t q = 0; q < m && feasible; ++q)
          feasible = normals[q].dot(x) - offsets[q] >= r - tol;
        if (feasible && r > radius) {
          radius = r;
          center = x;
          found = true;
        }
      }
  return found;
}

CellQuality cell_quality(std::span<const Point> polygon) {
  CellQuality q;
  double diameter = 0.0;
  double shortest = std::numeric_limits<double>::infinity();
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    shortest = std::min(shortest, (polygon[(i + 1) % n] - polygon[i]).norm());
    for (std::size_t j = i + 1; j < n; ++j)
      diameter = std::max(diameter, (polygon[i] - polygon[j]).norm());
  }
  q.min_edge_to_diameter = shortest / diameter;
  double radius = 0.0;
  q.star_center_found = chebyshev_center(polygon, q.star_center, radius);
  q.star_radius_to_diameter = q.star_center_found ? radius / diameter : 0.0;
  return q;
}

MeshQualityReport check_mesh_assumptions(const PolygonalMesh& mesh) {
  MeshQualityReport report;
  report.c_t = std::numeric_limits<double>::infinity();
  for (const auto& cell : mesh.cells()) {
    std::vector<Point> poly;
    for (int v : cell) poly.push_back(mesh.vertices()[v]);
    CellQuality q = cell_quality(poly);
    report.star_shaped = report.star_shaped && q.star_center_found;
    report.c_t = std::min({report.c_t, q.min_edge_to_diameter, q.star_radius_to_diameter});
    report.cells.push_back(q);
  }
  return report;
}

nlohmann::json mesh_to_json(const PolygonalMesh& mesh) {
  nlohmann::json doc;
  auto& verts = doc["vertices"] = nlohmann::json::array();
  for (const Point& p : mesh.vertices()) verts.push_back({p.x(), p.y()});
  doc["cells"] = mesh.cells();
  return doc;
}

PolygonalMesh mesh_from_json(const nlohmann::json& doc) {
  if (!doc.contains("vertices") || !doc.contains("cells"))
    throw std::invalid_argument("mesh JSON needs 'vertices' and 'cells'");
  std::vector<Point> vertices;
  for (const auto& v : doc.at("vertices")) {
    if (!v.is_array() || v.size() != 2) throw std::invalid_argument("mesh JSON: vertex must be [x, y]");
    vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  auto cells = doc.at("cells").get<std::vector<std::vector<int>>>();
  return PolygonalMesh(std::move(vertices), std::move(cells));
}

}  // namespace vem
