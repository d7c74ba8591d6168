#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vem/quadrature.hpp"

namespace vem {

/// Mesh edge with endpoints ordered by global vertex index (a < b).
struct Edge {
  int a = 0;
  int b = 0;
};

/// Local edge of a cell: global edge id plus the sign relating the global
/// edge normal to the cell's outward normal (+1 when they coincide).
struct CellEdge {
  int edge = 0;
  int sign = 1;
};

/// Geometry of one side of a polygon. `start`/`end` follow the cell's CCW
/// loop; `reversed` is set when the global edge orientation (lower to higher
/// vertex index) runs end -> start. Edge polynomials are parametrized along
/// the global orientation so that both neighbours agree on them.
struct EdgeGeometry {
  Point start;
  Point end;
  Point normal;  // outward unit normal
  double length = 0.0;
  bool reversed = false;

  /// Endpoint where the edge parameter equals -1 / +1.
  const Point& param_begin() const { return reversed ? end : start; }
  const Point& param_end() const { return reversed ? start : end; }
};

struct ElementGeometry {
  std::vector<Point> vertices;  // CCW loop
  std::vector<EdgeGeometry> edges;
  double area = 0.0;
  double diameter = 0.0;
  Point center = Point::Zero();  // scaling center (centroid)

  /// Validates that the loop is a simple CCW polygon and fills in geometry.
  /// `reversed` (optional) marks sides whose global orientation is opposite
  /// to the CCW traversal.
  static ElementGeometry from_polygon(std::vector<Point> vertices,
                                      const std::vector<bool>& reversed = {});

  int num_edges() const { return static_cast<int>(edges.size()); }
};

enum class MeshFamily { triangular, rectangular, hexagonal };

MeshFamily parse_family(const std::string& name);
std::string to_string(MeshFamily family);

/// Immutable polygonal mesh of the rectangle (0,a) x (0,b).
class PolygonalMesh {
 public:
  /// Builds topology from vertices and CCW cells. Throws std::invalid_argument
  /// on invalid input (non-simple or clockwise cells, non-manifold edges).
  PolygonalMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::vector<int>>& cells() const { return cells_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<CellEdge>& cell_edges(int cell) const { return cell_edges_[cell]; }
  bool is_boundary(int edge) const { return boundary_[edge]; }
  /// Cells incident to an edge; second entry is -1 on the boundary.
  const std::array<int, 2>& edge_cells(int edge) const { return edge_cells_[edge]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_internal_edges() const;
  int num_internal_vertices() const;

  /// Global edge normal: unit tangent from vertex a to vertex b rotated +90 deg.
  Point edge_normal(int edge) const;
  double edge_length(int edge) const;

  ElementGeometry geometry(int cell) const;

  /// Bounding box of the vertices, taken as the domain rectangle.
  double width() const { return xmax_ - xmin_; }
  double height() const { return ymax_ - ymin_; }
  Point lower_left() const { return {xmin_, ymin_}; }

  /// Largest cell diameter.
  double mesh_size() const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<Edge> edges_;
  std::vector<std::vector<CellEdge>> cell_edges_;
  std::vector<bool> boundary_;
  std::vector<std::array<int, 2>> edge_cells_;
  double xmin_ = 0, xmax_ = 0, ymin_ = 0, ymax_ = 0;
};

PolygonalMesh generate_rectangular(double a, double b, int n);
/// Rectangular grid with each rectangle split along its lower-left to
/// upper-right diagonal.
PolygonalMesh generate_triangular(double a, double b, int n);
/// Brick-laid hexagons, n rows of height b/n; even rows hold n hexagons,
/// odd rows n-1 hexagons plus a quadrilateral at each end. Requires n >= 2.
PolygonalMesh generate_hexagonal(double a, double b, int n);
PolygonalMesh generate_mesh(MeshFamily family, double a, double b, int n);

struct CellQuality {
  double min_edge_to_diameter = 0.0;
  bool star_center_found = false;
  Point star_center = Point::Zero();
  double star_radius_to_diameter = 0.0;
};

struct MeshQualityReport {
  std::vector<CellQuality> cells;
  /// Conservative estimate of the shape-regularity constant: the smallest
  /// edge ratio or star radius ratio over all cells.
  double c_t = 0.0;
  /// False as soon as one cell has no star center.
  bool star_shaped = true;
};

/// Chebyshev center of the intersection of the polygon's edge half-planes
/// (the largest ball the polygon is star-shaped with respect to).
/// Returns false when the kernel is empty.
bool chebyshev_center(std::span<const Point> polygon, Point& center, double& radius);

CellQuality cell_quality(std::span<const Point> polygon);
MeshQualityReport check_mesh_assumptions(const PolygonalMesh& mesh);

nlohmann::json mesh_to_json(const PolygonalMesh& mesh);
PolygonalMesh mesh_from_json(const nlohmann::json& doc);

}  // namespace vem
