#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vem {

using Point = Eigen::Vector2d;

struct QuadraturePoint {
  Point x;
  double w;
};

using QuadratureRule = std::vector<QuadraturePoint>;

/// Gauss-Legendre nodes and weights on [-1, 1]; exact for degree 2n-1.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

/// Rule on the segment [a, b] with n Gauss points (weights include the length).
QuadratureRule segment_rule(const Point& a, const Point& b, int n);

/// Rule on the triangle (p0, p1, p2), exact for polynomials of total degree
/// `degree`. Built from a collapsed (Duffy) tensor Gauss rule. Weights carry
/// the signed area, so clockwise triangles contribute negatively.
QuadratureRule triangle_rule(const Point& p0, const Point& p1, const Point& p2,
                             int degree);

/// Fan rule over a simple polygon: triangles (center, v_i, v_{i+1}) with
/// signed weights. Exact for polynomials of the given degree for any center,
/// since the signed fan covers the polygon with winding number one.
QuadratureRule polygon_rule(std::span<const Point> vertices, const Point& center,
                            int degree);

}  // namespace vem
