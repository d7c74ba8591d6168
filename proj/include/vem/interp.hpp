#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vem/assembly.hpp"
#include "vem/mesh.hpp"

namespace vem {

/// A smooth vector field with its divergence.
struct AnalyticField {
  std::string name;
  std::function<Point(const Point&)> value;
  std::function<double(const Point&)> divergence;
  /// Sobolev regularity index t of the field (infinity for analytic fields).
  double regularity = std::numeric_limits<double>::infinity();

  struct Mode {
    int n = 0, m = 0;
    double a = 1.0, b = 1.0;
  };
  std::optional<Mode> mode;

  /// Cavity mode w_nm of the rectangle (0,a) x (0,b); w_nm = -grad(cos cos)/pi.
  static AnalyticField eigenmode(int n, int m, double a, double b);
  static AnalyticField constant(const Point& c);
  /// grad of ((x-xc)/h)^ax ((y-yc)/h)^ay.
  static AnalyticField monomial_gradient(int ax, int ay, const Point& center, double h);
  /// Names accepted on the command line: "w<n><m>" (single digits), "const", "saddle".
  static AnalyticField parse(const std::string& name, double a, double b);
};

/// Global dof vector of v_I over all edges (boundary ones included) and all
/// cell-internal moments, numbered by `dofs`.
struct InterpolantDofs {
  DofMap dofs;
  Eigen::VectorXd values;

  Eigen::VectorXd free() const { return values.head(dofs.num_free); }
  Eigen::VectorXd local(const PolygonalMesh& mesh, int cell) const;
};

/// Fixes the dofs of v_I: edge moments of v.n by Gauss quadrature (starting
/// from `edge_points` points and doubling until the value settles) and
/// internal moments int_E v . grad m_s by polygon quadrature.
InterpolantDofs interpolate(const PolygonalMesh& mesh, int k, const AnalyticField& field,
                            int edge_points = 8);

struct CommutingReport {
  std::vector<double> residual;   // ||div v_I - P_k div v||_{0,E}
  std::vector<double> div_interp; // ||div v_I||_{0,E}
  std::vector<double> div_exact;  // ||div v||_{0,E}
  double max_residual = 0.0;
};

CommutingReport commuting_residual(const PolygonalMesh& mesh, int k, const AnalyticField& field,
                                   const InterpolantDofs& interpolant);
CommutingReport commuting_residual(const PolygonalMesh& mesh, int k, const AnalyticField& field);

/// A virtual function of one element, realised as v_h = grad(gamma) with
/// gamma the P1 finite element solution of the local Neumann problem
/// lap(gamma) = div v_h, d(gamma)/dn = v_h . n on a fan sub-triangulation
/// refined `refinement` times.
class VirtualFunction {
 public:
  VirtualFunction(const ElementGeometry& geom, int k, const Eigen::VectorXd& local_dofs,
                  int refinement = 4);

  Point evaluate(const Point& x) const;
  std::vector<Point> evaluate(std::span<const Point> points) const;
  /// Mean value over the element.
  Point average() const;
  /// ||f - v_h||_{L^2(E)}
  double l2_error(const std::function<Point(const Point&)>& f) const;
  double l2_norm() const;

  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  /// Constant value of v_h on each sub-triangle, and the sub-triangle areas.
  const std::vector<Point>& triangle_values() const { return gradients_; }
  const std::vector<double>& triangle_areas() const { return areas_; }

 private:
  std::vector<Point> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Point> gradients_;
  std::vector<double> areas_;
};

std::vector<Point> virtual_evaluate(const ElementGeometry& geom, int k,
                                    const Eigen::VectorXd& local_dofs,
                                    std::span<const Point> points, int refinement = 4);

struct RateLevel {
  int n = 0;
  double h = 0.0;
  double l2_error = 0.0;         // ||v - v_I|| with v_I evaluated virtually
  double projected_error = 0.0;  // ||v - Pi_h v_I||
  double commuting_residual = 0.0;
};

struct RateReport {
  std::vector<RateLevel> levels;
  std::optional<double> rate;            // least-squares slope of log error vs log h
  std::optional<double> projected_rate;
};

RateReport interpolation_rate_study(MeshFamily family, double a, double b, int k,
                                    const AnalyticField& field, const std::vector<int>& ns,
                                    int refinement = 4);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace vem
