#pragma once

#include <utility>

#include <Eigen/Dense>

#include "vem/mesh.hpp"

namespace vem {

// ---------------------------------------------------------------------------
// Polynomial bases
// ---------------------------------------------------------------------------

/// Number of monomials of total degree <= d.
constexpr int monomial_count(int d) { return d < 0 ? 0 : (d + 1) * (d + 2) / 2; }

/// Graded order: degree first, then increasing exponent of y.
constexpr int monomial_index(int ax, int ay) {
  const int d = ax + ay;
  return d * (d + 1) / 2 + ay;
}

std::pair<int, int> monomial_exponents(int index);

/// m_a(x, y) = ((x - xc) / h)^ax ((y - yc) / h)^ay
class ScaledMonomials {
 public:
  ScaledMonomials(Point center, double scale, int degree);

  int degree() const { return degree_; }
  int size() const { return monomial_count(degree_); }
  const Point& center() const { return center_; }
  double scale() const { return scale_; }

  double value(int index, const Point& x) const;
  Point gradient(int index, const Point& x) const;
  Eigen::VectorXd values(const Point& x) const;

 private:
  Point center_;
  double scale_;
  int degree_;
};

/// Legendre polynomial P_i on [-1, 1], normalised by P_i(1) = 1.
double legendre(int i, double t);

/// Edge polynomial q^i at a point of the edge, with the parameter running
/// from param_begin() (t = -1) to param_end() (t = 1).
double edge_polynomial(const EdgeGeometry& edge, int i, const Point& x);

// ---------------------------------------------------------------------------
// Local degrees of freedom
// ---------------------------------------------------------------------------

/// Local dofs: for each side l and i = 0..k the normal moment
/// int_e (v.n) q^i ds (outward n), followed by the internal moments
/// int_E v . grad m_s for the monomials of degree 1..k.
struct DofLayout {
  int k = 0;
  int num_edges = 0;

  int edge_dofs() const { return num_edges * (k + 1); }
  int internal_dofs() const { return monomial_count(k) - 1; }
  int total() const { return edge_dofs() + internal_dofs(); }
  int edge_dof(int l, int i) const { return l * (k + 1) + i; }
  /// Internal moment against monomial s + 1 (s = 0 .. internal_dofs()-1).
  int internal_dof(int s) const { return edge_dofs() + s; }
};

/// Element matrices. Local dofs use outward normals; assembly applies the
/// global orientation signs.
struct LocalElementOps {
  DofLayout layout;
  double sigma = 0.0;
  Eigen::VectorXd moments;     // int_E m_a for |a| <= 2k+2
  Eigen::MatrixXd H;           // polynomial mass on P_k
  Eigen::MatrixXd D;           // divergence coefficients in P_k, per dof
  Eigen::MatrixXd K;           // div-div stiffness D^T H D
  Eigen::MatrixXd G;           // gradient Gram matrix of m_1 .. m_{dim P_{k+1}-1}
  Eigen::MatrixXd R;           // int_E phi_j . grad m_a
  Eigen::MatrixXd pi_coeff;    // projection in gradient coefficients, G^{-1} R
  Eigen::MatrixXd grad_dofs;   // dof vectors of grad m_a (columns)
  Eigen::MatrixXd pi_dof;      // projection acting on dof vectors
  Eigen::MatrixXd S;           // stabilisation on dof vectors
  Eigen::MatrixXd B;           // stabilised mass b_h^E
};

/// int_E m_a for every scaled monomial of degree <= max_degree, centred at
/// the element centroid and scaled by the diameter.
Eigen::VectorXd polygon_moments(const ElementGeometry& geom, int max_degree);

/// Divergence matrix D (dim P_k x n_dof).
Eigen::MatrixXd divergence_matrix(const ElementGeometry& geom, int k);

Eigen::MatrixXd local_stiffness(const ElementGeometry& geom, int k);

struct ProjectorMatrices {
  Eigen::MatrixXd coeff;  // n_Pi x n_dof
  Eigen::MatrixXd dof;    // n_dof x n_dof
};

ProjectorMatrices projector_matrices(const ElementGeometry& geom, int k);

/// sigma times the Euclidean product of dof vectors; for k = 0 the dofs are
/// exactly the edge fluxes. Throws on negative sigma.
Eigen::MatrixXd stabilization_matrix(const DofLayout& layout, double sigma);

Eigen::MatrixXd local_mass(const ElementGeometry& geom, int k, double sigma);

/// All element matrices in one pass.
LocalElementOps compute_local_ops(const ElementGeometry& geom, int k, double sigma);

/// Coefficients of grad m_a (a = 1 .. dim P_{k+1} - 1) evaluated at x:
/// returns the 2 x n_Pi matrix whose columns are the gradients.
Eigen::Matrix2Xd gradient_basis(const ElementGeometry& geom, int k, const Point& x);

}  // namespace vem
