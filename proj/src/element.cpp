#include "vem/element.hpp"

#include <cmath>
#include <stdexcept>

namespace vem {

std::pair<int, int> monomial_exponents(int index) {
  int d = 0;
  while (monomial_count(d) <= index) ++d;
  const int ay = index - monomial_count(d - 1);
  return {d - ay, ay};
}

ScaledMonomials::ScaledMonomials(Point center, double scale, int degree)
    : center_(std::move(center)), scale_(scale), degree_(degree) {}

double ScaledMonomials::value(int index, const Point& x) const {
  const auto [ax, ay] = monomial_exponents(index);
  const Point s = (x - center_) / scale_;
  return std::pow(s.x(), ax) * std::pow(s.y(), ay);
}

Point ScaledMonomials::gradient(int index, const Point& x) const {
  const auto [ax, ay] = monomial_exponents(index);
  const Point s = (x - center_) / scale_;
  const double gx = ax == 0 ? 0.0 : ax * std::pow(s.x(), ax - 1) * std::pow(s.y(), ay);
  const double gy = ay == 0 ? 0.0 : ay * std::pow(s.x(), ax) * std::pow(s.y(), ay - 1);
  return Point(gx, gy) / scale_;
}

Eigen::VectorXd ScaledMonomials::values(const Point& x) const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v(i) = value(i, x);
  return v;
}

double legendre(int i, double t) {
  if (i == 0) return 1.0;
  double prev = 1.0, cur = t;
  for (int j = 2; j <= i; ++j) {
    const double next = ((2.0 * j - 1.0) * t * cur - (j - 1.0) * prev) / j;
    prev = cur;
    cur = next;
  }
  return cur;
}

double edge_polynomial(const EdgeGeometry& edge, int i, const Point& x) {
  if (i == 0) return 1.0;
  const Point& a = edge.param_begin();
  const Point& b = edge.param_end();
  const Point t = b - a;
  const double s = (x - a).dot(t) / t.squaredNorm();  // in [0, 1]
  return legendre(i, 2.0 * s - 1.0);
}

Eigen::VectorXd polygon_moments(const ElementGeometry& geom, int max_degree) {
  const ScaledMonomials mono(geom.center, geom.diameter, max_degree);
  const auto rule = polygon_rule(geom.vertices, geom.center, max_degree);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(mono.size());
  for (const auto& qp : rule) m += qp.w * mono.values(qp.x);
  return m;
}

namespace {

// int_E grad m_a . grad m_b from the moment table.
double gradient_product(const Eigen::VectorXd& moments, double h, int a, int b) {
  const auto [ax, ay] = monomial_exponents(a);
  const auto [bx, by] = monomial_exponents(b);
  double v = 0.0;
  if (ax > 0 && bx > 0) v += ax * bx * moments(monomial_index(ax + bx - 2, ay + by));
  if (ay > 0 && by > 0) v += ay * by * moments(monomial_index(ax + bx, ay + by - 2));
  return v / (h * h);
}

void check_order(int k) {
  if (k < 0) throw std::invalid_argument("polynomial order k must be >= 0");
}

}  // namespace

LocalElementOps compute_local_ops(const ElementGeometry& geom, int k, double sigma) {
  check_order(k);
  if (sigma < 0.0) throw std::invalid_argument("stability constant must be >= 0");

  LocalElementOps ops;
  ops.layout = DofLayout{k, geom.num_edges()};
  ops.sigma = sigma;
  const DofLayout& lay = ops.layout;
  const int ndof = lay.total();
  const int np = monomial_count(k);
  const int np1 = monomial_count(k + 1);
  const int npi = np1 - 1;
  const double h = geom.diameter;
  const ScaledMonomials mono(geom.center, h, k + 1);

  ops.moments = polygon_moments(geom, 2 * k + 2);
  const Eigen::VectorXd& mom = ops.moments;

  auto product_moment = [&](int a, int b) {
    const auto [ax, ay] = monomial_exponents(a);
    const auto [bx, by] = monomial_exponents(b);
    return mom(monomial_index(ax + bx, ay + by));
  };

  ops.H.resize(np, np);
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b) ops.H(a, b) = product_moment(a, b);

  // Boundary terms: int_dE (phi_j . n) m_a for |a| <= k+1. On side l the
  // normal trace of the edge basis function (l, i) is (2i+1)/|e| q^i.
  const int nquad = k + 2;
  Eigen::MatrixXd boundary = Eigen::MatrixXd::Zero(np1, ndof);
  ops.grad_dofs = Eigen::MatrixXd::Zero(ndof, npi);
  for (int l = 0; l < geom.num_edges(); ++l) {
    const EdgeGeometry& e = geom.edges[l];
    for (const auto& qp : segment_rule(e.start, e.end, nquad)) {
      const Eigen::VectorXd mv = mono.values(qp.x);
      for (int i = 0; i <= k; ++i) {
        const double q = edge_polynomial(e, i, qp.x);
        const int j = lay.edge_dof(l, i);
        boundary.col(j) += qp.w * (2.0 * i + 1.0) / e.length * q * mv;
        for (int a = 1; a < np1; ++a)
          ops.grad_dofs(j, a - 1) += qp.w * mono.gradient(a, qp.x).dot(e.normal) * q;
      }
    }
  }

  // int_E div(phi_j) m_a = -int_E phi_j . grad m_a + boundary term, where
  // the volume term is the internal dof itself for 1 <= |a| <= k.
  Eigen::MatrixXd div_moments = boundary.topRows(np);
  for (int s = 0; s < lay.internal_dofs(); ++s) div_moments(s + 1, lay.internal_dof(s)) -= 1.0;
  Eigen::LLT<Eigen::MatrixXd> hfac(ops.H);
  if (hfac.info() != Eigen::Success) throw std::runtime_error("polynomial mass matrix is singular");
  ops.D = hfac.solve(div_moments);
  ops.K = ops.D.transpose() * ops.H * ops.D;
  ops.K = 0.5 * (ops.K + ops.K.transpose()).eval();

  ops.G.resize(npi, npi);
  for (int a = 1; a < np1; ++a)
    for (int b = 1; b < np1; ++b) ops.G(a - 1, b - 1) = gradient_product(mom, h, a, b);

  Eigen::MatrixXd hext(npi, np);
  for (int a = 1; a < np1; ++a)
    for (int b = 0; b < np; ++b) hext(a - 1, b) = product_moment(a, b);
  ops.R = boundary.bottomRows(npi) - hext * ops.D;

  Eigen::LLT<Eigen::MatrixXd> gfac(ops.G);
  if (gfac.info() != Eigen::Success) throw std::runtime_error("gradient Gram matrix is singular");
  ops.pi_coeff = gfac.solve(ops.R);

  for (int s = 0; s < lay.internal_dofs(); ++s)
    ops.grad_dofs.row(lay.internal_dof(s)) = ops.G.row(s);
  ops.pi_dof = ops.grad_dofs * ops.pi_coeff;

  ops.S = stabilization_matrix(lay, sigma);
  const Eigen::MatrixXd complement = Eigen::MatrixXd::Identity(ndof, ndof) - ops.pi_dof;
  ops.B = ops.pi_coeff.transpose() * ops.G * ops.pi_coeff +
          complement.transpose() * ops.S * complement;
  ops.B = 0.5 * (ops.B + ops.B.transpose()).eval();
  return ops;
}

Eigen::MatrixXd divergence_matrix(const ElementGeometry& geom, int k) {
  return compute_local_ops(geom, k, 0.0).D;
}

Eigen::MatrixXd local_stiffness(const ElementGeometry& geom, int k) {
  return compute_local_ops(geom, k, 0.0).K;
}

ProjectorMatrices projector_matrices(const ElementGeometry& geom, int k) {
  auto ops = compute_local_ops(geom, k, 0.0);
  return {std::move(ops.pi_coeff), std::move(ops.pi_dof)};
}

Eigen::MatrixXd stabilization_matrix(const DofLayout& layout, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("stability constant must be >= 0");
  return sigma * Eigen::MatrixXd::Identity(layout.total(), layout.total());
}

Eigen::MatrixXd local_mass(const ElementGeometry& geom, int k, double sigma) {
  return compute_local_ops(geom, k, sigma).B;
}

Eigen::Matrix2Xd gradient_basis(const ElementGeometry& geom, int k, const Point& x) {
  const ScaledMonomials mono(geom.center, geom.diameter, k + 1);
  Eigen::Matrix2Xd g(2, mono.size() - 1);
  for (int a = 1; a < mono.size(); ++a) g.col(a - 1) = mono.gradient(a, x);
  return g;
}

}  // namespace vem
