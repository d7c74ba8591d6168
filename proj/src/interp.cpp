#include "vem/interp.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "vem/element.hpp"

namespace vem {

namespace {
constexpr double pi = std::numbers::pi;
constexpr int kFieldDegree = 16;  // polygon quadrature degree for smooth fields
}  // namespace

AnalyticField AnalyticField::eigenmode(int n, int m, double a, double b) {
  if (n < 0 || m < 0 || n + m == 0) throw std::invalid_argument("eigenmode needs n + m >= 1");
  AnalyticField f;
  f.name = "w" + std::to_string(n) + std::to_string(m);
  f.mode = Mode{n, m, a, b};
  const double kx = n * pi / a, ky = m * pi / b;
  f.value = [=](const Point& x) {
    return Point(n / a * std::sin(kx * x.x()) * std::cos(ky * x.y()),
                 m / b * std::cos(kx * x.x()) * std::sin(ky * x.y()));
  };
  const double c = pi * ((n / a) * (n / a) + (m / b) * (m / b));
  f.divergence = [=](const Point& x) { return c * std::cos(kx * x.x()) * std::cos(ky * x.y()); };
  return f;
}

AnalyticField AnalyticField::constant(const Point& c) {
  AnalyticField f;
  f.name = "const";
  f.value = [c](const Point&) { return c; };
  f.divergence = [](const Point&) { return 0.0; };
  return f;
}

AnalyticField AnalyticField::monomial_gradient(int ax, int ay, const Point& center, double h) {
  AnalyticField f;
  f.name = "grad_m" + std::to_string(ax) + std::to_string(ay);
  auto p = [](double s, int e) { return e <= 0 ? (e == 0 ? 1.0 : 0.0) : std::pow(s, e); };
  f.value = [=](const Point& x) -> Point {
    const double sx = (x.x() - center.x()) / h, sy = (x.y() - center.y()) / h;
    return Point(ax * p(sx, ax - 1) * p(sy, ay), ay * p(sx, ax) * p(sy, ay - 1)) / h;
  };
  f.divergence = [=](const Point& x) {
    const double sx = (x.x() - center.x()) / h, sy = (x.y() - center.y()) / h;
    return (ax * (ax - 1) * p(sx, ax - 2) * p(sy, ay) + ay * (ay - 1) * p(sx, ax) * p(sy, ay - 2)) /
           (h * h);
  };
  return f;
}

AnalyticField AnalyticField::parse(const std::string& name, double a, double b) {
  if (name == "const") return constant(Point(1.0, 0.0));
  if (name == "saddle") {
    AnalyticField f;
    f.name = "saddle";  // grad((x^2 - y^2) / 2)
    f.value = [](const Point& x) { return Point(x.x(), -x.y()); };
    f.divergence = [](const Point&) { return 0.0; };
    return f;
  }
  if (name.size() == 3 && name[0] == 'w' && std::isdigit(name[1]) && std::isdigit(name[2]))
    return eigenmode(name[1] - '0', name[2] - '0', a, b);
  throw std::invalid_argument("unknown field '" + name + "'");
}

Eigen::VectorXd InterpolantDofs::local(const PolygonalMesh& mesh, int cell) const {
  const auto map = dofs.cell_dofs(mesh, cell);
  Eigen::VectorXd out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out(i) = map[i].sign * values(map[i].global);
  return out;
}

InterpolantDofs interpolate(const PolygonalMesh& mesh, int k, const AnalyticField& field,
                            int edge_points) {
  InterpolantDofs out;
  out.dofs = build_dof_map(mesh, k);
  out.values = Eigen::VectorXd::Zero(out.dofs.num_total);

  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Point& pa = mesh.vertices()[mesh.edges()[e].a];
    const Point& pb = mesh.vertices()[mesh.edges()[e].b];
    const Point normal = mesh.edge_normal(e);
    auto moments = [&](int npts, Eigen::VectorXd& mag) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(k + 1);
      mag = Eigen::VectorXd::Zero(k + 1);
      for (const auto& qp : segment_rule(pa, pb, npts)) {
        const double t = 2.0 * (qp.x - pa).dot(pb - pa) / (pb - pa).squaredNorm() - 1.0;
        const double vn = field.value(qp.x).dot(normal);
        for (int i = 0; i <= k; ++i) {
          v(i) += qp.w * vn * legendre(i, t);
          mag(i) += std::abs(qp.w * vn);
        }
      }
      return v;
    };
    int npts = std::max(edge_points, k + 2);
    Eigen::VectorXd mag;
    Eigen::VectorXd coarse = moments(npts, mag);
    Eigen::VectorXd fine = moments(2 * npts, mag);
    while ((fine - coarse).cwiseAbs().maxCoeff() > 1e-14 * (mag.maxCoeff() + 1e-300) &&
           npts < 256) {
      npts *= 2;
      coarse = fine;
      fine = moments(2 * npts, mag);
    }
    out.values.segment(out.dofs.edge_offset[e], k + 1) = fine;
  }

  const int internal = monomial_count(k) - 1;
  if (internal > 0) {
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const ElementGeometry geom = mesh.geometry(c);
      const ScaledMonomials mono(geom.center, geom.diameter, k);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(internal);
      for (const auto& qp : polygon_rule(geom.vertices, geom.center, kFieldDegree)) {
        const Point f = field.value(qp.x);
        for (int s = 0; s < internal; ++s) v(s) += qp.w * f.dot(mono.gradient(s + 1, qp.x));
      }
      out.values.segment(out.dofs.cell_offset[c], internal) = v;
    }
  }
  return out;
}

CommutingReport commuting_residual(const PolygonalMesh& mesh, int k, const AnalyticField& field,
                                   const InterpolantDofs& interpolant) {
  CommutingReport rep;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const ElementGeometry geom = mesh.geometry(c);
    const auto ops = compute_local_ops(geom, k, 0.0);
    const Eigen::VectorXd div_vi = ops.D * interpolant.local(mesh, c);

    const ScaledMonomials mono(geom.center, geom.diameter, k);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mono.size());
    double div_sq = 0.0;
    for (const auto& qp : polygon_rule(geom.vertices, geom.center, kFieldDegree)) {
      const double d = field.divergence(qp.x);
      rhs += qp.w * d * mono.values(qp.x);
      div_sq += qp.w * d * d;
    }
    const Eigen::VectorXd proj = ops.H.llt().solve(rhs);
    const Eigen::VectorXd diff = div_vi - proj;
    const double res = std::sqrt(std::max(0.0, diff.dot(ops.H * diff)));
    rep.residual.push_back(res);
    rep.div_interp.push_back(std::sqrt(std::max(0.0, div_vi.dot(ops.H * div_vi))));
    rep.div_exact.push_back(std::sqrt(std::max(0.0, div_sq)));
    rep.max_residual = std::max(rep.max_residual, res);
  }
  return rep;
}

CommutingReport commuting_residual(const PolygonalMesh& mesh, int k, const AnalyticField& field) {
  return commuting_residual(mesh, k, field, interpolate(mesh, k, field));
}

// ---------------------------------------------------------------------------
// Virtual function evaluation
// ---------------------------------------------------------------------------

namespace {

double cross2(const Point& u, const Point& v) { return u.x() * v.y() - u.y() * v.x(); }

Point fan_center(const ElementGeometry& geom) {
  const auto& v = geom.vertices;
  const std::size_t n = v.size();
  const double tol = 1e-10 * geom.diameter * geom.diameter;
  bool ok = true;
  for (std::size_t i = 0; i < n && ok; ++i)
    ok = cross2(v[i] - geom.center, v[(i + 1) % n] - geom.center) > tol;
  if (ok) return geom.center;
  Point c;
  double r = 0.0;
  if (!chebyshev_center(v, c, r))
    throw std::runtime_error("virtual evaluation needs a star-shaped element");
  return c;
}

}  // namespace

VirtualFunction::VirtualFunction(const ElementGeometry& geom, int k,
                                 const Eigen::VectorXd& local_dofs, int refinement) {
  const auto ops = compute_local_ops(geom, k, 0.0);
  if (local_dofs.size() != ops.layout.total())
    throw std::invalid_argument("virtual function: dof vector size mismatch");
  if (refinement < 0 || refinement > 8) throw std::invalid_argument("refinement must be in [0, 8]");

  const Eigen::VectorXd div_coeff = ops.D * local_dofs;
  const ScaledMonomials mono(geom.center, geom.diameter, k);
  auto source = [&](const Point& x) { return div_coeff.dot(mono.values(x)); };

  const Point c = fan_center(geom);
  const auto& poly = geom.vertices;
  const int nv = static_cast<int>(poly.size());
  const int R = 1 << refinement;

  nodes_.push_back(c);
  for (int m = 0; m < nv; ++m)
    for (int s = 1; s <= R; ++s) nodes_.push_back(c + (double(s) / R) * (poly[m] - c));
  auto ray = [&](int m, int s) { return 1 + (m % nv) * R + (s - 1); };

  struct BoundarySegment {
    int a, b, edge;
  };
  std::vector<BoundarySegment> boundary;
  for (int l = 0; l < nv; ++l) {
    const Point& p = poly[l];
    const Point& q = poly[(l + 1) % nv];
    std::vector<int> id((R + 1) * (R + 1), -1);
    auto at = [&](int i, int j) -> int& { return id[i * (R + 1) + j]; };
    for (int i = 0; i <= R; ++i)
      for (int j = 0; i + j <= R; ++j) {
        if (i == 0 && j == 0) at(i, j) = 0;
        else if (j == 0) at(i, j) = ray(l, i);
        else if (i == 0) at(i, j) = ray(l + 1, j);
        else {
          at(i, j) = static_cast<int>(nodes_.size());
          nodes_.push_back(c + (double(i) / R) * (p - c) + (double(j) / R) * (q - c));
        }
      }
    for (int i = 0; i < R; ++i)
      for (int j = 0; i + j < R; ++j) {
        triangles_.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
        if (i + j <= R - 2) triangles_.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
      }
    for (int i = R; i > 0; --i) boundary.push_back({at(i, R - i), at(i - 1, R - i + 1), l});
  }

  const int nn = static_cast<int>(nodes_.size());
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nn);
  std::vector<std::array<Point, 3>> bary_grads(triangles_.size());
  areas_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    const Point& x0 = nodes_[tri[0]];
    const Point& x1 = nodes_[tri[1]];
    const Point& x2 = nodes_[tri[2]];
    const double two_area = cross2(x1 - x0, x2 - x0);
    areas_[t] = 0.5 * two_area;
    auto rot = [](const Point& e) { return Point(-e.y(), e.x()); };
    // grad lambda_i = rot(edge opposite i) / (2|T|), edges taken CCW
    bary_grads[t] = {rot(x2 - x1) / two_area, rot(x0 - x2) / two_area, rot(x1 - x0) / two_area};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.emplace_back(tri[i], tri[j], areas_[t] * bary_grads[t][i].dot(bary_grads[t][j]));
    for (const auto& qp : triangle_rule(x0, x1, x2, k + 1)) {
      const double f = source(qp.x);
      const double l1 = bary_grads[t][1].dot(qp.x - x0);
      const double l2 = bary_grads[t][2].dot(qp.x - x0);
      const double lam[3] = {1.0 - l1 - l2, l1, l2};
      for (int i = 0; i < 3; ++i) rhs(tri[i]) -= qp.w * f * lam[i];
    }
  }
  for (const auto& seg : boundary) {
    const EdgeGeometry& e = geom.edges[seg.edge];
    const Point& xa = nodes_[seg.a];
    const Point& xb = nodes_[seg.b];
    for (const auto& qp : segment_rule(xa, xb, k + 2)) {
      double g = 0.0;
      for (int i = 0; i <= k; ++i)
        g += local_dofs(ops.layout.edge_dof(seg.edge, i)) * (2.0 * i + 1.0) / e.length *
             edge_polynomial(e, i, qp.x);
      const double s = (qp.x - xa).norm() / (xb - xa).norm();
      rhs(seg.a) += qp.w * g * (1.0 - s);
      rhs(seg.b) += qp.w * g * s;
    }
  }
  const double scale = rhs.cwiseAbs().sum();
  if (std::abs(rhs.sum()) > 1e-10 * std::max(scale, 1e-300))
    throw std::runtime_error("virtual function: incompatible Neumann data");

  // Pin the fan centre (node 0); only the gradient is needed.
  SparseMatrix A(nn, nn);
  A.setFromTriplets(trips.begin(), trips.end());
  SparseMatrix Ar = A.bottomRightCorner(nn - 1, nn - 1);
  Eigen::SimplicialLLT<SparseMatrix> llt(Ar);
  if (llt.info() != Eigen::Success) throw std::runtime_error("virtual function: local solve failed");
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(nn);
  gamma.tail(nn - 1) = llt.solve(rhs.tail(nn - 1));

  gradients_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    Point g = Point::Zero();
    for (int i = 0; i < 3; ++i) g += gamma(triangles_[t][i]) * bary_grads[t][i];
    gradients_[t] = g;
  }
}

Point VirtualFunction::evaluate(const Point& x) const {
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const Point& x0 = nodes_[triangles_[t][0]];
    const Point& x1 = nodes_[triangles_[t][1]];
    const Point& x2 = nodes_[triangles_[t][2]];
    const double two_area = 2.0 * areas_[t];
    const double l1 = cross2(x - x0, x2 - x0) / -two_area;
    const double l2 = cross2(x1 - x0, x - x0) / two_area;
    const double m = std::min({1.0 - l1 - l2, l1, l2});
    if (m > best_min) {
      best_min = m;
      best = static_cast<int>(t);
    }
  }
  if (best < 0 || best_min < -1e-8) throw std::invalid_argument("point outside the element");
  return gradients_[best];
}

std::vector<Point> VirtualFunction::evaluate(std::span<const Point> points) const {
  std::vector<Point> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(evaluate(p));
  return out;
}

Point VirtualFunction::average() const {
  Point s = Point::Zero();
  double area = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    s += areas_[t] * gradients_[t];
    area += areas_[t];
  }
  return s / area;
}

double VirtualFunction::l2_error(const std::function<Point(const Point&)>& f) const {
  double err = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (const auto& qp : triangle_rule(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]], 6))
      err += qp.w * (f(qp.x) - gradients_[t]).squaredNorm();
  }
  return std::sqrt(std::max(0.0, err));
}

double VirtualFunction::l2_norm() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) s += areas_[t] * gradients_[t].squaredNorm();
  return std::sqrt(s);
}

std::vector<Point> virtual_evaluate(const ElementGeometry& geom, int k,
                                    const Eigen::VectorXd& local_dofs,
                                    std::span<const Point> points, int refinement) {
  return VirtualFunction(geom, k, local_dofs, refinement).evaluate(points);
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("log_log_slope needs two or more matching samples");
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

RateReport interpolation_rate_study(MeshFamily family, double a, double b, int k,
                                    const AnalyticField& field, const std::vector<int>& ns,
                                    int refinement) {
  RateReport rep;
  for (int n : ns) {
    const PolygonalMesh mesh = generate_mesh(family, a, b, n);
    const InterpolantDofs vi = interpolate(mesh, k, field);
    RateLevel level;
    level.n = n;
    level.h = mesh.mesh_size();
    level.commuting_residual = commuting_residual(mesh, k, field, vi).max_residual;
    double err = 0.0, perr = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const ElementGeometry geom = mesh.geometry(c);
      const Eigen::VectorXd local = vi.local(mesh, c);
      const VirtualFunction vh(geom, k, local, refinement);
      const double e = vh.l2_error(field.value);
      err += e * e;

      const auto ops = compute_local_ops(geom, k, 0.0);
      const Eigen::VectorXd coeff = ops.pi_coeff * local;
      for (const auto& qp : polygon_rule(geom.vertices, geom.center, kFieldDegree)) {
        const Point proj = gradient_basis(geom, k, qp.x) * coeff;
        perr += qp.w * (field.value(qp.x) - proj).squaredNorm();
      }
    }
    level.l2_error = std::sqrt(err);
    level.projected_error = std::sqrt(std::max(0.0, perr));
    rep.levels.push_back(level);
  }
  if (rep.levels.size() >= 2) {
    std::vector<double> h, e, p;
    for (const auto& l : rep.levels) {
      h.push_back(l.h);
      e.push_back(l.l2_error);
      p.push_back(l.projected_error);
    }
    const bool tiny = *std::max_element(e.begin(), e.end()) < 1e-12;
    if (!tiny) rep.rate = log_log_slope(h, e);
    if (*std::min_element(p.begin(), p.end()) > 1e-13) rep.projected_rate = log_log_slope(h, p);
  }
  return rep;
}

}  // namespace vem
