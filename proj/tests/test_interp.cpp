#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "vem/element.hpp"
#include "vem/interp.hpp"

using namespace vem;

TEST_SUITE("interp") {
  TEST_CASE("eigenmode divergence matches a finite-difference oracle") {
    const auto w = AnalyticField::eigenmode(2, 3, 1.0, 1.1);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const double h = 1e-5;
    for (int i = 0; i < 20; ++i) {
      const Point x(u(rng), 1.1 * u(rng));
      const double fd = (w.value(x + Point(h, 0)).x() - w.value(x - Point(h, 0)).x() +
                         w.value(x + Point(0, h)).y() - w.value(x - Point(0, h)).y()) /
                        (2 * h);
      CHECK(std::abs(fd - w.divergence(x)) <= 1e-8 * std::abs(w.divergence(Point(0, 0))));
    }
    CHECK_THROWS_AS(AnalyticField::eigenmode(0, 0, 1, 1), std::invalid_argument);
    CHECK(AnalyticField::parse("w23", 1, 1.1).name == "w23");
    CHECK_THROWS_AS(AnalyticField::parse("bogus", 1, 1), std::invalid_argument);
  }

  TEST_CASE("constant field is reproduced") {
    const auto mesh = generate_rectangular(1, 1.1, 5);
    const auto f = AnalyticField::constant(Point(1, 0));
    const auto vi = interpolate(mesh, 0, f);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const double flux = mesh.edge_normal(e).x() * mesh.edge_length(e);
      CHECK(std::abs(vi.values(vi.dofs.edge_offset[e]) - flux) <= 1e-14);
    }
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto ops = compute_local_ops(mesh.geometry(c), 0, 1.0);
      const Eigen::VectorXd l = vi.local(mesh, c);
      CHECK((ops.pi_dof * l - l).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((ops.D * l).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(commuting_residual(mesh, 0, f).max_residual <= 1e-12);
  }

  TEST_CASE("divergence-free gradient, k = 0") {
    const auto f = AnalyticField::parse("saddle", 1, 1.1);
    for (auto fam : {MeshFamily::triangular, MeshFamily::rectangular, MeshFamily::hexagonal}) {
      const auto mesh = generate_mesh(fam, 1, 1.1, 6);
      const auto rep = commuting_residual(mesh, 0, f);
      CHECK(rep.max_residual <= 1e-12);
      for (double d : rep.div_interp) CHECK(d <= 1e-12);
    }
  }

  TEST_CASE("eigenmode dofs against a fine quadrature oracle") {
    const auto mesh = generate_rectangular(1, 1.1, 8);
    const auto w = AnalyticField::eigenmode(1, 1, 1.0, 1.1);
    const auto vi = interpolate(mesh, 0, w);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const Point a = mesh.vertices()[mesh.edges()[e].a];
      const Point b = mesh.vertices()[mesh.edges()[e].b];
      // composite midpoint-free oracle: 200 panels of 4-point Gauss
      double flux = 0;
      for (int p = 0; p < 200; ++p)
        for (const auto& qp : segment_rule(a + (b - a) * p / 200.0, a + (b - a) * (p + 1) / 200.0, 4))
          flux += qp.w * w.value(qp.x).dot(mesh.edge_normal(e));
      CHECK(std::abs(vi.values(vi.dofs.edge_offset[e]) - flux) <= 1e-10);
    }
  }

  TEST_CASE("polynomial gradients interpolate exactly, k = 0, 1, 2") {
    const auto mesh = generate_hexagonal(1, 1.1, 4);
    for (int k = 0; k <= 2; ++k)
      for (int deg = 1; deg <= k + 1; ++deg)
        for (int ax = 0; ax <= deg; ++ax) {
          const auto f = AnalyticField::monomial_gradient(ax, deg - ax, Point(0.3, 0.4), 0.7);
          const auto rep = commuting_residual(mesh, k, f);
          CHECK(rep.max_residual <= 1e-10);
          const auto vi = interpolate(mesh, k, f);
          for (int c = 0; c < mesh.num_cells(); ++c) {
            const auto g = mesh.geometry(c);
            const auto ops = compute_local_ops(g, k, 1.0);
            const Eigen::VectorXd coeff = ops.pi_coeff * vi.local(mesh, c);
            double err = 0;
            for (const auto& qp : polygon_rule(g.vertices, g.center, 2 * k + 4))
              err += qp.w * (f.value(qp.x) - gradient_basis(g, k, qp.x) * coeff).squaredNorm();
            CHECK(std::sqrt(std::max(0.0, err)) <= 1e-10);
          }
        }
  }

  TEST_CASE("commuting diagram for eigenmodes") {
    const auto w11 = AnalyticField::eigenmode(1, 1, 1, 1.1);
    CHECK(commuting_residual(generate_rectangular(1, 1.1, 8), 0, w11).max_residual <= 1e-9);
    const auto w23 = AnalyticField::eigenmode(2, 3, 1, 1.1);
    const auto rep = commuting_residual(generate_hexagonal(1, 1.1, 8), 0, w23);
    CHECK(rep.max_residual <= 1e-8);
    for (std::size_t c = 0; c < rep.residual.size(); ++c)
      CHECK(rep.div_interp[c] <= rep.div_exact[c] + 1e-10);
    // also at k = 1
    CHECK(commuting_residual(generate_hexagonal(1, 1.1, 8), 1, w23).max_residual <= 1e-8);
  }

  TEST_CASE("virtual evaluation") {
    const auto sq = ElementGeometry::from_polygon(oracle::unit_square());
    // constant field: dofs (0, 1, 0, -1)
    Eigen::Vector4d c(0, 1, 0, -1);
    // reproduced exactly by the piecewise linear potential
    for (int r : {2, 3, 4}) {
      const VirtualFunction v(sq, 0, c, r);
      CHECK(v.l2_error([](const Point&) { return Point(1, 0); }) <= 1e-12);
    }
    const auto samples = virtual_evaluate(sq, 0, c, std::vector<Point>{{0.2, 0.3}, {0.9, 0.9}});
    CHECK((samples[0] - Point(1, 0)).norm() <= 1e-12);

    // bottom-edge basis function: cell average equals its projection (0, -1/2)
    const VirtualFunction phi(sq, 0, Eigen::Vector4d(1, 0, 0, 0), 4);
    CHECK((phi.average() - Point(0, -0.5)).norm() <= 1e-10);
    CHECK_THROWS_AS(phi.evaluate(Point(2, 2)), std::invalid_argument);
    CHECK_THROWS_AS(VirtualFunction(sq, 0, Eigen::Vector3d(1, 0, 0)), std::invalid_argument);

    // a quadratic potential on a hexagonal cell, k = 1: error falls like the sub-mesh size
    const auto mesh = generate_hexagonal(1, 1.1, 3);
    const auto g = mesh.geometry(mesh.num_cells() / 2);
    const auto f = AnalyticField::monomial_gradient(2, 0, g.center, g.diameter);
    const auto ops = compute_local_ops(g, 1, 1.0);
    const Eigen::VectorXd dofs = ops.grad_dofs.col(monomial_index(2, 0) - 1);
    std::vector<double> errs;
    for (int r : {2, 3, 4, 5}) errs.push_back(VirtualFunction(g, 1, dofs, r).l2_error(f.value));
    for (std::size_t i = 1; i < errs.size(); ++i) {
      const double rate = std::log2(errs[i - 1] / errs[i]);
      CHECK(std::abs(rate - 1.0) <= 0.15);
    }
  }

  TEST_CASE("interpolation rates") {
    const auto w11 = AnalyticField::eigenmode(1, 1, 1, 1.1);
    const auto rect = interpolation_rate_study(MeshFamily::rectangular, 1, 1.1, 0, w11, {4, 8, 16, 32});
    REQUIRE(rect.rate);
    CHECK(std::abs(*rect.rate - 1.0) <= 0.1);
    REQUIRE(rect.projected_rate);
    CHECK(std::abs(*rect.projected_rate - 1.0) <= 0.15);
    const auto hex = interpolation_rate_study(MeshFamily::hexagonal, 1, 1.1, 0, w11, {4, 8, 16, 32});
    REQUIRE(hex.rate);
    CHECK(std::abs(*hex.rate - 1.0) <= 0.15);

    // gradient of a linear potential: exact on every mesh
    const auto lin = AnalyticField::constant(Point(0.3, -1.2));
    const auto exact = interpolation_rate_study(MeshFamily::hexagonal, 1, 1.1, 0, lin, {4, 8});
    for (const auto& l : exact.levels) {
      CHECK(l.projected_error <= 1e-10);
      CHECK(l.commuting_residual <= 1e-10);
      CHECK(l.l2_error <= 1e-10);
    }
    CHECK_FALSE(exact.projected_rate.has_value());
  }

  TEST_CASE("log-log slope") {
    std::vector<double> x{1, 2, 4, 8}, y{3, 12, 48, 192};
    CHECK(log_log_slope(x, y) == doctest::Approx(2.0));
    CHECK_THROWS_AS(log_log_slope(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
  }
}
