#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vem/mesh.hpp"

using namespace vem;

namespace {

double total_area(const PolygonalMesh& mesh) {
  double s = 0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    std::vector<Point> poly;
    for (int v : mesh.cells()[c]) poly.push_back(mesh.vertices()[v]);
    s += oracle::polygon_area(poly);
  }
  return s;
}

void check_topology(const PolygonalMesh& mesh) {
  std::vector<int> incidence(mesh.num_edges(), 0);
  std::vector<int> sign_sum(mesh.num_edges(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (const auto& ce : mesh.cell_edges(c)) {
      ++incidence[ce.edge];
      sign_sum[ce.edge] += ce.sign;
    }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    REQUIRE(mesh.edges()[e].a < mesh.edges()[e].b);
    REQUIRE((incidence[e] == 1 || incidence[e] == 2));
    REQUIRE(mesh.is_boundary(e) == (incidence[e] == 1));
    if (incidence[e] == 2) REQUIRE(sign_sum[e] == 0);
  }
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto g = mesh.geometry(c);
    REQUIRE(g.area > 0);
    // Sign convention: +1 exactly when the global normal is outward.
    for (std::size_t l = 0; l < g.edges.size(); ++l) {
      const auto& ce = mesh.cell_edges(c)[l];
      REQUIRE(mesh.edge_normal(ce.edge).dot(g.edges[l].normal) == doctest::Approx(ce.sign));
    }
  }
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("rectangular counts") {
    auto m1 = generate_rectangular(1, 1.1, 1);
    CHECK(m1.num_cells() == 1);
    CHECK(m1.num_edges() == 4);
    CHECK(m1.num_internal_edges() == 0);

    auto m2 = generate_rectangular(1, 1.1, 2);
    CHECK(m2.num_cells() == 4);
    CHECK(m2.num_edges() == 12);
    CHECK(m2.num_internal_edges() == 4);

    CHECK(generate_rectangular(1, 1.1, 9).num_cells() == 81);
    for (int n : {1, 3, 7, 16, 33}) {
      auto m = generate_rectangular(1, 1.1, n);
      CHECK(m.num_cells() == n * n);
      CHECK(m.num_edges() == 2 * n * (n + 1));
      CHECK(m.num_internal_edges() == 2 * n * (n - 1));
    }
  }

  TEST_CASE("triangular counts") {
    auto m1 = generate_triangular(1, 1, 1);
    CHECK(m1.num_cells() == 2);
    CHECK(m1.num_internal_edges() == 1);
    auto m2 = generate_triangular(1, 1.1, 2);
    CHECK(m2.num_cells() == 8);
    CHECK(m2.num_edges() == 16);
    CHECK(m2.num_internal_edges() == 8);
    CHECK(generate_triangular(1, 1.1, 19).num_cells() == 722);
  }

  TEST_CASE("hexagonal construction") {
    CHECK_THROWS_AS(generate_hexagonal(1, 1, 1), std::invalid_argument);
    for (int n : {2, 3, 9, 19}) {
      auto m = generate_hexagonal(1, 1.1, n);
      CHECK(total_area(m) == doctest::Approx(1.1).epsilon(1e-12));
      int hexagons = 0;
      for (const auto& c : m.cells()) hexagons += c.size() == 6;
      if (n >= 3) CHECK(hexagons > 0);
      // Every cell convex.
      for (int c = 0; c < m.num_cells(); ++c) {
        const auto& v = m.geometry(c).vertices;
        for (std::size_t i = 0; i < v.size(); ++i)
          CHECK(oracle::cross(v[(i + 1) % v.size()] - v[i], v[(i + 2) % v.size()] - v[(i + 1) % v.size()]) > 0);
      }
    }
  }

  TEST_CASE("invalid requests") {
    CHECK_THROWS_AS(generate_rectangular(1, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate_triangular(-1, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(generate_rectangular(1, 0, 2), std::invalid_argument);
    // Clockwise cell and a bow-tie are rejected.
    CHECK_THROWS(PolygonalMesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 3, 2, 1}}));
    CHECK_THROWS(PolygonalMesh({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {{0, 1, 2, 3}}));
  }

  TEST_CASE("topology and area invariants on all families") {
    for (auto fam : {MeshFamily::triangular, MeshFamily::rectangular, MeshFamily::hexagonal})
      for (int n : {2, 5, 16, 64, 128}) {
        CAPTURE(to_string(fam));
        CAPTURE(n);
        auto m = generate_mesh(fam, 1, 1.1, n);
        check_topology(m);
        CHECK(std::abs(total_area(m) - 1.1) <= 1e-12 * 1.1);
      }
  }

  TEST_CASE("element geometry") {
    auto m = generate_hexagonal(1, 1.1, 9);
    for (int c = 0; c < m.num_cells(); ++c) {
      const auto g = m.geometry(c);
      CHECK(g.diameter == doctest::Approx(oracle::polygon_diameter(g.vertices)).epsilon(1e-14));
      CHECK(g.area == doctest::Approx(oracle::polygon_area(g.vertices)).epsilon(1e-13));
      const Point cen = oracle::polygon_centroid(g.vertices);
      CHECK((g.center - cen).norm() <= 1e-12 * g.diameter);
      Point sum = Point::Zero();
      for (const auto& e : g.edges) {
        CHECK(e.normal.norm() == doctest::Approx(1.0).epsilon(1e-14));
        sum += e.length * e.normal;
      }
      CHECK(sum.norm() <= 1e-12 * g.diameter);
    }
  }

  TEST_CASE("quality of simple shapes") {
    const auto sq = oracle::unit_square();
    const auto q = cell_quality(sq);
    CHECK(q.min_edge_to_diameter == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(q.star_center_found);
    CHECK(q.star_radius_to_diameter == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK((q.star_center - Point(0.5, 0.5)).norm() < 1e-9);

    std::vector<Point> hex;
    for (int i = 0; i < 6; ++i) hex.push_back(0.5 * Point(std::cos(i * M_PI / 3), std::sin(i * M_PI / 3)));
    const auto qh = cell_quality(hex);
    CHECK(qh.min_edge_to_diameter == doctest::Approx(0.5).epsilon(1e-12));
    // inscribed radius of a regular hexagon with circumradius 1/2
    CHECK(qh.star_radius_to_diameter == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-9));

    // A right triangle: inradius (a + b - c) / 2.
    std::vector<Point> tri{{0, 0}, {3, 0}, {0, 4}};
    Point c;
    double r = 0;
    REQUIRE(chebyshev_center(tri, c, r));
    CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((c - Point(1, 1)).norm() < 1e-9);

    // An L-shape is star-shaped w.r.t. the corner square; a deep comb is not.
    std::vector<Point> ell{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    CHECK(cell_quality(ell).star_center_found);
    std::vector<Point> comb{{0, 0}, {5, 0}, {5, 3}, {4, 3}, {4, 1}, {3, 1}, {3, 3},
                            {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}};
    CHECK_FALSE(cell_quality(comb).star_center_found);
  }

  TEST_CASE("mesh quality report") {
    auto rect = check_mesh_assumptions(generate_rectangular(1, 1.1, 7));
    CHECK(rect.star_shaped);
    for (const auto& q : rect.cells) {
      CHECK(q.min_edge_to_diameter == doctest::Approx(rect.cells[0].min_edge_to_diameter).epsilon(1e-12));
      CHECK(q.star_radius_to_diameter == doctest::Approx(rect.cells[0].star_radius_to_diameter).epsilon(1e-8));
    }
    for (auto fam : {MeshFamily::triangular, MeshFamily::hexagonal}) {
      auto rep = check_mesh_assumptions(generate_mesh(fam, 1, 1.1, 16));
      CHECK(rep.star_shaped);
      CHECK(rep.c_t > 0.05);
    }
  }

  TEST_CASE("json round trip") {
    auto m = generate_hexagonal(1, 1.1, 5);
    auto doc = mesh_to_json(m);
    auto back = mesh_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(back.num_cells() == m.num_cells());
    CHECK(back.num_edges() == m.num_edges());
    CHECK(back.vertices() == m.vertices());
    CHECK_THROWS(mesh_from_json(nlohmann::json{{"vertices", {{0, 0}}}}));
  }
}
