#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "vem/assembly.hpp"

using namespace vem;

TEST_SUITE("assembly") {
  TEST_CASE("dof map") {
    CHECK(build_dof_map(generate_rectangular(1, 1.1, 1), 0).num_free == 0);
    CHECK(build_dof_map(oracle::two_squares(), 0).num_free == 1);
    CHECK(build_dof_map(generate_rectangular(1, 1.1, 2), 0).num_free == 4);

    const auto mesh = generate_hexagonal(1, 1.1, 6);
    for (int k = 0; k <= 2; ++k) {
      const auto map = build_dof_map(mesh, k);
      CHECK(map.num_free == mesh.num_internal_edges() * (k + 1) +
                                mesh.num_cells() * ((k + 1) * (k + 2) / 2 - 1));
      std::vector<int> touched(map.num_total, 0);
      for (int c = 0; c < mesh.num_cells(); ++c)
        for (const auto& d : map.cell_dofs(mesh, c)) ++touched[d.global];
      for (int i = 0; i < map.num_total; ++i) CHECK(touched[i] >= 1);
      for (int c = 0; c < mesh.num_cells(); ++c)
        for (int s = 0; s < (k + 1) * (k + 2) / 2 - 1; ++s) CHECK(touched[map.cell_offset[c] + s] == 1);
    }
    CHECK_THROWS_AS(build_dof_map(mesh, -1), std::invalid_argument);
  }

  TEST_CASE("two unit squares") {
    for (double sigma : {0.0, 1.0 / 16, 1.0, 3.5}) {
      const auto sys = assemble(oracle::two_squares(), 0, sigma);
      REQUIRE(sys.size() == 1);
      CHECK(sys.K.coeff(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
      CHECK(sys.M.coeff(0, 0) == doctest::Approx(0.5 + sigma).epsilon(1e-14));
    }
    CHECK(kernel_dimension_oracle(assemble(oracle::two_squares(), 0, 1.0)) == 0);
    CHECK_THROWS_AS(assemble(oracle::two_squares(), 0, -1.0), std::invalid_argument);
  }

  TEST_CASE("single cell scatter equals the local matrices") {
    const auto mesh = generate_hexagonal(1, 1, 2);
    for (int cell : {0, mesh.num_cells() - 1}) {
      std::vector<Point> poly = mesh.geometry(cell).vertices;
      std::vector<int> loop(poly.size());
      for (std::size_t i = 0; i < loop.size(); ++i) loop[i] = static_cast<int>(i);
      const PolygonalMesh one(poly, {loop});
      for (int k = 0; k <= 1; ++k) {
        const auto [K, M] = assemble_unconstrained(one, k, 1.0);
        const auto ops = compute_local_ops(one.geometry(0), k, 1.0);
        const auto map = build_dof_map(one, k);
        const auto local = map.cell_dofs(one, 0);
        for (std::size_t i = 0; i < local.size(); ++i)
          for (std::size_t j = 0; j < local.size(); ++j) {
            const double s = local[i].sign * local[j].sign;
            CHECK(K.coeff(local[i].global, local[j].global) == doctest::Approx(s * ops.K(i, j)));
            CHECK(M.coeff(local[i].global, local[j].global) == doctest::Approx(s * ops.B(i, j)));
          }
      }
    }
  }

  TEST_CASE("global symmetry, definiteness and rank") {
    for (auto fam : {MeshFamily::triangular, MeshFamily::rectangular, MeshFamily::hexagonal}) {
      const auto mesh = generate_mesh(fam, 1, 1.1, 6);
      const auto sys = assemble(mesh, 0, 1.0);
      const Eigen::MatrixXd K(sys.K), M(sys.M);
      CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * K.cwiseAbs().maxCoeff());
      CHECK((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * M.cwiseAbs().maxCoeff());
      CHECK(M.llt().info() == Eigen::Success);
      for (int i = 0; i < M.rows(); ++i) CHECK(M(i, i) > 0);
      // div maps onto zero-mean piecewise constants
      const int kernel = kernel_dimension_oracle(sys);
      CHECK(sys.size() - kernel == mesh.num_cells() - 1);
      CHECK(kernel == mesh.num_internal_vertices());
    }
    CHECK(kernel_dimension_oracle(assemble(generate_rectangular(1, 1.1, 2), 0, 1.0)) == 1);
    CHECK(kernel_dimension_oracle(assemble(generate_rectangular(1, 1.1, 4), 0, 1.0)) == 9);
  }

  TEST_CASE("thread count does not change the result") {
    const auto mesh = generate_hexagonal(1, 1.1, 12);
    const auto a = assemble(mesh, 1, 1.0, 1), b = assemble(mesh, 1, 1.0, 3);
    CHECK(Eigen::MatrixXd(a.K - b.K).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::MatrixXd(a.M - b.M).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("triangles: div-div matches Raviart-Thomas, mass does not") {
    for (int n : {2, 5, 8}) {
      const auto mesh = generate_triangular(1, 1.1, n);
      const auto sys = assemble(mesh, 0, 1.0);
      const auto [Krt, Mrt] = oracle::rt0_global(mesh);
      const Eigen::MatrixXd K(sys.K), M(sys.M);
      CHECK((K - Krt).cwiseAbs().maxCoeff() <= 1e-12 * Krt.cwiseAbs().maxCoeff());
      CHECK((M - Mrt).cwiseAbs().maxCoeff() > 1e-3 * Mrt.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("matrix market export") {
    const auto sys = assemble(generate_rectangular(1, 1.1, 3), 0, 1.0);
    const std::string path = "assembly_test_K.mtx";
    write_matrix_market(sys.K, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "%%MatrixMarket matrix coordinate real general");
    int r = 0, c = 0, nnz = 0;
    in >> r >> c >> nnz;
    CHECK(r == sys.size());
    CHECK(nnz == sys.K.nonZeros());
    std::remove(path.c_str());
    CHECK_THROWS(write_matrix_market(sys.K, "/nonexistent/dir/K.mtx"));
  }
}
