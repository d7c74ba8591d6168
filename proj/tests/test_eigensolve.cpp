#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "vem/eigensolve.hpp"
#include "vem/element.hpp"

using namespace vem;

namespace {
constexpr double pi2 = std::numbers::pi * std::numbers::pi;
}

TEST_SUITE("eigensolve") {
  TEST_CASE("two unit squares in closed form") {
    EigenOptions o;
    o.method = EigenMethod::dense;
    auto s1 = solve(assemble(oracle::two_squares(), 0, 1.0), o);
    REQUIRE(s1.eigenvalues.size() == 1);
    CHECK(s1.eigenvalues[0] == doctest::Approx(4.0 / 3).epsilon(1e-12));
    auto s0 = solve(assemble(oracle::two_squares(), 0, 0.0), o);
    REQUIRE(s0.eigenvalues.size() == 1);
    CHECK(s0.eigenvalues[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(s0.singular_mass == false);  // 1x1 M = 1/2 is still definite

    o.method = EigenMethod::shift_invert;
    o.shift = 1.0;
    o.modes = 1;
    auto si = solve(assemble(oracle::two_squares(), 0, 1.0), o);
    REQUIRE(si.eigenvalues.size() == 1);
    CHECK(si.eigenvalues[0] == doctest::Approx(4.0 / 3).epsilon(1e-12));
  }

  TEST_CASE("pressure of the two-square mode") {
    EigenOptions o;
    o.method = EigenMethod::dense;
    const auto sys = assemble(oracle::two_squares(), 0, 1.0);
    const auto p = pressure_field(sys, Eigen::VectorXd::Ones(1));
    REQUIRE(p.size() == 2);
    // global normal of the shared edge (1,0)-(1,1) points to -x: out of the right cell
    CHECK(p[0](0) == doctest::Approx(1.0));
    CHECK(p[1](0) == doctest::Approx(-1.0));
  }

  TEST_CASE("dense spectrum structure") {
    for (auto fam : {MeshFamily::rectangular, MeshFamily::hexagonal}) {
      const auto sys = assemble(generate_mesh(fam, 1, 1.1, 6), 0, 1.0);
      EigenOptions o;
      o.method = EigenMethod::dense;
      o.modes = 6;
      const auto s = solve(sys, o);
      REQUIRE(s.kernel_multiplicity.has_value());
      CHECK(*s.kernel_multiplicity == kernel_dimension_oracle(sys));
      CHECK(s.kernel_max_abs <= 1e-9 * s.lambda_max);
      CHECK(static_cast<int>(s.all_eigenvalues.size()) == sys.size());
      const Eigen::MatrixXd M(sys.M);
      const Eigen::MatrixXd G = s.eigenvectors.transpose() * M * s.eigenvectors;
      CHECK((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() <= 1e-8);
      for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        CHECK(s.eigenvalues[i] > s.zero_threshold);
        if (i > 0) CHECK(s.eigenvalues[i] >= s.eigenvalues[i - 1]);
        CHECK(s.residuals[i] <= 1e-8);
        // first entry of (near) largest magnitude is positive
        const Eigen::VectorXd col = s.eigenvectors.col(i);
        const double big = col.cwiseAbs().maxCoeff();
        Eigen::Index first = 0;
        while (std::abs(col(first)) < (1.0 - 1e-6) * big) ++first;
        CHECK(col(first) > 0);
      }
      // kernel vectors are divergence free
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(sys.K), M);
      const Eigen::VectorXd kv = es.eigenvectors().col(0);
      const Eigen::MatrixXd K(sys.K);
      CHECK((K * kv).norm() <= 1e-10 * K.norm() * kv.norm());
      for (const auto& p : pressure_field(sys, kv)) CHECK(p.cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("table values on rectangles") {
    EigenOptions o;
    o.method = EigenMethod::dense;
    o.modes = 1;
    const auto s = solve(assemble(generate_rectangular(1, 1.1, 16), 0, 1.0), o);
    CHECK(std::abs(s.scaled()[0] - 0.8174) <= 5e-5);
    const auto s8 = solve(assemble(generate_rectangular(1, 1.1, 8), 0, 1.0), o);
    CHECK(std::abs(s8.scaled()[0] - 0.7912) <= 5e-5);
  }

  TEST_CASE("singular mass path (sigma = 0)") {
    const auto sys = assemble(generate_rectangular(1, 1.1, 8), 0, 0.0);
    EigenOptions o;
    o.modes = 1;
    const auto s = solve(sys, o);
    CHECK(s.method == "dense");
    CHECK(std::abs(s.scaled()[0] - 0.8482) <= 5e-5);
    CHECK(s.residuals[0] <= 1e-8);
    o.method = EigenMethod::shift_invert;
    CHECK_THROWS_AS(solve(sys, o), std::invalid_argument);
  }

  TEST_CASE("dense and shift-invert agree") {
    for (auto fam : {MeshFamily::rectangular, MeshFamily::triangular, MeshFamily::hexagonal}) {
      const auto sys = assemble(generate_mesh(fam, 1, 1.1, 12), 0, 1.0);
      EigenOptions o;
      o.modes = 5;
      o.method = EigenMethod::dense;
      const auto d = solve(sys, o);
      o.method = EigenMethod::shift_invert;
      o.compute_kernel = true;
      const auto si = solve(sys, o);
      REQUIRE(si.eigenvalues.size() == 5);
      for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(si.eigenvalues[i] - d.eigenvalues[i]) <= 1e-8 * d.eigenvalues[i]);
        CHECK(si.residuals[i] <= 1e-8);
        // same eigenvector up to the sign convention
        CHECK((si.eigenvectors.col(i) - d.eigenvectors.col(i)).cwiseAbs().maxCoeff() <= 1e-6);
      }
      CHECK(si.kernel_multiplicity == d.kernel_multiplicity);
    }
  }

  TEST_CASE("shift-invert options and errors") {
    const auto sys = assemble(generate_rectangular(1, 1.1, 10), 0, 1.0);
    EigenOptions o;
    o.method = EigenMethod::shift_invert;
    o.modes = 3;
    const auto s = solve(sys, o);
    CHECK_FALSE(s.kernel_multiplicity.has_value());
    // a shift inside the spectrum returns the modes nearest to it
    o.shift = 2.0 * pi2;
    o.modes = 1;
    const auto mid = solve(sys, o);
    CHECK(std::abs(mid.scaled()[0] - 1.8) < 0.1);
    o.modes = 0;
    CHECK_THROWS_AS(solve(sys, o), std::invalid_argument);
    CHECK(parse_method("si") == EigenMethod::shift_invert);
    CHECK_THROWS_AS(parse_method("qz"), std::invalid_argument);
  }

  TEST_CASE("first-mode pressure follows the analytic profile") {
    const double b = 1.1;
    const auto mesh = generate_rectangular(1, b, 27);
    const auto sys = assemble(mesh, 0, 1.0);
    EigenOptions o;
    o.modes = 1;
    o.method = EigenMethod::shift_invert;
    const auto s = solve(sys, o);
    const auto p = pressure_field(sys, s.eigenvectors.col(0));
    // exact p = -div w_01 = -(pi/b^2) cos(pi y / b), compared after the best scaling
    double ph_ph = 0, ph_p = 0, p_p = 0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto g = mesh.geometry(c);
      double mean = 0;
      for (const auto& qp : polygon_rule(g.vertices, g.center, 8))
        mean += qp.w * -(std::numbers::pi / (b * b)) * std::cos(std::numbers::pi * qp.x.y() / b);
      mean /= g.area;
      ph_ph += g.area * p[c](0) * p[c](0);
      ph_p += g.area * p[c](0) * mean;
      p_p += g.area * mean * mean;
    }
    const double alpha = ph_p / ph_ph;
    const double rel = std::sqrt(std::max(0.0, alpha * alpha * ph_ph - 2 * alpha * ph_p + p_p) / p_p);
    CHECK(rel < 0.1);
  }
}
