#include <chrono>

#include "doctest.h"
#include "oracles.hpp"
#include "sparcc/fredholm.hpp"
#include "sparcc/nuisance.hpp"
#include "sparcc/outcome.hpp"

using namespace sparcc;

namespace {

struct Setting {
  ExactDensity eta1{NuisanceTarget::x_given_z, {0.0, 1.0}, {{1.5, 2.5}, {2.5, 1.5}}};
  ExactDensity eta2{NuisanceTarget::c_given_z, {0.0, 1.0}, {{3.5, 2.5}, {3.5, 2.5}}};
  NormalOutcomeModel outcome;
  RegressionParams params;

  Setting() {
    params.beta0 = 1.0;
    params.beta1 = 10.0;
    params.beta2 = 2.0;
    params.log_sigma2 = 0.0;
  }

  QuadratureGrid grid(int m) const { return make_grid(eta1, {0.0, 1.0}, m, 0.03, 0.995); }
};

}  // namespace

TEST_SUITE("fredholm") {
  TEST_CASE("assembled system matches brute-force dense quadrature") {
    Setting s;
    const auto grid = s.grid(10);
    for (int level : {0, 1}) {
      const FredholmSystem sys = build_system(grid, level, s.params, s.eta2, s.outcome, 20);
      const oracle::DenseSystem ref = oracle::dense_system(grid, level, s.params, s.eta2, s.outcome, 600);

      CHECK((sys.d - ref.d).cwiseAbs().maxCoeff() < 1e-12);
      // the production kernel is symmetrized; compare against the symmetrized
      // brute-force one so both sides carry the same convention
      const Eigen::MatrixXd ref_sym = 0.5 * (ref.m_kernel + ref.m_kernel.transpose());
      CHECK((sys.m_kernel - ref_sym).cwiseAbs().maxCoeff() < 1e-5);
      CHECK((sys.b - ref.b).cwiseAbs().maxCoeff() < 1e-5);
    }
  }

  TEST_CASE("solution plugs back into both the discrete and the dense system") {
    Setting s;
    const auto grid = s.grid(12);
    const FredholmSystem sys = build_system(grid, 0, s.params, s.eta2, s.outcome, 20);
    const FredholmSolution sol = solve(sys);

    CHECK(sol.residual_norm < 1e-8);
    const oracle::DenseSystem ref = oracle::dense_system(grid, 0, s.params, s.eta2, s.outcome, 300);
    CHECK(oracle::dense_residual(ref, sol.a_mass) < 1e-3);
  }

  TEST_CASE("kernel is exactly symmetric and the drift is recorded") {
    Setting s;
    const auto grid = s.grid(40);
    const FredholmSystem sys = build_system(grid, 1, s.params, s.eta2, s.outcome, 20);
    CHECK((sys.m_kernel - sys.m_kernel.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.max_asymmetry >= 0.0);
    CHECK(sys.max_asymmetry < 1e-6);
  }

  TEST_CASE("zero right-hand side solves to exactly zero") {
    Setting s;
    const auto grid = s.grid(15);
    FredholmSystem sys = build_system(grid, 0, s.params, s.eta2, s.outcome, 20);
    sys.b.setZero();
    const FredholmSolution sol = solve(sys);
    CHECK(sol.a_mass.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("building twice is deterministic") {
    Setting s;
    const auto grid = s.grid(20);
    const FredholmSystem a = build_system(grid, 0, s.params, s.eta2, s.outcome, 20);
    const FredholmSystem b = build_system(grid, 0, s.params, s.eta2, s.outcome, 20);
    CHECK((a.m_kernel - b.m_kernel).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.b - b.b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.d - b.d).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("a singular assembled system is reported, not returned") {
    Setting s;
    const auto grid = s.grid(5);
    FredholmSystem sys = build_system(grid, 0, s.params, s.eta2, s.outcome, 20);
    sys.d.setZero();
    sys.m_kernel.setZero();
    try {
      solve(sys);
      FAIL("expected a singular-system error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::singular_system);
      CHECK(e.numerical());
    }
  }

  TEST_CASE("level bounds are checked") {
    Setting s;
    const auto grid = s.grid(8);
    CHECK_THROWS_AS(build_system(grid, 2, s.params, s.eta2, s.outcome, 20), Error);
    CHECK_THROWS_AS(build_system(grid, -1, s.params, s.eta2, s.outcome, 20), Error);
  }

  TEST_CASE("solve at production size stays under the latency budget") {
    Setting s;
    const auto grid = s.grid(50);
    const auto t0 = std::chrono::steady_clock::now();
    const FredholmSystem sys = build_system(grid, 0, s.params, s.eta2, s.outcome, 20);
    const FredholmSolution sol = solve(sys);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    CHECK(sol.residual_norm < 1e-8);
    CHECK(ms < 50.0);
  }
}

TEST_SUITE("interpolation") {
  TEST_CASE("node values and midpoints follow the mass-weighted rule") {
    Setting s;
    const auto grid = s.grid(14);
    const FredholmSystem sys = build_system(grid, 0, s.params, s.eta2, s.outcome, 20);
    const FredholmSolution sol = solve(sys);

    // exact node hit returns the stored row over the node mass
    for (int j : {0, 5, 13}) {
      const Eigen::VectorXd want = sol.a_mass.row(j).transpose() / grid.masses[0][j];
      const Eigen::VectorXd got = interpolate_a(sol, s.eta1, grid.nodes[j], 0.0);
      CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
    }

    // midpoint: linear in the mass-scaled values, divided by the local mass
    const double x = 0.5 * (grid.nodes[6] + grid.nodes[7]);
    const Eigen::VectorXd amid = 0.5 * (sol.a_mass.row(6) + sol.a_mass.row(7)).transpose();
    const double rx = s.eta1.density(x, 0.0) / grid.level_totals[0];
    const Eigen::VectorXd got = interpolate_a(sol, s.eta1, x, 0.0);
    CHECK((got - amid / rx).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("requests outside the node span or the level set fail loudly") {
    Setting s;
    const auto grid = s.grid(10);
    const FredholmSolution sol = solve(build_system(grid, 0, s.params, s.eta2, s.outcome, 20));
    CHECK_THROWS_AS(interpolate_a(sol, s.eta1, 0.01, 0.0), Error);
    CHECK_THROWS_AS(interpolate_a(sol, s.eta1, 0.999, 0.0), Error);
    CHECK_THROWS_AS(interpolate_a(sol, s.eta1, 0.5, 1.0), Error);  // level-1 z, level-0 solution
  }
}

TEST_SUITE("fredholm-cache") {
  TEST_CASE("identical parameters hit; perturbed parameters rebuild") {
    Setting s;
    const auto grid = s.grid(10);
    FredholmCache cache;
    int builds = 0;
    auto builder = [&]() {
      ++builds;
      return solve(build_system(grid, 0, s.params, s.eta2, s.outcome, 20));
    };
    cache.get(0, s.params, builder);
    cache.get(0, s.params, builder);
    CHECK(builds == 1);
    CHECK(cache.hits == 1);
    CHECK(cache.misses == 1);

    RegressionParams moved = s.params;
    moved.beta1 += 1e-6;
    auto builder2 = [&]() {
      ++builds;
      return solve(build_system(grid, 0, moved, s.eta2, s.outcome, 20));
    };
    cache.get(0, moved, builder2);
    CHECK(builds == 2);
    CHECK(cache.max_residual < 1e-8);
    CHECK(cache.max_asymmetry < 1e-6);
  }
}
