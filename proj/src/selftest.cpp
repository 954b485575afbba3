#include "sparcc/selftest.hpp"

#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sparcc/bspline.hpp"
#include "sparcc/errors.hpp"
#include "sparcc/fredholm.hpp"
#include "sparcc/nuisance.hpp"
#include "sparcc/outcome.hpp"
#include "sparcc/quadrature.hpp"
#include "sparcc/score.hpp"

namespace sparcc {

namespace {

struct Checker {
  std::ostream& out;
  int failures = 0;

  void check(const char* section, const char* what, bool ok, double got = 0.0,
             double want = 0.0) {
    if (ok) {
      out << "[ok] " << section << ": " << what << "\n";
    } else {
      ++failures;
      out << "[FAIL] " << section << ": " << what << " (got " << got << ", want " << want
          << ")\n";
    }
  }
};

}  // namespace

int run_selftest(std::ostream& out, bool inject_simpson_fault) {
  set_simpson_fault_for_testing(inject_simpson_fault);
  Checker c{out};
  const NormalOutcomeModel normal;

  try {
    // --- quadrature ---------------------------------------------------------
    {
      const auto one = integrate_y_hermite([](double) { return 1.0; }, 1.3, 0.7, 20);
      c.check("quadrature", "hermite total mass is 1", std::abs(one - 1.0) < 1e-12, one, 1.0);
      const auto mean = integrate_y_hermite([](double y) { return y; }, 1.3, 0.7, 20);
      c.check("quadrature", "hermite reproduces the mean", std::abs(mean - 1.3) < 1e-12, mean,
              1.3);
      const auto var =
          integrate_y_hermite([](double y) { return (y - 1.3) * (y - 1.3); }, 1.3, 0.7, 20);
      c.check("quadrature", "hermite reproduces the variance", std::abs(var - 0.49) < 1e-12, var,
              0.49);
      const auto& rule = gauss_hermite(4);
      double odd = 0.0;
      for (int i = 0; i < rule.nodes.size(); ++i)
        odd += rule.weights[i] * std::pow(rule.nodes[i], 3);
      c.check("quadrature", "hermite kills odd cubics", std::abs(odd) < 1e-12, odd, 0.0);

      const double s = integrate_simpson([](double t) { return std::cos(t); }, 0.0, 1.0,
                                         default_simpson_panels());
      c.check("quadrature", "simpson matches the antiderivative of cos",
              std::abs(s - std::sin(1.0)) < 1e-9, s, std::sin(1.0));
      const double s3 =
          integrate_simpson([](double t) { return t * t * t; }, 0.0, 2.0, 2);
      c.check("quadrature", "simpson is exact on cubics", std::abs(s3 - 4.0) < 1e-12, s3, 4.0);
      const double ad = integrate_adaptive_simpson([](double t) { return std::exp(t); }, 0.0, 1.0,
                                                   1e-10);
      c.check("quadrature", "adaptive simpson integrates exp", std::abs(ad - std::expm1(1.0)) < 1e-8,
              ad, std::expm1(1.0));
    }

    // --- grid ---------------------------------------------------------------
    const std::vector<double> levels{0.0, 1.0};
    const ExactDensity eta1(NuisanceTarget::x_given_z, levels,
                            {{2.0, 3.0}, {3.0, 2.0}});
    const QuadratureGrid grid = make_grid(eta1, levels, 25, 0.02, 0.97);
    {
      bool increasing = true;
      for (int j = 1; j < grid.size(); ++j)
        if (!(grid.nodes[j] > grid.nodes[j - 1])) increasing = false;
      c.check("grid", "nodes strictly increase", increasing);
      for (std::size_t l = 0; l < levels.size(); ++l) {
        const double total = grid.masses[l].sum();
        c.check("grid", "masses sum to one per level", std::abs(total - 1.0) < 1e-12, total, 1.0);
      }
      c.check("grid", "alive-tail search lands one past the node",
              grid.first_node_above(grid.nodes[5]) == 6, grid.first_node_above(grid.nodes[5]), 6);
      c.check("grid", "alive-tail search from below returns the first node",
              grid.first_node_above(0.001) == 0, grid.first_node_above(0.001), 0);
    }

    // --- spline -------------------------------------------------------------
    {
      const BSplineBasis basis(8, 3, 0.0, 1.0);
      bool unity = true;
      for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        const double s = basis.evaluate(x).sum();
        if (std::abs(s - 1.0) > 1e-12) unity = false;
      }
      c.check("spline", "basis is a partition of unity", unity);
      c.check("spline", "basis integrals are positive", basis.integrals().minCoeff() > 0.0,
              basis.integrals().minCoeff());
      const double tails = (basis.tail_integrals(0.0) - basis.integrals()).cwiseAbs().maxCoeff();
      c.check("spline", "tail integrals start at the full integrals", tails < 1e-14, tails, 0.0);
    }

    // --- nuisance -----------------------------------------------------------
    const BetaWorkingModel bm(NuisanceTarget::x_given_z, true, 1.5, 1.0, 2.5, -1.0, levels);
    {
      const double mass = integrate_adaptive_simpson(
          [&](double t) { return bm.density(t, 1.0); }, 0.0, 1.0, 1e-10);
      c.check("nuisance", "beta density integrates to one", std::abs(mass - 1.0) < 1e-8, mass,
              1.0);
      const double t0 = 0.37;
      const double left = integrate_adaptive_simpson(
          [&](double t) { return bm.density(t, 0.0); }, 0.0, t0, 1e-10);
      const double sv = bm.survival(t0, 0.0);
      c.check("nuisance", "survival complements the density integral",
              std::abs(left + sv - 1.0) < 1e-8, left + sv, 1.0);
      c.check("nuisance", "survival is 1 at the left edge",
              std::abs(bm.survival(0.0, 0.0) - 1.0) < 1e-15, bm.survival(0.0, 0.0), 1.0);
      c.check("nuisance", "survival is 0 at the right edge",
              std::abs(bm.survival(1.0, 0.0)) < 1e-15, bm.survival(1.0, 0.0), 0.0);
    }

    // --- integral equation ---------------------------------------------------
    RegressionParams params;
    params.beta0 = 0.5;
    params.beta1 = 2.0;
    params.beta2 = -1.0;
    params.log_sigma2 = std::log(0.64);
    const ExactDensity eta2(NuisanceTarget::c_given_z, levels,
                            {{1.2, 2.0}, {1.2, 2.0}});
    {
      const FredholmSystem sys = build_system(grid, 0, params, eta2, normal, 20);
      const double asym = (sys.m_kernel - sys.m_kernel.transpose()).cwiseAbs().maxCoeff();
      c.check("integral-equation", "kernel is symmetric after assembly", asym == 0.0, asym, 0.0);
      c.check("integral-equation", "pre-symmetrization drift is small", sys.max_asymmetry < 1e-6,
              sys.max_asymmetry, 0.0);
      const FredholmSolution sol = solve(sys);
      c.check("integral-equation", "plug-back residual is tiny", sol.residual_norm < 1e-8,
              sol.residual_norm, 0.0);
      FredholmSystem zero = sys;
      zero.b.setZero();
      const FredholmSolution zsol = solve(zero);
      c.check("integral-equation", "zero right-hand side gives the zero solution",
              zsol.a_mass.cwiseAbs().maxCoeff() == 0.0, zsol.a_mass.cwiseAbs().maxCoeff(), 0.0);
      const int j = 7;
      const double rj = grid.masses[0][j];
      const Eigen::VectorXd at_node = interpolate_a(sol, eta1, grid.nodes[j], 0.0);
      const double node_err =
          (at_node - sol.a_mass.row(j).transpose() / rj).cwiseAbs().maxCoeff();
      c.check("integral-equation", "interpolation is exact on the nodes", node_err < 1e-12,
              node_err, 0.0);

      // --- score ------------------------------------------------------------
      const QuadratureGrid grid0 = make_grid(eta1, {0.0}, 25, 0.02, 0.97);
      // single-level context so the solution list lines up with the grid
      const FredholmSystem sys0 = build_system(grid0, 0, params, eta2, normal, 20);
      const FredholmSolution sol0 = solve(sys0);
      ScoreContext ctx;
      ctx.outcome = &normal;
      ctx.grid = &grid0;
      ctx.eta1 = &eta1;
      ctx.solutions = {&sol0};
      ctx.params = params;

      ObservedRecord rec;
      rec.y = 1.7;
      rec.w = grid0.nodes[9];
      rec.delta = 1;
      rec.z = 0.0;
      const Eigen::VectorXd lhs = s_eff(rec, ctx);
      const Eigen::VectorXd rhs = normal.score_full(rec.y, rec.w, rec.z, params) -
                                  interpolate_a(sol0, eta1, rec.w, rec.z);
      c.check("score", "uncensored efficient score is full score minus a",
              (lhs - rhs).cwiseAbs().maxCoeff() < 1e-12, (lhs - rhs).cwiseAbs().maxCoeff(), 0.0);

      rec.delta = 0;
      rec.w = 0.41;
      const Eigen::VectorXd mle = s_mle(rec, ctx);
      const Eigen::VectorXd e1 = conditional_moment_e1(
          normal, params,
          [&](double x) { return normal.score_full(rec.y, x, rec.z, params); }, rec.y, rec.w,
          rec.z, grid0);
      c.check("score", "censored likelihood score matches the tail moment",
              (mle - e1).cwiseAbs().maxCoeff() < 1e-12, (mle - e1).cwiseAbs().maxCoeff(), 0.0);

      const Eigen::VectorXd ones = conditional_moment_e1(
          normal, params, [](double) { return Eigen::VectorXd::Ones(1); }, rec.y, rec.w, rec.z,
          grid0);
      c.check("score", "tail moment of the constant is exactly one", ones[0] == 1.0, ones[0],
              1.0);

      // finite-difference agreement of the full-data score
      bool fd_ok = true;
      double worst = 0.0;
      for (double x : {0.11, 0.43, 0.86}) {
        const Eigen::VectorXd sc = normal.score_full(1.9, x, 1.0, params);
        const Eigen::VectorXd th = params.to_vector();
        for (int k = 0; k < th.size(); ++k) {
          const double h = 1e-6 * std::max(1.0, std::abs(th[k]));
          Eigen::VectorXd tp = th, tm = th;
          tp[k] += h;
          tm[k] -= h;
          const double fd =
              (normal.log_density(1.9, x, 1.0, RegressionParams::from_vector(tp, false)) -
               normal.log_density(1.9, x, 1.0, RegressionParams::from_vector(tm, false))) /
              (2.0 * h);
          worst = std::max(worst, std::abs(fd - sc[k]) / std::max(1.0, std::abs(sc[k])));
        }
      }
      fd_ok = worst < 1e-6;
      c.check("score", "full-data score matches finite differences", fd_ok, worst, 0.0);
    }
  } catch (const std::exception& e) {
    ++c.failures;
    out << "[FAIL] unexpected error: " << e.what() << "\n";
  }

  set_simpson_fault_for_testing(false);
  if (c.failures == 0)
    out << "selftest passed\n";
  else
    out << "selftest FAILED: " << c.failures << " check(s) violated\n";
  return c.failures;
}

}  // namespace sparcc
