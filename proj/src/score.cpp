#include "sparcc/score.hpp"

#include <cmath>
#include <cstddef>

#include "sparcc/errors.hpp"

namespace sparcc {

namespace {

constexpr double kFloor = 1e-300;

// Shared body for s_eff / s_mle. `use_a` false means a == 0 throughout.
Eigen::VectorXd score_impl(const ObservedRecord& r, const ScoreContext& ctx, bool use_a) {
  if (!ctx.outcome || !ctx.grid) fail(errc::precondition, "score context missing outcome model or grid");
  const int p = ctx.params.dim();
  const QuadratureGrid& grid = *ctx.grid;
  const int level = grid.level_index(r.z);

  const FredholmSolution* sol = nullptr;
  if (use_a) {
    if (ctx.solutions.size() != grid.levels.size())
      fail(errc::precondition, "score context needs one fredholm solution per level");
    sol = ctx.solutions[(std::size_t)level];
    if (!sol) fail(errc::precondition, "score context has null fredholm solution");
  }

  if (r.delta == 1) {
    Eigen::VectorXd s = ctx.outcome->score_full(r.y, r.w, r.z, ctx.params);
    if (use_a) s -= interpolate_a(*sol, *ctx.eta1, r.w, r.z, &ctx.underflow_count);
    return s;
  }

  // Censored branch: tail expectation over nodes strictly above w.
  // Working on the mass scale keeps a(x_j) r_j as the stored solution row and
  // never divides by a possibly tiny r_j:
  //   num_q = sum_{x_j > w} [ S_q(y, x_j) r_j - amass_{j,q} ] f(y | x_j)
  //   den   = sum_{x_j > w} r_j f(y | x_j)
  const int j0 = grid.first_node_above(r.w);
  const int m = grid.size();
  const Eigen::VectorXd& mass = grid.masses[(std::size_t)level];
  Eigen::VectorXd num = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sc(p);
  double den = 0.0;
  for (int j = j0; j < m; ++j) {
    const double xj = grid.nodes[j];
    const double rj = mass[j];
    const double fy = ctx.outcome->density(r.y, xj, r.z, ctx.params);
    ctx.outcome->score_full_into(r.y, xj, r.z, ctx.params, sc.data());
    den += rj * fy;
    for (int q = 0; q < p; ++q) {
      double term = sc[q] * rj;
      if (use_a) term -= sol->a_mass(j, q);
      num[q] += term * fy;
    }
  }
  if (den < kFloor) {
    den = kFloor;
    ++ctx.underflow_count;
  }
  return num / den;
}

}  // namespace

void ScoreContext::check_coherent() const {
  if (!outcome || !grid) fail(errc::precondition, "score context missing outcome model or grid");
  for (const FredholmSolution* sol : solutions) {
    if (!sol) fail(errc::precondition, "score context has null fredholm solution");
    if (sol->params.to_vector() != params.to_vector())
      fail(errc::precondition, "fredholm solution was built at different regression parameters");
  }
}

Eigen::VectorXd s_eff(const ObservedRecord& r, const ScoreContext& ctx) {
  if (ctx.solutions.empty()) fail(errc::precondition, "efficient score needs fredholm solutions");
  if (!ctx.eta1) fail(errc::precondition, "efficient score needs the covariate density for interpolation");
  return score_impl(r, ctx, true);
}

Eigen::VectorXd s_mle(const ObservedRecord& r, const ScoreContext& ctx) {
  return score_impl(r, ctx, false);
}

}  // namespace sparcc
