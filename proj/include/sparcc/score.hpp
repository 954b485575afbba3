#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sparcc/fredholm.hpp"
#include "sparcc/nuisance.hpp"
#include "sparcc/outcome.hpp"
#include "sparcc/quadrature.hpp"
#include "sparcc/types.hpp"

namespace sparcc {

// Everything needed to evaluate per-record scores at one parameter value.
// `solutions` holds one Fredholm solution per grid level, built at exactly
// `params`; leave it empty for a == 0 (the plain observed-data score).
struct ScoreContext {
  const OutcomeModel* outcome = nullptr;
  const QuadratureGrid* grid = nullptr;
  const NuisanceDensity* eta1 = nullptr;  // only consulted for interpolation off-node
  std::vector<const FredholmSolution*> solutions;
  RegressionParams params;
  mutable long underflow_count = 0;

  bool has_a() const { return !solutions.empty(); }
  void check_coherent() const;  // solutions' params must equal this context's
};

// Efficient score: delta { S^F(y,w,z) - a(w,z) }
//   + (1-delta) E1[ 1{X>w} {S^F(y,X,z) - a(X,z)} | y,z ] / E1[ 1{X>w} | y,z ],
// with the censored-branch expectations taken over the grid nodes above w
// weighted by f(y|x_j,z) r_j. Tail denominators are floored at 1e-300 with
// the event counted on the context.
Eigen::VectorXd s_eff(const ObservedRecord& r, const ScoreContext& ctx);

// Observed-data likelihood score: same structure with a == 0.
Eigen::VectorXd s_mle(const ObservedRecord& r, const ScoreContext& ctx);

}  // namespace sparcc
