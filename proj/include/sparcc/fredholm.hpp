#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>

#include "sparcc/nuisance.hpp"
#include "sparcc/outcome.hpp"
#include "sparcc/quadrature.hpp"
#include "sparcc/types.hpp"

namespace sparcc {

// Discretization of the integral equation for a(x,z,beta) on the grid:
// unknowns are the mass-weighted values a(x_j) r_j, and the linear system
// reads (D + M) [a r] = b per score component, where
//   d_j   = survival_2(x_j, z) / r_j(z),
//   M_jk  = int int 1{min(x_j,x_k) > c} f(y|x_j) f(y|x_k)
//             / [sum_l 1{x_l > c} r_l f(y|x_l)] eta2(c,z) dy dc,
//   b_j,p = int int 1{x_j > c} f(y|x_j)
//             [sum_k 1{x_k > c} S^F_p(y,x_k) r_k f(y|x_k)]
//             / [sum_l 1{x_l > c} r_l f(y|x_l)] eta2(c,z) dy dc.
// The c-integrands are constant between consecutive nodes (they depend on c
// only through the indicator active set and eta2), so the c-integral is taken
// exactly as per-segment eta2 masses (survival differences) times one
// Gauss-Hermite y-integral per segment, centered at the row node's outcome
// mean. This equals the Simpson-in-c limit with no c-discretization error.
struct FredholmSystem {
  int level = 0;
  double z = 0.0;
  RegressionParams params;
  const QuadratureGrid* grid = nullptr;

  Eigen::VectorXd d;        // m
  Eigen::MatrixXd m_kernel; // m x m, symmetrized
  Eigen::MatrixXd b;        // m x p (row j = rhs vector at node j)

  double max_asymmetry = 0.0;  // |M - M^T|_max before symmetrization
  long underflow_count = 0;    // inner-denominator floors at 1e-300
};

struct FredholmSolution {
  int level = 0;
  double z = 0.0;
  RegressionParams params;
  const QuadratureGrid* grid = nullptr;

  Eigen::MatrixXd a_mass;      // m x p, row j = a(x_j, z) * r_j(z)
  double residual_norm = 0.0;  // max-abs of (D+M) a_mass - b after refinement
  double max_asymmetry = 0.0;
  long underflow_count = 0;
};

FredholmSystem build_system(const QuadratureGrid& grid, int level, const RegressionParams& params,
                            const NuisanceDensity& eta2, const OutcomeModel& outcome,
                            int hermite_order = 20);

// Cholesky solve with one iterative-refinement pass; falls back to a
// symmetric-indefinite factorization, then errc::singular_system.
FredholmSolution solve(const FredholmSystem& system);

// a(x, z) off the nodes: linear interpolation of the mass-weighted values
// between the bracketing nodes, divided by the local mass ratio
// eta1(x,z) / sum_l eta1(x_l,z). x outside [x_1, x_m] → errc::extrapolation.
Eigen::VectorXd interpolate_a(const FredholmSolution& sol, const NuisanceDensity& eta1, double x,
                              double z, long* underflow_count = nullptr);

// Root-finding re-requests identical systems during line search and Jacobian
// columns; solutions are cached by (level, beta rounded to 12 digits).
class FredholmCache {
 public:
  const FredholmSolution& get(int level, const RegressionParams& params,
                              const std::function<FredholmSolution()>& build);
  void clear() { cache_.clear(); }

  long hits = 0;
  long misses = 0;
  double max_residual = 0.0;
  double max_asymmetry = 0.0;
  long underflow_count = 0;

 private:
  std::map<std::string, FredholmSolution> cache_;
};

}  // namespace sparcc
