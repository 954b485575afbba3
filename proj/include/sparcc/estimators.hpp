#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>

#include "sparcc/nuisance.hpp"
#include "sparcc/outcome.hpp"
#include "sparcc/types.hpp"

namespace sparcc {

enum class EstimatorKind { sparcc, mle, complete_case, oracle };

const char* estimator_name(EstimatorKind k);
EstimatorKind estimator_from_name(const std::string& s);

// How a nuisance density is obtained for a fit. When `supplied` is set it is
// used as-is and treated as known (no uncertainty propagated); otherwise the
// model named by `spec` is fitted to the data, except `exact` which always
// requires a supplied density.
enum class NuisanceSpec { parametric, parametric_mis, bspline, exact };

const char* nuisance_spec_name(NuisanceSpec s);
NuisanceSpec nuisance_spec_from_name(const std::string& s);

struct NuisanceChoice {
  NuisanceSpec spec = NuisanceSpec::parametric;
  std::shared_ptr<const NuisanceDensity> supplied;
};

struct FitOptions {
  int nodes = 50;           // covariate grid size
  int hermite_order = 20;   // y-integration order in the integral-equation build
  int bspline_basis = 8;
  int bspline_degree = 3;
  double newton_tol = 1e-8;     // infinity-norm of the summed estimating equation
  int newton_max_iter = 100;
  bool compute_se = true;
  bool interaction = false;
};

struct FitDiagnostics {
  int newton_iterations = 0;
  bool converged = false;
  double score_norm = 0.0;  // infinity-norm of the summed equation at the estimate
  double max_fredholm_residual = 0.0;
  double max_kernel_asymmetry = 0.0;
  long underflow_count = 0;
  long cache_hits = 0;
  long cache_misses = 0;
  double grid_lo = 0.0;
  double grid_hi = 0.0;
  bool vcov_ok = false;
  std::string vcov_note;  // reason when vcov_ok is false, else the rule used
};

struct FitResult {
  EstimatorKind estimator = EstimatorKind::sparcc;
  RegressionParams params;
  Eigen::VectorXd estimate;  // active parameters, same order as params.names()
  Eigen::VectorXd se;        // empty when no variance was computed
  Eigen::MatrixXd vcov;
  FitDiagnostics diagnostics;
  std::shared_ptr<const NuisanceDensity> eta1, eta2;  // as used (null when unused)

  // "parameter,estimate,se" rows; se printed as nan when unavailable.
  std::string table() const;
};

// Damped Newton on a p-dimensional estimating equation G(x) = 0 with a
// forward-difference Jacobian. Steps are halved (up to 30 times) until the
// euclidean norm of G decreases; a trial evaluation that throws counts as a
// failed step. Singular Jacobians fall back to a ridged normal-equation step.
struct RootResult {
  Eigen::VectorXd x;
  Eigen::VectorXd g;
  int iterations = 0;
  bool converged = false;
};
RootResult solve_estimating_equation(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& G, Eigen::VectorXd x0,
    double tol = 1e-8, int max_iter = 100);

// Least-squares fit on the delta = 1 records (their w equals the true x),
// with the maximum-likelihood variance rss/n1. Needs dim()+1 complete rows.
FitResult fit_complete_case(const Dataset& data, const FitOptions& opts = {});

// Same closed form using the stored true x of every record.
FitResult fit_oracle(const Dataset& data, const FitOptions& opts = {});

// Maximizes the observed-data likelihood in beta with the covariate density
// discretized on the grid; the censoring density drops out of this equation.
FitResult fit_mle(const Dataset& data, const NuisanceChoice& eta1, const FitOptions& opts = {});

// Solves the efficient-score equation: per z level the integral equation for
// a(.,z) is solved at each visited beta (cached), and the summed efficient
// score is driven to zero.
// Standard-error rules, applied when opts.compute_se:
//  - any B-spline nuisance: inverse summed outer product of the per-record
//    estimating scores;
//  - nuisances fitted here by censored beta ML: joint sandwich over the
//    stacked (nuisance, regression) estimating equations, regression block
//    reported;
//  - known/supplied nuisances only: plain sandwich over the regression
//    equation.
FitResult fit_sparcc(const Dataset& data, const NuisanceChoice& eta1, const NuisanceChoice& eta2,
                     const FitOptions& opts = {});

}  // namespace sparcc
