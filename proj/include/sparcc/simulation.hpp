#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "sparcc/estimators.hpp"
#include "sparcc/types.hpp"

namespace sparcc {

// One study cell: an estimator plus how each nuisance is treated. Text form
// is "estimator[:eta1[:eta2]]" using the scenario vocabulary
//   correct -> z-dependent parametric fit, incorrect -> z-independent fit,
//   nonpar -> B-spline fit, exact -> true density handed to the fitter
// (the nuisance-model names are accepted as aliases). The likelihood
// estimator takes one nuisance argument; the efficient-score estimator takes
// two, and a single argument is applied to both. The complete-case and
// oracle estimators take none.
struct ScenarioSpec {
  EstimatorKind estimator = EstimatorKind::sparcc;
  NuisanceSpec eta1 = NuisanceSpec::parametric;
  NuisanceSpec eta2 = NuisanceSpec::parametric;

  std::string label() const;
  static ScenarioSpec parse(const std::string& text);
};

// Flat Monte Carlo configuration, mirrored 1:1 by the key = value config
// format (see parse/dump for the exact keys).
struct SimConfig {
  long n = 2000;
  long replicates = 200;
  double q_target = 0.4;
  Eigen::Vector4d alpha1;      // X|Z shape maps (a_int, a_slope, b_int, b_slope)
  RegressionParams beta_true;  // includes log_sigma2; interaction via its flag
  std::vector<ScenarioSpec> scenarios;
  std::uint64_t seed = 20240819ull;
  int threads = 0;  // 0 = use available parallelism
  bool table1_units = false;
  FitOptions fit;

  SimConfig();  // default design: alpha1 = (1.5, 1, 2.5, -1), beta = (1, 10, 2), sigma2 = 1

  static std::vector<ScenarioSpec> default_scenarios();

  void validate() const;
  std::string dump() const;
  static SimConfig parse(const std::string& text);
};

// P(X > C) under beta models given by the shape maps: the 2-level mixture of
// integrals of f_X(x|z) F_C(x|z) over (0,1), each by 2001-point Simpson.
double censoring_probability(const Eigen::Vector4d& alpha1, const Eigen::Vector4d& alpha2);

// Finds alpha2 = (s, 0, 2.5, 0) with P(X > C) = q_target by bisection on
// s in [1e-3, 1e3] to |P - q| < 1e-4; errc::calibration when unreachable.
Eigen::Vector4d calibrate_censoring(const Eigen::Vector4d& alpha1, double q_target);

// Counter-based stream split: replicate r's seed depends only on (master, r).
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t rep);

// n complete records under the generating process:
//   Z ~ Bernoulli(1/2), X|Z and C|Z beta via the shape maps, Y normal.
std::vector<CompleteRecord> generate_complete_data(const SimConfig& config,
                                                   const Eigen::Vector4d& alpha2,
                                                   std::uint64_t stream_seed);

// Per-replicate outcome of one scenario.
struct ReplicateCell {
  bool ok = false;
  std::string error;         // error category when !ok
  Eigen::VectorXd estimate;  // empty when failed
  Eigen::VectorXd se;        // empty when no variance was available
  double max_fredholm_residual = 0.0;
  long underflows = 0;
  int newton_iterations = 0;
};

// Aggregates for one scenario; all parameter-indexed vectors follow
// RegressionParams::names() order and are in raw units (the ×10 table
// convention is applied only when formatting with table1_units).
struct CellSummary {
  ScenarioSpec scenario;
  long attempted = 0;
  long failures = 0;
  bool reliable = true;  // failures <= 5% of attempted
  Eigen::VectorXd mean_estimate;
  Eigen::VectorXd bias;
  Eigen::VectorXd ese;        // sample SD over successes; NaN below 2 successes
  Eigen::VectorXd ase_mean;   // mean / median of reported SEs where available
  Eigen::VectorXd ase_median;
  Eigen::VectorXd coverage;   // percent of 95% Wald intervals covering truth
  double var_beta1 = 0.0;     // empirical variance of the x-slope estimate
  double var_beta1_lo = 0.0;  // 95% chi-square interval for that variance
  double var_beta1_hi = 0.0;
  double max_fredholm_residual = 0.0;
  long underflows = 0;
  double mean_newton_iterations = 0.0;
};

struct SimResult {
  SimConfig config;
  Eigen::Vector4d alpha2;   // calibrated censoring shapes, archived in metadata
  double q_realized = 0.0;  // P(X > C) at alpha2 by the same integrator
  std::vector<CellSummary> cells;                       // one per scenario
  std::vector<std::vector<ReplicateCell>> replicates;   // [scenario][replicate]

  std::string summary_csv() const;
  std::string replicates_csv() const;
  std::string metadata_text() const;
};

SimResult run_monte_carlo(const SimConfig& config);

// Same study under explicit censoring shape maps instead of the calibrated
// zero-slope family; config.q_target is ignored. Lets a caller reproduce a
// design whose censoring differs by covariate level.
SimResult run_monte_carlo(const SimConfig& config, const Eigen::Vector4d& alpha2);

// Variance-versus-censoring sweep: rows per (q, scenario) with the empirical
// variance of the x-slope estimate and its 95% chi-square band. Every q runs
// from the same master seed (common random numbers across q).
struct SweepRow {
  double q = 0.0;
  std::string scenario;
  long successes = 0;
  long failures = 0;
  double var_beta1 = 0.0;
  double var_beta1_lo = 0.0;
  double var_beta1_hi = 0.0;
  double ese_beta1 = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string csv() const;
};

SweepResult sweep_censoring(const SimConfig& config, const std::vector<double>& q_list);

}  // namespace sparcc
