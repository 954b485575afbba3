#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "sparcc/bspline.hpp"
#include "sparcc/outcome.hpp"
#include "sparcc/quadrature.hpp"
#include "sparcc/types.hpp"

namespace sparcc {

enum class NuisanceTarget { x_given_z, c_given_z };
enum class NuisanceKind { beta_regression, beta_misspecified, bspline, exact };

const char* target_name(NuisanceTarget t);
const char* kind_name(NuisanceKind k);
NuisanceTarget target_from_name(const std::string& s);

// Conditional density on a sub-interval of (0,1), one of:
//   eta1 = f_{X|Z} (target x_given_z) or eta2 = f_{C|Z} (target c_given_z).
// Implementations are immutable after construction and shareable across
// threads.
class NuisanceDensity {
 public:
  NuisanceDensity(NuisanceTarget target, std::vector<double> levels)
      : target_(target), levels_(std::move(levels)) {
    if (levels_.empty()) fail(errc::precondition, "nuisance model needs at least one z level");
  }
  virtual ~NuisanceDensity() = default;

  virtual NuisanceKind kind() const = 0;
  NuisanceTarget target() const { return target_; }
  const std::vector<double>& levels() const { return levels_; }

  // Density at t given z; 0 outside the support. z must be a fitted level.
  virtual double density(double t, double z) const = 0;
  // P(T > t | z); 1 below the support, 0 above it.
  virtual double survival(double t, double z) const = 0;
  virtual std::pair<double, double> support() const = 0;

  virtual void save(std::ostream& out) const = 0;
  void save_file(const std::string& path) const;
  static std::shared_ptr<NuisanceDensity> load(std::istream& in);
  static std::shared_ptr<NuisanceDensity> load_file(const std::string& path);

 protected:
  int check_level(double z) const { return level_index_of(levels_, z); }

  NuisanceTarget target_;
  std::vector<double> levels_;
};

// Beta working model with linear-in-z shape maps:
//   shape1(z) = a_int + a_slope z,  shape2(z) = b_int + b_slope z.
// The z-independent ("misspecified" in the experiments) variant fixes the
// slopes at zero.
class BetaWorkingModel final : public NuisanceDensity {
 public:
  BetaWorkingModel(NuisanceTarget target, bool z_dependent, double a_int, double a_slope,
                   double b_int, double b_slope, std::vector<double> levels);

  NuisanceKind kind() const override {
    return z_dependent_ ? NuisanceKind::beta_regression : NuisanceKind::beta_misspecified;
  }
  bool z_dependent() const { return z_dependent_; }
  double a_int() const { return a_int_; }
  double a_slope() const { return a_slope_; }
  double b_int() const { return b_int_; }
  double b_slope() const { return b_slope_; }
  double shape1(double z) const { return a_int_ + a_slope_ * z; }
  double shape2(double z) const { return b_int_ + b_slope_ * z; }

  double density(double t, double z) const override;
  double survival(double t, double z) const override;
  std::pair<double, double> support() const override { return {0.0, 1.0}; }
  void save(std::ostream& out) const override;

  // Raw parameter vector for sandwich stacking: (a_int, b_int) when
  // z-independent, (a_int, a_slope, b_int, b_slope) otherwise.
  Eigen::VectorXd raw_params() const;
  BetaWorkingModel with_raw_params(const Eigen::VectorXd& p) const;

  // Censored log-likelihood contribution of one record under this model's
  // target convention (density term for the observed coordinate, survival
  // term for the censored one).
  double record_loglik(const ObservedRecord& r) const;

 private:
  bool z_dependent_;
  double a_int_, a_slope_, b_int_, b_slope_;
};

// Per-level B-spline density: coefficients are positive and normalized
// against the basis integrals, so every level integrates to one exactly.
class BSplineDensity final : public NuisanceDensity {
 public:
  BSplineDensity(NuisanceTarget target, BSplineBasis basis, std::vector<double> levels,
                 std::vector<Eigen::VectorXd> coefficients);

  NuisanceKind kind() const override { return NuisanceKind::bspline; }
  const BSplineBasis& basis() const { return basis_; }
  const std::vector<Eigen::VectorXd>& coefficients() const { return coef_; }

  double density(double t, double z) const override;
  double survival(double t, double z) const override;
  std::pair<double, double> support() const override { return {basis_.lo(), basis_.hi()}; }
  void save(std::ostream& out) const override;

 private:
  BSplineBasis basis_;
  std::vector<Eigen::VectorXd> coef_;
};

// Known truth, bypassing any fitting: either per-level beta shapes
// (serializable; used for oracle-grade nuisances in experiments) or arbitrary
// callables (tests only; not serializable).
class ExactDensity final : public NuisanceDensity {
 public:
  ExactDensity(NuisanceTarget target, std::vector<double> levels,
               std::vector<std::pair<double, double>> beta_shapes);
  ExactDensity(NuisanceTarget target, std::vector<double> levels,
               std::function<double(double, double)> density_fn,
               std::function<double(double, double)> survival_fn,
               std::pair<double, double> support = {0.0, 1.0});

  NuisanceKind kind() const override { return NuisanceKind::exact; }
  double density(double t, double z) const override;
  double survival(double t, double z) const override;
  std::pair<double, double> support() const override { return support_; }
  void save(std::ostream& out) const override;

 private:
  std::vector<std::pair<double, double>> shapes_;  // empty for the callable form
  std::function<double(double, double)> density_fn_, survival_fn_;
  std::pair<double, double> support_;
};

// Censored maximum likelihood for the beta working model. For target X|Z a
// record contributes log density at w when delta=1 and log survival when
// delta=0; for target C|Z the roles swap. Optimized over log-shapes
// (z-independent) or raw shape-map coefficients with a positivity barrier.
BetaWorkingModel fit_beta_censored(const Dataset& data, NuisanceTarget target, bool z_dependent);

// Censored maximum likelihood over per-level spline coefficients on the
// simplex {coef > 0, coef . integrals = 1}, via a softmax reparameterization.
// Basis support is the scaled [0,1].
BSplineDensity fit_bspline_censored(const Dataset& data, NuisanceTarget target, int num_basis = 8,
                                    int degree = 3);

// E1[ I(X > w) g(X) | y, z ] / E1[ I(X > w) | y, z ] on the grid: both sides
// are sums over nodes x_j > w weighted by f_{Y|X,Z}(y, x_j, z) r_j(z).
// Errors: tail_support when no node exceeds w; conditioning when the
// denominator underflows (< 1e-300).
Eigen::VectorXd conditional_moment_e1(const OutcomeModel& outcome, const RegressionParams& params,
                                      const std::function<Eigen::VectorXd(double)>& g, double y,
                                      double w, double z, const QuadratureGrid& grid);

}  // namespace sparcc
