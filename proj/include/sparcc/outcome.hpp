#pragma once

#include <Eigen/Dense>

#include "sparcc/types.hpp"

namespace sparcc {

// Conditional outcome model f_{Y|X,Z}(y | x, z; params). Everything downstream
// consumes the model through this interface; only the homoscedastic normal
// family ships, and the integral solver additionally relies on its
// location-scale structure (mean/sd) to place quadrature.
class OutcomeModel {
 public:
  virtual ~OutcomeModel() = default;

  virtual double mean(double x, double z, const RegressionParams& p) const = 0;
  virtual double sd(const RegressionParams& p) const = 0;
  virtual double log_density(double y, double x, double z, const RegressionParams& p) const = 0;
  double density(double y, double x, double z, const RegressionParams& p) const {
    return std::exp(log_density(y, x, z, p));
  }
  // Gradient of log_density in the active parameters (full-data score).
  virtual Eigen::VectorXd score_full(double y, double x, double z,
                                     const RegressionParams& p) const = 0;
  // Allocation-free variant for quadrature inner loops; out has p.dim() slots.
  virtual void score_full_into(double y, double x, double z, const RegressionParams& p,
                               double* out) const {
    Eigen::Map<Eigen::VectorXd>(out, p.dim()) = score_full(y, x, z, p);
  }
};

class NormalOutcomeModel final : public OutcomeModel {
 public:
  double mean(double x, double z, const RegressionParams& p) const override {
    double m = p.beta0 + p.beta1 * x + p.beta2 * z;
    if (p.interaction) m += p.beta3 * x * z;
    return m;
  }
  double sd(const RegressionParams& p) const override { return std::exp(0.5 * p.log_sigma2); }
  double log_density(double y, double x, double z, const RegressionParams& p) const override;
  Eigen::VectorXd score_full(double y, double x, double z,
                             const RegressionParams& p) const override;
  void score_full_into(double y, double x, double z, const RegressionParams& p,
                       double* out) const override;
};

}  // namespace sparcc
