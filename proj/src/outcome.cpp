#include "sparcc/outcome.hpp"

#include <cmath>

namespace sparcc {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

double NormalOutcomeModel::log_density(double y, double x, double z,
                                       const RegressionParams& p) const {
  const double r = y - mean(x, z, p);
  const double s2 = p.sigma2();
  return -0.5 * (kLogTwoPi + p.log_sigma2 + r * r / s2);
}

Eigen::VectorXd NormalOutcomeModel::score_full(double y, double x, double z,
                                               const RegressionParams& p) const {
  Eigen::VectorXd g(p.dim());
  score_full_into(y, x, z, p, g.data());
  return g;
}

void NormalOutcomeModel::score_full_into(double y, double x, double z, const RegressionParams& p,
                                         double* g) const {
  const double r = y - mean(x, z, p);
  const double s2 = p.sigma2();
  const double u = r / s2;
  g[0] = u;
  g[1] = u * x;
  g[2] = u * z;
  if (p.interaction) {
    g[3] = u * x * z;
    g[4] = -0.5 + r * r / (2.0 * s2);
  } else {
    g[3] = -0.5 + r * r / (2.0 * s2);
  }
}

}  // namespace sparcc
