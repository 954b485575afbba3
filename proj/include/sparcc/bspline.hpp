#pragma once

#include <Eigen/Dense>
#include <vector>

namespace sparcc {

// Clamped B-spline basis of `num_basis` functions of the given degree on
// [lo, hi], interior knots equally spaced. Basis values are computed by the
// Cox-de Boor recursion on the knot span; integrals use per-span 3-point
// Gauss-Legendre, exact through degree 5.
class BSplineBasis {
 public:
  BSplineBasis(int num_basis, int degree, double lo, double hi);

  int size() const { return m_; }
  int degree() const { return degree_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& knots() const { return knots_; }
  std::vector<double> interior_knots() const;

  // All m basis values at x; zero vector outside [lo, hi].
  Eigen::VectorXd evaluate(double x) const;

  // Integrals over the whole support; by partition of unity they sum to hi-lo.
  const Eigen::VectorXd& integrals() const { return integrals_; }

  // Componentwise \int_t^hi B_k(s) ds (t <= lo gives the full integrals).
  Eigen::VectorXd tail_integrals(double t) const;

 private:
  int find_span(double x) const;

  int m_;
  int degree_;
  double lo_, hi_;
  std::vector<double> knots_;
  Eigen::VectorXd integrals_;
};

}  // namespace sparcc
