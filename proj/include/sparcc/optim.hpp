#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace sparcc {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct BfgsOptions {
  // Convergence on the gradient infinity-norm; floored internally at
  // sqrt(eps) * (1 + |f|), below which finite differences are pure noise.
  double grad_tol = 1e-6;
  // Fallback relative criterion for when the line search exhausts the
  // objective's floating-point resolution before grad_tol is met. The
  // reachable gradient floor scales with curvature, which is unknown ahead
  // of time; a gradient below stall_grad_tol * (1 + |f|) pins the minimizer
  // well within the noise of anything downstream.
  double stall_grad_tol = 1e-4;
  int max_iter = 500;
  double fd_step = 1e-6;   // relative central-difference step
  bool throw_on_failure = true;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
  std::string trace;  // one line per iteration, attached to convergence errors
};

// Central finite-difference gradient with per-coordinate step
// fd_step * max(1, |x_j|). f may return +inf outside its domain.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double fd_step);

// Quasi-Newton minimizer (inverse-Hessian BFGS updates, Armijo backtracking).
// Objectives may return +inf to mark infeasible points; the line search backs
// away from them. Throws errc::convergence (with the trace) when the gradient
// tolerance is not met, unless throw_on_failure is off.
BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts = {});

}  // namespace sparcc
