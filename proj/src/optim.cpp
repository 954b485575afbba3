#include "sparcc/optim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "sparcc/errors.hpp"

namespace sparcc {

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double fd_step) {
  const int n = (int)x.size();
  Eigen::VectorXd g(n), xp = x;
  for (int j = 0; j < n; ++j) {
    const double h = fd_step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    const double fp = f(xp);
    xp[j] = x[j] - h;
    const double fm = f(xp);
    xp[j] = x[j];
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts) {
  const int n = (int)x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  res.f = f(res.x);
  if (!std::isfinite(res.f))
    fail(errc::domain, "objective is not finite at the starting point");
  res.grad = numeric_gradient(f, res.x, opts.fd_step);

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  char line[160];

  // Near the minimum the objective's floating-point resolution (~eps * |f|)
  // caps how small a finite-difference gradient can get, so the requested
  // tolerance is floored at sqrt(eps) * (1 + |f|).
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  int stalled = 0;

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    const double gnorm = res.grad.lpNorm<Eigen::Infinity>();
    const double tol = std::max(opts.grad_tol, sqrt_eps * (1.0 + std::abs(res.f)));
    std::snprintf(line, sizeof line, "iter %4d  f=%.10g  |g|=%.3e\n", res.iterations, res.f,
                  gnorm);
    res.trace += line;
    if (!std::isfinite(gnorm)) break;
    if (gnorm < tol) {
      res.converged = true;
      return res;
    }

    Eigen::VectorXd dir = -(hinv * res.grad);
    double slope = res.grad.dot(dir);
    if (!(slope < 0.0)) {  // curvature went bad; restart from steepest descent
      hinv.setIdentity();
      dir = -res.grad;
      slope = res.grad.dot(dir);
    }

    // Armijo backtracking; +inf objective values simply fail the test.
    double step = 1.0;
    double fnew = std::numeric_limits<double>::infinity();
    Eigen::VectorXd xnew;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      xnew = res.x + step * dir;
      fnew = f(xnew);
      if (std::isfinite(fnew) && fnew <= res.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    // Steps that no longer move f are resolution-limited; three in a row
    // means the line search is only accepting no-ops.
    if (std::abs(fnew - res.f) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                      (1.0 + std::abs(res.f))) {
      if (++stalled >= 3) {
        res.x = std::move(xnew);
        res.f = fnew;
        break;
      }
    } else {
      stalled = 0;
    }

    Eigen::VectorXd gnew = numeric_gradient(f, xnew, opts.fd_step);
    const Eigen::VectorXd s = xnew - res.x;
    const Eigen::VectorXd yv = gnew - res.grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      hinv = (eye - rho * s * yv.transpose()) * hinv * (eye - rho * yv * s.transpose()) +
             rho * s * s.transpose();
    }
    res.x = std::move(xnew);
    res.f = fnew;
    res.grad = std::move(gnew);
  }

  // Exits here mean the line search ran out of objective resolution (or the
  // iteration budget). The achievable gradient floor depends on curvature we
  // do not know, so judge the stopping point on the relative scale: a
  // gradient this small against |f| moves the minimizer by less than any
  // consumer of the fit can notice.
  res.converged =
      res.grad.lpNorm<Eigen::Infinity>() <
      std::max({opts.grad_tol, sqrt_eps * (1.0 + std::abs(res.f)),
                opts.stall_grad_tol * (1.0 + std::abs(res.f))});
  if (!res.converged && opts.throw_on_failure)
    throw Error(errc::convergence,
                "optimizer did not reach gradient tolerance; trace:\n" + res.trace);
  return res;
}

}  // namespace sparcc
