#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sparcc/types.hpp"

namespace sparcc {

class NuisanceDensity;

// Physicists' Gauss-Hermite rule: integrates f against exp(-t^2) on the line.
// Nodes/weights come from the symmetric tridiagonal Jacobi matrix
// (off-diagonal sqrt(k/2)); weights are sqrt(pi) times the squared first
// eigenvector components. Rules are cached per order.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
const GaussHermiteRule& gauss_hermite(int order);

// \int f(y) phi(y; mean, sd) dy via the substitution y = mean + sqrt(2) sd t.
double integrate_y_hermite(const std::function<double(double)>& f, double mean, double sd,
                           int order);

// Composite Simpson on [lo, hi]; `panels` is the number of half-intervals and
// must be even and >= 2.
double integrate_simpson(const std::function<double(double)>& f, double lo, double hi,
                         int panels);

// Adaptive Simpson with absolute tolerance; depth-limited interval bisection.
double integrate_adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                                  double abs_tol, int max_depth = 32);

// Self-test fault hook: when armed, composite Simpson perturbs its first
// weight so quadrature-dependent invariants must trip.
void set_simpson_fault_for_testing(bool on);

// Process-wide default panel count for fixed-panel Simpson users (CLI-settable).
void set_default_simpson_panels(int panels);
int default_simpson_panels();

// Shared covariate grid: strictly increasing nodes inside (0,1) and, per z
// level, masses r_j(z) proportional to eta1(x_j, z) summing to one.
struct QuadratureGrid {
  Eigen::VectorXd nodes;
  std::vector<double> levels;
  std::vector<Eigen::VectorXd> masses;
  // Normalizers sum_l eta1(x_l, z) per level, needed to convert off-node
  // density values into the grid's mass scale during interpolation.
  std::vector<double> level_totals;

  int size() const { return (int)nodes.size(); }
  int level_index(double z) const { return level_index_of(levels, z); }

  // Smallest node index with node > w (so nodes[i..] is the alive tail for a
  // censored w); errc::tail_support if no node lies above.
  int first_node_above(double w) const;
};

// Equally spaced nodes spanning [lo, hi] (inclusive), masses from eta1.
// Requires m >= 3, 0 < lo < hi < 1, and positive total mass per level.
QuadratureGrid make_grid(const NuisanceDensity& eta1, const std::vector<double>& levels, int m,
                         double lo, double hi);

// Data-driven support bounds: [just below min w, just below 1]. Nodes must
// bracket every uncensored w, and the top must capture the covariate mass
// beyond the largest observation (censored X values live there).
std::pair<double, double> grid_support(const Dataset& data);

}  // namespace sparcc
