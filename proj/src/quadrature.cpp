#include "sparcc/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "sparcc/nuisance.hpp"

namespace sparcc {

namespace {
bool g_simpson_fault = false;
int g_default_panels = 400;

std::mutex g_gh_mutex;
std::map<int, GaussHermiteRule> g_gh_cache;
}  // namespace

void set_simpson_fault_for_testing(bool on) { g_simpson_fault = on; }
void set_default_simpson_panels(int panels) {
  if (panels < 2 || panels % 2 != 0) fail(errc::domain, "simpson panels must be even and >= 2");
  g_default_panels = panels;
}
int default_simpson_panels() { return g_default_panels; }

const GaussHermiteRule& gauss_hermite(int order) {
  if (order < 1) fail(errc::domain, "gauss-hermite order must be >= 1");
  std::lock_guard<std::mutex> lock(g_gh_mutex);
  auto it = g_gh_cache.find(order);
  if (it != g_gh_cache.end()) return it->second;

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) fail(errc::conditioning, "gauss-hermite eigensolve failed");

  GaussHermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(order);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int i = 0; i < order; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = sqrt_pi * v0 * v0;
  }
  return g_gh_cache.emplace(order, std::move(rule)).first->second;
}

double integrate_y_hermite(const std::function<double(double)>& f, double mean, double sd,
                           int order) {
  if (!(sd > 0.0)) fail(errc::domain, "hermite integration needs sd > 0");
  const auto& rule = gauss_hermite(order);
  const double scale = std::sqrt(2.0) * sd;
  double acc = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * f(mean + scale * rule.nodes[i]);
  return acc / std::sqrt(M_PI);
}

double integrate_simpson(const std::function<double(double)>& f, double lo, double hi,
                         int panels) {
  if (panels < 2 || panels % 2 != 0) fail(errc::domain, "simpson panels must be even and >= 2");
  if (!(hi > lo)) fail(errc::domain, "simpson needs hi > lo");
  const double h = (hi - lo) / panels;
  double w0 = 1.0;
  if (g_simpson_fault) w0 *= 1.01;  // self-test fault injection
  double acc = w0 * f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return acc * h / 3.0;
}

namespace {
double adaptive_step(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace

double integrate_adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                                  double abs_tol, int max_depth) {
  if (!(hi > lo)) {
    if (hi == lo) return 0.0;
    fail(errc::domain, "adaptive simpson needs hi >= lo");
  }
  const double m = 0.5 * (lo + hi);
  const double fa = f(lo), fm = f(m), fb = f(hi);
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_step(f, lo, hi, fa, fm, fb, whole, abs_tol, max_depth);
}

int QuadratureGrid::first_node_above(double w) const {
  // nodes are sorted; find smallest index with node > w.
  int lo = 0, hi = (int)nodes.size();
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (nodes[mid] > w)
      hi = mid;
    else
      lo = mid + 1;
  }
  if (lo >= (int)nodes.size())
    fail(errc::tail_support, "no grid node above censored w = " + std::to_string(w));
  return lo;
}

QuadratureGrid make_grid(const NuisanceDensity& eta1, const std::vector<double>& levels, int m,
                         double lo, double hi) {
  if (m < 3) fail(errc::precondition, "grid needs at least 3 nodes");
  if (!(0.0 < lo && lo < hi && hi < 1.0))
    fail(errc::degenerate_grid, "grid support must satisfy 0 < lo < hi < 1");
  if (levels.empty()) fail(errc::degenerate_grid, "grid needs at least one z level");

  QuadratureGrid grid;
  grid.levels = levels;
  grid.nodes.resize(m);
  const double h = (hi - lo) / (m - 1);
  for (int j = 0; j < m; ++j) grid.nodes[j] = lo + h * j;
  grid.nodes[m - 1] = hi;  // guard against accumulation drift at the top end

  grid.masses.reserve(levels.size());
  for (double z : levels) {
    Eigen::VectorXd mass(m);
    for (int j = 0; j < m; ++j) {
      const double d = eta1.density(grid.nodes[j], z);
      if (!std::isfinite(d) || d < 0.0)
        fail(errc::degenerate_grid, "eta1 is not finite/nonnegative on the grid");
      mass[j] = d;
    }
    const double total = mass.sum();
    if (!(total > 0.0))
      fail(errc::degenerate_grid, "eta1 has zero mass on the grid at z = " + std::to_string(z));
    grid.masses.push_back(mass / total);
    grid.level_totals.push_back(total);
  }
  return grid;
}

std::pair<double, double> grid_support(const Dataset& data) {
  if (data.records.empty()) fail(errc::empty_dataset, "no records to derive grid support from");
  double wmin = 1.0, wmax = 0.0;
  for (const auto& r : data.records) {
    wmin = std::min(wmin, r.w);
    wmax = std::max(wmax, r.w);
  }
  // Lower end slightly below the smallest w so interpolation brackets it
  // (covariate mass further down is O(1/n) and cancels out of the tail
  // ratios, which only ever condition on X > w >= wmin). The upper end must
  // capture essentially all covariate mass: censored X values live ABOVE the
  // observed w, so cutting the grid at wmax would condition the tail
  // expectations on X <= wmax and bias every censored record. Stop just
  // short of 1 (beta densities may be singular at the boundary), while still
  // clearing wmax when the data itself crowds 1.
  const double lo = 0.999 * wmin;
  const double hi = std::max(1.0 - 1e-4, wmax + 0.001 * (1.0 - wmax));
  if (!(lo > 0.0) || !(hi < 1.0) || !(lo < hi))
    fail(errc::degenerate_grid, "data does not admit a grid inside (0,1)");
  return {lo, hi};
}

}  // namespace sparcc
