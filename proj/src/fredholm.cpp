#include "sparcc/fredholm.hpp"

#include <cmath>
#include <cstdio>

namespace sparcc {

namespace {
constexpr double kFloor = 1e-300;
}

FredholmSystem build_system(const QuadratureGrid& grid, int level, const RegressionParams& params,
                            const NuisanceDensity& eta2, const OutcomeModel& outcome,
                            int hermite_order) {
  const int m = grid.size();
  const int p = params.dim();
  if (level < 0 || level >= (int)grid.levels.size())
    fail(errc::unknown_level, "level index out of range");
  const double z = grid.levels[level];
  const Eigen::VectorXd& r = grid.masses[level];
  if (!(r.minCoeff() >= 0.0) || !(r.sum() > 0.0))
    fail(errc::degenerate_grid, "grid masses degenerate at the requested level");

  FredholmSystem sys;
  sys.level = level;
  sys.z = z;
  sys.params = params;
  sys.grid = &grid;
  sys.d.resize(m);
  sys.m_kernel = Eigen::MatrixXd::Zero(m, m);
  sys.b = Eigen::MatrixXd::Zero(m, p);

  for (int j = 0; j < m; ++j)
    sys.d[j] = eta2.survival(grid.nodes[j], z) / std::max(r[j], kFloor);

  const auto& rule = gauss_hermite(hermite_order);
  const int ng = (int)rule.nodes.size();
  const double sd = outcome.sd(params);
  const double sqrt2sd = std::sqrt(2.0) * sd;
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);

  // y[j*ng+g]: Gauss-Hermite abscissae centered at node j's outcome mean;
  // fy[(j*ng+g)*m + k] = f(y_{jg} | x_k).
  std::vector<double> yv((std::size_t)m * ng);
  std::vector<double> fy((std::size_t)m * ng * m);
  for (int j = 0; j < m; ++j) {
    const double mu_j = outcome.mean(grid.nodes[j], z, params);
    for (int g = 0; g < ng; ++g) {
      const double y = mu_j + sqrt2sd * rule.nodes[g];
      yv[(std::size_t)j * ng + g] = y;
      double* row = &fy[((std::size_t)j * ng + g) * m];
      for (int k = 0; k < m; ++k) row[k] = outcome.density(y, grid.nodes[k], z, params);
    }
  }

  // Suffix accumulators over the alive set {s..m-1}:
  //   den[j*ng+g]     = sum_{l>=s} r_l f(y_{jg}|x_l)
  //   num[(j*ng+g)*p] = sum_{l>=s} S^F(y_{jg},x_l) r_l f(y_{jg}|x_l)
  std::vector<double> den((std::size_t)m * ng, 0.0);
  std::vector<double> num((std::size_t)m * ng * p, 0.0);
  Eigen::VectorXd sc(p);

  // Segment s covers c in (x_{s-1}, x_s) (lower boundary 0 for s = 0), where
  // the alive set is exactly {s..m-1}; its eta2 mass is a survival difference.
  double surv_upper = eta2.survival(grid.nodes[m - 1], z);
  for (int s = m - 1; s >= 0; --s) {
    for (int j = 0; j < m; ++j) {
      for (int g = 0; g < ng; ++g) {
        const std::size_t jg = (std::size_t)j * ng + g;
        const double f_s = fy[jg * m + s] * r[s];
        den[jg] += f_s;
        outcome.score_full_into(yv[jg], grid.nodes[s], z, params, sc.data());
        double* np = &num[jg * p];
        for (int q = 0; q < p; ++q) np[q] += sc[q] * f_s;
      }
    }

    const double surv_lower = s == 0 ? eta2.survival(0.0, z) : eta2.survival(grid.nodes[s - 1], z);
    const double omega = surv_lower - surv_upper;
    surv_upper = surv_lower;
    if (!(omega > 0.0)) continue;

    for (int j = s; j < m; ++j) {
      for (int g = 0; g < ng; ++g) {
        const std::size_t jg = (std::size_t)j * ng + g;
        double djg = den[jg];
        if (djg < kFloor) {
          djg = kFloor;
          ++sys.underflow_count;
        }
        const double coef = omega * rule.weights[g] * inv_sqrt_pi / djg;
        const double* frow = &fy[jg * m];
        for (int k = s; k < m; ++k) sys.m_kernel(j, k) += coef * frow[k];
        const double* np = &num[jg * p];
        for (int q = 0; q < p; ++q) sys.b(j, q) += coef * np[q];
      }
    }
  }

  // The row-centered Gauss-Hermite rules break exact symmetry at the level of
  // quadrature truncation error; record the asymmetry and symmetrize.
  sys.max_asymmetry = (sys.m_kernel - sys.m_kernel.transpose()).cwiseAbs().maxCoeff();
  sys.m_kernel = ((sys.m_kernel + sys.m_kernel.transpose()) * 0.5).eval();
  return sys;
}

FredholmSolution solve(const FredholmSystem& system) {
  const int m = (int)system.d.size();
  Eigen::MatrixXd lhs = system.m_kernel;
  lhs.diagonal() += system.d;

  FredholmSolution sol;
  sol.level = system.level;
  sol.z = system.z;
  sol.params = system.params;
  sol.grid = system.grid;
  sol.max_asymmetry = system.max_asymmetry;
  sol.underflow_count = system.underflow_count;

  Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  if (llt.info() == Eigen::Success) {
    sol.a_mass = llt.solve(system.b);
    sol.a_mass += llt.solve(system.b - lhs * sol.a_mass);  // one refinement pass
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
    const double dabs_max = ldlt.vectorD().cwiseAbs().maxCoeff();
    const double dabs_min = ldlt.vectorD().cwiseAbs().minCoeff();
    if (ldlt.info() != Eigen::Success || dabs_min <= 1e-14 * dabs_max) {
      const double dmax = lhs.diagonal().cwiseAbs().maxCoeff();
      const double dmin = lhs.diagonal().cwiseAbs().minCoeff();
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "kernel-plus-diagonal factorization failed (m=%d, diag range %.3e..%.3e)", m,
                    dmin, dmax);
      fail(errc::singular_system, buf);
    }
    sol.a_mass = ldlt.solve(system.b);
    sol.a_mass += ldlt.solve(system.b - lhs * sol.a_mass);
  }

  if (!sol.a_mass.allFinite()) fail(errc::singular_system, "non-finite Fredholm solution");
  sol.residual_norm = (lhs * sol.a_mass - system.b).cwiseAbs().maxCoeff();
  return sol;
}

Eigen::VectorXd interpolate_a(const FredholmSolution& sol, const NuisanceDensity& eta1, double x,
                              double z, long* underflow_count) {
  const QuadratureGrid& grid = *sol.grid;
  const int level = grid.level_index(z);
  if (level != sol.level) fail(errc::unknown_level, "solution was built for a different z level");
  const int m = grid.size();
  const Eigen::VectorXd& nodes = grid.nodes;
  const Eigen::VectorXd& r = grid.masses[level];

  if (x < nodes[0] || x > nodes[m - 1])
    fail(errc::extrapolation,
         "x = " + std::to_string(x) + " outside the node range; widen the grid support");

  // Exact node hit: return the stored value without touching eta1.
  int lo = 0, hi = m - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (nodes[mid] <= x)
      lo = mid;
    else
      hi = mid;
  }
  for (int j : {lo, hi}) {
    if (x == nodes[j]) {
      double rj = r[j];
      if (rj < kFloor) {
        rj = kFloor;
        if (underflow_count) ++*underflow_count;
      }
      return sol.a_mass.row(j).transpose() / rj;
    }
  }

  const double t = (x - nodes[lo]) / (nodes[hi] - nodes[lo]);
  const Eigen::VectorXd amass =
      (1.0 - t) * sol.a_mass.row(lo).transpose() + t * sol.a_mass.row(hi).transpose();
  double rx = eta1.density(x, z) / grid.level_totals[level];
  if (rx < kFloor) {
    rx = kFloor;
    if (underflow_count) ++*underflow_count;
  }
  return amass / rx;
}

const FredholmSolution& FredholmCache::get(int level, const RegressionParams& params,
                                           const std::function<FredholmSolution()>& build) {
  char buf[48];
  std::string key = std::to_string(level);
  const Eigen::VectorXd v = params.to_vector();
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, ":%.12e", v[i]);
    key += buf;
  }
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    ++hits;
    return it->second;
  }
  ++misses;
  if (cache_.size() > 512) cache_.clear();
  FredholmSolution sol = build();
  max_residual = std::max(max_residual, sol.residual_norm);
  max_asymmetry = std::max(max_asymmetry, sol.max_asymmetry);
  underflow_count += sol.underflow_count;
  return cache_.emplace(std::move(key), std::move(sol)).first->second;
}

}  // namespace sparcc
