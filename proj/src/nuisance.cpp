#include "sparcc/nuisance.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sparcc/dataset.hpp"
#include "sparcc/io_util.hpp"
#include "sparcc/optim.hpp"

namespace sparcc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double beta_log_density(double a, double b, double t) {
  if (!(t > 0.0 && t < 1.0)) return -kInf;
  return (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t) -
         (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double beta_survival(double a, double b, double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return boost::math::ibetac(a, b, t);
}

// Whether the record's followed coordinate is directly observed under the
// target convention: X is seen when delta=1, C is seen when delta=0.
bool observed_for_target(const ObservedRecord& r, NuisanceTarget target) {
  return target == NuisanceTarget::x_given_z ? r.delta == 1 : r.delta == 0;
}
}  // namespace

const char* target_name(NuisanceTarget t) {
  return t == NuisanceTarget::x_given_z ? "x_given_z" : "c_given_z";
}

const char* kind_name(NuisanceKind k) {
  switch (k) {
    case NuisanceKind::beta_regression: return "beta_regression";
    case NuisanceKind::beta_misspecified: return "beta_misspecified";
    case NuisanceKind::bspline: return "bspline";
    case NuisanceKind::exact: return "exact";
  }
  return "unknown";
}

NuisanceTarget target_from_name(const std::string& s) {
  if (s == "x_given_z") return NuisanceTarget::x_given_z;
  if (s == "c_given_z") return NuisanceTarget::c_given_z;
  fail(errc::serialization, "unknown nuisance target '" + s + "'");
}

void NuisanceDensity::save_file(const std::string& path) const {
  std::ostringstream ss;
  save(ss);
  atomic_write_file(path, ss.str());
}

std::shared_ptr<NuisanceDensity> NuisanceDensity::load_file(const std::string& path) {
  std::istringstream in(read_file(path));
  return load(in);
}

// ---------------------------------------------------------------------------
// BetaWorkingModel

BetaWorkingModel::BetaWorkingModel(NuisanceTarget target, bool z_dependent, double a_int,
                                   double a_slope, double b_int, double b_slope,
                                   std::vector<double> levels)
    : NuisanceDensity(target, std::move(levels)),
      z_dependent_(z_dependent),
      a_int_(a_int),
      a_slope_(z_dependent ? a_slope : 0.0),
      b_int_(b_int),
      b_slope_(z_dependent ? b_slope : 0.0) {
  for (double z : levels_) {
    if (!(shape1(z) > 0.0 && shape2(z) > 0.0))
      fail(errc::domain, "beta shapes must be positive at every level (z = " +
                             std::to_string(z) + ")");
  }
}

double BetaWorkingModel::density(double t, double z) const {
  check_level(z);
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return std::exp(beta_log_density(shape1(z), shape2(z), t));
}

double BetaWorkingModel::survival(double t, double z) const {
  check_level(z);
  return beta_survival(shape1(z), shape2(z), t);
}

Eigen::VectorXd BetaWorkingModel::raw_params() const {
  if (z_dependent_) {
    Eigen::VectorXd p(4);
    p << a_int_, a_slope_, b_int_, b_slope_;
    return p;
  }
  Eigen::VectorXd p(2);
  p << a_int_, b_int_;
  return p;
}

BetaWorkingModel BetaWorkingModel::with_raw_params(const Eigen::VectorXd& p) const {
  if (z_dependent_) {
    if (p.size() != 4) fail(errc::domain, "z-dependent beta model expects 4 raw parameters");
    return BetaWorkingModel(target_, true, p[0], p[1], p[2], p[3], levels_);
  }
  if (p.size() != 2) fail(errc::domain, "z-independent beta model expects 2 raw parameters");
  return BetaWorkingModel(target_, false, p[0], 0.0, p[1], 0.0, levels_);
}

double BetaWorkingModel::record_loglik(const ObservedRecord& r) const {
  const double a = shape1(r.z), b = shape2(r.z);
  if (observed_for_target(r, target_)) return beta_log_density(a, b, r.w);
  const double s = beta_survival(a, b, r.w);
  return std::log(std::max(s, 1e-300));
}

void BetaWorkingModel::save(std::ostream& out) const {
  KeyValueText kv;
  kv.set("kind", kind_name(kind()));
  kv.set("target", target_name(target_));
  std::string lv;
  for (double z : levels_) lv += (lv.empty() ? "" : " ") + format_full(z);
  kv.set("levels", lv);
  kv.set("a_int", format_full(a_int_));
  kv.set("a_slope", format_full(a_slope_));
  kv.set("b_int", format_full(b_int_));
  kv.set("b_slope", format_full(b_slope_));
  out << kv.dump();
}

// ---------------------------------------------------------------------------
// BSplineDensity

BSplineDensity::BSplineDensity(NuisanceTarget target, BSplineBasis basis,
                               std::vector<double> levels, std::vector<Eigen::VectorXd> coef)
    : NuisanceDensity(target, std::move(levels)), basis_(std::move(basis)), coef_(std::move(coef)) {
  if (coef_.size() != levels_.size())
    fail(errc::domain, "one coefficient vector per level required");
  for (const auto& c : coef_) {
    if (c.size() != basis_.size()) fail(errc::domain, "coefficient length must match basis size");
    if ((c.array() < 0.0).any()) fail(errc::domain, "spline coefficients must be nonnegative");
    const double norm = c.dot(basis_.integrals());
    if (std::abs(norm - 1.0) > 1e-10)
      fail(errc::domain, "spline coefficients must normalize against the basis integrals");
  }
}

double BSplineDensity::density(double t, double z) const {
  const int l = check_level(z);
  if (t < basis_.lo() || t > basis_.hi()) return 0.0;
  return coef_[l].dot(basis_.evaluate(t));
}

double BSplineDensity::survival(double t, double z) const {
  const int l = check_level(z);
  if (t <= basis_.lo()) return 1.0;
  if (t >= basis_.hi()) return 0.0;
  return coef_[l].dot(basis_.tail_integrals(t));
}

void BSplineDensity::save(std::ostream& out) const {
  KeyValueText kv;
  kv.set("kind", "bspline");
  kv.set("target", target_name(target_));
  std::string lv;
  for (double z : levels_) lv += (lv.empty() ? "" : " ") + format_full(z);
  kv.set("levels", lv);
  kv.set("degree", std::to_string(basis_.degree()));
  kv.set("num_basis", std::to_string(basis_.size()));
  kv.set("support_lo", format_full(basis_.lo()));
  kv.set("support_hi", format_full(basis_.hi()));
  for (std::size_t l = 0; l < coef_.size(); ++l) {
    std::string cv;
    for (int k = 0; k < coef_[l].size(); ++k)
      cv += (cv.empty() ? "" : " ") + format_full(coef_[l][k]);
    kv.set("coef" + std::to_string(l), cv);
  }
  out << kv.dump();
}

// ---------------------------------------------------------------------------
// ExactDensity

ExactDensity::ExactDensity(NuisanceTarget target, std::vector<double> levels,
                           std::vector<std::pair<double, double>> beta_shapes)
    : NuisanceDensity(target, std::move(levels)),
      shapes_(std::move(beta_shapes)),
      support_(0.0, 1.0) {
  if (shapes_.size() != levels_.size()) fail(errc::domain, "one shape pair per level required");
  for (const auto& [a, b] : shapes_)
    if (!(a > 0.0 && b > 0.0)) fail(errc::domain, "exact beta shapes must be positive");
}

ExactDensity::ExactDensity(NuisanceTarget target, std::vector<double> levels,
                           std::function<double(double, double)> density_fn,
                           std::function<double(double, double)> survival_fn,
                           std::pair<double, double> support)
    : NuisanceDensity(target, std::move(levels)),
      density_fn_(std::move(density_fn)),
      survival_fn_(std::move(survival_fn)),
      support_(support) {}

double ExactDensity::density(double t, double z) const {
  const int l = check_level(z);
  if (!shapes_.empty()) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp(beta_log_density(shapes_[l].first, shapes_[l].second, t));
  }
  return density_fn_(t, z);
}

double ExactDensity::survival(double t, double z) const {
  const int l = check_level(z);
  if (!shapes_.empty()) return beta_survival(shapes_[l].first, shapes_[l].second, t);
  return survival_fn_(t, z);
}

void ExactDensity::save(std::ostream& out) const {
  if (shapes_.empty())
    fail(errc::serialization, "exact density built from callables cannot be serialized");
  KeyValueText kv;
  kv.set("kind", "exact");
  kv.set("target", target_name(target_));
  std::string lv;
  for (double z : levels_) lv += (lv.empty() ? "" : " ") + format_full(z);
  kv.set("levels", lv);
  for (std::size_t l = 0; l < shapes_.size(); ++l)
    kv.set("shapes" + std::to_string(l),
           format_full(shapes_[l].first) + " " + format_full(shapes_[l].second));
  out << kv.dump();
}

// ---------------------------------------------------------------------------
// Deserialization

std::shared_ptr<NuisanceDensity> NuisanceDensity::load(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  const KeyValueText kv = KeyValueText::parse(ss.str());
  const std::string kind = kv.get("kind");
  const NuisanceTarget target = target_from_name(kv.get("target"));
  const std::vector<double> levels = kv.get_doubles("levels");

  if (kind == "beta_regression" || kind == "beta_misspecified") {
    return std::make_shared<BetaWorkingModel>(target, kind == "beta_regression",
                                              kv.get_double("a_int"), kv.get_double("a_slope"),
                                              kv.get_double("b_int"), kv.get_double("b_slope"),
                                              levels);
  }
  if (kind == "bspline") {
    BSplineBasis basis((int)kv.get_long("num_basis"), (int)kv.get_long("degree"),
                       kv.get_double("support_lo"), kv.get_double("support_hi"));
    std::vector<Eigen::VectorXd> coef;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto vals = kv.get_doubles("coef" + std::to_string(l));
      if ((int)vals.size() != basis.size())
        fail(errc::serialization, "coefficient count mismatch in spline model");
      coef.push_back(Eigen::Map<const Eigen::VectorXd>(vals.data(), (long)vals.size()));
    }
    return std::make_shared<BSplineDensity>(target, std::move(basis), levels, std::move(coef));
  }
  if (kind == "exact") {
    std::vector<std::pair<double, double>> shapes;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto vals = kv.get_doubles("shapes" + std::to_string(l));
      if (vals.size() != 2) fail(errc::serialization, "exact model expects 2 shapes per level");
      shapes.emplace_back(vals[0], vals[1]);
    }
    return std::make_shared<ExactDensity>(target, levels, std::move(shapes));
  }
  fail(errc::serialization, "unknown nuisance kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Censored beta fit

namespace {

// Method-of-moments beta shapes from the directly observed coordinate,
// clamped into a sane region; used only to start the optimizer.
std::pair<double, double> moment_init(const std::vector<double>& vals) {
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= std::max<std::size_t>(vals.size(), 1);
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= std::max<std::size_t>(vals.size() > 1 ? vals.size() - 1 : 1, 1);
  mean = std::min(std::max(mean, 0.05), 0.95);
  var = std::max(var, 1e-4);
  const double scale = std::max(mean * (1.0 - mean) / var - 1.0, 0.2);
  return {std::min(std::max(mean * scale, 0.1), 50.0),
          std::min(std::max((1.0 - mean) * scale, 0.1), 50.0)};
}

// The beta likelihood factorizes by level, and within a level the observed
// part is exponential-family: only (count, sum log t, sum log(1-t)) and the
// individual censored t values matter.
struct LevelStats {
  long n_obs = 0;
  double sum_log = 0.0;
  double sum_log1m = 0.0;
  std::vector<double> censored;
};

double level_negloglik(const LevelStats& s, double a, double b) {
  if (!(a > 1e-8 && b > 1e-8) || a > 1e4 || b > 1e4) return kInf;
  const double log_norm =
      boost::math::lgamma(a) + boost::math::lgamma(b) - boost::math::lgamma(a + b);
  double nll = s.n_obs * log_norm - (a - 1.0) * s.sum_log - (b - 1.0) * s.sum_log1m;
  for (double t : s.censored) {
    nll -= std::log(std::max(beta_survival(a, b, t), 1e-300));
    if (!std::isfinite(nll)) return kInf;
  }
  return nll;
}

std::pair<double, double> fit_level(const LevelStats& stats, std::pair<double, double> init) {
  const Objective nll = [&](const Eigen::VectorXd& p) {
    return level_negloglik(stats, p[0], p[1]);
  };
  Eigen::VectorXd p0(2);
  p0 << init.first, init.second;
  const BfgsResult res = minimize_bfgs(nll, p0);
  return {res.x[0], res.x[1]};
}

}  // namespace

BetaWorkingModel fit_beta_censored(const Dataset& data, NuisanceTarget target, bool z_dependent) {
  if (data.records.empty()) fail(errc::empty_dataset, "cannot fit on an empty dataset");
  Dataset dd = data;
  if (dd.z_levels.empty()) dd.refresh_levels();
  check_unit_interval(dd);

  // The directly observed coordinate anchors the density part of the
  // likelihood; require a minimal number of such records per level.
  std::vector<LevelStats> per_level(dd.z_levels.size());
  std::vector<std::vector<double>> observed_per_level(dd.z_levels.size());
  for (const auto& r : dd.records) {
    LevelStats& s = per_level[(std::size_t)level_index_of(dd.z_levels, r.z)];
    if (observed_for_target(r, target)) {
      ++s.n_obs;
      s.sum_log += std::log(r.w);
      s.sum_log1m += std::log1p(-r.w);
      observed_per_level[level_index_of(dd.z_levels, r.z)].push_back(r.w);
    } else {
      s.censored.push_back(r.w);
    }
  }
  for (std::size_t l = 0; l < dd.z_levels.size(); ++l) {
    if (per_level[l].n_obs < 10)
      fail(errc::precondition,
           std::string("need >= 10 directly observed records per level to fit ") +
               target_name(target) + "; level z = " + std::to_string(dd.z_levels[l]) + " has " +
               std::to_string(per_level[l].n_obs));
  }

  if (!z_dependent) {
    // Common shapes: pool the levels into one 2-parameter problem.
    LevelStats pooled;
    std::vector<double> pooled_obs;
    for (std::size_t l = 0; l < per_level.size(); ++l) {
      pooled.n_obs += per_level[l].n_obs;
      pooled.sum_log += per_level[l].sum_log;
      pooled.sum_log1m += per_level[l].sum_log1m;
      pooled.censored.insert(pooled.censored.end(), per_level[l].censored.begin(),
                             per_level[l].censored.end());
      pooled_obs.insert(pooled_obs.end(), observed_per_level[l].begin(),
                        observed_per_level[l].end());
    }
    const auto [a, b] = fit_level(pooled, moment_init(pooled_obs));
    return BetaWorkingModel(target, false, a, 0.0, b, 0.0, dd.z_levels);
  }

  if (dd.z_levels.size() == 2) {
    // Two levels saturate the linear shape maps, so the joint maximum splits
    // into independent per-level 2-parameter fits mapped back to the lines.
    const auto [a0, b0] = fit_level(per_level[0], moment_init(observed_per_level[0]));
    const auto [a1, b1] = fit_level(per_level[1], moment_init(observed_per_level[1]));
    const double dz = dd.z_levels[1] - dd.z_levels[0];
    if (!(std::abs(dz) > 1e-12))
      fail(errc::precondition, "z levels too close to identify z-dependent shapes");
    const double a_slope = (a1 - a0) / dz;
    const double b_slope = (b1 - b0) / dz;
    return BetaWorkingModel(target, true, a0 - dd.z_levels[0] * a_slope, a_slope,
                            b0 - dd.z_levels[0] * b_slope, b_slope, dd.z_levels);
  }

  // Three or more levels: the lines constrain them jointly.
  std::vector<double> pooled_obs;
  for (const auto& v : observed_per_level) pooled_obs.insert(pooled_obs.end(), v.begin(), v.end());
  const auto [pa, pb] = moment_init(pooled_obs);
  Eigen::VectorXd p0(4);
  p0 << pa, 0.0, pb, 0.0;
  const Objective nll = [&](const Eigen::VectorXd& p) {
    double total = 0.0;
    for (std::size_t l = 0; l < per_level.size(); ++l) {
      const double z = dd.z_levels[l];
      total += level_negloglik(per_level[l], p[0] + p[1] * z, p[2] + p[3] * z);
      if (!std::isfinite(total)) return kInf;
    }
    return total;
  };
  const BfgsResult res = minimize_bfgs(nll, p0);
  return BetaWorkingModel(target, true, res.x[0], res.x[1], res.x[2], res.x[3], dd.z_levels);
}

// ---------------------------------------------------------------------------
// Censored B-spline fit

BSplineDensity fit_bspline_censored(const Dataset& data, NuisanceTarget target, int num_basis,
                                    int degree) {
  if (num_basis < degree + 2)
    fail(errc::precondition, "spline fit needs num_basis >= degree + 2");
  Dataset dd = data;
  if (dd.z_levels.empty()) dd.refresh_levels();
  check_unit_interval(dd);

  // Basis on the scaled support [0,1], shared across levels.
  BSplineBasis basis(num_basis, degree, 0.0, 1.0);
  const Eigen::VectorXd ints = basis.integrals();

  std::vector<Eigen::VectorXd> coef;
  for (std::size_t l = 0; l < dd.z_levels.size(); ++l) {
    const double zl = dd.z_levels[l];
    // Precompute per-record basis rows: density row for the directly observed
    // coordinate, tail-integral row for the censored one. The objective is
    // then linear algebra in the coefficient vector alone.
    std::vector<Eigen::VectorXd> rows;
    for (const auto& r : dd.records) {
      if (r.z != zl) continue;
      rows.push_back(observed_for_target(r, target) ? basis.evaluate(r.w)
                                                    : basis.tail_integrals(r.w));
    }
    if ((int)rows.size() < 5 * num_basis)
      fail(errc::precondition, "spline fit needs >= 5*num_basis records per level; level z = " +
                                   std::to_string(zl) + " has " + std::to_string(rows.size()));

    // Softmax over theta (theta_0 pinned at 0) keeps coefficients positive and
    // normalized against the basis integrals by construction.
    const int free_dim = num_basis - 1;
    const auto coef_of = [&](const Eigen::VectorXd& theta) {
      Eigen::VectorXd e(num_basis);
      double tmax = 0.0;
      for (int k = 1; k < num_basis; ++k) tmax = std::max(tmax, theta[k - 1]);
      e[0] = std::exp(-tmax);
      for (int k = 1; k < num_basis; ++k) e[k] = std::exp(theta[k - 1] - tmax);
      return Eigen::VectorXd(e / e.dot(ints));
    };
    const Objective nll = [&](const Eigen::VectorXd& theta) {
      const Eigen::VectorXd c = coef_of(theta);
      double acc = 0.0;
      for (const auto& row : rows) {
        const double v = c.dot(row);
        if (!(v > 0.0)) return kInf;
        acc -= std::log(v);
      }
      return acc;
    };

    const BfgsResult res = minimize_bfgs(nll, Eigen::VectorXd::Zero(free_dim));
    coef.push_back(coef_of(res.x));
  }
  return BSplineDensity(target, std::move(basis), dd.z_levels, std::move(coef));
}

// ---------------------------------------------------------------------------

Eigen::VectorXd conditional_moment_e1(const OutcomeModel& outcome, const RegressionParams& params,
                                      const std::function<Eigen::VectorXd(double)>& g, double y,
                                      double w, double z, const QuadratureGrid& grid) {
  const int level = grid.level_index(z);
  const int j0 = grid.first_node_above(w);
  const Eigen::VectorXd& r = grid.masses[level];

  double den = 0.0;
  Eigen::VectorXd num;
  for (int j = j0; j < grid.size(); ++j) {
    const double fw = outcome.density(y, grid.nodes[j], z, params) * r[j];
    den += fw;
    const Eigen::VectorXd gj = g(grid.nodes[j]);
    if (num.size() == 0) num = Eigen::VectorXd::Zero(gj.size());
    num += fw * gj;
  }
  if (!(den > 1e-300))
    fail(errc::conditioning, "tail denominator underflow in conditional moment at w = " +
                                 std::to_string(w));
  return num / den;
}

}  // namespace sparcc
