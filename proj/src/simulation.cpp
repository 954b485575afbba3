#include "sparcc/simulation.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "sparcc/errors.hpp"
#include "sparcc/io_util.hpp"
#include "sparcc/nuisance.hpp"
#include "sparcc/quadrature.hpp"
#include "sparcc/thread_pool.hpp"

namespace sparcc {

namespace {

constexpr double kZ975 = 1.959963984540054;  // normal 97.5% quantile
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) { return std::isnan(v) ? "nan" : format_full(v); }

NuisanceSpec spec_from_scenario_word(const std::string& w) {
  if (w == "correct") return NuisanceSpec::parametric;
  if (w == "incorrect") return NuisanceSpec::parametric_mis;
  if (w == "nonpar" || w == "nonparametric") return NuisanceSpec::bspline;
  if (w == "exact") return NuisanceSpec::exact;
  return nuisance_spec_from_name(w);  // canonical model names as aliases
}

const char* scenario_word(NuisanceSpec s) {
  switch (s) {
    case NuisanceSpec::parametric: return "correct";
    case NuisanceSpec::parametric_mis: return "incorrect";
    case NuisanceSpec::bspline: return "nonpar";
    case NuisanceSpec::exact: return "exact";
  }
  fail(errc::domain, "unknown nuisance spec");
}

void check_shape_maps(const Eigen::Vector4d& maps, const char* what) {
  for (double z : {0.0, 1.0}) {
    if (!(maps[0] + maps[1] * z > 0.0) || !(maps[2] + maps[3] * z > 0.0))
      fail(errc::domain, std::string(what) + " beta shapes must be positive at z in {0,1}");
  }
}

std::shared_ptr<const NuisanceDensity> exact_density(NuisanceTarget target,
                                                     const Eigen::Vector4d& maps) {
  std::vector<std::pair<double, double>> shapes = {
      {maps[0], maps[2]}, {maps[0] + maps[1], maps[2] + maps[3]}};
  return std::make_shared<ExactDensity>(target, std::vector<double>{0.0, 1.0}, shapes);
}

FitResult fit_scenario(const ScenarioSpec& sc, const Dataset& data, const SimConfig& cfg,
                       const Eigen::Vector4d& alpha2) {
  FitOptions opts = cfg.fit;
  opts.interaction = cfg.beta_true.interaction;
  opts.compute_se = true;
  switch (sc.estimator) {
    case EstimatorKind::complete_case:
      return fit_complete_case(data, opts);
    case EstimatorKind::oracle:
      return fit_oracle(data, opts);
    case EstimatorKind::mle: {
      NuisanceChoice c1{sc.eta1, nullptr};
      if (sc.eta1 == NuisanceSpec::exact)
        c1.supplied = exact_density(NuisanceTarget::x_given_z, cfg.alpha1);
      return fit_mle(data, c1, opts);
    }
    case EstimatorKind::sparcc: {
      NuisanceChoice c1{sc.eta1, nullptr}, c2{sc.eta2, nullptr};
      if (sc.eta1 == NuisanceSpec::exact)
        c1.supplied = exact_density(NuisanceTarget::x_given_z, cfg.alpha1);
      if (sc.eta2 == NuisanceSpec::exact)
        c2.supplied = exact_density(NuisanceTarget::c_given_z, alpha2);
      return fit_sparcc(data, c1, c2, opts);
    }
  }
  fail(errc::domain, "unknown estimator kind");
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kNan;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

CellSummary aggregate_cell(const ScenarioSpec& sc, const std::vector<ReplicateCell>& cells,
                           const SimConfig& cfg) {
  CellSummary cs;
  cs.scenario = sc;
  cs.attempted = (long)cells.size();
  const int p = cfg.beta_true.dim();
  const Eigen::VectorXd truth = cfg.beta_true.to_vector();

  std::vector<const ReplicateCell*> ok;
  double iters = 0.0;
  for (const auto& c : cells) {
    cs.max_fredholm_residual = std::max(cs.max_fredholm_residual, c.max_fredholm_residual);
    cs.underflows += c.underflows;
    if (c.ok) {
      ok.push_back(&c);
      iters += c.newton_iterations;
    }
  }
  cs.failures = cs.attempted - (long)ok.size();
  cs.reliable = cs.failures * 20 <= cs.attempted;
  cs.mean_newton_iterations = ok.empty() ? kNan : iters / (double)ok.size();

  cs.mean_estimate = Eigen::VectorXd::Constant(p, kNan);
  cs.bias = Eigen::VectorXd::Constant(p, kNan);
  cs.ese = Eigen::VectorXd::Constant(p, kNan);
  cs.ase_mean = Eigen::VectorXd::Constant(p, kNan);
  cs.ase_median = Eigen::VectorXd::Constant(p, kNan);
  cs.coverage = Eigen::VectorXd::Constant(p, kNan);
  cs.var_beta1 = cs.var_beta1_lo = cs.var_beta1_hi = kNan;
  const long succ = (long)ok.size();
  if (succ == 0) return cs;

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  for (const auto* c : ok) mean += c->estimate;
  mean /= (double)succ;
  cs.mean_estimate = mean;
  cs.bias = mean - truth;

  if (succ >= 2) {
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(p);
    for (const auto* c : ok) ss += (c->estimate - mean).cwiseAbs2();
    cs.ese = (ss / (double)(succ - 1)).cwiseSqrt();
  }

  for (int k = 0; k < p; ++k) {
    std::vector<double> ses;
    long covered = 0;
    for (const auto* c : ok) {
      if (c->se.size() != p) continue;
      ses.push_back(c->se[k]);
      if (std::abs(c->estimate[k] - truth[k]) <= kZ975 * c->se[k]) ++covered;
    }
    if (!ses.empty()) {
      double acc = 0.0;
      for (double s : ses) acc += s;
      cs.ase_mean[k] = acc / (double)ses.size();
      cs.ase_median[k] = median_of(ses);
      cs.coverage[k] = 100.0 * (double)covered / (double)ses.size();
    }
  }

  if (succ >= 2 && p > 1) {
    const double s2 = cs.ese[1] * cs.ese[1];
    cs.var_beta1 = s2;
    boost::math::chi_squared chi((double)(succ - 1));
    cs.var_beta1_lo = (double)(succ - 1) * s2 / boost::math::quantile(chi, 0.975);
    cs.var_beta1_hi = (double)(succ - 1) * s2 / boost::math::quantile(chi, 0.025);
  }
  return cs;
}

}  // namespace

std::string ScenarioSpec::label() const {
  std::string out = estimator_name(estimator);
  if (estimator == EstimatorKind::mle) out += std::string(":") + scenario_word(eta1);
  if (estimator == EstimatorKind::sparcc)
    out += std::string(":") + scenario_word(eta1) + ":" + scenario_word(eta2);
  return out;
}

ScenarioSpec ScenarioSpec::parse(const std::string& text) {
  std::vector<std::string> parts = split_fields(text, ':');
  if (parts.empty() || parts[0].empty()) fail(errc::domain, "empty scenario");
  ScenarioSpec sc;
  sc.estimator = estimator_from_name(parts[0]);
  const std::size_t extra = parts.size() - 1;
  switch (sc.estimator) {
    case EstimatorKind::complete_case:
    case EstimatorKind::oracle:
      if (extra > 0)
        fail(errc::domain, "scenario '" + text + "': this estimator takes no nuisance arguments");
      break;
    case EstimatorKind::mle:
      if (extra > 1)
        fail(errc::domain, "scenario '" + text + "': the likelihood estimator takes one nuisance");
      if (extra == 1) sc.eta1 = spec_from_scenario_word(parts[1]);
      break;
    case EstimatorKind::sparcc:
      if (extra > 2) fail(errc::domain, "scenario '" + text + "': too many nuisance arguments");
      if (extra >= 1) sc.eta1 = spec_from_scenario_word(parts[1]);
      sc.eta2 = extra == 2 ? spec_from_scenario_word(parts[2]) : sc.eta1;
      break;
  }
  return sc;
}

SimConfig::SimConfig() {
  alpha1 << 1.5, 1.0, 2.5, -1.0;
  beta_true.beta0 = 1.0;
  beta_true.beta1 = 10.0;
  beta_true.beta2 = 2.0;
  beta_true.log_sigma2 = 0.0;
  beta_true.interaction = false;
  scenarios = default_scenarios();
}

std::vector<ScenarioSpec> SimConfig::default_scenarios() {
  const char* names[] = {"sparcc:correct:correct", "sparcc:incorrect:incorrect",
                         "sparcc:nonpar:nonpar",   "mle:correct",
                         "mle:incorrect",          "mle:nonpar",
                         "complete-case",          "oracle"};
  std::vector<ScenarioSpec> out;
  for (const char* n : names) out.push_back(ScenarioSpec::parse(n));
  return out;
}

void SimConfig::validate() const {
  if (n < 50) fail(errc::domain, "simulation needs n >= 50");
  if (replicates < 1) fail(errc::domain, "simulation needs replicates >= 1");
  if (!(q_target > 0.0 && q_target < 1.0))
    fail(errc::domain, "target censoring proportion must lie in (0,1)");
  if (threads < 0) fail(errc::domain, "threads must be >= 0");
  if (scenarios.empty()) fail(errc::domain, "no scenarios requested");
  check_shape_maps(alpha1, "covariate");
  if (!beta_true.to_vector().allFinite()) fail(errc::domain, "beta_true must be finite");
  if (fit.nodes < 3) fail(errc::domain, "grid needs at least 3 nodes");
  if (fit.hermite_order < 1) fail(errc::domain, "hermite order must be >= 1");
}

std::string SimConfig::dump() const {
  KeyValueText kv;
  kv.set("n", std::to_string(n));
  kv.set("replicates", std::to_string(replicates));
  kv.set("q_target", format_full(q_target));
  std::string a1;
  for (int i = 0; i < 4; ++i) a1 += (i ? " " : "") + format_full(alpha1[i]);
  kv.set("alpha1", a1);
  const Eigen::VectorXd bt = beta_true.to_vector();
  std::string bts;
  for (int i = 0; i < bt.size(); ++i) bts += (i ? " " : "") + format_full(bt[i]);
  kv.set("beta_true", bts);
  kv.set("interaction", beta_true.interaction ? "1" : "0");
  std::string sc;
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    sc += (i ? ", " : "") + scenarios[i].label();
  kv.set("scenarios", sc);
  kv.set("seed", std::to_string(seed));
  kv.set("threads", std::to_string(threads));
  kv.set("table1_units", table1_units ? "1" : "0");
  kv.set("nodes", std::to_string(fit.nodes));
  kv.set("hermite_order", std::to_string(fit.hermite_order));
  kv.set("bspline_basis", std::to_string(fit.bspline_basis));
  kv.set("bspline_degree", std::to_string(fit.bspline_degree));
  return kv.dump();
}

SimConfig SimConfig::parse(const std::string& text) {
  const KeyValueText kv = KeyValueText::parse(text);
  static const std::vector<std::string> known = {
      "n",     "replicates", "q_target",     "alpha1",        "beta_true",
      "interaction", "scenarios",  "seed",         "threads",       "table1_units",
      "nodes", "hermite_order", "bspline_basis", "bspline_degree"};
  for (const auto& k : kv.keys())
    if (std::find(known.begin(), known.end(), k) == known.end())
      fail(errc::schema, "unknown config key '" + k + "'");

  SimConfig cfg;
  if (kv.has("n")) cfg.n = kv.get_long("n");
  if (kv.has("replicates")) cfg.replicates = kv.get_long("replicates");
  if (kv.has("q_target")) cfg.q_target = kv.get_double("q_target");
  if (kv.has("alpha1")) {
    const auto v = kv.get_doubles("alpha1");
    if (v.size() != 4) fail(errc::schema, "alpha1 needs exactly 4 values");
    for (int i = 0; i < 4; ++i) cfg.alpha1[i] = v[(std::size_t)i];
  }
  const bool interaction = kv.has("interaction") && kv.get_long("interaction") != 0;
  cfg.beta_true.interaction = interaction;
  if (kv.has("beta_true")) {
    const auto v = kv.get_doubles("beta_true");
    Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(v.data(), (Eigen::Index)v.size());
    if ((int)v.size() != cfg.beta_true.dim())
      fail(errc::schema, "beta_true needs " + std::to_string(cfg.beta_true.dim()) + " values");
    cfg.beta_true = RegressionParams::from_vector(bv, interaction);
  }
  if (kv.has("scenarios")) {
    cfg.scenarios.clear();
    for (const auto& part : split_fields(kv.get("scenarios"), ','))
      if (!part.empty()) cfg.scenarios.push_back(ScenarioSpec::parse(part));
  }
  if (kv.has("seed")) {
    const std::string s = kv.get("seed");
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail(errc::schema, "seed must be an unsigned 64-bit integer");
    cfg.seed = v;
  }
  if (kv.has("threads")) cfg.threads = (int)kv.get_long("threads");
  if (kv.has("table1_units")) cfg.table1_units = kv.get_long("table1_units") != 0;
  if (kv.has("nodes")) cfg.fit.nodes = (int)kv.get_long("nodes");
  if (kv.has("hermite_order")) cfg.fit.hermite_order = (int)kv.get_long("hermite_order");
  if (kv.has("bspline_basis")) cfg.fit.bspline_basis = (int)kv.get_long("bspline_basis");
  if (kv.has("bspline_degree")) cfg.fit.bspline_degree = (int)kv.get_long("bspline_degree");
  return cfg;
}

double censoring_probability(const Eigen::Vector4d& alpha1, const Eigen::Vector4d& alpha2) {
  check_shape_maps(alpha1, "covariate");
  check_shape_maps(alpha2, "censoring");
  double total = 0.0;
  for (double z : {0.0, 1.0}) {
    const boost::math::beta_distribution<double> fx(alpha1[0] + alpha1[1] * z,
                                                    alpha1[2] + alpha1[3] * z);
    const double ac = alpha2[0] + alpha2[1] * z;
    const double bc = alpha2[2] + alpha2[3] * z;
    // P(X > C | z) = int f_X(x|z) F_C(x|z) dx; endpoint limits are zero for
    // every integrable shape combination.
    const auto integrand = [&](double x) {
      if (x <= 0.0 || x >= 1.0) return 0.0;
      return boost::math::pdf(fx, x) * boost::math::ibeta(ac, bc, x);
    };
    total += 0.5 * integrate_simpson(integrand, 0.0, 1.0, 2000);
  }
  return total;
}

Eigen::Vector4d calibrate_censoring(const Eigen::Vector4d& alpha1, double q_target) {
  if (!(q_target > 0.0 && q_target < 1.0))
    fail(errc::domain, "target censoring proportion must lie in (0,1)");
  const auto with_s = [](double s) {
    Eigen::Vector4d a2;
    a2 << s, 0.0, 2.5, 0.0;
    return a2;
  };
  const auto p_of = [&](double s) { return censoring_probability(alpha1, with_s(s)); };

  double lo = 1e-3, hi = 1e3;
  const double p_lo = p_of(lo), p_hi = p_of(hi);
  // P(X > C) decreases in the first censoring shape: larger s pushes C up.
  if (!(p_lo >= q_target && q_target >= p_hi))
    fail(errc::calibration,
         "censoring target " + format_full(q_target) + " outside the attainable range [" +
             format_full(p_hi) + ", " + format_full(p_lo) + "]");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double pm = p_of(mid);
    if (std::abs(pm - q_target) < 1e-4) return with_s(mid);
    (pm > q_target ? lo : hi) = mid;
  }
  fail(errc::calibration, "censoring-shape bisection failed to reach the target");
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t rep) {
  // splitmix64 scramble of a counter offset keeps streams decorrelated.
  std::uint64_t x = master + 0x9E3779B97F4A7C15ull * (rep + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

std::vector<CompleteRecord> generate_complete_data(const SimConfig& config,
                                                   const Eigen::Vector4d& alpha2,
                                                   std::uint64_t stream_seed) {
  check_shape_maps(config.alpha1, "covariate");
  check_shape_maps(alpha2, "censoring");
  std::mt19937_64 rng(stream_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sd = std::sqrt(config.beta_true.sigma2());

  const auto draw_beta = [&rng](double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    for (;;) {
      const double g1 = ga(rng), g2 = gb(rng);
      const double v = g1 / (g1 + g2);
      if (v > 0.0 && v < 1.0) return v;  // guard gamma underflow at tiny shapes
    }
  };

  std::vector<CompleteRecord> out;
  out.reserve((std::size_t)config.n);
  for (long i = 0; i < config.n; ++i) {
    CompleteRecord r;
    r.z = unif(rng) < 0.5 ? 1.0 : 0.0;
    r.x = draw_beta(config.alpha1[0] + config.alpha1[1] * r.z,
                    config.alpha1[2] + config.alpha1[3] * r.z);
    r.c = draw_beta(alpha2[0] + alpha2[1] * r.z, alpha2[2] + alpha2[3] * r.z);
    double mu = config.beta_true.beta0 + config.beta_true.beta1 * r.x +
                config.beta_true.beta2 * r.z;
    if (config.beta_true.interaction) mu += config.beta_true.beta3 * r.x * r.z;
    r.y = mu + sd * gauss(rng);
    out.push_back(r);
  }
  return out;
}

SimResult run_monte_carlo(const SimConfig& config) {
  return run_monte_carlo(config, calibrate_censoring(config.alpha1, config.q_target));
}

SimResult run_monte_carlo(const SimConfig& config, const Eigen::Vector4d& alpha2) {
  config.validate();
  check_shape_maps(alpha2, "censoring");
  SimResult res;
  res.config = config;
  res.alpha2 = alpha2;
  res.q_realized = censoring_probability(config.alpha1, res.alpha2);

  const long reps = config.replicates;
  const std::size_t nsc = config.scenarios.size();
  res.replicates.assign(nsc, std::vector<ReplicateCell>((std::size_t)reps));

  int threads = config.threads;
  if (threads <= 0) threads = (int)std::max(1u, std::thread::hardware_concurrency());

  parallel_for(reps, threads, [&](long rep) {
    const auto complete =
        generate_complete_data(config, res.alpha2, replicate_seed(config.seed, (std::uint64_t)rep));
    Dataset data;
    data.records.reserve(complete.size());
    for (const auto& cr : complete) data.records.push_back(cr.observed(true));
    data.refresh_levels();

    for (std::size_t s = 0; s < nsc; ++s) {
      ReplicateCell& cell = res.replicates[s][(std::size_t)rep];
      try {
        const FitResult fr = fit_scenario(config.scenarios[s], data, config, res.alpha2);
        cell.ok = true;
        cell.estimate = fr.estimate;
        if (fr.diagnostics.vcov_ok) cell.se = fr.se;
        cell.max_fredholm_residual = fr.diagnostics.max_fredholm_residual;
        cell.underflows = fr.diagnostics.underflow_count;
        cell.newton_iterations = fr.diagnostics.newton_iterations;
      } catch (const Error& e) {
        // Any library error here is attributable to this replicate's data;
        // configuration problems surface before the loop starts.
        cell.ok = false;
        cell.error = errc_name(e.code());
      }
    }
  });

  res.cells.reserve(nsc);
  for (std::size_t s = 0; s < nsc; ++s)
    res.cells.push_back(aggregate_cell(config.scenarios[s], res.replicates[s], config));
  return res;
}

std::string SimResult::summary_csv() const {
  const double unit = config.table1_units ? 10.0 : 1.0;
  const std::vector<std::string> names = config.beta_true.names();
  std::string out =
      "scenario,parameter,bias,ese,ase_mean,ase_median,coverage_pct,failures,attempted,reliable\n";
  for (const auto& c : cells) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      const int i = (int)k;
      out += c.scenario.label() + "," + names[k] + "," + fmt(unit * c.bias[i]) + "," +
             fmt(unit * c.ese[i]) + "," + fmt(unit * c.ase_mean[i]) + "," +
             fmt(unit * c.ase_median[i]) + "," + fmt(c.coverage[i]) + "," +
             std::to_string(c.failures) + "," + std::to_string(c.attempted) + "," +
             (c.reliable ? "1" : "0") + "\n";
    }
  }
  return out;
}

std::string SimResult::replicates_csv() const {
  const std::vector<std::string> names = config.beta_true.names();
  const int p = (int)names.size();
  std::string out = "scenario,replicate,ok,error";
  for (const auto& n : names) out += ",est_" + n;
  for (const auto& n : names) out += ",se_" + n;
  out += "\n";
  for (std::size_t s = 0; s < cells.size(); ++s) {
    const std::string label = cells[s].scenario.label();
    for (std::size_t r = 0; r < replicates[s].size(); ++r) {
      const ReplicateCell& c = replicates[s][r];
      out += label + "," + std::to_string(r) + "," + (c.ok ? "1" : "0") + "," + c.error;
      for (int k = 0; k < p; ++k)
        out += "," + (c.estimate.size() == p ? fmt(c.estimate[k]) : std::string("nan"));
      for (int k = 0; k < p; ++k)
        out += "," + (c.se.size() == p ? fmt(c.se[k]) : std::string("nan"));
      out += "\n";
    }
  }
  return out;
}

std::string SimResult::metadata_text() const {
  std::string out = "# monte carlo run metadata\n";
  out += config.dump();
  std::string a2;
  for (int i = 0; i < 4; ++i) a2 += (i ? " " : "") + format_full(alpha2[i]);
  out += "alpha2 = " + a2 + "\n";
  out += "q_realized = " + format_full(q_realized) + "\n";
  for (std::size_t s = 0; s < cells.size(); ++s) {
    const std::string tag = std::to_string(s);
    out += "scenario_" + tag + " = " + cells[s].scenario.label() + "\n";
    out += "failures_" + tag + " = " + std::to_string(cells[s].failures) + "\n";
    out += "reliable_" + tag + " = " + (cells[s].reliable ? "1" : "0") + "\n";
    out += "max_fredholm_residual_" + tag + " = " + fmt(cells[s].max_fredholm_residual) + "\n";
    out += "underflows_" + tag + " = " + std::to_string(cells[s].underflows) + "\n";
    out += "mean_newton_iterations_" + tag + " = " + fmt(cells[s].mean_newton_iterations) + "\n";
  }
  return out;
}

SweepResult sweep_censoring(const SimConfig& config, const std::vector<double>& q_list) {
  SweepResult out;
  for (double q : q_list) {
    SimConfig cfg = config;  // same master seed per q: common random numbers
    cfg.q_target = q;
    const SimResult r = run_monte_carlo(cfg);
    for (const auto& c : r.cells) {
      SweepRow row;
      row.q = q;
      row.scenario = c.scenario.label();
      row.successes = c.attempted - c.failures;
      row.failures = c.failures;
      row.var_beta1 = c.var_beta1;
      row.var_beta1_lo = c.var_beta1_lo;
      row.var_beta1_hi = c.var_beta1_hi;
      row.ese_beta1 = c.ese.size() > 1 ? c.ese[1] : kNan;
      out.rows.push_back(row);
    }
  }
  return out;
}

std::string SweepResult::csv() const {
  std::string out = "q,scenario,successes,failures,var_beta1,var_beta1_lo,var_beta1_hi,ese_beta1\n";
  for (const auto& r : rows) {
    out += fmt(r.q) + "," + r.scenario + "," + std::to_string(r.successes) + "," +
           std::to_string(r.failures) + "," + fmt(r.var_beta1) + "," + fmt(r.var_beta1_lo) + "," +
           fmt(r.var_beta1_hi) + "," + fmt(r.ese_beta1) + "\n";
  }
  return out;
}

}  // namespace sparcc
