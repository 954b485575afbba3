// Command-line front end: fit / simulate / calibrate / sweep / selftest.
// Exit codes: 0 success, 1 selftest failure, 2 user or input error,
// 3 numerical failure (non-convergence, singular system, calibration).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sparcc/dataset.hpp"
#include "sparcc/errors.hpp"
#include "sparcc/estimators.hpp"
#include "sparcc/io_util.hpp"
#include "sparcc/nuisance.hpp"
#include "sparcc/quadrature.hpp"
#include "sparcc/selftest.hpp"
#include "sparcc/simulation.hpp"

namespace {

using json = nlohmann::ordered_json;

const char* hint_for(sparcc::errc c) {
  using sparcc::errc;
  switch (c) {
    case errc::schema:
      return "the CSV needs a header naming y, w, delta and z (x optional); config keys must match the documented set";
    case errc::parse:
      return "fix the cited row: numbers must be plain decimals and delta must be 0 or 1";
    case errc::empty_dataset: return "the file has a header but no data rows";
    case errc::domain: return "a value lies outside the range the operation supports; see the message";
    case errc::precondition:
      return "the request needs more data or different options; see the message";
    case errc::unknown_level:
      return "z takes a value the nuisance model was not fitted for; refit on this dataset";
    case errc::tail_support:
      return "a censored w sits at or beyond the last grid node; check the w scale or raise --nodes";
    case errc::degenerate_grid:
      return "the observed w values span too little room for a grid; check the data scale";
    case errc::extrapolation: return "evaluation outside the fitted range; check the w/x scale";
    case errc::conditioning:
      return "a matrix factorization failed; the design may be collinear or the sample too small";
    case errc::serialization: return "the file could not be read or written; check path and format";
    case errc::convergence:
      return "iteration limit hit; try more --nodes, a cleaner dataset, or another estimator";
    case errc::singular_system:
      return "a linear system was singular; the model may be unidentified on this data";
    case errc::calibration:
      return "the requested censoring fraction is unreachable for this design; see the attainable range";
  }
  return "see the message";
}

std::string fmt_g(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_json(const std::string& path, const json& j) {
  sparcc::atomic_write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------- fit ------

struct FitArgs {
  std::string data_path;
  std::string estimator = "sparcc";
  std::string nuisance = "parametric";
  std::string eta1_file, eta2_file;
  std::string save_eta1, save_eta2;
  double scale_margin = 0.05;
  std::string out_file, json_file;
  bool no_se = false;
  sparcc::FitOptions opts;
};

int cmd_fit(const FitArgs& a) {
  sparcc::Dataset data = sparcc::load_csv(a.data_path);
  double wmax = 0.0;
  long censored = 0;
  for (const auto& r : data.records) {
    wmax = std::max(wmax, r.w);
    censored += r.delta == 0;
  }
  if (wmax >= 1.0) data = sparcc::apply_scaling(data, a.scale_margin);

  const sparcc::EstimatorKind kind = sparcc::estimator_from_name(a.estimator);
  sparcc::NuisanceChoice c1, c2;
  c1.spec = c2.spec = sparcc::nuisance_spec_from_name(a.nuisance);
  if (!a.eta1_file.empty()) c1.supplied = sparcc::NuisanceDensity::load_file(a.eta1_file);
  if (!a.eta2_file.empty()) c2.supplied = sparcc::NuisanceDensity::load_file(a.eta2_file);

  sparcc::FitOptions opts = a.opts;
  opts.compute_se = !a.no_se;

  sparcc::FitResult res;
  switch (kind) {
    case sparcc::EstimatorKind::sparcc: res = fit_sparcc(data, c1, c2, opts); break;
    case sparcc::EstimatorKind::mle: res = fit_mle(data, c1, opts); break;
    case sparcc::EstimatorKind::complete_case: res = fit_complete_case(data, opts); break;
    case sparcc::EstimatorKind::oracle: res = fit_oracle(data, opts); break;
  }

  const auto names = res.params.names();
  const double frac = data.records.empty() ? 0.0 : double(censored) / double(data.size());
  std::ostringstream out;
  out << "fit summary\n";
  out << "  estimator       " << sparcc::estimator_name(res.estimator) << "\n";
  out << "  records         " << data.size() << " (" << fmt_g(100.0 * frac, 3)
      << "% censored)\n";
  if (data.scale_factor != 1.0)
    out << "  scale factor    " << sparcc::format_full(data.scale_factor)
        << " (w and x were divided by it; estimates are on the scaled axis)\n";
  if (res.diagnostics.grid_hi > 0.0)
    out << "  grid            " << opts.nodes << " nodes on [" << fmt_g(res.diagnostics.grid_lo)
        << ", " << fmt_g(res.diagnostics.grid_hi) << "]\n";
  out << "\n  parameter     estimate        se\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string se = res.se.size() ? fmt_g(res.se[(long)i]) : "nan";
    char line[128];
    std::snprintf(line, sizeof line, "  %-12s  %-14s  %s\n", names[i].c_str(),
                  fmt_g(res.estimate[(long)i], 8).c_str(), se.c_str());
    out << line;
  }
  out << "\n  newton          " << res.diagnostics.newton_iterations << " iteration(s), "
      << (res.diagnostics.converged ? "converged" : "NOT converged") << ", |G|_inf = "
      << fmt_g(res.diagnostics.score_norm, 3) << "\n";
  out << "  variance        " << (res.diagnostics.vcov_ok ? res.diagnostics.vcov_note
                                                          : "unavailable: " + res.diagnostics.vcov_note)
      << "\n";
  if (res.diagnostics.cache_misses > 0) {
    out << "  fredholm        max residual " << fmt_g(res.diagnostics.max_fredholm_residual, 3)
        << ", max kernel asymmetry " << fmt_g(res.diagnostics.max_kernel_asymmetry, 3) << "\n";
    out << "  cache           " << res.diagnostics.cache_misses << " build(s), "
        << res.diagnostics.cache_hits << " hit(s)\n";
    out << "  underflows      " << res.diagnostics.underflow_count << "\n";
  }
  std::cout << out.str();

  if (!a.save_eta1.empty() && res.eta1) res.eta1->save_file(a.save_eta1);
  if (!a.save_eta2.empty() && res.eta2) res.eta2->save_file(a.save_eta2);
  if (!a.out_file.empty()) {
    sparcc::atomic_write_file(a.out_file, res.table());
    std::cout << "wrote " << a.out_file << "\n";
  }
  if (!a.json_file.empty()) {
    json j;
    j["command"] = "fit";
    j["estimator"] = sparcc::estimator_name(res.estimator);
    j["data"] = a.data_path;
    j["n"] = data.size();
    j["censored_fraction"] = frac;
    j["scale_factor"] = data.scale_factor;
    for (std::size_t i = 0; i < names.size(); ++i) {
      j["estimate_" + names[i]] = res.estimate[(long)i];
      j["se_" + names[i]] =
          res.se.size() ? json(res.se[(long)i]) : json();
    }
    j["converged"] = res.diagnostics.converged;
    j["newton_iterations"] = res.diagnostics.newton_iterations;
    j["score_norm"] = res.diagnostics.score_norm;
    j["vcov_ok"] = res.diagnostics.vcov_ok;
    j["vcov_note"] = res.diagnostics.vcov_note;
    j["max_fredholm_residual"] = res.diagnostics.max_fredholm_residual;
    j["max_kernel_asymmetry"] = res.diagnostics.max_kernel_asymmetry;
    j["underflow_count"] = res.diagnostics.underflow_count;
    j["cache_hits"] = res.diagnostics.cache_hits;
    j["cache_misses"] = res.diagnostics.cache_misses;
    write_json(a.json_file, j);
    std::cout << "wrote " << a.json_file << "\n";
  }
  return 0;
}

// ----------------------------------------------------------- simulate ------

struct SimArgs {
  std::string config_file;
  long n = 0;
  long replicates = 0;
  double q = 0.0;
  std::uint64_t seed = 0;
  int threads = -1;
  std::string scenarios;
  bool table1_units = false;
  bool full = false;
  int nodes = 0;
  std::string out_dir, json_file;
};

sparcc::SimConfig load_config(const std::string& path) {
  if (path.empty()) return sparcc::SimConfig{};
  return sparcc::SimConfig::parse(sparcc::read_file(path));
}

std::vector<sparcc::ScenarioSpec> parse_scenarios(const std::string& text) {
  std::vector<sparcc::ScenarioSpec> out;
  for (const auto& field : sparcc::split_fields(text, ','))
    if (!field.empty()) out.push_back(sparcc::ScenarioSpec::parse(field));
  return out;
}

// sweep shares this with simulate but defines only a subset of the flags, so
// the lookup must not throw on names it never registered
bool given(const CLI::App& cmd, const std::string& name) {
  const CLI::Option* opt = cmd.get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

void apply_overrides(sparcc::SimConfig& cfg, const SimArgs& a, const CLI::App& cmd) {
  if (a.full) {
    cfg.n = 8000;
    cfg.replicates = 1000;
  }
  if (given(cmd, "--n")) cfg.n = a.n;
  if (given(cmd, "--replicates")) cfg.replicates = a.replicates;
  if (given(cmd, "--q")) cfg.q_target = a.q;
  if (given(cmd, "--seed")) cfg.seed = a.seed;
  if (given(cmd, "--threads")) cfg.threads = a.threads;
  if (given(cmd, "--scenarios")) cfg.scenarios = parse_scenarios(a.scenarios);
  if (given(cmd, "--table1-units")) cfg.table1_units = true;
  if (given(cmd, "--nodes")) cfg.fit.nodes = a.nodes;
}

int cmd_simulate(const SimArgs& a, const CLI::App& cmd) {
  sparcc::SimConfig cfg = load_config(a.config_file);
  apply_overrides(cfg, a, cmd);

  const sparcc::SimResult res = sparcc::run_monte_carlo(cfg);

  std::cout << "calibrated censoring shapes  " << sparcc::format_full(res.alpha2[0]) << " "
            << sparcc::format_full(res.alpha2[1]) << " " << sparcc::format_full(res.alpha2[2])
            << " " << sparcc::format_full(res.alpha2[3]) << "\n";
  std::cout << "realized censoring fraction  " << sparcc::format_full(res.q_realized) << "\n\n";
  std::cout << res.summary_csv();

  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    const std::string base = a.out_dir + "/";
    sparcc::atomic_write_file(base + "results_summary.csv", res.summary_csv());
    sparcc::atomic_write_file(base + "results_replicates.csv", res.replicates_csv());
    sparcc::atomic_write_file(base + "metadata.txt", res.metadata_text());
    std::cout << "\nwrote " << base << "results_summary.csv, results_replicates.csv, metadata.txt\n";
  }
  if (!a.json_file.empty()) {
    json j;
    j["command"] = "simulate";
    j["n"] = cfg.n;
    j["replicates"] = cfg.replicates;
    j["q_target"] = cfg.q_target;
    j["q_realized"] = res.q_realized;
    j["seed"] = cfg.seed;
    for (int k = 0; k < 4; ++k) j["alpha2_" + std::to_string(k)] = res.alpha2[k];
    const auto names = cfg.beta_true.names();
    for (const auto& cell : res.cells) {
      const std::string pre = cell.scenario.label() + ".";
      j[pre + "attempted"] = cell.attempted;
      j[pre + "failures"] = cell.failures;
      j[pre + "reliable"] = cell.reliable;
      for (std::size_t i = 0; i < names.size(); ++i) {
        j[pre + "bias." + names[i]] = cell.bias[(long)i];
        j[pre + "ese." + names[i]] = cell.ese[(long)i];
        j[pre + "ase_mean." + names[i]] = cell.ase_mean[(long)i];
        j[pre + "coverage_pct." + names[i]] = cell.coverage[(long)i];
      }
      j[pre + "var_beta1"] = cell.var_beta1;
    }
    write_json(a.json_file, j);
    std::cout << "wrote " << a.json_file << "\n";
  }
  return 0;
}

// ---------------------------------------------------- calibrate / sweep ----

int cmd_calibrate(double q, const std::vector<double>& alpha1_in, const std::string& json_file) {
  Eigen::Vector4d alpha1;
  for (int k = 0; k < 4; ++k) alpha1[k] = alpha1_in[(std::size_t)k];
  const Eigen::Vector4d alpha2 = sparcc::calibrate_censoring(alpha1, q);
  const double realized = sparcc::censoring_probability(alpha1, alpha2);
  std::cout << "censoring shapes (s_int s_slope r_int r_slope)  "
            << sparcc::format_full(alpha2[0]) << " " << sparcc::format_full(alpha2[1]) << " "
            << sparcc::format_full(alpha2[2]) << " " << sparcc::format_full(alpha2[3]) << "\n";
  std::cout << "realized censoring fraction  " << sparcc::format_full(realized) << "\n";
  if (!json_file.empty()) {
    json j;
    j["command"] = "calibrate";
    j["q_target"] = q;
    j["q_realized"] = realized;
    for (int k = 0; k < 4; ++k) j["alpha1_" + std::to_string(k)] = alpha1[k];
    for (int k = 0; k < 4; ++k) j["alpha2_" + std::to_string(k)] = alpha2[k];
    write_json(json_file, j);
    std::cout << "wrote " << json_file << "\n";
  }
  return 0;
}

int cmd_sweep(const SimArgs& a, const CLI::App& cmd, const std::vector<double>& q_list) {
  sparcc::SimConfig cfg = load_config(a.config_file);
  apply_overrides(cfg, a, cmd);
  const sparcc::SweepResult res = sparcc::sweep_censoring(cfg, q_list);
  std::cout << res.csv();
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    sparcc::atomic_write_file(a.out_dir + "/sweep.csv", res.csv());
    std::cout << "wrote " << a.out_dir << "/sweep.csv\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"efficient-score regression with a right-censored covariate"};
  app.require_subcommand(1);

  int panels = 0;
  app.add_option("--simpson-panels", panels,
                 "half-interval count for the fixed-grid Simpson integrations")
      ->check(CLI::PositiveNumber);

  std::string format = "csv";
  app.add_option("--format", format, "output format (only csv for now)")
      ->check(CLI::IsMember({"csv"}));

  FitArgs fa;
  CLI::App* fit = app.add_subcommand("fit", "fit one estimator to a CSV dataset");
  fit->add_option("data", fa.data_path, "input CSV with columns y,w,delta,z[,x]")->required();
  fit->add_option("--estimator", fa.estimator,
                  "sparcc | mle | cc | oracle (default sparcc)");
  fit->add_option("--nuisance", fa.nuisance,
                  "parametric | parametric-mis | bspline | exact (default parametric)");
  fit->add_option("--eta1", fa.eta1_file, "serialized covariate-density model to use as known");
  fit->add_option("--eta2", fa.eta2_file, "serialized censoring-density model to use as known");
  fit->add_option("--save-eta1", fa.save_eta1, "write the fitted covariate density here");
  fit->add_option("--save-eta2", fa.save_eta2, "write the fitted censoring density here");
  fit->add_option("--scale-margin", fa.scale_margin,
                  "headroom used when rescaling data with w >= 1 (default 0.05)");
  fit->add_option("--nodes", fa.opts.nodes, "covariate grid size (default 50)");
  fit->add_option("--hermite-order", fa.opts.hermite_order, "y-integration order (default 20)");
  fit->add_option("--bspline-basis", fa.opts.bspline_basis, "B-spline basis size (default 8)");
  fit->add_option("--bspline-degree", fa.opts.bspline_degree, "B-spline degree (default 3)");
  fit->add_option("--newton-tol", fa.opts.newton_tol, "estimating-equation tolerance");
  fit->add_option("--newton-max-iter", fa.opts.newton_max_iter, "iteration cap");
  fit->add_flag("--interaction", fa.opts.interaction, "include the x*z term");
  fit->add_flag("--no-se", fa.no_se, "skip the variance estimate");
  fit->add_option("--out", fa.out_file, "write the parameter,estimate,se table here");
  fit->add_option("--json-summary", fa.json_file, "write a flat JSON summary here");

  SimArgs sa;
  CLI::App* sim = app.add_subcommand("simulate", "run the Monte Carlo study");
  sim->add_option("--config", sa.config_file, "key = value config file (defaults when absent)");
  sim->add_option("--n", sa.n, "records per replicate");
  sim->add_option("--replicates", sa.replicates, "Monte Carlo replicates");
  sim->add_option("--q", sa.q, "target censoring fraction");
  sim->add_option("--seed", sa.seed, "master seed (all randomness flows from it)");
  sim->add_option("--threads", sa.threads, "worker threads (0 = all available)");
  sim->add_option("--scenarios", sa.scenarios,
                  "comma-separated estimator[:eta1[:eta2]] cells");
  sim->add_option("--nodes", sa.nodes, "covariate grid size");
  sim->add_flag("--table1-units", sa.table1_units, "report bias/ESE/ASE multiplied by 10");
  sim->add_flag("--full", sa.full, "full-scale profile: n=8000, replicates=1000");
  sim->add_option("--out", sa.out_dir, "directory for results_summary/replicates/metadata");
  sim->add_option("--json-summary", sa.json_file, "write a flat JSON summary here");

  double cal_q = 0.4;
  std::vector<double> cal_alpha1{1.5, 1.0, 2.5, -1.0};
  std::string cal_json;
  CLI::App* cal = app.add_subcommand("calibrate",
                                     "solve for censoring shapes hitting a target fraction");
  cal->add_option("--q", cal_q, "target censoring fraction")->required();
  cal->add_option("--alpha1", cal_alpha1,
                  "covariate shape maps a_int a_slope b_int b_slope (default 1.5 1 2.5 -1)")
      ->expected(4);
  cal->add_option("--json-summary", cal_json, "write a flat JSON summary here");

  SimArgs wa;
  std::vector<double> q_list;
  CLI::App* sweep = app.add_subcommand("sweep", "variance versus censoring fraction");
  sweep->add_option("--config", wa.config_file, "key = value config file");
  sweep->add_option("--q-list", q_list, "censoring fractions to visit")->required()->expected(-1);
  sweep->add_option("--n", wa.n, "records per replicate");
  sweep->add_option("--replicates", wa.replicates, "Monte Carlo replicates");
  sweep->add_option("--seed", wa.seed, "master seed");
  sweep->add_option("--threads", wa.threads, "worker threads (0 = all available)");
  sweep->add_option("--scenarios", wa.scenarios, "comma-separated scenario cells");
  sweep->add_option("--out", wa.out_dir, "directory for sweep.csv");

  std::string fault;
  CLI::App* self = app.add_subcommand("selftest", "fast deterministic invariant suite");
  self->add_option("--inject-fault", fault, "corrupt a component on purpose (simpson)")
      ->check(CLI::IsMember({"simpson"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (panels > 0) sparcc::set_default_simpson_panels(panels);
    if (fit->parsed()) return cmd_fit(fa);
    if (sim->parsed()) return cmd_simulate(sa, *sim);
    if (cal->parsed()) return cmd_calibrate(cal_q, cal_alpha1, cal_json);
    if (sweep->parsed()) return cmd_sweep(wa, *sweep, q_list);
    if (self->parsed()) return sparcc::run_selftest(std::cout, fault == "simpson") == 0 ? 0 : 1;
  } catch (const sparcc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "hint: " << hint_for(e.code()) << "\n";
    return e.numerical() ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
