#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/stat.h>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "sparcc/dataset.hpp"
#include "sparcc/io_util.hpp"
#include "sparcc/nuisance.hpp"
#include "sparcc/simulation.hpp"

using namespace sparcc;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(SPARCC_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.output.append(buf, got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

// per-process scratch directory so parallel test invocations cannot collide
const std::string& scratch() {
  static const std::string dir = [] {
    std::string d = "/tmp/sparcc_cli_" + std::to_string(getpid());
    mkdir(d.c_str(), 0755);
    return d;
  }();
  return dir;
}

std::string fixture_dgp() {
  static const std::string path = [] {
    SimConfig cfg;
    cfg.n = 600;
    const auto a2 = calibrate_censoring(cfg.alpha1, 0.4);
    const auto rows = generate_complete_data(cfg, a2, replicate_seed(cfg.seed, 0));
    Dataset data;
    for (const auto& r : rows) data.records.push_back(r.observed(true));
    data.refresh_levels();
    const std::string p = scratch() + "/dgp.csv";
    write_csv(data, p);
    return p;
  }();
  return path;
}

std::string fixture_q0() {
  static const std::string path = [] {
    SimConfig cfg;
    cfg.n = 400;
    const auto a2 = calibrate_censoring(cfg.alpha1, 0.4);
    const auto rows = generate_complete_data(cfg, a2, replicate_seed(cfg.seed, 1));
    Dataset data;
    for (const auto& r : rows) {
      ObservedRecord obs = r.observed(true);
      obs.w = r.x;  // pretend censoring never happened
      obs.delta = 1;
      obs.x = r.x;
      data.records.push_back(obs);
    }
    data.refresh_levels();
    const std::string p = scratch() + "/q0.csv";
    write_csv(data, p);
    return p;
  }();
  return path;
}

}  // namespace

TEST_SUITE("cli-surface") {
  TEST_CASE("no command or an unknown flag prints usage and fails") {
    const auto bare = run("");
    CHECK(bare.exit_code != 0);
    CHECK(bare.output.find("subcommand") != std::string::npos);

    const auto unknown = run("fit --definitely-not-a-flag x.csv");
    CHECK(unknown.exit_code != 0);
    CHECK(unknown.output.find("--definitely-not-a-flag") != std::string::npos);

    const auto badsub = run("frobnicate");
    CHECK(badsub.exit_code != 0);
  }

  TEST_CASE("help exits cleanly") {
    const auto r = run("--help");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("simulate") != std::string::npos);
    CHECK(run("fit --help").exit_code == 0);
  }

  TEST_CASE("reserved format flag accepts only csv") {
    CHECK(run("--format csv selftest").exit_code == 0);
    CHECK(run("--format yaml selftest").exit_code != 0);
  }

  TEST_CASE("missing input file names the path at exit 2") {
    const auto r = run("fit /no/such/file.csv");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("/no/such/file.csv") != std::string::npos);
    CHECK(r.output.find("hint") != std::string::npos);
  }

  TEST_CASE("malformed csv is a schema error at exit 2") {
    const std::string bad = scratch() + "/bad.csv";
    atomic_write_file(bad, "y,w\n1,2\n");
    const auto r = run("fit " + bad);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("schema") != std::string::npos);
  }

  TEST_CASE("odd simpson panel counts are rejected") {
    const auto r = run("--simpson-panels 3 fit " + fixture_q0());
    CHECK(r.exit_code != 0);
  }
}

TEST_SUITE("cli-selftest") {
  TEST_CASE("clean build passes in well under a minute, twice identically") {
    const auto a = run("selftest");
    CHECK(a.exit_code == 0);
    CHECK(a.output.find("selftest passed") != std::string::npos);
    const auto b = run("selftest");
    CHECK(b.output == a.output);
  }

  TEST_CASE("an injected quadrature fault trips exactly the quadrature check") {
    const auto r = run("selftest --inject-fault simpson");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("[FAIL] quadrature") != std::string::npos);
    // the spline and integral-equation sections must be unaffected
    CHECK(r.output.find("[ok] spline: basis is a partition of unity") != std::string::npos);
    CHECK(r.output.find("[ok] integral-equation: plug-back residual is tiny") != std::string::npos);
  }
}

TEST_SUITE("cli-fit") {
  TEST_CASE("a censoring-free file fits identically under cc and oracle") {
    const std::string cc_out = scratch() + "/cc.csv";
    const std::string or_out = scratch() + "/oracle.csv";
    const auto a = run("fit --estimator cc --out " + cc_out + " " + fixture_q0());
    const auto b = run("fit --estimator oracle --out " + or_out + " " + fixture_q0());
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(read_file(cc_out) == read_file(or_out));
  }

  TEST_CASE("efficient-score fit on a generated file recovers the slope") {
    const std::string json_path = scratch() + "/fit.json";
    const std::string out_path = scratch() + "/fit.csv";
    const auto r = run("fit --estimator sparcc --nuisance parametric --out " + out_path +
                       " --json-summary " + json_path + " " + fixture_dgp());
    REQUIRE(r.exit_code == 0);

    const auto j = nlohmann::json::parse(read_file(json_path));
    CHECK(j.at("command") == "fit");
    CHECK(j.at("estimator") == "sparcc");
    CHECK(j.at("n") == 600);
    CHECK(j.at("converged") == true);
    const double b1 = j.at("estimate_beta1");
    const double se1 = j.at("se_beta1");
    CHECK(std::abs(b1 - 10.0) < 3.0 * se1);
    CHECK(j.at("censored_fraction") > 0.2);
    CHECK(j.at("censored_fraction") < 0.6);
    CHECK(j.at("vcov_ok") == true);

    // the estimates table round-trips through the dataset tooling
    const std::string table = read_file(out_path);
    CHECK(table.find("parameter,estimate,se") == 0);
    CHECK(table.find("beta1") != std::string::npos);
  }

  TEST_CASE("likelihood and spline paths run end to end") {
    CHECK(run("fit --estimator mle --nuisance parametric " + fixture_dgp()).exit_code == 0);
    const auto r = run("fit --estimator sparcc --nuisance bspline --no-se " + fixture_dgp());
    CHECK(r.exit_code == 0);
  }

  TEST_CASE("fitted nuisance models can be saved and supplied back") {
    const std::string e1 = scratch() + "/eta1.model";
    const std::string e2 = scratch() + "/eta2.model";
    const auto save = run("fit --estimator sparcc --nuisance parametric --save-eta1 " + e1 +
                          " --save-eta2 " + e2 + " " + fixture_dgp());
    REQUIRE(save.exit_code == 0);

    const auto m1 = NuisanceDensity::load_file(e1);
    CHECK(m1->target() == NuisanceTarget::x_given_z);
    CHECK(m1->kind() == NuisanceKind::beta_regression);

    const std::string json_path = scratch() + "/reuse.json";
    const auto reuse = run("fit --estimator sparcc --eta1 " + e1 + " --eta2 " + e2 +
                           " --json-summary " + json_path + " " + fixture_dgp());
    REQUIRE(reuse.exit_code == 0);
    const auto j = nlohmann::json::parse(read_file(json_path));
    CHECK(std::abs((double)j.at("estimate_beta1") - 10.0) < 1.0);
  }

  TEST_CASE("unwritable output directory fails cleanly at exit 2") {
    const std::string target = scratch() + "/no_dir_here/out.csv";
    const auto r = run("fit --estimator cc --out " + target + " " + fixture_q0());
    CHECK(r.exit_code == 2);
    std::ifstream check(target);
    CHECK_FALSE(check.good());
  }

  TEST_CASE("out-of-range covariates trigger automatic rescaling") {
    // w values above one: the fit must rescale rather than refuse
    Dataset data = parse_csv_text(read_file(fixture_q0()), "t");
    for (auto& rec : data.records) {
      rec.w *= 130.0;
      if (rec.x) rec.x = *rec.x * 130.0;
    }
    const std::string big = scratch() + "/big.csv";
    write_csv(data, big);
    const std::string json_path = scratch() + "/big.json";
    const auto r = run("fit --estimator cc --json-summary " + json_path + " " + big);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(read_file(json_path));
    CHECK((double)j.at("scale_factor") > 100.0);
  }
}

TEST_SUITE("cli-simulate") {
  TEST_CASE("summary files land atomically and reproducibly") {
    const std::string d1 = scratch() + "/simA";
    const std::string d2 = scratch() + "/simB";
    const std::string flags = "simulate --n 250 --replicates 3 --scenarios cc,oracle --seed 99 --out ";
    const auto a = run(flags + d1);
    const auto b = run(flags + d2);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(read_file(d1 + "/results_summary.csv") == read_file(d2 + "/results_summary.csv"));
    CHECK(read_file(d1 + "/results_replicates.csv") == read_file(d2 + "/results_replicates.csv"));
    CHECK(read_file(d1 + "/metadata.txt").find("seed = 99") != std::string::npos);
  }

  TEST_CASE("thread cap changes nothing in the output") {
    const std::string d1 = scratch() + "/simT1";
    const std::string d2 = scratch() + "/simT2";
    const std::string base = "simulate --n 250 --replicates 3 --scenarios cc,oracle --seed 7 ";
    REQUIRE(run(base + "--threads 1 --out " + d1).exit_code == 0);
    REQUIRE(run(base + "--threads 4 --out " + d2).exit_code == 0);
    CHECK(read_file(d1 + "/results_summary.csv") == read_file(d2 + "/results_summary.csv"));
  }

  TEST_CASE("json summary carries the aggregate cells") {
    const std::string jp = scratch() + "/sim.json";
    const auto r = run("simulate --n 250 --replicates 3 --scenarios oracle --seed 5 --json-summary " + jp);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(read_file(jp));
    CHECK(j.at("command") == "simulate");
    CHECK(j.at("replicates") == 3);
    CHECK(j.at("oracle.attempted") == 3);
    CHECK(j.at("oracle.failures") == 0);
    CHECK(j.contains("oracle.bias.beta1"));
    CHECK(j.contains("q_realized"));
  }

  TEST_CASE("a config file drives the run and flags override it") {
    SimConfig cfg;
    cfg.n = 250;
    cfg.replicates = 2;
    cfg.scenarios = {ScenarioSpec::parse("oracle")};
    const std::string cfg_path = scratch() + "/run.cfg";
    atomic_write_file(cfg_path, cfg.dump());
    const std::string jp = scratch() + "/cfg.json";
    const auto r = run("simulate --config " + cfg_path + " --replicates 4 --json-summary " + jp);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(read_file(jp));
    CHECK(j.at("replicates") == 4);  // flag wins
    CHECK(j.at("n") == 250);         // config survives
  }

  TEST_CASE("bad scenario text is rejected before any work") {
    const auto r = run("simulate --n 250 --replicates 2 --scenarios cc:correct");
    CHECK(r.exit_code == 2);
  }
}

TEST_SUITE("cli-calibrate") {
  TEST_CASE("the reference target matches the frozen shape") {
    const std::string jp = scratch() + "/cal.json";
    const auto r = run("calibrate --q 0.4 --json-summary " + jp);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(read_file(jp));
    CHECK(std::abs((double)j.at("alpha2_0") - 3.5143326683044434) < 1e-9);
    CHECK((double)j.at("alpha2_2") == 2.5);
    CHECK(std::abs((double)j.at("q_realized") - 0.4) < 1e-4);
  }

  TEST_CASE("unreachable targets exit 3; nonsense targets exit 2") {
    CHECK(run("calibrate --q 0.99999999").exit_code == 3);
    CHECK(run("calibrate --q 1.7").exit_code == 2);
  }
}

TEST_SUITE("cli-sweep") {
  TEST_CASE("the variance table is written and parses") {
    const std::string dir = scratch() + "/sweep";
    const auto r = run("sweep --q-list 0.3 0.5 --n 250 --replicates 3 --scenarios cc,oracle --out " + dir);
    REQUIRE(r.exit_code == 0);
    const std::string csv = read_file(dir + "/sweep.csv");
    CHECK(csv.find("q,scenario") == 0);
    int lines = 0;
    for (char c : csv)
      if (c == '\n') ++lines;
    CHECK(lines == 1 + 4);
  }
}
