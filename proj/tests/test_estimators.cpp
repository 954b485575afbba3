#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sparcc/estimators.hpp"
#include "sparcc/simulation.hpp"

using namespace sparcc;

namespace {

Eigen::Vector4d calibrated_04() {
  // censoring shapes for the reference design at 40% censoring, fixed by the
  // deterministic bisection (verified in the simulation suite)
  Eigen::Vector4d a2;
  a2 << 3.5143326683044434, 0.0, 2.5, 0.0;
  return a2;
}

Dataset observed_dataset(int n, std::uint64_t seed, bool keep_x = true) {
  SimConfig cfg;
  cfg.n = n;
  const auto rows = generate_complete_data(cfg, calibrated_04(), seed);
  Dataset data;
  for (const auto& r : rows) data.records.push_back(r.observed(keep_x));
  data.refresh_levels();
  return data;
}

std::shared_ptr<const ExactDensity> true_eta1() {
  return std::make_shared<ExactDensity>(NuisanceTarget::x_given_z, std::vector<double>{0.0, 1.0},
                                        std::vector<std::pair<double, double>>{{1.5, 2.5},
                                                                               {2.5, 1.5}});
}

std::shared_ptr<const ExactDensity> true_eta2() {
  const double s = calibrated_04()[0];
  return std::make_shared<ExactDensity>(NuisanceTarget::c_given_z, std::vector<double>{0.0, 1.0},
                                        std::vector<std::pair<double, double>>{{s, 2.5},
                                                                               {s, 2.5}});
}

NuisanceChoice exact_choice(std::shared_ptr<const NuisanceDensity> d) {
  NuisanceChoice c;
  c.spec = NuisanceSpec::exact;
  c.supplied = std::move(d);
  return c;
}

}  // namespace

TEST_SUITE("closed-form-fits") {
  TEST_CASE("complete-case equals least squares on the uncensored rows") {
    const Dataset data = observed_dataset(900, 1);
    const FitResult fit = fit_complete_case(data);

    std::vector<int> keep;
    for (int i = 0; i < (int)data.size(); ++i)
      if (data.records[i].delta) keep.push_back(i);
    Eigen::MatrixXd X(keep.size(), 3);
    Eigen::VectorXd y(keep.size());
    for (int i = 0; i < (int)keep.size(); ++i) {
      const auto& r = data.records[keep[i]];
      X.row(i) << 1.0, r.w, r.z;
      y[i] = r.y;
    }
    const auto ref = oracle::ols(X, y);
    for (int j = 0; j < 3; ++j) CHECK(fit.estimate[j] == doctest::Approx(ref.coef[j]).epsilon(1e-10));
    CHECK(fit.estimate[3] == doctest::Approx(std::log(ref.sigma2)).epsilon(1e-10));
    CHECK(fit.diagnostics.converged);
    CHECK(fit.diagnostics.vcov_note == "sandwich over the full-data score");
    CHECK(fit.se.minCoeff() > 0.0);
  }

  TEST_CASE("oracle equals least squares on the latent covariate") {
    const Dataset data = observed_dataset(900, 2);
    const FitResult fit = fit_oracle(data);

    Eigen::MatrixXd X(data.size(), 3);
    Eigen::VectorXd y(data.size());
    for (int i = 0; i < (int)data.size(); ++i) {
      const auto& r = data.records[i];
      X.row(i) << 1.0, r.x.value(), r.z;
      y[i] = r.y;
    }
    const auto ref = oracle::ols(X, y);
    for (int j = 0; j < 3; ++j) CHECK(fit.estimate[j] == doctest::Approx(ref.coef[j]).epsilon(1e-10));
    CHECK(fit.estimate[3] == doctest::Approx(std::log(ref.sigma2)).epsilon(1e-10));
  }

  TEST_CASE("oracle sandwich approximates the normal-theory variance") {
    const Dataset data = observed_dataset(6000, 3);
    const FitResult fit = fit_oracle(data);

    Eigen::MatrixXd X(data.size(), 3);
    for (int i = 0; i < (int)data.size(); ++i)
      X.row(i) << 1.0, data.records[i].x.value(), data.records[i].z;
    const double sigma2 = std::exp(fit.estimate[3]);
    const Eigen::MatrixXd classical = sigma2 * (X.transpose() * X).inverse();
    for (int j = 0; j < 3; ++j)
      CHECK(fit.se[j] == doctest::Approx(std::sqrt(classical(j, j))).epsilon(0.10));
    // log-variance standard error is ~ sqrt(2/n) under normality
    CHECK(fit.se[3] == doctest::Approx(std::sqrt(2.0 / (double)data.size())).epsilon(0.15));
  }

  TEST_CASE("a censoring-free file makes complete-case and oracle identical") {
    Dataset data = observed_dataset(400, 4);
    for (auto& r : data.records) {
      r.delta = 1;  // pretend nothing was censored: w is the covariate itself
      r.x = r.w;
    }
    const FitResult cc = fit_complete_case(data);
    const FitResult orc = fit_oracle(data);
    CHECK((cc.estimate - orc.estimate).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((cc.se - orc.se).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(cc.table() == orc.table());
  }

  TEST_CASE("insufficient rows and missing covariates fail loudly") {
    Dataset tiny = observed_dataset(400, 5);
    tiny.records.resize(3);
    CHECK_THROWS_AS(fit_complete_case(tiny), Error);

    Dataset no_x = observed_dataset(50, 6, false);
    try {
      fit_oracle(no_x);
      FAIL("expected a precondition error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::precondition);
    }
  }

  TEST_CASE("interaction terms are recovered when generated") {
    SimConfig cfg;
    cfg.n = 3000;
    cfg.beta_true.interaction = true;
    cfg.beta_true.beta3 = -3.0;
    const auto rows = generate_complete_data(cfg, calibrated_04(), 77);
    Dataset data;
    for (const auto& r : rows) data.records.push_back(r.observed(true));
    data.refresh_levels();

    FitOptions opts;
    opts.interaction = true;
    const FitResult fit = fit_oracle(data, opts);
    REQUIRE(fit.estimate.size() == 5);
    CHECK(std::abs(fit.estimate[3] - (-3.0)) < 4.0 * fit.se[3]);
    CHECK(fit.params.names()[3] == "beta3");
  }
}

TEST_SUITE("root-solver") {
  TEST_CASE("a linear system solves in at most two steps") {
    Eigen::MatrixXd A(2, 2);
    A << 3.0, 1.0, -1.0, 2.0;
    Eigen::VectorXd target(2);
    target << 0.5, -1.5;
    auto G = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * (x - target); };
    const RootResult r = solve_estimating_equation(G, Eigen::VectorXd::Zero(2), 1e-10, 50);
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK((r.x - target).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("a trial evaluation that throws counts as a failed step") {
    // root at 1.9, guarded region beyond 2.2: overshooting steps must halve
    auto G = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      if (x[0] > 2.2) throw Error(errc::domain, "outside the safe region");
      return (Eigen::VectorXd(1) << 5.0 * (x[0] - 1.9)).finished();
    };
    const RootResult r = solve_estimating_equation(G, Eigen::VectorXd::Zero(1), 1e-10, 50);
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1.9).epsilon(1e-7));
  }

  TEST_CASE("an unsolvable equation reports convergence failure") {
    auto G = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return Eigen::VectorXd::Ones(x.size());  // no root anywhere
    };
    try {
      solve_estimating_equation(G, Eigen::VectorXd::Zero(2), 1e-10, 15);
      FAIL("expected a convergence error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::convergence);
      CHECK(e.numerical());
    }
  }
}

TEST_SUITE("likelihood-fit") {
  TEST_CASE("known nuisance density recovers the generating slope") {
    const Dataset data = observed_dataset(1500, 11);
    const FitResult fit = fit_mle(data, exact_choice(true_eta1()));
    CHECK(fit.diagnostics.converged);
    CHECK(fit.diagnostics.score_norm <= 1e-8);
    CHECK(std::abs(fit.estimate[1] - 10.0) < 4.0 * fit.se[1]);
    CHECK(std::abs(fit.estimate[0] - 1.0) < 4.0 * fit.se[0]);
    CHECK(fit.diagnostics.vcov_ok);
    CHECK(fit.diagnostics.vcov_note == "sandwich over the regression equation");
    CHECK((fit.vcov - fit.vcov.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // the likelihood path never needs the integral-equation cache
    CHECK(fit.diagnostics.cache_misses == 0);
    CHECK(fit.diagnostics.grid_lo < fit.diagnostics.grid_hi);
    CHECK(fit.diagnostics.grid_hi >= 1.0 - 1e-4);
    CHECK(fit.eta1);
    CHECK_FALSE(fit.eta2);  // the likelihood fit never touches the censoring density
  }

  TEST_CASE("record order does not change the estimate") {
    Dataset data = observed_dataset(400, 12);
    const FitResult a = fit_mle(data, exact_choice(true_eta1()));
    std::reverse(data.records.begin(), data.records.end());
    const FitResult b = fit_mle(data, exact_choice(true_eta1()));
    CHECK((a.estimate - b.estimate).cwiseAbs().maxCoeff() < 1e-7);
  }

  TEST_CASE("fitted parametric nuisance stacks its uncertainty") {
    const Dataset data = observed_dataset(1200, 13);
    NuisanceChoice fit_parametric;  // default: z-dependent beta regression
    const FitResult fit = fit_mle(data, fit_parametric);
    CHECK(fit.diagnostics.converged);
    CHECK(fit.diagnostics.vcov_note == "stacked sandwich over nuisance and regression equations");
    CHECK(fit.eta1->kind() == NuisanceKind::beta_regression);
  }
}

TEST_SUITE("efficient-score-fit") {
  TEST_CASE("known nuisances: estimate, diagnostics, and plain sandwich") {
    const Dataset data = observed_dataset(900, 21);
    const FitResult fit = fit_sparcc(data, exact_choice(true_eta1()), exact_choice(true_eta2()));
    CHECK(fit.diagnostics.converged);
    CHECK(fit.diagnostics.score_norm <= 1e-8);
    CHECK(std::abs(fit.estimate[1] - 10.0) < 4.0 * fit.se[1]);
    CHECK(fit.diagnostics.vcov_note == "sandwich over the regression equation");
    CHECK(fit.diagnostics.max_fredholm_residual < 1e-8);
    CHECK(fit.diagnostics.max_kernel_asymmetry < 1e-6);
    CHECK(fit.diagnostics.cache_hits > 0);  // newton revisits the solved beta
  }

  TEST_CASE("fitted nuisances select the stacked sandwich") {
    const Dataset data = observed_dataset(900, 22);
    NuisanceChoice c1, c2;  // both parametric, fitted from the data
    const FitResult fit = fit_sparcc(data, c1, c2);
    CHECK(fit.diagnostics.converged);
    CHECK(fit.diagnostics.vcov_note == "stacked sandwich over nuisance and regression equations");
    CHECK(fit.eta1->kind() == NuisanceKind::beta_regression);
    CHECK(fit.eta2->kind() == NuisanceKind::beta_regression);
  }

  TEST_CASE("a spline nuisance switches to the outer-product variance") {
    const Dataset data = observed_dataset(900, 23);
    NuisanceChoice c1;
    c1.spec = NuisanceSpec::bspline;
    NuisanceChoice c2;  // parametric
    const FitResult fit = fit_sparcc(data, c1, c2);
    CHECK(fit.diagnostics.converged);
    CHECK(fit.diagnostics.vcov_note == "inverse outer-product of estimating scores");
    CHECK(fit.eta1->kind() == NuisanceKind::bspline);
  }

  TEST_CASE("record order does not change the estimate") {
    Dataset data = observed_dataset(400, 24);
    const FitResult a = fit_sparcc(data, exact_choice(true_eta1()), exact_choice(true_eta2()));
    std::reverse(data.records.begin(), data.records.end());
    const FitResult b = fit_sparcc(data, exact_choice(true_eta1()), exact_choice(true_eta2()));
    CHECK((a.estimate - b.estimate).cwiseAbs().maxCoeff() < 1e-7);
  }

  TEST_CASE("skipping the variance leaves the table with nan entries") {
    const Dataset data = observed_dataset(400, 25);
    FitOptions opts;
    opts.compute_se = false;
    const FitResult fit = fit_sparcc(data, exact_choice(true_eta1()), exact_choice(true_eta2()), opts);
    CHECK(fit.se.size() == 0);
    CHECK(fit.table().find("nan") != std::string::npos);
    const std::string head = fit.table().substr(0, fit.table().find('\n'));
    CHECK(head == "parameter,estimate,se");
  }

  TEST_CASE("input validation") {
    const Dataset data = observed_dataset(200, 26);

    NuisanceChoice exact_unsupplied;
    exact_unsupplied.spec = NuisanceSpec::exact;
    CHECK_THROWS_AS(fit_sparcc(data, exact_unsupplied, exact_choice(true_eta2())), Error);

    Dataset bad = data;
    bad.records[0].w = 1.5;  // outside the unit interval
    CHECK_THROWS_AS(fit_sparcc(bad, exact_choice(true_eta1()), exact_choice(true_eta2())), Error);

    Dataset empty;
    CHECK_THROWS_AS(fit_sparcc(empty, exact_choice(true_eta1()), exact_choice(true_eta2())), Error);
  }

  TEST_CASE("estimator names round trip") {
    CHECK(estimator_from_name("sparcc") == EstimatorKind::sparcc);
    CHECK(estimator_from_name("cc") == EstimatorKind::complete_case);
    CHECK(std::string(estimator_name(EstimatorKind::oracle)) == "oracle");
    CHECK_THROWS_AS(estimator_from_name("bogus"), Error);
    CHECK(nuisance_spec_from_name("parametric-mis") == NuisanceSpec::parametric_mis);
    CHECK_THROWS_AS(nuisance_spec_from_name("bogus"), Error);
  }
}
