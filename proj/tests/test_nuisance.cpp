#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "sparcc/dataset.hpp"
#include "sparcc/nuisance.hpp"
#include "sparcc/outcome.hpp"

using namespace sparcc;

namespace {

// Censored one- or two-level sample from X|Z ~ beta(a(z), b(z)) against
// C|Z ~ beta(1.2, 1.8), built directly from inverse-free rejection-free
// draws via boost-free std::gamma_distribution ratios.
Dataset draw_censored(int n, bool two_levels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto beta_draw = [&](double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    const double u = ga(rng);
    const double v = gb(rng);
    return u / (u + v);
  };
  Dataset data;
  for (int i = 0; i < n; ++i) {
    const double z = two_levels ? (unif(rng) < 0.5 ? 1.0 : 0.0) : 0.0;
    const double x = beta_draw(1.5 + z, 2.5 - z);
    const double c = beta_draw(1.2, 1.8);
    ObservedRecord r;
    r.y = 0.0;
    r.w = std::min(x, c);
    r.delta = x <= c ? 1 : 0;
    r.z = z;
    data.records.push_back(r);
  }
  data.refresh_levels();
  return data;
}

void split_by_delta(const Dataset& data, double z, std::vector<double>& obs,
                    std::vector<double>& cens) {
  for (const auto& r : data.records) {
    if (r.z != z) continue;
    (r.delta ? obs : cens).push_back(r.w);
  }
}

}  // namespace

TEST_SUITE("beta-model") {
  TEST_CASE("density integrates to one and survival complements it") {
    const BetaWorkingModel m(NuisanceTarget::x_given_z, true, 1.5, 1.0, 2.5, -1.0, {0.0, 1.0});
    for (double z : {0.0, 1.0}) {
      const double mass =
          oracle::simpson([&](double t) { return m.density(t, z); }, 1e-9, 1.0 - 1e-9, 4000);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-5));
      for (double t : {0.1, 0.45, 0.8}) {
        const double tail = oracle::simpson([&](double s) { return m.density(s, z); }, t, 1.0 - 1e-9, 4000);
        CHECK(m.survival(t, z) == doctest::Approx(tail).epsilon(1e-6));
      }
      CHECK(m.survival(0.0, z) == doctest::Approx(1.0));
      CHECK(m.survival(1.0, z) == doctest::Approx(0.0));
    }
  }

  TEST_CASE("record loglik follows the target convention") {
    const BetaWorkingModel mx(NuisanceTarget::x_given_z, false, 2.0, 0.0, 3.0, 0.0, {0.0});
    const BetaWorkingModel mc(NuisanceTarget::c_given_z, false, 2.0, 0.0, 3.0, 0.0, {0.0});
    ObservedRecord r;
    r.w = 0.3;
    r.z = 0.0;
    r.delta = 1;  // x observed at w; c survives past w
    CHECK(mx.record_loglik(r) == doctest::Approx(std::log(mx.density(0.3, 0.0))));
    CHECK(mc.record_loglik(r) == doctest::Approx(std::log(mc.survival(0.3, 0.0))));
    r.delta = 0;  // c observed at w; x survives past w
    CHECK(mx.record_loglik(r) == doctest::Approx(std::log(mx.survival(0.3, 0.0))));
    CHECK(mc.record_loglik(r) == doctest::Approx(std::log(mc.density(0.3, 0.0))));
  }

  TEST_CASE("raw parameter round trip preserves the shape maps") {
    const BetaWorkingModel m(NuisanceTarget::x_given_z, true, 1.5, 1.0, 2.5, -1.0, {0.0, 1.0});
    const auto back = m.with_raw_params(m.raw_params());
    CHECK(back.shape1(1.0) == doctest::Approx(2.5));
    CHECK(back.shape2(1.0) == doctest::Approx(1.5));
    const BetaWorkingModel flat(NuisanceTarget::x_given_z, false, 2.0, 0.0, 3.0, 0.0, {0.0});
    CHECK(flat.raw_params().size() == 2);
    CHECK(m.raw_params().size() == 4);
  }
}

TEST_SUITE("beta-fit") {
  TEST_CASE("censored single-level fit agrees with a derivative-free grid search") {
    const Dataset data = draw_censored(500, false, 314159);
    std::vector<double> obs, cens;
    split_by_delta(data, 0.0, obs, cens);
    REQUIRE(obs.size() >= 10);

    const BetaWorkingModel fit = fit_beta_censored(data, NuisanceTarget::x_given_z, false);
    const auto [oa, ob] = oracle::beta_level_mle(obs, cens);

    // the refined grid resolves shapes to about a percent; the likelihoods
    // must agree much closer than that, with the gradient fit at least as good
    const double ll_fit = oracle::beta_level_loglik(fit.shape1(0.0), fit.shape2(0.0), obs, cens);
    const double ll_grid = oracle::beta_level_loglik(oa, ob, obs, cens);
    CHECK(fit.shape1(0.0) == doctest::Approx(oa).epsilon(0.03));
    CHECK(fit.shape2(0.0) == doctest::Approx(ob).epsilon(0.03));
    CHECK(ll_fit >= ll_grid - 1e-3);
  }

  TEST_CASE("censoring-side fit swaps the roles of the coordinates") {
    const Dataset data = draw_censored(800, false, 2718);
    // for eta2 the censored records (delta = 0) carry the observed c values
    std::vector<double> obs, cens;
    for (const auto& r : data.records) (r.delta ? cens : obs).push_back(r.w);
    REQUIRE(obs.size() >= 10);

    const BetaWorkingModel fit = fit_beta_censored(data, NuisanceTarget::c_given_z, false);
    const auto [oa, ob] = oracle::beta_level_mle(obs, cens);
    CHECK(fit.shape1(0.0) == doctest::Approx(oa).epsilon(0.03));
    CHECK(fit.shape2(0.0) == doctest::Approx(ob).epsilon(0.03));
  }

  TEST_CASE("two-level fit decomposes into independent level fits") {
    const Dataset data = draw_censored(1200, true, 99);
    const BetaWorkingModel joint = fit_beta_censored(data, NuisanceTarget::x_given_z, true);

    for (double z : {0.0, 1.0}) {
      Dataset level;
      for (const auto& r : data.records)
        if (r.z == z) {
          ObservedRecord copy = r;
          copy.z = 0.0;
          level.records.push_back(copy);
        }
      level.refresh_levels();
      const BetaWorkingModel solo = fit_beta_censored(level, NuisanceTarget::x_given_z, false);
      CHECK(joint.shape1(z) == doctest::Approx(solo.shape1(0.0)).epsilon(1e-5));
      CHECK(joint.shape2(z) == doctest::Approx(solo.shape2(0.0)).epsilon(1e-5));
    }
  }

  TEST_CASE("the z-independent fit pools both levels") {
    const Dataset data = draw_censored(1200, true, 4242);
    const BetaWorkingModel pooled = fit_beta_censored(data, NuisanceTarget::x_given_z, false);
    const BetaWorkingModel split = fit_beta_censored(data, NuisanceTarget::x_given_z, true);
    CHECK(pooled.a_slope() == 0.0);
    CHECK(pooled.b_slope() == 0.0);
    // pooled shapes land strictly between the level-specific ones
    const double lo1 = std::min(split.shape1(0.0), split.shape1(1.0));
    const double hi1 = std::max(split.shape1(0.0), split.shape1(1.0));
    CHECK(pooled.shape1(0.0) > lo1 * 0.9);
    CHECK(pooled.shape1(0.0) < hi1 * 1.1);
  }

  TEST_CASE("too few observed values in a level is a precondition failure") {
    Dataset tiny;
    for (int i = 0; i < 30; ++i) {
      ObservedRecord r;
      r.w = 0.2 + 0.01 * i;
      r.delta = i < 5 ? 1 : 0;  // only 5 observed x's
      r.z = 0.0;
      tiny.records.push_back(r);
    }
    tiny.refresh_levels();
    try {
      fit_beta_censored(tiny, NuisanceTarget::x_given_z, false);
      FAIL("expected a precondition error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::precondition);
    }
  }
}

TEST_SUITE("bspline-fit") {
  TEST_CASE("fitted density is a normalized density and tracks the sample") {
    const Dataset data = draw_censored(1500, false, 777);
    const BSplineDensity fit = fit_bspline_censored(data, NuisanceTarget::x_given_z, 8, 3);

    const double mass =
        oracle::simpson([&](double t) { return fit.density(t, 0.0); }, 0.0, 1.0, 4000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    for (const auto& c : fit.coefficients()) CHECK(c.minCoeff() > 0.0);
    CHECK(fit.survival(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.survival(1.0, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
    for (double t : {0.2, 0.5, 0.8}) {
      const double tail = oracle::simpson([&](double s) { return fit.density(s, 0.0); }, t, 1.0, 4000);
      CHECK(fit.survival(t, 0.0) == doctest::Approx(tail).epsilon(1e-6));
    }

    // first moment of the fitted density close to the true E[X] = 1.5/4
    const double mean =
        oracle::simpson([&](double t) { return t * fit.density(t, 0.0); }, 0.0, 1.0, 4000);
    CHECK(std::abs(mean - 0.375) < 0.05);
  }
}

TEST_SUITE("nuisance-io") {
  TEST_CASE("beta model round-trips through the key-value text") {
    const BetaWorkingModel m(NuisanceTarget::c_given_z, true, 3.5, 0.25, 2.5, -0.5, {0.0, 1.0});
    std::ostringstream out;
    m.save(out);
    std::istringstream in(out.str());
    const auto back = NuisanceDensity::load(in);
    REQUIRE(back);
    CHECK(back->kind() == NuisanceKind::beta_regression);
    CHECK(back->target() == NuisanceTarget::c_given_z);
    CHECK(back->levels() == std::vector<double>{0.0, 1.0});
    for (double t : {0.1, 0.6})
      for (double z : {0.0, 1.0})
        CHECK(back->density(t, z) == doctest::Approx(m.density(t, z)).epsilon(1e-14));
  }

  TEST_CASE("bspline density round-trips") {
    const Dataset data = draw_censored(600, false, 55);
    const BSplineDensity fit = fit_bspline_censored(data, NuisanceTarget::x_given_z, 7, 3);
    const std::string path = "/tmp/sparcc_test_spline.model";
    fit.save_file(path);
    const auto back = NuisanceDensity::load_file(path);
    CHECK(back->kind() == NuisanceKind::bspline);
    for (double t : {0.15, 0.4, 0.85})
      CHECK(back->density(t, 0.0) == doctest::Approx(fit.density(t, 0.0)).epsilon(1e-12));
    std::remove(path.c_str());
  }

  TEST_CASE("exact density with beta shapes round-trips; callables do not serialize") {
    const ExactDensity shaped(NuisanceTarget::x_given_z, {0.0, 1.0}, {{1.5, 2.5}, {2.5, 1.5}});
    std::ostringstream out;
    shaped.save(out);
    std::istringstream in(out.str());
    const auto back = NuisanceDensity::load(in);
    CHECK(back->kind() == NuisanceKind::exact);
    CHECK(back->density(0.3, 1.0) == doctest::Approx(shaped.density(0.3, 1.0)).epsilon(1e-14));

    const ExactDensity callable(
        NuisanceTarget::x_given_z, {0.0}, [](double, double) { return 1.0; },
        [](double t, double) { return 1.0 - t; });
    std::ostringstream sink;
    CHECK_THROWS_AS(callable.save(sink), Error);
  }

  TEST_CASE("loader rejects malformed model text") {
    std::istringstream junk("kind = applesauce\n");
    CHECK_THROWS_AS(NuisanceDensity::load(junk), Error);
    CHECK_THROWS_AS(NuisanceDensity::load_file("/tmp/not/a/real/model.txt"), Error);
  }
}

TEST_SUITE("tail-moment") {
  TEST_CASE("conditional expectation over the alive tail matches a direct sum") {
    const ExactDensity eta1(NuisanceTarget::x_given_z, {0.0}, {{2.0, 3.0}});
    const auto grid = make_grid(eta1, {0.0}, 30, 0.02, 0.97);
    NormalOutcomeModel outcome;
    RegressionParams p;
    p.beta0 = 1.0;
    p.beta1 = 10.0;
    p.beta2 = 2.0;
    p.log_sigma2 = 0.0;

    const double y = 4.0, w = 0.35;
    auto g = [](double x) { return (Eigen::VectorXd(1) << x * x).finished(); };
    const Eigen::VectorXd got = conditional_moment_e1(outcome, p, g, y, w, 0.0, grid);

    double num = 0.0, den = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
      if (grid.nodes[j] <= w) continue;
      const double f = outcome.density(y, grid.nodes[j], 0.0, p) * grid.masses[0][j];
      num += grid.nodes[j] * grid.nodes[j] * f;
      den += f;
    }
    CHECK(got[0] == doctest::Approx(num / den).epsilon(1e-12));
  }

  TEST_CASE("unit function has conditional expectation exactly one") {
    const ExactDensity eta1(NuisanceTarget::x_given_z, {0.0}, {{2.0, 3.0}});
    const auto grid = make_grid(eta1, {0.0}, 20, 0.05, 0.95);
    NormalOutcomeModel outcome;
    RegressionParams p;
    p.beta1 = 5.0;
    auto one = [](double) { return Eigen::VectorXd::Ones(1); };
    const Eigen::VectorXd got = conditional_moment_e1(outcome, p, one, 1.0, 0.4, 0.0, grid);
    CHECK(got[0] == 1.0);
  }

  TEST_CASE("censored value beyond the last node cannot be conditioned on") {
    const ExactDensity eta1(NuisanceTarget::x_given_z, {0.0}, {{2.0, 3.0}});
    const auto grid = make_grid(eta1, {0.0}, 20, 0.05, 0.95);
    NormalOutcomeModel outcome;
    RegressionParams p;
    auto one = [](double) { return Eigen::VectorXd::Ones(1); };
    CHECK_THROWS_AS(conditional_moment_e1(outcome, p, one, 1.0, 0.96, 0.0, grid), Error);
  }
}
