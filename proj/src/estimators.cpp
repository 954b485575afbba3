#include "sparcc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "sparcc/dataset.hpp"
#include "sparcc/errors.hpp"
#include "sparcc/fredholm.hpp"
#include "sparcc/io_util.hpp"
#include "sparcc/quadrature.hpp"
#include "sparcc/score.hpp"

namespace sparcc {

namespace {

const NormalOutcomeModel kNormal;

std::vector<double> levels_of(const Dataset& data) {
  if (!data.z_levels.empty()) return data.z_levels;
  std::vector<double> out;
  for (const auto& r : data.records) {
    bool found = false;
    for (double v : out)
      if (v == r.z) { found = true; break; }
    if (!found) out.push_back(r.z);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation pipeline for the grid-based estimators. Owns the grid and the
// per-beta solution cache; heap-allocated and never moved, because built
// integral-equation solutions keep a pointer to the grid.
struct Pipeline {
  const Dataset* data = nullptr;
  const OutcomeModel* outcome = nullptr;
  std::shared_ptr<const NuisanceDensity> eta1, eta2;
  QuadratureGrid grid;
  FredholmCache cache;
  bool use_a = false;  // efficient score vs plain likelihood score
  int hermite_order = 20;
  long score_underflows = 0;

  std::vector<FredholmSolution> solutions(const RegressionParams& params) {
    std::vector<FredholmSolution> out;
    if (!use_a) return out;
    const int levels = (int)grid.levels.size();
    auto builder = [&](int level) {
      return [this, level, &params]() {
        return solve(build_system(grid, level, params, *eta2, *outcome, hermite_order));
      };
    };
    // Two passes: the first may evict entries while inserting, the second only
    // copies, so the returned values never alias a vacated cache slot.
    for (int l = 0; l < levels; ++l) cache.get(l, params, builder(l));
    out.reserve(levels);
    for (int l = 0; l < levels; ++l) out.push_back(cache.get(l, params, builder(l)));
    return out;
  }

  ScoreContext context(const RegressionParams& params,
                       const std::vector<FredholmSolution>& sols) const {
    ScoreContext ctx;
    ctx.outcome = outcome;
    ctx.grid = &grid;
    ctx.eta1 = eta1.get();
    ctx.params = params;
    for (const auto& s : sols) ctx.solutions.push_back(&s);
    return ctx;
  }

  Eigen::VectorXd record_score(const ScoreContext& ctx, int i) const {
    const ObservedRecord& r = data->records[(std::size_t)i];
    try {
      return use_a ? s_eff(r, ctx) : s_mle(r, ctx);
    } catch (const Error& e) {
      if (e.code() == errc::tail_support)
        fail(errc::tail_support, std::string(e.what()) + " (record " + std::to_string(i) + ")");
      throw;
    }
  }

  Eigen::VectorXd sum_scores(const RegressionParams& params) {
    const auto sols = solutions(params);
    const ScoreContext ctx = context(params, sols);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(params.dim());
    for (int i = 0; i < (int)data->records.size(); ++i) acc += record_score(ctx, i);
    score_underflows += ctx.underflow_count;
    return acc;
  }

  Eigen::MatrixXd record_scores(const RegressionParams& params) {
    const auto sols = solutions(params);
    const ScoreContext ctx = context(params, sols);
    const int n = (int)data->records.size();
    Eigen::MatrixXd out(n, params.dim());
    for (int i = 0; i < n; ++i) out.row(i) = record_score(ctx, i).transpose();
    score_underflows += ctx.underflow_count;
    return out;
  }
};

struct DiagAccum {
  double max_residual = 0.0;
  double max_asymmetry = 0.0;
  long underflows = 0;
  long hits = 0;
  long misses = 0;

  void merge(const Pipeline& p) {
    max_residual = std::max(max_residual, p.cache.max_residual);
    max_asymmetry = std::max(max_asymmetry, p.cache.max_asymmetry);
    underflows += p.cache.underflow_count + p.score_underflows;
    hits += p.cache.hits;
    misses += p.cache.misses;
  }
};

struct PreparedNuisance {
  std::shared_ptr<const NuisanceDensity> model;
  bool fitted_here = false;
};

PreparedNuisance prepare_nuisance(const Dataset& data, NuisanceTarget target,
                                  const NuisanceChoice& choice, const FitOptions& opts,
                                  const std::vector<double>& levels) {
  PreparedNuisance out;
  if (choice.supplied) {
    out.model = choice.supplied;
    return out;
  }
  switch (choice.spec) {
    case NuisanceSpec::parametric:
      // A z-dependent shape map is unidentified with a single level; the
      // families coincide there, so fall back to the pooled fit.
      out.model = std::make_shared<BetaWorkingModel>(
          fit_beta_censored(data, target, levels.size() >= 2));
      out.fitted_here = true;
      break;
    case NuisanceSpec::parametric_mis:
      out.model = std::make_shared<BetaWorkingModel>(fit_beta_censored(data, target, false));
      out.fitted_here = true;
      break;
    case NuisanceSpec::bspline:
      out.model = std::make_shared<BSplineDensity>(
          fit_bspline_censored(data, target, opts.bspline_basis, opts.bspline_degree));
      out.fitted_here = true;
      break;
    case NuisanceSpec::exact:
      fail(errc::precondition, std::string("exact ") + target_name(target) +
                                   " requires a supplied density");
  }
  return out;
}

// Central-difference gradient of the summed censored log-likelihood in the
// raw working-model parameters, evaluated at `at` within `base`'s family.
Eigen::VectorXd summed_loglik_grad(const BetaWorkingModel& base, const Eigen::VectorXd& at,
                                   const Dataset& data) {
  const int d = (int)at.size();
  Eigen::VectorXd g(d);
  for (int j = 0; j < d; ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(at[j]));
    Eigen::VectorXd ap = at, am = at;
    ap[j] += h;
    am[j] -= h;
    const BetaWorkingModel mp = base.with_raw_params(ap);
    const BetaWorkingModel mm = base.with_raw_params(am);
    double acc = 0.0;
    for (const auto& r : data.records) acc += mp.record_loglik(r) - mm.record_loglik(r);
    g[j] = acc / (2.0 * h);
  }
  return g;
}

// Per-record central-difference gradients of the censored log-likelihood at
// the fitted raw parameters (meat contributions of a stacked block).
Eigen::MatrixXd nuisance_record_grads(const BetaWorkingModel& model, const Dataset& data) {
  const Eigen::VectorXd at = model.raw_params();
  const int d = (int)at.size();
  const int n = (int)data.records.size();
  Eigen::MatrixXd out(n, d);
  for (int j = 0; j < d; ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(at[j]));
    Eigen::VectorXd ap = at, am = at;
    ap[j] += h;
    am[j] -= h;
    const BetaWorkingModel mp = model.with_raw_params(ap);
    const BetaWorkingModel mm = model.with_raw_params(am);
    for (int i = 0; i < n; ++i) {
      const ObservedRecord& r = data.records[(std::size_t)i];
      out(i, j) = (mp.record_loglik(r) - mm.record_loglik(r)) / (2.0 * h);
    }
  }
  return out;
}

void finish_vcov(FitResult& res, const Eigen::MatrixXd& raw, const std::string& rule) {
  // Symmetrize away matrix-product rounding so downstream consumers can rely
  // on exact symmetry.
  const Eigen::MatrixXd vcov = 0.5 * (raw + raw.transpose());
  if (!vcov.allFinite()) {
    res.diagnostics.vcov_ok = false;
    res.diagnostics.vcov_note = "variance matrix has non-finite entries";
    return;
  }
  const int p = (int)vcov.rows();
  for (int i = 0; i < p; ++i) {
    if (vcov(i, i) < 0.0) {
      res.diagnostics.vcov_ok = false;
      res.diagnostics.vcov_note = "variance matrix has a negative diagonal";
      return;
    }
  }
  res.vcov = vcov;
  res.se.resize(p);
  for (int i = 0; i < p; ++i) res.se[i] = std::sqrt(vcov(i, i));
  res.diagnostics.vcov_ok = true;
  res.diagnostics.vcov_note = rule;
}

using PipeFactory = std::function<std::unique_ptr<Pipeline>(
    std::shared_ptr<const NuisanceDensity>, std::shared_ptr<const NuisanceDensity>)>;

// Joint sandwich over the stacked equations (alpha1 block, alpha2 block,
// regression block); either alpha block may be absent, in which case this
// reduces to the plain sandwich over the regression equation alone.
void stacked_variance(FitResult& res, const Dataset& data, const BetaWorkingModel* bm1,
                      const BetaWorkingModel* bm2, const PipeFactory& make_pipe,
                      Pipeline& base_pipe, DiagAccum& acc) {
  const int d1 = bm1 ? (int)bm1->raw_params().size() : 0;
  const int d2 = bm2 ? (int)bm2->raw_params().size() : 0;
  const int p = res.params.dim();
  const int D = d1 + d2 + p;
  const int n = (int)data.records.size();

  Eigen::VectorXd theta(D);
  if (bm1) theta.segment(0, d1) = bm1->raw_params();
  if (bm2) theta.segment(d1, d2) = bm2->raw_params();
  theta.tail(p) = res.params.to_vector();

  auto G = [&](const Eigen::VectorXd& th) -> Eigen::VectorXd {
    std::shared_ptr<const NuisanceDensity> e1 = base_pipe.eta1;
    std::shared_ptr<const NuisanceDensity> e2 = base_pipe.eta2;
    if (bm1) e1 = std::make_shared<BetaWorkingModel>(bm1->with_raw_params(th.segment(0, d1)));
    if (bm2) e2 = std::make_shared<BetaWorkingModel>(bm2->with_raw_params(th.segment(d1, d2)));
    Eigen::VectorXd g(D);
    if (bm1) g.segment(0, d1) = summed_loglik_grad(*bm1, th.segment(0, d1), data);
    if (bm2) g.segment(d1, d2) = summed_loglik_grad(*bm2, th.segment(d1, d2), data);
    const RegressionParams beta = RegressionParams::from_vector(th.tail(p), res.params.interaction);
    auto pipe = make_pipe(e1, e2);
    g.tail(p) = pipe->sum_scores(beta);
    acc.merge(*pipe);
    return g;
  };

  const Eigen::VectorXd g0 = G(theta);
  Eigen::MatrixXd bread(D, D);
  for (int j = 0; j < D; ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(theta[j]));
    Eigen::VectorXd tp = theta;
    tp[j] += h;
    bread.col(j) = (G(tp) - g0) / h;
  }
  if (!bread.allFinite()) {
    res.diagnostics.vcov_ok = false;
    res.diagnostics.vcov_note = "stacked jacobian has non-finite entries";
    return;
  }

  Eigen::MatrixXd psi(n, D);
  if (bm1) psi.block(0, 0, n, d1) = nuisance_record_grads(*bm1, data);
  if (bm2) psi.block(0, d1, n, d2) = nuisance_record_grads(*bm2, data);
  psi.block(0, d1 + d2, n, p) = base_pipe.record_scores(res.params);
  const Eigen::MatrixXd meat = psi.transpose() * psi;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(bread);
  if (!lu.isInvertible()) {
    res.diagnostics.vcov_ok = false;
    res.diagnostics.vcov_note = "stacked jacobian is singular";
    return;
  }
  const Eigen::MatrixXd inv = lu.inverse();
  const Eigen::MatrixXd full = inv * meat * inv.transpose();
  finish_vcov(res, full.bottomRightCorner(p, p),
              d1 + d2 > 0 ? "stacked sandwich over nuisance and regression equations"
                          : "sandwich over the regression equation");
}

// Closed-form normal-likelihood fit of rows (y, x, z), shared by the
// complete-case and oracle estimators.
struct XRow {
  double y, x, z;
};

FitResult closed_form_normal_fit(EstimatorKind kind, const std::vector<XRow>& rows,
                                 const FitOptions& opts) {
  FitResult res;
  res.estimator = kind;
  res.params.interaction = opts.interaction;
  const int pm = opts.interaction ? 4 : 3;
  const int p = res.params.dim();
  const int n = (int)rows.size();
  if (n < p + 1)
    fail(errc::precondition, std::string(estimator_name(kind)) + " fit needs at least " +
                                 std::to_string(p + 1) + " usable rows, got " + std::to_string(n));

  Eigen::MatrixXd design(n, pm);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = rows[(std::size_t)i].x;
    design(i, 2) = rows[(std::size_t)i].z;
    if (opts.interaction) design(i, 3) = rows[(std::size_t)i].x * rows[(std::size_t)i].z;
    y[i] = rows[(std::size_t)i].y;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < pm) fail(errc::singular_system, "regression design matrix is rank deficient");
  const Eigen::VectorXd coef = qr.solve(y);
  const double rss = (y - design * coef).squaredNorm();
  if (!(rss > 0.0)) fail(errc::conditioning, "residual variance is zero");

  res.params.beta0 = coef[0];
  res.params.beta1 = coef[1];
  res.params.beta2 = coef[2];
  if (opts.interaction) res.params.beta3 = coef[3];
  res.params.log_sigma2 = std::log(rss / n);
  res.estimate = res.params.to_vector();
  res.diagnostics.converged = true;

  auto sum_full = [&](const RegressionParams& q) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
    for (const auto& r : rows) acc += kNormal.score_full(r.y, r.x, r.z, q);
    return acc;
  };
  res.diagnostics.score_norm = sum_full(res.params).lpNorm<Eigen::Infinity>();

  if (opts.compute_se) {
    const Eigen::VectorXd g0 = sum_full(res.params);
    Eigen::MatrixXd bread(p, p);
    const Eigen::VectorXd th = res.estimate;
    for (int j = 0; j < p; ++j) {
      const double h = std::max(1e-6, 1e-6 * std::abs(th[j]));
      Eigen::VectorXd tp = th;
      tp[j] += h;
      bread.col(j) =
          (sum_full(RegressionParams::from_vector(tp, opts.interaction)) - g0) / h;
    }
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
    for (const auto& r : rows) {
      const Eigen::VectorXd s = kNormal.score_full(r.y, r.x, r.z, res.params);
      meat += s * s.transpose();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bread);
    if (!lu.isInvertible()) {
      res.diagnostics.vcov_ok = false;
      res.diagnostics.vcov_note = "sandwich bread is singular";
    } else {
      const Eigen::MatrixXd inv = lu.inverse();
      finish_vcov(res, inv * meat * inv.transpose(), "sandwich over the full-data score");
    }
  }
  return res;
}

FitResult fit_semiparametric(EstimatorKind kind, const Dataset& data, const NuisanceChoice& c1,
                             const NuisanceChoice* c2, const FitOptions& opts) {
  if (data.records.empty()) fail(errc::empty_dataset, "cannot fit on an empty dataset");
  check_unit_interval(data);
  const std::vector<double> levels = levels_of(data);

  const PreparedNuisance n1 = prepare_nuisance(data, NuisanceTarget::x_given_z, c1, opts, levels);
  PreparedNuisance n2;
  if (kind == EstimatorKind::sparcc) {
    if (!c2) fail(errc::precondition, "efficient-score fit needs a censoring-density choice");
    n2 = prepare_nuisance(data, NuisanceTarget::c_given_z, *c2, opts, levels);
  }

  const auto [lo, hi] = grid_support(data);
  const PipeFactory make_pipe = [&, lo = lo, hi = hi](std::shared_ptr<const NuisanceDensity> e1,
                                                      std::shared_ptr<const NuisanceDensity> e2) {
    auto pipe = std::make_unique<Pipeline>();
    pipe->data = &data;
    pipe->outcome = &kNormal;
    pipe->eta1 = std::move(e1);
    pipe->eta2 = std::move(e2);
    pipe->grid = make_grid(*pipe->eta1, levels, opts.nodes, lo, hi);
    pipe->use_a = kind == EstimatorKind::sparcc;
    pipe->hermite_order = opts.hermite_order;
    return pipe;
  };
  auto pipe = make_pipe(n1.model, n2.model);

  FitOptions init_opts = opts;
  init_opts.compute_se = false;
  const FitResult init = fit_complete_case(data, init_opts);

  auto Gfun = [&](const Eigen::VectorXd& v) {
    return pipe->sum_scores(RegressionParams::from_vector(v, opts.interaction));
  };
  const RootResult root =
      solve_estimating_equation(Gfun, init.estimate, opts.newton_tol, opts.newton_max_iter);

  FitResult res;
  res.estimator = kind;
  res.params = RegressionParams::from_vector(root.x, opts.interaction);
  res.estimate = root.x;
  res.eta1 = n1.model;
  res.eta2 = n2.model;
  res.diagnostics.newton_iterations = root.iterations;
  res.diagnostics.converged = root.converged;
  res.diagnostics.score_norm = root.g.lpNorm<Eigen::Infinity>();
  res.diagnostics.grid_lo = lo;
  res.diagnostics.grid_hi = hi;

  DiagAccum acc;
  if (opts.compute_se) {
    const bool any_bspline =
        n1.model->kind() == NuisanceKind::bspline ||
        (n2.model && n2.model->kind() == NuisanceKind::bspline);
    if (any_bspline) {
      // With a spline nuisance the estimating score is treated as the
      // efficient influence: variance from the inverse summed outer product.
      const Eigen::MatrixXd scores = pipe->record_scores(res.params);
      const Eigen::MatrixXd info = scores.transpose() * scores;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
      if (!lu.isInvertible()) {
        res.diagnostics.vcov_ok = false;
        res.diagnostics.vcov_note = "score outer-product matrix is singular";
      } else {
        finish_vcov(res, lu.inverse(), "inverse outer-product of estimating scores");
      }
    } else {
      auto stacked_block = [](const PreparedNuisance& nu) -> const BetaWorkingModel* {
        if (!nu.fitted_here) return nullptr;
        const NuisanceKind k = nu.model->kind();
        if (k != NuisanceKind::beta_regression && k != NuisanceKind::beta_misspecified)
          return nullptr;
        return static_cast<const BetaWorkingModel*>(nu.model.get());
      };
      stacked_variance(res, data, stacked_block(n1), stacked_block(n2), make_pipe, *pipe, acc);
    }
  }

  acc.merge(*pipe);
  res.diagnostics.max_fredholm_residual = acc.max_residual;
  res.diagnostics.max_kernel_asymmetry = acc.max_asymmetry;
  res.diagnostics.underflow_count = acc.underflows;
  res.diagnostics.cache_hits = acc.hits;
  res.diagnostics.cache_misses = acc.misses;
  return res;
}

}  // namespace

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::sparcc: return "sparcc";
    case EstimatorKind::mle: return "mle";
    case EstimatorKind::complete_case: return "complete-case";
    case EstimatorKind::oracle: return "oracle";
  }
  fail(errc::domain, "unknown estimator kind");
}

EstimatorKind estimator_from_name(const std::string& s) {
  if (s == "sparcc") return EstimatorKind::sparcc;
  if (s == "mle") return EstimatorKind::mle;
  if (s == "complete-case" || s == "cc") return EstimatorKind::complete_case;
  if (s == "oracle") return EstimatorKind::oracle;
  fail(errc::domain, "unknown estimator '" + s + "'");
}

const char* nuisance_spec_name(NuisanceSpec s) {
  switch (s) {
    case NuisanceSpec::parametric: return "parametric";
    case NuisanceSpec::parametric_mis: return "parametric-mis";
    case NuisanceSpec::bspline: return "bspline";
    case NuisanceSpec::exact: return "exact";
  }
  fail(errc::domain, "unknown nuisance spec");
}

NuisanceSpec nuisance_spec_from_name(const std::string& s) {
  if (s == "parametric") return NuisanceSpec::parametric;
  if (s == "parametric-mis") return NuisanceSpec::parametric_mis;
  if (s == "bspline") return NuisanceSpec::bspline;
  if (s == "exact") return NuisanceSpec::exact;
  fail(errc::domain, "unknown nuisance model '" + s + "'");
}

std::string FitResult::table() const {
  std::string out = "parameter,estimate,se\n";
  const std::vector<std::string> nm = params.names();
  for (int i = 0; i < (int)nm.size(); ++i) {
    out += nm[(std::size_t)i] + "," + format_full(estimate[i]) + ",";
    out += (se.size() == estimate.size() ? format_full(se[i]) : std::string("nan"));
    out += "\n";
  }
  return out;
}

RootResult solve_estimating_equation(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& G, Eigen::VectorXd x0,
    double tol, int max_iter) {
  const int p = (int)x0.size();
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g = G(x);
  if (!g.allFinite()) fail(errc::convergence, "estimating equation is not finite at the start");

  RootResult out;
  for (int iter = 0; iter <= max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= tol) {
      out.x = x;
      out.g = g;
      out.iterations = iter;
      out.converged = true;
      return out;
    }
    if (iter == max_iter) break;

    Eigen::MatrixXd jac(p, p);
    for (int j = 0; j < p; ++j) {
      const double h = std::max(1e-6, 1e-6 * std::abs(x[j]));
      Eigen::VectorXd xp = x;
      xp[j] += h;
      jac.col(j) = (G(xp) - g) / h;
    }

    Eigen::VectorXd dir;
    bool have_dir = jac.allFinite();
    if (have_dir) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
      if (lu.isInvertible()) {
        dir = lu.solve(-g);
        have_dir = dir.allFinite();
      } else {
        have_dir = false;
      }
    }
    if (!have_dir) {
      // Ridged normal equations as a fallback direction.
      const Eigen::MatrixXd jtj =
          jac.transpose() * jac + 1e-8 * Eigen::MatrixXd::Identity(p, p);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(jtj);
      if (ldlt.info() != Eigen::Success)
        fail(errc::singular_system, "estimating-equation jacobian is unusable");
      dir = ldlt.solve(-jac.transpose() * g);
      if (!dir.allFinite())
        fail(errc::singular_system, "estimating-equation jacobian produced a non-finite step");
    }

    const double gnorm = g.norm();
    double step = 1.0;
    bool accepted = false;
    for (int t = 0; t <= 30; ++t, step *= 0.5) {
      const Eigen::VectorXd xt = x + step * dir;
      Eigen::VectorXd gt;
      try {
        gt = G(xt);
      } catch (const Error&) {
        continue;  // trial point outside the computable region
      }
      if (gt.allFinite() && gt.norm() < gnorm) {
        x = xt;
        g = gt;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      fail(errc::convergence,
           "estimating-equation line search stalled at |G| = " + std::to_string(gnorm));
  }
  fail(errc::convergence, "estimating equation did not converge within " +
                              std::to_string(max_iter) + " iterations");
}

FitResult fit_complete_case(const Dataset& data, const FitOptions& opts) {
  std::vector<XRow> rows;
  for (const auto& r : data.records)
    if (r.delta == 1) rows.push_back({r.y, r.w, r.z});
  return closed_form_normal_fit(EstimatorKind::complete_case, rows, opts);
}

FitResult fit_oracle(const Dataset& data, const FitOptions& opts) {
  std::vector<XRow> rows;
  rows.reserve(data.records.size());
  for (const auto& r : data.records) {
    if (!r.x) fail(errc::precondition, "oracle fit needs the true covariate on every record");
    rows.push_back({r.y, *r.x, r.z});
  }
  return closed_form_normal_fit(EstimatorKind::oracle, rows, opts);
}

FitResult fit_mle(const Dataset& data, const NuisanceChoice& eta1, const FitOptions& opts) {
  return fit_semiparametric(EstimatorKind::mle, data, eta1, nullptr, opts);
}

FitResult fit_sparcc(const Dataset& data, const NuisanceChoice& eta1, const NuisanceChoice& eta2,
                     const FitOptions& opts) {
  return fit_semiparametric(EstimatorKind::sparcc, data, eta1, &eta2, opts);
}

}  // namespace sparcc
