#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sparcc/errors.hpp"

namespace sparcc {

// One row of observed data: outcome y, follow-up value w = min(x, c),
// censoring indicator delta = 1{x <= c}, fully observed covariate z.
// x is carried along when the file/generator provides it (oracle fits only);
// it plays no role in the observed-data estimators.
struct ObservedRecord {
  double y = 0.0;
  double w = 0.0;
  int delta = 1;
  double z = 0.0;
  std::optional<double> x;
};

// A complete generated row, before censoring is applied to the view.
struct CompleteRecord {
  double y = 0.0;
  double x = 0.0;
  double c = 0.0;
  double z = 0.0;

  double w() const { return x <= c ? x : c; }
  int delta() const { return x <= c ? 1 : 0; }
  ObservedRecord observed(bool keep_x = true) const {
    ObservedRecord r;
    r.y = y;
    r.w = w();
    r.delta = delta();
    r.z = z;
    if (keep_x) r.x = x;
    return r;
  }
};

// Regression parameters of the normal outcome model
//   Y | X=x, Z=z  ~  N(beta0 + beta1 x + beta2 z [+ beta3 x z], sigma2),
// with sigma2 carried on the log scale so the parameter space is free.
// beta3 is active only when `interaction` is set.
struct RegressionParams {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  double log_sigma2 = 0.0;
  bool interaction = false;

  int dim() const { return interaction ? 5 : 4; }
  double sigma2() const { return std::exp(log_sigma2); }

  Eigen::VectorXd to_vector() const {
    Eigen::VectorXd v(dim());
    if (interaction)
      v << beta0, beta1, beta2, beta3, log_sigma2;
    else
      v << beta0, beta1, beta2, log_sigma2;
    return v;
  }

  static RegressionParams from_vector(const Eigen::VectorXd& v, bool interaction) {
    RegressionParams p;
    p.interaction = interaction;
    if (interaction) {
      if (v.size() != 5) fail(errc::domain, "interaction model expects 5 parameters");
      p.beta0 = v[0]; p.beta1 = v[1]; p.beta2 = v[2]; p.beta3 = v[3]; p.log_sigma2 = v[4];
    } else {
      if (v.size() != 4) fail(errc::domain, "base model expects 4 parameters");
      p.beta0 = v[0]; p.beta1 = v[1]; p.beta2 = v[2]; p.log_sigma2 = v[3];
    }
    return p;
  }

  // Names in estimating-vector order, used by result tables.
  std::vector<std::string> names() const {
    if (interaction) return {"beta0", "beta1", "beta2", "beta3", "log_sigma2"};
    return {"beta0", "beta1", "beta2", "log_sigma2"};
  }
};

struct Dataset {
  std::vector<ObservedRecord> records;
  // Product of all divisors applied to w (and x) so far; 1 means raw scale.
  double scale_factor = 1.0;
  // Sorted distinct z values.
  std::vector<double> z_levels;

  std::size_t size() const { return records.size(); }

  void refresh_levels() {
    z_levels.clear();
    for (const auto& r : records) {
      bool found = false;
      for (double v : z_levels)
        if (v == r.z) { found = true; break; }
      if (!found) z_levels.push_back(r.z);
    }
    std::sort(z_levels.begin(), z_levels.end());
  }

  bool all_have_x() const {
    for (const auto& r : records)
      if (!r.x) return false;
    return !records.empty();
  }
};

// Index of z within the sorted levels, matched with a small tolerance for
// values that round-tripped through text.
inline int level_index_of(const std::vector<double>& levels, double z) {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (std::abs(levels[i] - z) <= 1e-9 * std::max(1.0, std::abs(levels[i]))) return (int)i;
  fail(errc::unknown_level, "z = " + std::to_string(z) + " is not a fitted level");
}

}  // namespace sparcc
