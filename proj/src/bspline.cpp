#include "sparcc/bspline.hpp"

#include <algorithm>
#include <cmath>

#include "sparcc/errors.hpp"

namespace sparcc {

namespace {
// 3-point Gauss-Legendre on [-1, 1].
constexpr double kGlNode = 0.7745966692414834;  // sqrt(3/5)
constexpr double kGlW0 = 8.0 / 9.0;
constexpr double kGlW1 = 5.0 / 9.0;
}  // namespace

BSplineBasis::BSplineBasis(int num_basis, int degree, double lo, double hi)
    : m_(num_basis), degree_(degree), lo_(lo), hi_(hi) {
  if (degree < 1) fail(errc::precondition, "spline degree must be >= 1");
  if (num_basis < degree + 2)
    fail(errc::precondition, "spline basis needs at least degree+2 functions");
  if (!(lo < hi)) fail(errc::domain, "spline support needs lo < hi");

  // Clamped knot vector: degree+1 copies at each end, equally spaced interior.
  const int n_interior = m_ - degree_ - 1;
  knots_.reserve(m_ + degree_ + 1);
  for (int i = 0; i <= degree_; ++i) knots_.push_back(lo_);
  for (int i = 1; i <= n_interior; ++i)
    knots_.push_back(lo_ + (hi_ - lo_) * i / (n_interior + 1));
  for (int i = 0; i <= degree_; ++i) knots_.push_back(hi_);

  // Full-support integrals via per-span quadrature.
  integrals_ = tail_integrals(lo_);
}

std::vector<double> BSplineBasis::interior_knots() const {
  return std::vector<double>(knots_.begin() + degree_ + 1, knots_.end() - degree_ - 1);
}

int BSplineBasis::find_span(double x) const {
  // Span index i with knots[i] <= x < knots[i+1], clamped so x == hi lands in
  // the last nonempty span.
  int lo_i = degree_, hi_i = m_ - 1;
  if (x >= knots_[m_]) return m_ - 1;
  while (lo_i < hi_i) {
    const int mid = (lo_i + hi_i + 1) / 2;
    if (knots_[mid] <= x)
      lo_i = mid;
    else
      hi_i = mid - 1;
  }
  return lo_i;
}

Eigen::VectorXd BSplineBasis::evaluate(double x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
  if (x < lo_ || x > hi_) return out;

  const int span = find_span(x);
  // Triangular Cox-de Boor scheme: vals[r] ends as B_{span-degree+r}(x).
  std::vector<double> vals(degree_ + 1, 0.0), left(degree_ + 1), right(degree_ + 1);
  vals[0] = 1.0;
  for (int j = 1; j <= degree_; ++j) {
    left[j] = x - knots_[span + 1 - j];
    right[j] = knots_[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = vals[r] / (right[r + 1] + left[j - r]);
      vals[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    vals[j] = saved;
  }
  for (int r = 0; r <= degree_; ++r) out[span - degree_ + r] = vals[r];
  return out;
}

Eigen::VectorXd BSplineBasis::tail_integrals(double t) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m_);
  if (t >= hi_) return acc;
  const double from = std::max(t, lo_);
  // Distinct spans run from knot index degree to m-1.
  for (int s = degree_; s < m_; ++s) {
    const double a = std::max(knots_[s], from);
    const double b = knots_[s + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    acc += half * (kGlW0 * evaluate(mid) +
                   kGlW1 * (evaluate(mid - half * kGlNode) + evaluate(mid + half * kGlNode)));
  }
  return acc;
}

}  // namespace sparcc
