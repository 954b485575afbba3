#pragma once

#include <iosfwd>

namespace sparcc {

// Fast deterministic invariant suite (quadrature identities, grid mass
// normalization, spline partition of unity, integral-equation residuals and
// symmetry, score/gradient agreement). Prints one [ok]/[FAIL] line per check
// and returns the number of failures. `inject_simpson_fault` arms the
// composite-Simpson weight perturbation first, so the quadrature checks must
// report the corruption.
int run_selftest(std::ostream& out, bool inject_simpson_fault);

}  // namespace sparcc
