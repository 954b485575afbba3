#pragma once

#include <stdexcept>
#include <string>

namespace sparcc {

// Failure categories. The CLI maps user/input problems to exit code 2 and
// numerical failures (convergence, singular_system, calibration) to exit 3.
enum class errc {
  schema,            // CSV header missing a required column
  parse,             // malformed cell / invalid delta, reported with its row
  empty_dataset,
  domain,            // value outside the domain an operation requires
  precondition,      // sample-size or configuration preconditions
  unknown_level,     // z not among the fitted levels
  tail_support,      // censored w at or above the last grid node
  degenerate_grid,   // grid cannot cover the observed data
  extrapolation,     // interpolation requested outside the node range
  conditioning,      // matrix not positive definite / not invertible
  serialization,     // unreadable or unwritable model/config file
  convergence,       // iteration limit or failed step search
  singular_system,
  calibration,       // censoring calibration could not bracket the target
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::schema: return "schema";
    case errc::parse: return "parse";
    case errc::empty_dataset: return "empty-dataset";
    case errc::domain: return "domain";
    case errc::precondition: return "precondition";
    case errc::unknown_level: return "unknown-level";
    case errc::tail_support: return "tail-support";
    case errc::degenerate_grid: return "degenerate-grid";
    case errc::extrapolation: return "extrapolation";
    case errc::conditioning: return "conditioning";
    case errc::serialization: return "serialization";
    case errc::convergence: return "convergence";
    case errc::singular_system: return "singular-system";
    case errc::calibration: return "calibration";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const noexcept { return code_; }

  // True for failures of the numerics rather than of the input.
  bool numerical() const noexcept {
    return code_ == errc::convergence || code_ == errc::singular_system ||
           code_ == errc::calibration;
  }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace sparcc
