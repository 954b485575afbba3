#pragma once

#include <string>

#include "sparcc/types.hpp"

namespace sparcc {

// Reads a headered CSV with columns y, w, delta, z in any order; an optional
// x column, when present and fully populated, enables oracle fitting.
// Unknown columns are ignored. Errors: errc::schema (bad header),
// errc::parse (bad cell, message cites the 1-based data row),
// errc::empty_dataset.
Dataset load_csv(const std::string& path);
Dataset parse_csv_text(const std::string& text, const std::string& origin);

// Writes y,w,delta,z[,x] with round-trip-safe number formatting (atomic).
void write_csv(const Dataset& data, const std::string& path);
std::string csv_text(const Dataset& data);

// Divides every w (and x, when present) by max(w) * (1 + margin) and folds the
// divisor into scale_factor. Requires margin >= 0 and all w > 0. Applying the
// same margin twice is a no-op: the second pass computes divisor 1.
Dataset apply_scaling(const Dataset& data, double margin);

// Fits require every w strictly inside (0,1); call before estimation.
void check_unit_interval(const Dataset& data);

}  // namespace sparcc
