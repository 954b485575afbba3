#include "sparcc/dataset.hpp"

#include <cmath>
#include <sstream>

#include "sparcc/io_util.hpp"

namespace sparcc {

namespace {

int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return (int)i;
  return -1;
}

double cell_value(const std::vector<std::string>& fields, int col, int row, const char* what) {
  double v;
  if (col >= (int)fields.size() || !parse_double(fields[col], v))
    fail(errc::parse, std::string("row ") + std::to_string(row) + ": cannot read " + what +
                          " from '" + (col < (int)fields.size() ? fields[col] : "") + "'");
  if (!std::isfinite(v))
    fail(errc::parse, std::string("row ") + std::to_string(row) + ": non-finite " + what);
  return v;
}

}  // namespace

Dataset parse_csv_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(errc::empty_dataset, origin + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line, ',');
  const int cy = find_column(header, "y");
  const int cw = find_column(header, "w");
  const int cd = find_column(header, "delta");
  const int cz = find_column(header, "z");
  const int cx = find_column(header, "x");
  if (cy < 0 || cw < 0 || cd < 0 || cz < 0) {
    std::string missing;
    for (const char* name : {"y", "w", "delta", "z"})
      if (find_column(header, name) < 0) missing += std::string(missing.empty() ? "" : ", ") + name;
    fail(errc::schema, origin + ": header lacks required column(s): " + missing);
  }

  Dataset data;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line, ',');
    ObservedRecord r;
    r.y = cell_value(fields, cy, row, "y");
    r.w = cell_value(fields, cw, row, "w");
    const double d = cell_value(fields, cd, row, "delta");
    if (d != 0.0 && d != 1.0)
      fail(errc::parse, "row " + std::to_string(row) + ": delta must be 0 or 1, got " + fields[cd]);
    r.delta = (int)d;
    r.z = cell_value(fields, cz, row, "z");
    if (cx >= 0 && cx < (int)fields.size() && !fields[cx].empty())
      r.x = cell_value(fields, cx, row, "x");
    data.records.push_back(r);
  }
  if (data.records.empty()) fail(errc::empty_dataset, origin + " has a header but no rows");

  // A partially populated x column cannot support the oracle; drop it outright
  // rather than leaving a trap.
  bool any_x = false, all_x = true;
  for (const auto& r : data.records) {
    any_x = any_x || r.x.has_value();
    all_x = all_x && r.x.has_value();
  }
  if (any_x && !all_x)
    for (auto& r : data.records) r.x.reset();

  data.refresh_levels();
  return data;
}

Dataset load_csv(const std::string& path) { return parse_csv_text(read_file(path), path); }

std::string csv_text(const Dataset& data) {
  const bool with_x = data.all_have_x();
  std::ostringstream out;
  out << "y,w,delta,z" << (with_x ? ",x" : "") << "\n";
  for (const auto& r : data.records) {
    out << format_full(r.y) << ',' << format_full(r.w) << ',' << r.delta << ','
        << format_full(r.z);
    if (with_x) out << ',' << format_full(*r.x);
    out << "\n";
  }
  return out.str();
}

void write_csv(const Dataset& data, const std::string& path) {
  atomic_write_file(path, csv_text(data));
}

Dataset apply_scaling(const Dataset& data, double margin) {
  if (!(margin >= 0.0)) fail(errc::domain, "scale margin must be >= 0");
  if (data.records.empty()) fail(errc::empty_dataset, "cannot scale an empty dataset");
  double wmax = 0.0;
  for (const auto& r : data.records) {
    if (!(r.w > 0.0)) fail(errc::domain, "scaling requires every w > 0");
    wmax = std::max(wmax, r.w);
  }
  double divisor = wmax * (1.0 + margin);
  // Re-scaling already-scaled data computes a divisor of 1 up to roundoff;
  // snap it so the operation is exactly idempotent.
  if (std::abs(divisor - 1.0) < 1e-12) divisor = 1.0;
  Dataset out = data;
  if (divisor == 1.0) return out;
  for (auto& r : out.records) {
    r.w /= divisor;
    if (r.x) r.x = *r.x / divisor;
  }
  out.scale_factor = data.scale_factor * divisor;
  return out;
}

void check_unit_interval(const Dataset& data) {
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const double w = data.records[i].w;
    if (!(w > 0.0 && w < 1.0))
      fail(errc::domain, "record " + std::to_string(i + 1) + " has w = " + format_full(w) +
                             " outside (0,1); scale the data first");
  }
}

}  // namespace sparcc
