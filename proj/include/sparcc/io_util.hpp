#pragma once

#include <map>
#include <string>
#include <vector>

namespace sparcc {

// Write `content` to `path` via a temporary file + rename, so readers never
// observe a half-written file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Split a CSV/line on `sep`, trimming ASCII whitespace from each field.
std::vector<std::string> split_fields(const std::string& line, char sep);

std::string trim(const std::string& s);

// Strict double parse; returns false on trailing garbage or empty input.
bool parse_double(const std::string& s, double& out);

// Round-trip-safe formatting for data values (shortest form, %.17g).
std::string format_full(double v);

// Fixed formatting for report tables.
std::string format_fixed(double v, int digits);

// Flat `key = value` config/model text: one pair per line, '#' comments.
// Later duplicate keys win. Order of first appearance is preserved.
class KeyValueText {
 public:
  static KeyValueText parse(const std::string& text);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;          // errc::serialization if absent
  std::string get_or(const std::string& key, std::string dflt) const;
  double get_double(const std::string& key) const;
  long get_long(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;  // space-separated

  void set(const std::string& key, const std::string& value);
  std::string dump() const;

  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace sparcc
