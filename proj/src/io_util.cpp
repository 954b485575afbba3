#include "sparcc/io_util.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sparcc/errors.hpp"

namespace sparcc {

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::serialization, "cannot open " + tmp + " for writing");
    out.write(content.data(), (std::streamsize)content.size());
    out.flush();
    if (!out) fail(errc::serialization, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    fail(errc::serialization, "cannot rename " + tmp + " to " + path + ": " + std::strerror(errno));
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::serialization, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

KeyValueText KeyValueText::parse(const std::string& text) {
  KeyValueText kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(errc::serialization, "line " + std::to_string(lineno) + ": expected key = value");
    kv.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

bool KeyValueText::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& KeyValueText::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(errc::serialization, "missing key '" + key + "'");
  return it->second;
}

std::string KeyValueText::get_or(const std::string& key, std::string dflt) const {
  auto it = values_.find(key);
  return it == values_.end() ? dflt : it->second;
}

double KeyValueText::get_double(const std::string& key) const {
  double v;
  if (!parse_double(get(key), v)) fail(errc::serialization, "key '" + key + "' is not a number");
  return v;
}

long KeyValueText::get_long(const std::string& key) const {
  const double v = get_double(key);
  const long n = (long)v;
  if ((double)n != v) fail(errc::serialization, "key '" + key + "' is not an integer");
  return n;
}

std::vector<double> KeyValueText::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::istringstream ss(get(key));
  std::string tok;
  while (ss >> tok) {
    double v;
    if (!parse_double(tok, v)) fail(errc::serialization, "key '" + key + "' has a non-numeric entry");
    out.push_back(v);
  }
  return out;
}

void KeyValueText::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = value;
}

std::string KeyValueText::dump() const {
  std::ostringstream out;
  for (const auto& k : order_) out << k << " = " << values_.at(k) << "\n";
  return out.str();
}

}  // namespace sparcc
