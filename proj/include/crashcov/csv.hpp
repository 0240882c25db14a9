#ifndef CRASHCOV_CSV_HPP
#define CRASHCOV_CSV_HPP

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "crashcov/errors.hpp"

namespace crashcov::csv {

// Minimal RFC-4180 subset. Fields never contain line breaks in this
// toolkit (names are whitespace-stripped at ingest), so rows are one
// physical line each.

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << escape(fields[i]);
  }
  os << '\n';
}

inline std::vector<std::string> parse_row(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // tolerate CRLF input
    } else {
      cur.push_back(c);
    }
    ++i;
  }
  if (quoted) throw ParseError("unterminated quote in CSV row: " + std::string(line));
  fields.push_back(std::move(cur));
  return fields;
}

/// Reads one logical row per line; returns false at end of stream.
inline bool read_row(std::istream& is, std::vector<std::string>& fields) {
  std::string line;
  if (!std::getline(is, line)) return false;
  fields = parse_row(line);
  return true;
}

inline long long to_ll(std::string_view s, std::string_view what) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ParseError("bad integer for " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

inline double to_double(std::string_view s, std::string_view what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ParseError("bad number for " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

/// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace crashcov::csv

#endif
