#ifndef CRASHCOV_COVERAGE_HPP
#define CRASHCOV_COVERAGE_HPP

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crashcov/csv.hpp"
#include "crashcov/errors.hpp"
#include "crashcov/method_key.hpp"
#include "crashcov/xml.hpp"

namespace crashcov {

/// A (missed, covered) pair for one granularity kind.
struct Counter {
  long long missed = 0;
  long long covered = 0;

  friend Counter operator+(Counter a, Counter b) {
    return Counter{a.missed + b.missed, a.covered + b.covered};
  }
};

/// covered / (covered + missed); undefined when the method has no units
/// of this kind (abstract methods, interfaces).
inline std::optional<double> coverage_ratio(const Counter& c) {
  long long total = c.missed + c.covered;
  if (total <= 0) return std::nullopt;
  return static_cast<double>(c.covered) / static_cast<double>(total);
}

/// Per-method counters after overload aggregation. Constructors (<init>)
/// and static initializers (<clinit>) are ordinary entries here.
struct MethodCoverage {
  MethodKey key;
  std::string descriptor;  // raw signature; cleared once overloads merge
  Counter instruction;
  Counter branch;
  Counter line;
  Counter complexity;
  int overload_count = 1;
};

struct ClassCoverage {
  Counter instruction;
  Counter branch;
  Counter line;
  Counter complexity;
  Counter method;
};

struct ReportTotals {
  Counter instruction;
  Counter branch;
  Counter line;
  Counter complexity;
};

struct CoverageReport {
  std::map<MethodKey, MethodCoverage> methods;
  std::map<std::string, ClassCoverage> classes;
  ReportTotals totals;  // element-wise sums of the per-method counters
};

/// Sums counters kind-wise across records for one key. The descriptor is
/// cleared as soon as more than one record merges, because the collapsed
/// key no longer names a single signature.
inline MethodCoverage aggregate_overloads(std::span<const MethodCoverage> records) {
  if (records.empty()) throw std::invalid_argument("aggregate_overloads: no records");
  MethodCoverage out = records.front();
  for (std::size_t i = 1; i < records.size(); ++i) {
    const MethodCoverage& r = records[i];
    if (r.key != out.key) {
      throw std::invalid_argument("aggregate_overloads: mixed method keys (" + out.key.class_fqn +
                                  "#" + out.key.method_name + " vs " + r.key.class_fqn + "#" +
                                  r.key.method_name + ")");
    }
    out.instruction = out.instruction + r.instruction;
    out.branch = out.branch + r.branch;
    out.line = out.line + r.line;
    out.complexity = out.complexity + r.complexity;
    out.overload_count += r.overload_count;
  }
  if (out.overload_count > 1) out.descriptor.clear();
  return out;
}

namespace detail {

inline long long counter_value(const xml::StartTag& tag, const char* attr, std::size_t line) {
  const std::string* s = tag.find(attr);
  if (!s) {
    throw SchemaError("coverage XML line " + std::to_string(line) + ": counter missing '" +
                      attr + "' attribute");
  }
  long long v;
  try {
    v = csv::to_ll(*s, attr);
  } catch (const ParseError&) {
    throw SchemaError("coverage XML line " + std::to_string(line) + ": counter attribute '" +
                      attr + "' is not an integer: '" + *s + "'");
  }
  if (v < 0) {
    throw SchemaError("coverage XML line " + std::to_string(line) + ": negative counter value " +
                      std::to_string(v));
  }
  return v;
}

}  // namespace detail

/// Parses an aggregated coverage report (report > package > class >
/// method > counter). Class names arrive slash-separated and are stored
/// dotted. Overloads of one (class, method) pair are pre-merged.
inline CoverageReport parse_report(std::string_view xml_text) {
  xml::Reader reader(xml_text);
  CoverageReport report;

  std::string package_name;          // slash form
  std::string class_fqn;             // dotted form, set inside <class>
  ClassCoverage* class_counters = nullptr;
  std::optional<MethodCoverage> method;

  for (;;) {
    xml::Reader::Event ev = reader.next();
    if (ev == xml::Reader::Event::kEof) break;
    if (ev == xml::Reader::Event::kEnd) {
      const std::string& name = reader.end_name();
      if (name == "method" && method) {
        auto it = report.methods.find(method->key);
        if (it == report.methods.end()) {
          report.methods.emplace(method->key, std::move(*method));
        } else {
          const MethodCoverage merged_inputs[] = {it->second, *method};
          it->second = aggregate_overloads(merged_inputs);
        }
        method.reset();
      } else if (name == "class") {
        class_fqn.clear();
        class_counters = nullptr;
      } else if (name == "package") {
        package_name.clear();
      }
      continue;
    }

    const xml::StartTag& tag = reader.start();
    if (tag.name == "package") {
      if (const std::string* n = tag.find("name")) package_name = *n;
    } else if (tag.name == "class") {
      const std::string* n = tag.find("name");
      if (!n) {
        throw SchemaError("coverage XML line " + std::to_string(reader.line()) +
                          ": class element missing 'name'");
      }
      std::string qualified = *n;
      if (qualified.find('/') == std::string::npos && !package_name.empty()) {
        qualified = package_name + "/" + qualified;
      }
      class_fqn = dots_from_slashes(strip_whitespace(qualified));
      class_counters = &report.classes[class_fqn];
    } else if (tag.name == "method") {
      const std::string* n = tag.find("name");
      if (!n) {
        throw SchemaError("coverage XML line " + std::to_string(reader.line()) +
                          ": method element missing 'name'");
      }
      if (class_fqn.empty()) {
        throw SchemaError("coverage XML line " + std::to_string(reader.line()) +
                          ": method element outside a class");
      }
      method.emplace();
      method->key = MethodKey{class_fqn, strip_whitespace(*n)};
      if (const std::string* d = tag.find("desc")) method->descriptor = *d;
    } else if (tag.name == "counter") {
      const std::string* type = tag.find("type");
      if (!type) {
        throw SchemaError("coverage XML line " + std::to_string(reader.line()) +
                          ": counter element missing 'type'");
      }
      Counter c{detail::counter_value(tag, "missed", reader.line()),
                detail::counter_value(tag, "covered", reader.line())};
      if (method) {
        if (*type == "INSTRUCTION") method->instruction = method->instruction + c;
        else if (*type == "BRANCH") method->branch = method->branch + c;
        else if (*type == "LINE") method->line = method->line + c;
        else if (*type == "COMPLEXITY") method->complexity = method->complexity + c;
        // METHOD/CLASS never appear at method scope; anything else is ignored
      } else if (class_counters) {
        if (*type == "INSTRUCTION") class_counters->instruction = class_counters->instruction + c;
        else if (*type == "BRANCH") class_counters->branch = class_counters->branch + c;
        else if (*type == "LINE") class_counters->line = class_counters->line + c;
        else if (*type == "COMPLEXITY") class_counters->complexity = class_counters->complexity + c;
        else if (*type == "METHOD") class_counters->method = class_counters->method + c;
      }
      // report- and package-level counters are recomputed from methods instead
    }
  }

  for (const auto& [key, m] : report.methods) {
    report.totals.instruction = report.totals.instruction + m.instruction;
    report.totals.branch = report.totals.branch + m.branch;
    report.totals.line = report.totals.line + m.line;
    report.totals.complexity = report.totals.complexity + m.complexity;
  }
  return report;
}

inline constexpr const char* kMethodsCsvHeader =
    "class_fqn,method_name,overloads,instr_covered,instr_missed,branch_covered,branch_missed,"
    "line_covered,line_missed";

inline void write_methods_csv(std::ostream& os, const CoverageReport& report) {
  os << kMethodsCsvHeader << '\n';
  for (const auto& [key, m] : report.methods) {
    csv::write_row(os, {key.class_fqn, key.method_name, std::to_string(m.overload_count),
                        std::to_string(m.instruction.covered), std::to_string(m.instruction.missed),
                        std::to_string(m.branch.covered), std::to_string(m.branch.missed),
                        std::to_string(m.line.covered), std::to_string(m.line.missed)});
  }
}

inline CoverageReport read_methods_csv(std::istream& is) {
  std::vector<std::string> row;
  if (!csv::read_row(is, row) || row.size() != 9 || row[0] != "class_fqn") {
    throw ParseError("methods CSV: missing or unexpected header");
  }
  CoverageReport report;
  while (csv::read_row(is, row)) {
    if (row.size() != 9) throw ParseError("methods CSV: expected 9 columns");
    MethodCoverage m;
    m.key = MethodKey{row[0], row[1]};
    m.overload_count = static_cast<int>(csv::to_ll(row[2], "overloads"));
    m.instruction = Counter{csv::to_ll(row[4], "instr_missed"), csv::to_ll(row[3], "instr_covered")};
    m.branch = Counter{csv::to_ll(row[6], "branch_missed"), csv::to_ll(row[5], "branch_covered")};
    m.line = Counter{csv::to_ll(row[8], "line_missed"), csv::to_ll(row[7], "line_covered")};
    report.totals.instruction = report.totals.instruction + m.instruction;
    report.totals.branch = report.totals.branch + m.branch;
    report.totals.line = report.totals.line + m.line;
    report.methods.emplace(m.key, std::move(m));
  }
  return report;
}

}  // namespace crashcov

#endif
