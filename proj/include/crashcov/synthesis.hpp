#ifndef CRASHCOV_SYNTHESIS_HPP
#define CRASHCOV_SYNTHESIS_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "crashcov/coverage.hpp"
#include "crashcov/csv.hpp"
#include "crashcov/errors.hpp"
#include "crashcov/incident.hpp"
#include "crashcov/stats.hpp"
#include "crashcov/test_discovery.hpp"

namespace crashcov {

enum class NameTag { kDebugLike, kTriggerLike };

/// The unified per-method row: crash positions, coverage ratios, test-link
/// status, and the strict tested/crashed classification.
struct JoinedMethodRecord {
  MethodKey key;
  long long incident_count = 0;     // distinct incidents the method appears in
  long long first_frame_count = 0;  // occurrences at position 1
  int min_position = std::numeric_limits<int>::max();
  bool topmost = false;  // implies top6, which implies top10
  bool top6 = false;
  bool top10 = false;
  std::optional<double> instr_ratio;
  std::optional<double> branch_ratio;
  std::optional<double> line_ratio;
  bool covered = false;  // instruction ratio > 0
  bool in_tested_class = false;
  std::optional<double> density;  // test lines / class lines of the class
  bool strict_tested = false;
  bool strict_crashed = false;
  std::optional<NameTag> name_tag;
};

struct JoinStats {
  std::uint64_t occurrence_rows = 0;
  std::uint64_t matched_methods = 0;
  std::uint64_t unmatched_methods = 0;      // crash-only keys (JDK, third party)
  std::uint64_t unmatched_occurrences = 0;  // rows referencing those keys
};

/// Joins crash occurrences with the coverage report and test links. One
/// record per method key present in BOTH the occurrence stream and the
/// report; crash-only keys are counted, not emitted. Occurrence input must
/// be grouped by incident (scan and CSV order both are).
inline std::vector<JoinedMethodRecord> join(std::span<const FrameOccurrence> occurrences,
                                            const CoverageReport& coverage,
                                            std::span<const TestLink> links,
                                            JoinStats* stats_out = nullptr) {
  struct CrashAgg {
    long long incident_count = 0;
    long long first_frame_count = 0;
    int min_position = std::numeric_limits<int>::max();
    std::string last_incident;
  };
  std::map<MethodKey, CrashAgg> crashes;
  for (const FrameOccurrence& o : occurrences) {
    CrashAgg& agg = crashes[o.method];
    if (agg.last_incident != o.incident_id) {
      agg.last_incident = o.incident_id;
      ++agg.incident_count;
    }
    if (o.position == 1) ++agg.first_frame_count;
    agg.min_position = std::min(agg.min_position, o.position);
  }

  struct ClassLinkAgg {
    long long class_lines = 0;
    long long test_lines = 0;
  };
  std::unordered_map<std::string, ClassLinkAgg> tested_classes;
  for (const TestLink& link : links) {
    ClassLinkAgg& agg = tested_classes[link.class_fqn];
    agg.class_lines = link.class_lines;
    agg.test_lines += link.test_lines;
  }

  JoinStats stats;
  stats.occurrence_rows = occurrences.size();
  std::vector<JoinedMethodRecord> records;
  for (const auto& [key, agg] : crashes) {
    auto cov_it = coverage.methods.find(key);
    if (cov_it == coverage.methods.end()) {
      ++stats.unmatched_methods;
      continue;
    }
    const MethodCoverage& cov = cov_it->second;
    JoinedMethodRecord rec;
    rec.key = key;
    rec.incident_count = agg.incident_count;
    rec.first_frame_count = agg.first_frame_count;
    rec.min_position = agg.min_position;
    rec.topmost = agg.min_position <= 1;
    rec.top6 = agg.min_position <= 6;
    rec.top10 = agg.min_position <= 10;
    rec.instr_ratio = coverage_ratio(cov.instruction);
    rec.branch_ratio = coverage_ratio(cov.branch);
    rec.line_ratio = coverage_ratio(cov.line);
    rec.covered = rec.instr_ratio.has_value() && *rec.instr_ratio > 0.0;
    if (auto it = tested_classes.find(key.class_fqn); it != tested_classes.end()) {
      rec.in_tested_class = true;
      if (it->second.class_lines > 0) {
        rec.density = static_cast<double>(it->second.test_lines) /
                      static_cast<double>(it->second.class_lines);
      }
    }
    records.push_back(std::move(rec));
    ++stats.matched_methods;
  }

  if (stats_out) {
    // second pass for the occurrence-row count of unmatched keys
    for (const FrameOccurrence& o : occurrences) {
      if (!coverage.methods.contains(o.method)) ++stats.unmatched_occurrences;
    }
    *stats_out = stats;
  }
  return records;
}

/// Keeps methods that appeared at least once within the first `max_depth`
/// stack frames. Depths other than 1, 6, 10 are a configuration error.
inline std::vector<JoinedMethodRecord> scope(std::span<const JoinedMethodRecord> records,
                                             int max_depth) {
  if (max_depth != 1 && max_depth != 6 && max_depth != 10) {
    throw ConfigError("depth must be 1, 6, or 10 (got " + std::to_string(max_depth) + ")");
  }
  std::vector<JoinedMethodRecord> out;
  for (const JoinedMethodRecord& r : records) {
    if (r.min_position <= max_depth) out.push_back(r);
  }
  return out;
}

enum class ThresholdPopulation { kTestedClassNonzero, kAllNonzero };

/// Median of the nonzero line-coverage ratios, by default over methods of
/// unit-tested classes (lower median for even counts, so the value is
/// always an observed ratio).
inline double compute_threshold(std::span<const JoinedMethodRecord> records,
                                ThresholdPopulation population = ThresholdPopulation::kTestedClassNonzero) {
  std::vector<double> ratios;
  for (const JoinedMethodRecord& r : records) {
    if (!r.line_ratio || *r.line_ratio <= 0.0) continue;
    if (population == ThresholdPopulation::kTestedClassNonzero && !r.in_tested_class) continue;
    ratios.push_back(*r.line_ratio);
  }
  if (ratios.empty()) {
    throw InputError("threshold population is empty: no methods with nonzero line coverage" +
                     std::string(population == ThresholdPopulation::kTestedClassNonzero
                                     ? " in unit-tested classes"
                                     : ""));
  }
  std::sort(ratios.begin(), ratios.end());
  return ratios[(ratios.size() - 1) / 2];
}

/// strict_tested: unit-tested class AND line ratio strictly above the
/// threshold. strict_crashed: seen at the topmost frame at least once.
inline void classify(std::vector<JoinedMethodRecord>& records, double threshold) {
  for (JoinedMethodRecord& r : records) {
    r.strict_tested = r.in_tested_class && r.line_ratio.has_value() && *r.line_ratio > threshold;
    r.strict_crashed = r.first_frame_count >= 1;
  }
}

/// Cross-tabulation of (strict_tested, strict_crashed).
inline stats::ContingencyTable build_table(std::span<const JoinedMethodRecord> records) {
  stats::ContingencyTable t;
  for (const JoinedMethodRecord& r : records) {
    if (r.strict_tested) {
      (r.strict_crashed ? t.n11 : t.n10)++;
    } else {
      (r.strict_crashed ? t.n01 : t.n00)++;
    }
  }
  return t;
}

/// Cross-tabulation of (in_tested_class, covered): n11 = tested class and
/// covered, n10 = tested class only, n01 = covered only, n00 = neither.
inline stats::ContingencyTable coverage_cross_tab(std::span<const JoinedMethodRecord> records) {
  stats::ContingencyTable t;
  for (const JoinedMethodRecord& r : records) {
    if (r.in_tested_class) {
      (r.covered ? t.n11 : t.n10)++;
    } else {
      (r.covered ? t.n01 : t.n00)++;
    }
  }
  return t;
}

/// Method-name patterns for the advisory classification of frames that
/// merely report failures (debug-like) or dispatch work (trigger-like).
/// A trailing '*' makes a pattern a prefix match.
struct NamePatterns {
  std::vector<std::string> debug;
  std::vector<std::string> trigger;

  static NamePatterns defaults() {
    return NamePatterns{
        {"log*", "fail*", "assert*", "check*", "report*", "verify*", "error*"},
        {"run", "invoke", "execute"},
    };
  }
};

namespace detail {

inline bool matches_pattern(std::string_view name, std::string_view pattern) {
  if (!pattern.empty() && pattern.back() == '*') {
    return name.substr(0, pattern.size() - 1) == pattern.substr(0, pattern.size() - 1);
  }
  return name == pattern;
}

}  // namespace detail

/// Advisory only: tags never feed the strict classification.
inline void tag_names(std::vector<JoinedMethodRecord>& records,
                      const NamePatterns& patterns = NamePatterns::defaults()) {
  for (JoinedMethodRecord& r : records) {
    r.name_tag.reset();
    for (const std::string& p : patterns.debug) {
      if (detail::matches_pattern(r.key.method_name, p)) {
        r.name_tag = NameTag::kDebugLike;
        break;
      }
    }
    if (r.name_tag) continue;
    for (const std::string& p : patterns.trigger) {
      if (detail::matches_pattern(r.key.method_name, p)) {
        r.name_tag = NameTag::kTriggerLike;
        break;
      }
    }
  }
}

inline constexpr const char* kJoinedCsvHeader =
    "class_fqn,method_name,incident_count,first_frame_count,min_position,topmost,top6,top10,"
    "instr_ratio,branch_ratio,line_ratio,covered,in_tested_class,density,strict_tested,"
    "strict_crashed,name_tag";

inline void write_joined_csv(std::ostream& os, std::span<const JoinedMethodRecord> records) {
  os << kJoinedCsvHeader << '\n';
  auto opt = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
  };
  auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
  for (const JoinedMethodRecord& r : records) {
    std::string tag;
    if (r.name_tag == NameTag::kDebugLike) tag = "DEBUG_LIKE";
    else if (r.name_tag == NameTag::kTriggerLike) tag = "TRIGGER_LIKE";
    csv::write_row(os, {r.key.class_fqn, r.key.method_name, std::to_string(r.incident_count),
                        std::to_string(r.first_frame_count), std::to_string(r.min_position),
                        flag(r.topmost), flag(r.top6), flag(r.top10), opt(r.instr_ratio),
                        opt(r.branch_ratio), opt(r.line_ratio), flag(r.covered),
                        flag(r.in_tested_class), opt(r.density), flag(r.strict_tested),
                        flag(r.strict_crashed), tag});
  }
}

}  // namespace crashcov

#endif
