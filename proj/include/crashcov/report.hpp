#ifndef CRASHCOV_REPORT_HPP
#define CRASHCOV_REPORT_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "crashcov/csv.hpp"
#include "crashcov/stats.hpp"
#include "crashcov/synthesis.hpp"

namespace crashcov {

/// Everything the analyze stage reports; each count is reconstructible
/// from the persisted joined-records file. Corpus scan statistics stay in
/// their own document so resumed and end-to-end runs emit identical bytes.
struct AnalysisSummary {
  JoinStats join_stats;
  std::uint64_t joined_methods = 0;
  std::uint64_t scoped_count = 0;
  int depth = 10;
  double threshold = 0.0;
  ThresholdPopulation threshold_population = ThresholdPopulation::kTestedClassNonzero;
  stats::ContingencyTable coverage_table;  // (in_tested_class, covered)
  stats::ContingencyTable strict_table;    // (strict_tested, strict_crashed)
  stats::FisherResult fisher;
};

namespace detail {

inline nlohmann::json table_with_percentages(const stats::ContingencyTable& t) {
  nlohmann::json j = stats::table_json(t);
  if (t.total() > 0) {
    stats::CellPercentages pct = stats::summarize_percentages(t);
    j["pct"] = {{"n11", pct.n11}, {"n10", pct.n10}, {"n01", pct.n01}, {"n00", pct.n00}};
  }
  return j;
}

inline nlohmann::json venn_json(const stats::ContingencyTable& t, const char* first,
                                const char* second) {
  return nlohmann::json{{std::string(first) + "_only", t.n10},
                        {std::string(second) + "_only", t.n01},
                        {"both", t.n11},
                        {"neither", t.n00}};
}

}  // namespace detail

inline nlohmann::json summary_json(const AnalysisSummary& s) {
  nlohmann::json j;
  j["join"] = {{"occurrence_rows", s.join_stats.occurrence_rows},
               {"matched_methods", s.join_stats.matched_methods},
               {"unmatched_methods", s.join_stats.unmatched_methods},
               {"unmatched_occurrences", s.join_stats.unmatched_occurrences}};
  j["joined_methods"] = s.joined_methods;
  j["scoped_count"] = s.scoped_count;
  j["depth"] = s.depth;
  j["threshold"] = s.threshold;
  j["threshold_population"] =
      s.threshold_population == ThresholdPopulation::kTestedClassNonzero ? "tested_class_nonzero"
                                                                         : "all_nonzero";
  j["table1"] = detail::table_with_percentages(s.coverage_table);
  j["table2"] = detail::table_with_percentages(s.strict_table);
  j["venn_region_counts"] = {
      {"tested_class_vs_covered", detail::venn_json(s.coverage_table, "tested_class", "covered")},
      {"tested_vs_crashed", detail::venn_json(s.strict_table, "tested", "crashed")}};
  j["fisher"] = stats::fisher_result_json(s.fisher);
  return j;
}

namespace detail {

inline std::string pct_str(double p) { return stats::detail::fixed_decimals(p, 1) + "%"; }

inline void render_table(std::ostream& os, const stats::ContingencyTable& t,
                         const char* row_label, const char* col_label) {
  stats::CellPercentages pct = stats::summarize_percentages(t);
  auto cell = [](long long count, double p) {
    return std::to_string(count) + " (" + pct_str(p) + ")";
  };
  os << "  rows: " << row_label << ", columns: " << col_label << "\n";
  os << "             no                 yes\n";
  os << "  no         " << cell(t.n00, pct.n00) << "       " << cell(t.n10, pct.n10) << "\n";
  os << "  yes        " << cell(t.n01, pct.n01) << "       " << cell(t.n11, pct.n11) << "\n";
  os << "  totals     " << (t.n00 + t.n01) << " / " << (t.n10 + t.n11) << " / " << t.total()
     << "\n";
}

}  // namespace detail

inline void render_text_report(std::ostream& os, const AnalysisSummary& s) {
  os << "Crash/coverage correlation report\n";
  os << "=================================\n";
  os << "Joined methods: " << s.joined_methods << " (crash-only keys skipped: "
     << s.join_stats.unmatched_methods << ")\n";
  os << "Methods in scope (depth " << s.depth << "): " << s.scoped_count << "\n";
  os << "\nCoverage vs unit-tested classes\n";
  detail::render_table(os, s.coverage_table, "covered", "in tested class");
  os << "\nStrict threshold: line ratio > " << csv::format_double(s.threshold)
     << " (median of nonzero ratios"
     << (s.threshold_population == ThresholdPopulation::kTestedClassNonzero
             ? " in tested classes"
             : "")
     << ")\n";
  os << "\nCrashes of tested methods\n";
  detail::render_table(os, s.strict_table, "crashed", "unit tested");
  os << "\nFisher exact test (less): " << stats::fisher_display_line(s.fisher) << "\n";
}

}  // namespace crashcov

#endif
