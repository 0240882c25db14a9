#ifndef CRASHCOV_COMMANDS_HPP
#define CRASHCOV_COMMANDS_HPP

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "crashcov/coverage.hpp"
#include "crashcov/corpus.hpp"
#include "crashcov/errors.hpp"
#include "crashcov/report.hpp"
#include "crashcov/stats.hpp"
#include "crashcov/synthesis.hpp"
#include "crashcov/test_discovery.hpp"

namespace crashcov {

/// One run's worth of configuration; CLI flags map onto these fields.
struct RunConfig {
  std::filesystem::path corpus_root;
  std::filesystem::path coverage_xml;
  std::filesystem::path source_root;
  std::filesystem::path overrides;
  std::filesystem::path output_dir;  // empty means the current directory
  // persisted intermediates, for resuming analyze without the raw inputs
  std::filesystem::path occurrences_csv;
  std::filesystem::path methods_csv;
  std::filesystem::path links_csv;

  std::string product;
  std::string build_id;
  int depth = 10;

  enum class ThresholdMode { kMedian, kFixed };
  ThresholdMode threshold_mode = ThresholdMode::kMedian;
  double threshold_value = 0.0;  // used when mode is kFixed; must be in (0,1]
  ThresholdPopulation threshold_population = ThresholdPopulation::kTestedClassNonzero;

  double conf_level = 0.95;
  bool substring_test_match = false;
  std::optional<stats::ContingencyTable> table_override;
};

namespace detail {

inline std::filesystem::path ensure_output_dir(const std::filesystem::path& dir) {
  std::filesystem::path target = dir.empty() ? "." : dir;
  std::error_code ec;
  std::filesystem::create_directories(target, ec);
  if (ec && !std::filesystem::is_directory(target)) {
    throw InputError("cannot create output directory: " + target.string());
  }
  return target;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write output file: " + p.string());
  return out;
}

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename Fn>
int run_guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

inline void validate_conf_level(double conf_level) {
  if (!(conf_level > 0.0 && conf_level < 1.0)) {
    throw ConfigError("conf-level must be in (0,1)");
  }
}

}  // namespace detail

/// Scans the corpus and writes occurrences.csv plus corpus_stats.json.
inline int cmd_ingest_incidents(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::run_guarded(err, [&] {
    if (config.product.empty() || config.build_id.empty()) {
      throw ConfigError("ingest-incidents requires --product and --build-id");
    }
    if (!std::filesystem::is_directory(config.corpus_root)) {
      throw InputError("corpus root is not a readable directory: " + config.corpus_root.string());
    }
    std::filesystem::path out_dir = detail::ensure_output_dir(config.output_dir);
    std::ofstream csv_out = detail::open_output(out_dir / "occurrences.csv");
    write_occurrences_header(csv_out);
    CorpusStats stats = scan_corpus(config.corpus_root, config.product, config.build_id,
                                    [&](const FrameOccurrence& o) { write_occurrence_row(csv_out, o); });
    std::ofstream stats_out = detail::open_output(out_dir / "corpus_stats.json");
    stats_out << corpus_stats_json(stats, detail::utc_timestamp()).dump(2) << "\n";
    out << "ingested " << stats.matched << " of " << stats.total_files << " incident files ("
        << stats.malformed << " malformed), " << stats.occurrences << " occurrences\n";
    return kExitOk;
  });
}

/// Parses the coverage XML and writes methods.csv.
inline int cmd_ingest_coverage(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::run_guarded(err, [&] {
    std::ifstream in(config.coverage_xml, std::ios::binary);
    if (!in) throw InputError("cannot open coverage report: " + config.coverage_xml.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    CoverageReport report = parse_report(ss.str());
    std::filesystem::path out_dir = detail::ensure_output_dir(config.output_dir);
    std::ofstream csv_out = detail::open_output(out_dir / "methods.csv");
    write_methods_csv(csv_out, report);
    out << "parsed " << report.methods.size() << " method records from "
        << report.classes.size() << " classes\n";
    return kExitOk;
  });
}

/// Discovers test links under the source root and writes links.csv plus
/// manual_queue.csv.
inline int cmd_match_tests(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::run_guarded(err, [&] {
    DiscoveryOptions opts;
    opts.substring_test_match = config.substring_test_match;
    auto [tests, production] = classify_files(config.source_root, opts);
    LinkResult result = link_tests(tests, production);
    if (!config.overrides.empty()) {
      result.links = apply_overrides(std::move(result.links), config.overrides, tests, production);
    }
    std::filesystem::path out_dir = detail::ensure_output_dir(config.output_dir);
    std::ofstream links_out = detail::open_output(out_dir / "links.csv");
    write_links_csv(links_out, result.links);
    std::ofstream queue_out = detail::open_output(out_dir / "manual_queue.csv");
    write_manual_queue_csv(queue_out, result.manual_queue);
    out << "scanned " << tests.size() << " test files and " << production.size()
        << " production files; " << result.links.size() << " links, "
        << result.manual_queue.size() << " queued for manual review\n";
    return kExitOk;
  });
}

/// Runs exact inference on one table and prints the display line.
inline int cmd_stats(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::run_guarded(err, [&] {
    if (!config.table_override) {
      throw ConfigError("stats requires --table n11,n10,n01,n00 or --table-json");
    }
    detail::validate_conf_level(config.conf_level);
    const stats::ContingencyTable& t = *config.table_override;
    if (t.total() <= 0) throw InputError("stats: table is empty");
    stats::FisherResult r = stats::fisher_less(t, config.conf_level);
    stats::CellPercentages pct = stats::summarize_percentages(t);
    out << "table: n11=" << t.n11 << " n10=" << t.n10 << " n01=" << t.n01 << " n00=" << t.n00
        << " (N=" << t.total() << ")\n";
    out << "shares: " << stats::detail::fixed_decimals(pct.n11, 1) << "% / "
        << stats::detail::fixed_decimals(pct.n10, 1) << "% / "
        << stats::detail::fixed_decimals(pct.n01, 1) << "% / "
        << stats::detail::fixed_decimals(pct.n00, 1) << "%\n";
    out << "fisher (less): " << stats::fisher_display_line(r) << "\n";
    if (!config.output_dir.empty()) {
      std::filesystem::path out_dir = detail::ensure_output_dir(config.output_dir);
      std::ofstream json_out = detail::open_output(out_dir / "fisher.json");
      nlohmann::json j = stats::fisher_result_json(r);
      j["table"] = stats::table_json(t);
      json_out << j.dump(2) << "\n";
    }
    return kExitOk;
  });
}

/// Full pipeline: occurrences + coverage + links -> joined records, tables,
/// exact test. Raw inputs and persisted intermediates are interchangeable.
inline int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.table_override) return cmd_stats(config, out, err);
  return detail::run_guarded(err, [&] {
    detail::validate_conf_level(config.conf_level);
    if (config.threshold_mode == RunConfig::ThresholdMode::kFixed &&
        !(config.threshold_value > 0.0 && config.threshold_value <= 1.0)) {
      throw ConfigError("fixed threshold must be in (0,1]");
    }

    std::optional<CorpusStats> corpus_stats;
    std::vector<FrameOccurrence> occurrences;
    if (!config.corpus_root.empty()) {
      if (config.product.empty() || config.build_id.empty()) {
        throw ConfigError("analyze with --corpus-root requires --product and --build-id");
      }
      auto [occ, cs] = scan_corpus(config.corpus_root, config.product, config.build_id);
      occurrences = std::move(occ);
      corpus_stats = cs;  // written to its own document below
    } else if (!config.occurrences_csv.empty()) {
      std::ifstream in(config.occurrences_csv, std::ios::binary);
      if (!in) throw InputError("cannot open occurrences CSV: " + config.occurrences_csv.string());
      occurrences = read_occurrences_csv(in);
    } else {
      throw ConfigError("analyze needs --corpus-root or --occurrences");
    }

    CoverageReport coverage;
    if (!config.coverage_xml.empty()) {
      std::ifstream in(config.coverage_xml, std::ios::binary);
      if (!in) throw InputError("cannot open coverage report: " + config.coverage_xml.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      coverage = parse_report(ss.str());
    } else if (!config.methods_csv.empty()) {
      std::ifstream in(config.methods_csv, std::ios::binary);
      if (!in) throw InputError("cannot open methods CSV: " + config.methods_csv.string());
      coverage = read_methods_csv(in);
    } else {
      throw ConfigError("analyze needs --coverage-xml or --methods");
    }

    std::vector<TestLink> links;
    if (!config.source_root.empty()) {
      DiscoveryOptions opts;
      opts.substring_test_match = config.substring_test_match;
      auto [tests, production] = classify_files(config.source_root, opts);
      LinkResult discovered = link_tests(tests, production);
      links = std::move(discovered.links);
      if (!config.overrides.empty()) {
        links = apply_overrides(std::move(links), config.overrides, tests, production);
      }
    } else if (!config.links_csv.empty()) {
      std::ifstream in(config.links_csv, std::ios::binary);
      if (!in) throw InputError("cannot open links CSV: " + config.links_csv.string());
      links = read_links_csv(in);
    } else {
      throw ConfigError("analyze needs --source-root or --links");
    }

    AnalysisSummary summary;
    summary.depth = config.depth;
    summary.threshold_population = config.threshold_population;

    std::vector<JoinedMethodRecord> joined =
        join(occurrences, coverage, links, &summary.join_stats);
    summary.joined_methods = joined.size();
    std::vector<JoinedMethodRecord> scoped = scope(joined, config.depth);
    summary.scoped_count = scoped.size();
    if (scoped.empty()) throw EmptyScopeError("no methods in scope");

    summary.threshold = config.threshold_mode == RunConfig::ThresholdMode::kFixed
                            ? config.threshold_value
                            : compute_threshold(scoped, config.threshold_population);
    classify(scoped, summary.threshold);
    tag_names(scoped);
    summary.coverage_table = coverage_cross_tab(scoped);
    summary.strict_table = build_table(scoped);
    summary.fisher = stats::fisher_less(summary.strict_table, config.conf_level);

    std::filesystem::path out_dir = detail::ensure_output_dir(config.output_dir);
    if (corpus_stats) {
      std::ofstream stats_out = detail::open_output(out_dir / "corpus_stats.json");
      stats_out << corpus_stats_json(*corpus_stats, detail::utc_timestamp()).dump(2) << "\n";
    }
    std::ofstream joined_out = detail::open_output(out_dir / "joined.csv");
    write_joined_csv(joined_out, scoped);
    std::ofstream summary_out = detail::open_output(out_dir / "summary.json");
    summary_out << summary_json(summary).dump(2) << "\n";
    std::ofstream report_out = detail::open_output(out_dir / "report.txt");
    render_text_report(report_out, summary);
    render_text_report(out, summary);
    return kExitOk;
  });
}

}  // namespace crashcov

#endif
