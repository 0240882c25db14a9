#ifndef CRASHCOV_CLI_HPP
#define CRASHCOV_CLI_HPP

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "crashcov/commands.hpp"
#include "crashcov/errors.hpp"

namespace crashcov::cli {

namespace detail {

inline void add_common_analysis_flags(CLI::App* cmd, RunConfig& config, std::string& threshold_spec,
                                      std::string& population_spec) {
  cmd->add_option("--depth", config.depth, "Frame-depth scope: 1, 6, or 10")
      ->check(CLI::IsMember({1, 6, 10}));
  cmd->add_option("--threshold", threshold_spec,
                  "'median' (default) or a fixed line-coverage ratio in (0,1]");
  cmd->add_option("--threshold-population", population_spec,
                  "'tested' (default: nonzero ratios in tested classes) or 'all'")
      ->check(CLI::IsMember({"tested", "all"}));
  cmd->add_option("--conf-level", config.conf_level, "Confidence level for the exact test")
      ->check(CLI::Range(0.0, 1.0));
}

inline void apply_threshold_spec(RunConfig& config, const std::string& threshold_spec,
                                 const std::string& population_spec) {
  if (!threshold_spec.empty() && threshold_spec != "median") {
    try {
      std::size_t used = 0;
      config.threshold_value = std::stod(threshold_spec, &used);
      if (used != threshold_spec.size()) throw std::invalid_argument(threshold_spec);
    } catch (const std::exception&) {
      throw ConfigError("--threshold must be 'median' or a number, got '" + threshold_spec + "'");
    }
    config.threshold_mode = RunConfig::ThresholdMode::kFixed;
  }
  if (population_spec == "all") {
    config.threshold_population = ThresholdPopulation::kAllNonzero;
  }
}

inline stats::ContingencyTable load_table(const std::string& cells, const std::string& json_path) {
  if (!cells.empty()) return stats::table_from_cells(cells);
  std::ifstream in(json_path, std::ios::binary);
  if (!in) throw InputError("cannot open table JSON: " + json_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("table JSON: ") + e.what());
  }
  return stats::table_from_json(j);
}

}  // namespace detail

/// Builds the argument parser and dispatches to the command layer.
/// Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correlates field-failure stack traces with unit-test coverage at method level"};
  app.name("crashcov");
  app.require_subcommand(1);
  app.fallthrough();  // lets --config appear after the subcommand name
  app.set_config("--config", "", "Read options from a key=value file");

  RunConfig config;
  std::string threshold_spec;
  std::string population_spec;
  std::string table_cells;
  std::string table_json_path;

  CLI::App* ingest_incidents =
      app.add_subcommand("ingest-incidents", "Parse crash incidents into occurrences.csv");
  ingest_incidents->add_option("--corpus-root", config.corpus_root, "Directory of incident .json files")
      ->required();
  ingest_incidents->add_option("--product", config.product, "Target eclipseProduct")->required();
  ingest_incidents->add_option("--build-id", config.build_id, "Target eclipseBuildId")->required();
  ingest_incidents->add_option("--out", config.output_dir, "Output directory");

  CLI::App* ingest_coverage =
      app.add_subcommand("ingest-coverage", "Parse a coverage XML report into methods.csv");
  ingest_coverage->add_option("--coverage-xml", config.coverage_xml, "Aggregated XML report")
      ->required();
  ingest_coverage->add_option("--out", config.output_dir, "Output directory");

  CLI::App* match_tests =
      app.add_subcommand("match-tests", "Link production classes to their test classes");
  match_tests->add_option("--source-root", config.source_root, "Source tree to scan")->required();
  match_tests->add_option("--overrides", config.overrides,
                          "Tab-separated manual overrides (ADD/SUPPRESS rows)");
  match_tests->add_flag("--substring-test-match", config.substring_test_match,
                        "Treat any name containing 'test' as a test candidate");
  match_tests->add_option("--out", config.output_dir, "Output directory");

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Join occurrences, coverage, and links; classify and run the exact test");
  analyze->add_option("--corpus-root", config.corpus_root, "Directory of incident .json files");
  analyze->add_option("--product", config.product, "Target eclipseProduct");
  analyze->add_option("--build-id", config.build_id, "Target eclipseBuildId");
  analyze->add_option("--coverage-xml", config.coverage_xml, "Aggregated XML report");
  analyze->add_option("--source-root", config.source_root, "Source tree to scan");
  analyze->add_option("--overrides", config.overrides, "Manual override rows");
  analyze->add_option("--occurrences", config.occurrences_csv, "Persisted occurrences.csv");
  analyze->add_option("--methods", config.methods_csv, "Persisted methods.csv");
  analyze->add_option("--links", config.links_csv, "Persisted links.csv");
  analyze->add_flag("--substring-test-match", config.substring_test_match,
                    "Treat any name containing 'test' as a test candidate");
  analyze->add_option("--table", table_cells, "Bypass the pipeline: n11,n10,n01,n00");
  analyze->add_option("--out", config.output_dir, "Output directory");
  detail::add_common_analysis_flags(analyze, config, threshold_spec, population_spec);

  CLI::App* stats_cmd = app.add_subcommand("stats", "Exact inference on one 2x2 table");
  stats_cmd->add_option("--table", table_cells, "Cell counts: n11,n10,n01,n00");
  stats_cmd->add_option("--table-json", table_json_path, "JSON file with {n11,n10,n01,n00}");
  stats_cmd->add_option("--conf-level", config.conf_level, "Confidence level")
      ->check(CLI::Range(0.0, 1.0));
  stats_cmd->add_option("--out", config.output_dir, "Directory for fisher.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);  // prints the right help text, root or subcommand
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    detail::apply_threshold_spec(config, threshold_spec, population_spec);
    if (!table_cells.empty() || !table_json_path.empty()) {
      config.table_override = detail::load_table(table_cells, table_json_path);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }

  if (ingest_incidents->parsed()) return cmd_ingest_incidents(config, out, err);
  if (ingest_coverage->parsed()) return cmd_ingest_coverage(config, out, err);
  if (match_tests->parsed()) return cmd_match_tests(config, out, err);
  if (analyze->parsed()) return cmd_analyze(config, out, err);
  if (stats_cmd->parsed()) return cmd_stats(config, out, err);
  err << "error: no subcommand\n";
  return kExitInputError;
}

}  // namespace crashcov::cli

#endif
