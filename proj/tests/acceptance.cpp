// Acceptance suite: one pass/fail line per criterion, nonzero exit when a
// non-skipped criterion fails. Usage: acceptance <path-to-crashcov-binary>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crashcov/cli.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/pipeline_oracle.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_binary;
int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
  if (!pass) ++g_failures;
}

void report_skip(int criterion, const std::string& what) {
  std::printf("[SKIP] criterion %d: %s\n", criterion, what.c_str());
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct ProcessResult {
  int exit_code = -1;
  std::string output;
};

ProcessResult run_binary(const std::string& args) {
  std::string cmd = "'" + g_binary + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  ProcessResult result;
  if (!pipe) return result;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) result.output += buf;
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::optional<double> grab_number(const std::string& text, const std::string& prefix) {
  std::size_t at = text.find(prefix);
  if (at == std::string::npos) return std::nullopt;
  return std::stod(text.substr(at + prefix.size()));
}

// ---- criterion 1: exact-test reproduction through the real CLI ----------

void criterion_1() {
  Clock::time_point start = Clock::now();
  ProcessResult r = run_binary("stats --table 67,522,1099,7835");
  double elapsed = seconds_since(start);

  bool ok = r.exit_code == 0;
  std::optional<double> p = grab_number(r.output, "p=");
  std::optional<double> odds = grab_number(r.output, "OR=");
  std::optional<double> ci = grab_number(r.output, "CI=[0, ");
  ok = ok && p && std::abs(*p - 0.278) <= 0.0005;
  ok = ok && odds && std::abs(*odds - 0.915) <= 0.0005;
  ok = ok && ci && std::abs(*ci - 1.146) <= 0.0005;
  ok = ok && elapsed < 1.0;
  std::ostringstream what;
  what << "stats --table 67,522,1099,7835 -> p=" << (p ? *p : -1) << " OR=" << (odds ? *odds : -1)
       << " CI_high=" << (ci ? *ci : -1) << " in " << elapsed << "s";
  report(1, ok, what.str());
}

// ---- criterion 2: printed percentages, both tables ----------------------

void criterion_2() {
  using crashcov::stats::ContingencyTable;
  using crashcov::stats::summarize_percentages;
  crashcov::stats::CellPercentages strict = summarize_percentages(ContingencyTable{67, 522, 1099, 7835});
  crashcov::stats::CellPercentages cov = summarize_percentages(ContingencyTable{1152, 366, 4890, 3115});
  bool ok = strict.n00 == 82.3 && strict.n10 == 5.5 && strict.n01 == 11.5 && strict.n11 == 0.7 &&
            cov.n00 == 32.7 && cov.n10 == 3.8 && cov.n01 == 51.3 && cov.n11 == 12.1;
  report(2, ok, "one-decimal shares 82.3/5.5/11.5/0.7 and 32.7/3.8/51.3/12.1");
}

// ---- criterion 3: exhaustive oracle equivalence, grand total <= 60 ------

void criterion_3() {
  Clock::time_point start = Clock::now();
  auto binom = oracle::binomial_table(60);
  long long tables = 0;
  double worst = 0.0;
  bool ok = true;
  for (long long total = 1; total <= 60 && ok; ++total) {
    for (long long n11 = 0; n11 <= total && ok; ++n11) {
      for (long long n10 = 0; n11 + n10 <= total && ok; ++n10) {
        for (long long n01 = 0; n11 + n10 + n01 <= total && ok; ++n01) {
          long long n00 = total - n11 - n10 - n01;
          crashcov::stats::ContingencyTable t{n11, n10, n01, n00};
          double actual = crashcov::stats::fisher_less(t).p_value;
          double expected =
              static_cast<double>(oracle::ExactHypergeom{t.total(), t.crashed_total(),
                                                         t.tested_total(), binom}
                                      .cdf(t.n11));
          double diff = std::abs(actual - expected);
          worst = std::max(worst, diff);
          if (diff > 1e-12) ok = false;
          ++tables;
        }
      }
    }
  }
  double elapsed = seconds_since(start);
  ok = ok && elapsed < 60.0;
  std::ostringstream what;
  what << tables << " exhaustive tables, max |p - exact| = " << worst << ", " << elapsed << "s";
  report(3, ok, what.str());
}

// ---- criterion 4: normalization up to N = 20000 --------------------------

void criterion_4() {
  bool ok = true;
  double worst = 0.0;
  for (long long N : {2LL, 10LL, 100LL, 1000LL, 5000LL, 20000LL}) {
    for (long long K : {0LL, N / 3, N / 2, N}) {
      for (long long n : {1LL, N / 4, N / 2, N}) {
        if (n < 1 || n > N) continue;
        long long lo = std::max<long long>(0, n + K - N);
        long long hi = std::min(n, K);
        double central = 0.0;
        for (long long k = lo; k <= hi; ++k) {
          central += std::exp(crashcov::stats::log_hypergeom_pmf(k, N, K, n));
        }
        worst = std::max(worst, std::abs(central - 1.0));
        for (double psi : {0.1, 0.5, 1.0, 2.0, 10.0}) {
          double noncentral = 0.0;
          for (long long k = lo; k <= hi; ++k) {
            noncentral += crashcov::stats::noncentral_pmf(k, N, K, n, psi);
          }
          worst = std::max(worst, std::abs(noncentral - 1.0));
        }
      }
    }
  }
  ok = worst < 1e-12;
  std::ostringstream what;
  what << "pmf sums on the (N,K,n,psi) grid, max |sum - 1| = " << worst;
  report(4, ok, what.str());
}

// ---- criterion 5: pipeline vs. brute-force oracle -------------------------

bool close_opt(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || *a == *b;
}

void criterion_5() {
  fixtures::TempDir dir("acceptance5");
  synthetic::Fixture f = synthetic::build(dir);
  fs::path out_dir = dir / "out";

  std::vector<std::string> args = {"analyze",
                                   "--corpus-root", f.corpus_dir.string(),
                                   "--product", synthetic::kProduct,
                                   "--build-id", synthetic::kBuild,
                                   "--coverage-xml", f.coverage_xml.string(),
                                   "--source-root", f.source_root.string(),
                                   "--out", out_dir.string()};
  std::vector<const char*> argv = {"crashcov"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream sink_out, sink_err;
  int code = crashcov::cli::run(static_cast<int>(argv.size()), argv.data(), sink_out, sink_err);
  if (code != 0) {
    report(5, false, "analyze exited " + std::to_string(code) + ": " + sink_err.str());
    return;
  }

  pipeline_oracle::Result expected = pipeline_oracle::run(
      f.corpus_dir, synthetic::kProduct, synthetic::kBuild, f.coverage_xml, f.tested_classes, 10);

  // parse the persisted joined.csv back and compare every field
  std::ifstream joined_in(out_dir / "joined.csv");
  std::string header;
  std::getline(joined_in, header);
  std::map<std::string, std::vector<std::string>> actual_rows;
  std::string line;
  while (std::getline(joined_in, line)) {
    std::vector<std::string> row = crashcov::csv::parse_row(line);
    actual_rows[row[0] + "#" + row[1]] = row;
  }

  std::string failure;
  if (actual_rows.size() != expected.records.size()) {
    failure = "record count " + std::to_string(actual_rows.size()) + " vs oracle " +
              std::to_string(expected.records.size());
  }
  auto parse_opt = [](const std::string& s) {
    return s.empty() ? std::optional<double>() : std::optional<double>(std::stod(s));
  };
  for (const auto& [key, exp] : expected.records) {
    if (!failure.empty()) break;
    auto it = actual_rows.find(key);
    if (it == actual_rows.end()) {
      failure = "missing record " + key;
      break;
    }
    const std::vector<std::string>& row = it->second;
    auto flag = [](const std::string& s) { return s == "1"; };
    if (std::stoll(row[2]) != exp.incident_count) failure = key + ": incident_count";
    else if (std::stoll(row[3]) != exp.first_frame_count) failure = key + ": first_frame_count";
    else if (std::stoi(row[4]) != exp.min_position) failure = key + ": min_position";
    else if (flag(row[5]) != exp.topmost) failure = key + ": topmost";
    else if (flag(row[6]) != exp.top6) failure = key + ": top6";
    else if (flag(row[7]) != exp.top10) failure = key + ": top10";
    else if (!close_opt(parse_opt(row[8]), exp.instr_ratio)) failure = key + ": instr_ratio";
    else if (!close_opt(parse_opt(row[9]), exp.branch_ratio)) failure = key + ": branch_ratio";
    else if (!close_opt(parse_opt(row[10]), exp.line_ratio)) failure = key + ": line_ratio";
    else if (flag(row[11]) != exp.covered) failure = key + ": covered";
    else if (flag(row[12]) != exp.in_tested_class) failure = key + ": in_tested_class";
    else if (!close_opt(parse_opt(row[13]), exp.density)) failure = key + ": density";
    else if (flag(row[14]) != exp.strict_tested) failure = key + ": strict_tested";
    else if (flag(row[15]) != exp.strict_crashed) failure = key + ": strict_crashed";
    else {
      // advisory tag, re-derived naively from the method name
      std::string method = key.substr(key.find('#') + 1);
      std::string want;
      for (const char* p : {"log", "fail", "assert", "check", "report", "verify", "error"}) {
        if (method.rfind(p, 0) == 0) want = "DEBUG_LIKE";
      }
      if (want.empty() && (method == "run" || method == "invoke" || method == "execute")) {
        want = "TRIGGER_LIKE";
      }
      if (row[16] != want) failure = key + ": name_tag '" + row[16] + "' vs '" + want + "'";
    }
  }

  nlohmann::json summary = nlohmann::json::parse(fixtures::read_file(out_dir / "summary.json"));
  auto table_matches = [&](const char* name, const pipeline_oracle::Table& t) {
    const nlohmann::json& j = summary[name];
    return j["n11"] == t.n11 && j["n10"] == t.n10 && j["n01"] == t.n01 && j["n00"] == t.n00;
  };
  if (failure.empty() && summary["threshold"].get<double>() != expected.threshold) {
    failure = "threshold mismatch";
  }
  if (failure.empty() && !table_matches("table2", expected.strict_table)) failure = "table2";
  if (failure.empty() && !table_matches("table1", expected.coverage_table)) failure = "table1";

  std::ostringstream what;
  what << expected.records.size() << " joined records and both tables against the brute-force run";
  if (!failure.empty()) what << " -- " << failure;
  report(5, failure.empty(), what.str());
}

// ---- criterion 6: discovery fixtures with the three rules ----------------

void criterion_6() {
  fixtures::TempDir dir("acceptance6");
  namespace fx = fixtures;

  const std::string widget_test =
      "eclipse.platform.ui/tests/org.eclipse.jface.tests.databinding/src/org/eclipse/jface/"
      "tests/databinding/swt/WidgetPropertiesTest.java";
  const std::string widget_class =
      "eclipse.platform.ui/bundles/org.eclipse.jface.databinding/src/org/eclipse/jface/"
      "databinding/swt/WidgetProperties.java";
  const std::string editor_test =
      "eclipse.platform.ui/tests/org.eclipse.ui.tests/Eclipse JFace Tests/org/eclipse/jface/"
      "tests/preferences/BooleanFieldEditorTest.java";
  const std::string editor_class =
      "eclipse.platform.ui/bundles/org.eclipse.jface/src/org/eclipse/jface/preference/"
      "BooleanFieldEditor.java";
  const std::string swt_test =
      "eclipse.platform.swt/tests/org.eclipse.swt.tests/JUnit Tests/org/eclipse/swt/tests/"
      "junit/Test_org_eclipse_swt_widgets_Text.java";
  const std::vector<std::string> swt_classes = {
      "eclipse.platform.swt/bundles/org.eclipse.swt/Eclipse SWT/cocoa/org/eclipse/swt/widgets/"
      "Text.java",
      "eclipse.platform.swt/bundles/org.eclipse.swt/Eclipse SWT/gtk/org/eclipse/swt/widgets/"
      "Text.java",
      "eclipse.platform.swt/bundles/org.eclipse.swt/Eclipse SWT/win32/org/eclipse/swt/widgets/"
      "Text.java"};

  fx::write_file(dir / widget_test, fx::java_source(10));
  fx::write_file(dir / widget_class, fx::java_source(20));
  fx::write_file(dir / editor_test, fx::java_source(10));
  fx::write_file(dir / editor_class, fx::java_source(20));
  fx::write_file(dir / swt_test, fx::java_source(30));
  for (const std::string& p : swt_classes) fx::write_file(dir / p, fx::java_source(40));

  std::string overrides;
  for (const std::string& p : swt_classes) overrides += "ADD\t" + p + "\t" + swt_test + "\n";
  fx::write_file(dir / "overrides.tsv", overrides);

  auto [tests, production] = crashcov::classify_files(dir.path());
  crashcov::LinkResult result = crashcov::link_tests(tests, production);
  std::vector<crashcov::TestLink> links = crashcov::apply_overrides(
      result.links, dir / "overrides.tsv", tests, production);

  std::map<std::string, crashcov::MatchRule> rules;
  for (const crashcov::TestLink& link : links) rules[link.class_path] = link.rule;

  bool ok = links.size() == 5;
  ok = ok && rules.count(widget_class) && rules[widget_class] == crashcov::MatchRule::kPathRtl;
  ok = ok && rules.count(editor_class) && rules[editor_class] == crashcov::MatchRule::kWordOverlap;
  for (const std::string& p : swt_classes) {
    ok = ok && rules.count(p) && rules[p] == crashcov::MatchRule::kManual;
  }
  report(6, ok, "mirrored-path, word-overlap, and shared-test links carry the expected rules");
}

// ---- criterion 7: full-corpus figures (conditional) -----------------------

void criterion_7() {
  const char* corpus = std::getenv("CRASHCOV_CORPUS_ROOT");
  const char* coverage = std::getenv("CRASHCOV_COVERAGE_XML");
  const char* source = std::getenv("CRASHCOV_SOURCE_ROOT");
  if (!corpus || !coverage || !source) {
    report_skip(7, "full-corpus figures (set CRASHCOV_CORPUS_ROOT, CRASHCOV_COVERAGE_XML, "
                   "CRASHCOV_SOURCE_ROOT to enable)");
    return;
  }
  fixtures::TempDir dir("acceptance7");
  std::vector<std::string> args = {"analyze",
                                   "--corpus-root", corpus,
                                   "--product", "org.eclipse.epp.package.java.product",
                                   "--build-id", "4.5.2.M20160212-1500",
                                   "--coverage-xml", coverage,
                                   "--source-root", source,
                                   "--out", (dir / "out").string()};
  if (const char* overrides = std::getenv("CRASHCOV_OVERRIDES")) {
    args.push_back("--overrides");
    args.push_back(overrides);
  }
  std::vector<const char*> argv = {"crashcov"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = crashcov::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) {
    report(7, false, "analyze exited " + std::to_string(code) + ": " + err.str());
    return;
  }
  nlohmann::json s = nlohmann::json::parse(fixtures::read_file(dir / "out/summary.json"));
  nlohmann::json cs = nlohmann::json::parse(fixtures::read_file(dir / "out/corpus_stats.json"));
  bool ok = cs["matched"] == 126026 && s["join"]["matched_methods"] == 14902 &&
            s["scoped_count"] == 9523 &&
            std::abs(s["threshold"].get<double>() - 0.983) < 5e-4 &&
            s["table1"]["n00"] == 3115 && s["table1"]["n10"] == 366 &&
            s["table1"]["n01"] == 4890 && s["table1"]["n11"] == 1152 &&
            s["table2"]["n00"] == 7835 && s["table2"]["n10"] == 522 &&
            s["table2"]["n01"] == 1099 && s["table2"]["n11"] == 67;
  report(7, ok, "full-corpus matched/scoped counts, threshold, and both tables");
}

// ---- criterion 8: ingest throughput and determinism -----------------------

void criterion_8() {
  fixtures::TempDir dir("acceptance8");
  namespace fx = fixtures;
  fs::path corpus = dir / "corpus";
  for (int i = 0; i < 10000; ++i) {
    fx::Trace trace;
    int len = 1 + (i % 7);
    for (int k = 0; k < len; ++k) {
      trace.push_back({"com.example.Cls" + std::to_string((i + k) % 97),
                       "m" + std::to_string(k % 11), k + 1});
    }
    fx::write_file(corpus / ("incident_" + std::to_string(i) + ".json"),
                   fx::incident_json("p", "b", {trace}));
  }

  Clock::time_point start = Clock::now();
  std::ostringstream first;
  crashcov::CorpusStats stats = crashcov::scan_corpus(
      corpus, "p", "b",
      [&](const crashcov::FrameOccurrence& o) { crashcov::write_occurrence_row(first, o); });
  double elapsed = seconds_since(start);

  std::ostringstream second;
  crashcov::scan_corpus(corpus, "p", "b", [&](const crashcov::FrameOccurrence& o) {
    crashcov::write_occurrence_row(second, o);
  });

  bool ok = stats.matched == 10000 && elapsed < 10.0 && first.str() == second.str();
  std::ostringstream what;
  what << "10000 synthetic incidents ingested in " << elapsed << "s, deterministic output";
  report(8, ok, what.str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-crashcov-binary>\n");
    return 2;
  }
  g_binary = argv[1];

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();

  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
