#ifndef CRASHCOV_CORPUS_HPP
#define CRASHCOV_CORPUS_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crashcov/csv.hpp"
#include "crashcov/errors.hpp"
#include "crashcov/incident.hpp"

namespace crashcov {

struct CorpusStats {
  std::uint64_t total_files = 0;   // *.json files visited
  std::uint64_t matched = 0;       // incidents matching product + build
  std::uint64_t malformed = 0;     // unparseable or schema-violating files
  std::uint64_t traces = 0;        // traces of matched incidents
  std::uint64_t occurrences = 0;   // occurrences emitted
  // frame-count stats over non-empty traces of matched incidents
  std::uint64_t trace_len_min = 0;
  std::uint64_t trace_len_max = 0;
  double trace_len_mean = 0.0;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

}  // namespace detail

/// Visits every .json file under `root` (sorted by path, so output order
/// is stable regardless of directory iteration order), parses each as an
/// incident, and feeds occurrences of matching incidents to `sink`.
/// Malformed files are counted and skipped; an unreadable root is fatal.
inline CorpusStats scan_corpus(const std::filesystem::path& root, std::string_view product,
                               std::string_view build_id,
                               const std::function<void(const FrameOccurrence&)>& sink) {
  namespace fs = std::filesystem;
  if (!fs::exists(root) || !fs::is_directory(root)) {
    throw InputError("corpus root is not a readable directory: " + root.string());
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(
           root, fs::directory_options::skip_permission_denied)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  CorpusStats stats;
  std::uint64_t frame_sum = 0;
  std::uint64_t nonempty_traces = 0;
  stats.trace_len_min = std::numeric_limits<std::uint64_t>::max();

  for (const auto& file : files) {
    ++stats.total_files;
    RawIncident incident;
    try {
      incident = parse_incident(detail::read_file(file), file.stem().string());
    } catch (const InputError&) {
      ++stats.malformed;
      continue;
    }
    if (!matches_release(incident, product, build_id)) continue;
    ++stats.matched;
    for (const auto& trace : incident.traces) {
      ++stats.traces;
      if (!trace.empty()) {
        ++nonempty_traces;
        frame_sum += trace.size();
        stats.trace_len_min = std::min<std::uint64_t>(stats.trace_len_min, trace.size());
        stats.trace_len_max = std::max<std::uint64_t>(stats.trace_len_max, trace.size());
      }
    }
    for (const auto& occ : extract_occurrences(incident)) {
      ++stats.occurrences;
      sink(occ);
    }
  }

  if (nonempty_traces == 0) {
    stats.trace_len_min = 0;
  } else {
    stats.trace_len_mean = static_cast<double>(frame_sum) / static_cast<double>(nonempty_traces);
  }
  return stats;
}

inline std::pair<std::vector<FrameOccurrence>, CorpusStats> scan_corpus(
    const std::filesystem::path& root, std::string_view product, std::string_view build_id) {
  std::vector<FrameOccurrence> occurrences;
  CorpusStats stats = scan_corpus(root, product, build_id,
                                  [&](const FrameOccurrence& o) { occurrences.push_back(o); });
  return {std::move(occurrences), stats};
}

inline constexpr const char* kOccurrencesCsvHeader =
    "incident_id,trace_index,position,class_fqn,method_name";

inline void write_occurrences_header(std::ostream& os) { os << kOccurrencesCsvHeader << '\n'; }

inline void write_occurrence_row(std::ostream& os, const FrameOccurrence& o) {
  csv::write_row(os, {o.incident_id, std::to_string(o.trace_index), std::to_string(o.position),
                      o.method.class_fqn, o.method.method_name});
}

inline void write_occurrences_csv(std::ostream& os, const std::vector<FrameOccurrence>& occurrences) {
  write_occurrences_header(os);
  for (const auto& o : occurrences) write_occurrence_row(os, o);
}

inline std::vector<FrameOccurrence> read_occurrences_csv(std::istream& is) {
  std::vector<std::string> row;
  if (!csv::read_row(is, row) || row.size() != 5 || row[0] != "incident_id") {
    throw ParseError("occurrences CSV: missing or unexpected header");
  }
  std::vector<FrameOccurrence> out;
  while (csv::read_row(is, row)) {
    if (row.size() != 5) throw ParseError("occurrences CSV: expected 5 columns");
    FrameOccurrence o;
    o.incident_id = row[0];
    o.trace_index = static_cast<int>(csv::to_ll(row[1], "trace_index"));
    o.position = static_cast<int>(csv::to_ll(row[2], "position"));
    o.method = MethodKey{row[3], row[4]};
    out.push_back(std::move(o));
  }
  return out;
}

/// The timestamp is the one nondeterministic field the pipeline emits;
/// it is confined to this stats document.
inline nlohmann::json corpus_stats_json(const CorpusStats& s, std::string generated_at = {}) {
  nlohmann::json j{
      {"total_files", s.total_files},
      {"matched", s.matched},
      {"malformed", s.malformed},
      {"traces", s.traces},
      {"occurrences", s.occurrences},
      {"trace_len_min", s.trace_len_min},
      {"trace_len_max", s.trace_len_max},
      {"trace_len_mean", s.trace_len_mean},
  };
  if (!generated_at.empty()) j["generated_at"] = std::move(generated_at);
  return j;
}

}  // namespace crashcov

#endif
