#ifndef CRASHCOV_INCIDENT_HPP
#define CRASHCOV_INCIDENT_HPP

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "crashcov/errors.hpp"
#include "crashcov/method_key.hpp"

namespace crashcov {

/// One stack entry. Position 1 of a trace is the frame where the
/// exception surfaced.
struct StackFrame {
  std::string class_name;   // dotted fully-qualified name, whitespace stripped
  std::string file_name;
  long long line_number = 0;
  std::string method_name;
};

/// One crash report: metadata plus one or more stack traces, in file order.
/// severity and kind ride along uninterpreted.
struct RawIncident {
  std::string incident_id;
  std::string eclipse_product;
  std::string build_id;
  std::string saved_on;
  std::string severity;
  std::string kind;
  std::vector<std::vector<StackFrame>> traces;
};

/// First appearance of a method within one trace of one incident.
struct FrameOccurrence {
  std::string incident_id;
  MethodKey method;
  int position = 1;     // 1-based; 1 = topmost frame
  int trace_index = 0;  // 0-based index of the containing trace
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                           const std::string& incident_id) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError("incident " + incident_id + ": missing required field '" + key + "'");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& incident_id) {
  const auto& v = require_field(j, key, incident_id);
  if (!v.is_string()) {
    throw SchemaError("incident " + incident_id + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

}  // namespace detail

/// Parses one incident document. Unknown fields are ignored. Throws
/// ParseError on malformed JSON and SchemaError when `stacktraces`,
/// `eclipseProduct`, or `eclipseBuildId` is missing or ill-typed.
inline RawIncident parse_incident(std::string_view bytes, std::string incident_id) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("incident " + incident_id + ": " + e.what());
  }
  if (!j.is_object()) throw SchemaError("incident " + incident_id + ": document is not an object");

  RawIncident inc;
  inc.incident_id = std::move(incident_id);
  inc.eclipse_product = detail::require_string(j, "eclipseProduct", inc.incident_id);
  inc.build_id = detail::require_string(j, "eclipseBuildId", inc.incident_id);
  if (auto it = j.find("savedOn"); it != j.end() && it->is_string()) {
    inc.saved_on = it->get<std::string>();
  }
  if (auto it = j.find("severity"); it != j.end() && it->is_string()) {
    inc.severity = it->get<std::string>();
  }
  if (auto it = j.find("kind"); it != j.end() && it->is_string()) {
    inc.kind = it->get<std::string>();
  }

  const auto& traces = detail::require_field(j, "stacktraces", inc.incident_id);
  if (!traces.is_array()) {
    throw SchemaError("incident " + inc.incident_id + ": field 'stacktraces' must be an array");
  }
  inc.traces.reserve(traces.size());
  for (const auto& trace : traces) {
    if (!trace.is_array()) {
      throw SchemaError("incident " + inc.incident_id + ": stack trace must be an array of frames");
    }
    std::vector<StackFrame> frames;
    frames.reserve(trace.size());
    for (const auto& f : trace) {
      if (!f.is_object()) {
        throw SchemaError("incident " + inc.incident_id + ": stack frame must be an object");
      }
      StackFrame frame;
      frame.class_name = dots_from_slashes(strip_whitespace(detail::require_string(f, "cN", inc.incident_id)));
      frame.method_name = strip_whitespace(detail::require_string(f, "mN", inc.incident_id));
      if (frame.class_name.empty() || frame.method_name.empty()) {
        throw SchemaError("incident " + inc.incident_id + ": empty class or method name in frame");
      }
      if (auto it = f.find("fN"); it != f.end() && it->is_string()) {
        frame.file_name = it->get<std::string>();
      }
      if (auto it = f.find("lN"); it != f.end() && it->is_number()) {
        long long ln = it->is_number_integer() ? it->get<long long>()
                                               : static_cast<long long>(it->get<double>());
        frame.line_number = ln < 0 ? 0 : ln;  // native frames report negative lines
      }
      frames.push_back(std::move(frame));
    }
    inc.traces.push_back(std::move(frames));
  }
  return inc;
}

/// Exact byte equality on both fields; no case folding.
inline bool matches_release(const RawIncident& incident, std::string_view product,
                            std::string_view build_id) {
  return incident.eclipse_product == product && incident.build_id == build_id;
}

/// Per trace, one occurrence per distinct method key at its first
/// (smallest) position. Traces are independent; output is ordered by
/// (trace_index, position).
inline std::vector<FrameOccurrence> extract_occurrences(const RawIncident& incident) {
  std::vector<FrameOccurrence> out;
  for (std::size_t ti = 0; ti < incident.traces.size(); ++ti) {
    const auto& trace = incident.traces[ti];
    std::unordered_set<MethodKey> seen;
    seen.reserve(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
      MethodKey key{trace[i].class_name, trace[i].method_name};
      if (seen.insert(key).second) {
        out.push_back(FrameOccurrence{incident.incident_id, std::move(key),
                                      static_cast<int>(i + 1), static_cast<int>(ti)});
      }
    }
  }
  return out;
}

}  // namespace crashcov

#endif
