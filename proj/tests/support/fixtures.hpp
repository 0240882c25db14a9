#ifndef CRASHCOV_TESTS_FIXTURES_HPP
#define CRASHCOV_TESTS_FIXTURES_HPP

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

namespace fixtures {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            ("crashcov_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- incident JSON -------------------------------------------------------

struct Frame {
  std::string cls;
  std::string method;
  int line = 1;
};
using Trace = std::vector<Frame>;

inline std::string incident_json(const std::string& product, const std::string& build,
                                 const std::vector<Trace>& traces) {
  nlohmann::json j;
  j["eclipseProduct"] = product;
  j["eclipseBuildId"] = build;
  j["savedOn"] = "2016-07-12T14:00:32.468Z";
  j["kind"] = "NORMAL";
  nlohmann::json jtraces = nlohmann::json::array();
  for (const Trace& t : traces) {
    nlohmann::json jt = nlohmann::json::array();
    for (const Frame& f : t) {
      jt.push_back({{"cN", f.cls},
                    {"fN", f.cls.substr(f.cls.rfind('.') + 1) + ".java"},
                    {"lN", f.line},
                    {"mN", f.method}});
    }
    jtraces.push_back(std::move(jt));
  }
  j["stacktraces"] = std::move(jtraces);
  return j.dump(2);
}

// ---- coverage XML --------------------------------------------------------

struct MethodXml {
  std::string name;
  std::string desc = "()V";
  long long instr_missed = 0, instr_covered = 0;
  long long branch_missed = 0, branch_covered = 0;
  long long line_missed = 0, line_covered = 0;
};

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

struct ClassXml {
  std::string slash_name;  // org/example/Foo
  std::vector<MethodXml> methods;
};

inline std::string coverage_xml(const std::vector<ClassXml>& classes,
                                const std::string& package = "") {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
  os << "<!DOCTYPE report PUBLIC \"-//JACOCO//DTD Report 1.0//EN\" \"report.dtd\">\n";
  os << "<report name=\"fixture\">\n";
  os << "  <sessioninfo id=\"fixture-1\" start=\"0\" dump=\"1\"/>\n";
  os << "  <package name=\"" << package << "\">\n";
  for (const ClassXml& c : classes) {
    os << "    <class name=\"" << c.slash_name << "\" sourcefilename=\"Fixture.java\">\n";
    for (const MethodXml& m : c.methods) {
      os << "      <method name=\"" << xml_escape(m.name) << "\" desc=\"" << xml_escape(m.desc)
         << "\" line=\"1\">\n";
      os << "        <counter type=\"INSTRUCTION\" missed=\"" << m.instr_missed
         << "\" covered=\"" << m.instr_covered << "\"/>\n";
      if (m.branch_missed + m.branch_covered > 0) {
        os << "        <counter type=\"BRANCH\" missed=\"" << m.branch_missed << "\" covered=\""
           << m.branch_covered << "\"/>\n";
      }
      os << "        <counter type=\"LINE\" missed=\"" << m.line_missed << "\" covered=\""
         << m.line_covered << "\"/>\n";
      os << "        <counter type=\"COMPLEXITY\" missed=\"1\" covered=\"0\"/>\n";
      os << "      </method>\n";
    }
    os << "      <counter type=\"CLASS\" missed=\"0\" covered=\"1\"/>\n";
    os << "    </class>\n";
  }
  os << "  </package>\n";
  os << "  <counter type=\"INSTRUCTION\" missed=\"0\" covered=\"0\"/>\n";
  os << "</report>\n";
  return os.str();
}

/// N lines of trivial Java-ish text, so line counts are exact by design.
inline std::string java_source(int lines) {
  std::string out;
  for (int i = 0; i < lines; ++i) out += "// line\n";
  return out;
}

}  // namespace fixtures

#endif
