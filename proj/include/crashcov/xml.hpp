#ifndef CRASHCOV_XML_HPP
#define CRASHCOV_XML_HPP

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "crashcov/errors.hpp"

namespace crashcov::xml {

class XmlError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct Attribute {
  std::string name;
  std::string value;
};

struct StartTag {
  std::string name;
  std::vector<Attribute> attributes;
  bool self_closing = false;

  const std::string* find(std::string_view attr) const {
    for (const auto& a : attributes) {
      if (a.name == attr) return &a.value;
    }
    return nullptr;
  }
};

/// Non-validating pull parser covering the element-and-attribute subset
/// used by coverage reports: prolog, DOCTYPE (with internal subset),
/// comments, CDATA, start/end/self-closing tags, entity references in
/// attribute values. Text content is skipped.
class Reader {
 public:
  enum class Event { kStart, kEnd, kEof };

  explicit Reader(std::string_view doc) : doc_(doc) {
    // strip a UTF-8 BOM if present
    if (doc_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  Event next() {
    if (pending_end_) {
      pending_end_ = false;
      end_name_ = stack_.back();
      stack_.pop_back();
      return Event::kEnd;
    }
    for (;;) {
      std::size_t lt = doc_.find('<', pos_);
      if (lt == std::string_view::npos) {
        if (!stack_.empty()) fail(doc_.size(), "unexpected end of document inside <" + stack_.back() + ">");
        pos_ = doc_.size();
        return Event::kEof;
      }
      pos_ = lt;
      tag_offset_ = lt;
      if (starts_with(lt, "<?")) {
        skip_until(lt, "?>");
      } else if (starts_with(lt, "<!--")) {
        skip_until(lt, "-->");
      } else if (starts_with(lt, "<![CDATA[")) {
        skip_until(lt, "]]>");
      } else if (starts_with(lt, "<!")) {
        skip_declaration(lt);
      } else if (starts_with(lt, "</")) {
        parse_end_tag(lt);
        return Event::kEnd;
      } else {
        parse_start_tag(lt);
        return Event::kStart;
      }
    }
  }

  const StartTag& start() const { return start_; }
  const std::string& end_name() const { return end_name_; }

  /// 1-based line of the most recently returned tag.
  std::size_t line() const {
    return 1 + static_cast<std::size_t>(
                   std::count(doc_.begin(), doc_.begin() + static_cast<long>(tag_offset_), '\n'));
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
    std::size_t line = 1 + static_cast<std::size_t>(
                               std::count(doc_.begin(), doc_.begin() + static_cast<long>(at), '\n'));
    throw XmlError("XML error at line " + std::to_string(line) + ": " + msg);
  }

  bool starts_with(std::size_t at, std::string_view prefix) const {
    return doc_.substr(at, prefix.size()) == prefix;
  }

  void skip_until(std::size_t from, std::string_view terminator) {
    std::size_t end = doc_.find(terminator, from);
    if (end == std::string_view::npos) fail(from, "unterminated '" + std::string(doc_.substr(from, 2)) + "' section");
    pos_ = end + terminator.size();
  }

  // <!DOCTYPE ...> possibly carrying an internal subset in [ ... ]
  void skip_declaration(std::size_t from) {
    std::size_t i = from + 2;
    int bracket_depth = 0;
    while (i < doc_.size()) {
      char c = doc_[i];
      if (c == '[') ++bracket_depth;
      else if (c == ']') --bracket_depth;
      else if (c == '>' && bracket_depth == 0) {
        pos_ = i + 1;
        return;
      }
      ++i;
    }
    fail(from, "unterminated declaration");
  }

  static bool is_name_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c == ':' || c >= 0x80;
  }
  static bool is_name_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == ':' || c == '-' || c == '.' || c >= 0x80;
  }

  std::size_t skip_ws(std::size_t i) const {
    while (i < doc_.size() && std::isspace(static_cast<unsigned char>(doc_[i]))) ++i;
    return i;
  }

  std::string parse_name(std::size_t& i) {
    std::size_t begin = i;
    if (i >= doc_.size() || !is_name_start(static_cast<unsigned char>(doc_[i]))) {
      fail(i, "expected a name");
    }
    while (i < doc_.size() && is_name_char(static_cast<unsigned char>(doc_[i]))) ++i;
    return std::string(doc_.substr(begin, i - begin));
  }

  std::string decode_entities(std::size_t at, std::string_view raw) const {
    if (raw.find('&') == std::string_view::npos) return std::string(raw);
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail(at, "unterminated entity reference");
      std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out.push_back('&');
      else if (ent == "lt") out.push_back('<');
      else if (ent == "gt") out.push_back('>');
      else if (ent == "quot") out.push_back('"');
      else if (ent == "apos") out.push_back('\'');
      else if (!ent.empty() && ent[0] == '#') {
        long code = 0;
        try {
          code = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                     ? std::stol(std::string(ent.substr(2)), nullptr, 16)
                     : std::stol(std::string(ent.substr(1)), nullptr, 10);
        } catch (...) {
          fail(at, "bad character reference '&" + std::string(ent) + ";'");
        }
        if (code < 0 || code > 0x10FFFF) fail(at, "character reference out of range");
        append_utf8(out, static_cast<unsigned long>(code));
      } else {
        fail(at, "unknown entity '&" + std::string(ent) + ";'");
      }
      i = semi;
    }
    return out;
  }

  static void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  void parse_end_tag(std::size_t from) {
    std::size_t i = from + 2;
    std::string name = parse_name(i);
    i = skip_ws(i);
    if (i >= doc_.size() || doc_[i] != '>') fail(i, "expected '>' after </" + name);
    if (stack_.empty()) fail(from, "end tag </" + name + "> with no open element");
    if (stack_.back() != name) {
      fail(from, "mismatched end tag: expected </" + stack_.back() + ">, found </" + name + ">");
    }
    stack_.pop_back();
    end_name_ = std::move(name);
    pos_ = i + 1;
  }

  void parse_start_tag(std::size_t from) {
    std::size_t i = from + 1;
    start_.name = parse_name(i);
    start_.attributes.clear();
    start_.self_closing = false;
    for (;;) {
      i = skip_ws(i);
      if (i >= doc_.size()) fail(from, "unterminated start tag <" + start_.name);
      if (doc_[i] == '>') {
        ++i;
        break;
      }
      if (doc_[i] == '/') {
        if (i + 1 >= doc_.size() || doc_[i + 1] != '>') fail(i, "expected '/>'");
        start_.self_closing = true;
        i += 2;
        break;
      }
      Attribute attr;
      attr.name = parse_name(i);
      i = skip_ws(i);
      if (i >= doc_.size() || doc_[i] != '=') fail(i, "expected '=' after attribute '" + attr.name + "'");
      i = skip_ws(i + 1);
      if (i >= doc_.size() || (doc_[i] != '"' && doc_[i] != '\'')) {
        fail(i, "expected quoted value for attribute '" + attr.name + "'");
      }
      char quote = doc_[i++];
      std::size_t value_begin = i;
      while (i < doc_.size() && doc_[i] != quote) {
        if (doc_[i] == '<') fail(i, "'<' in attribute value");
        ++i;
      }
      if (i >= doc_.size()) fail(value_begin, "unterminated attribute value");
      attr.value = decode_entities(value_begin, doc_.substr(value_begin, i - value_begin));
      ++i;
      start_.attributes.push_back(std::move(attr));
    }
    stack_.push_back(start_.name);
    if (start_.self_closing) pending_end_ = true;
    pos_ = i;
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
  std::size_t tag_offset_ = 0;
  bool pending_end_ = false;
  StartTag start_;
  std::string end_name_;
  std::vector<std::string> stack_;
};

}  // namespace crashcov::xml

#endif
