#ifndef CRASHCOV_METHOD_KEY_HPP
#define CRASHCOV_METHOD_KEY_HPP

#include <compare>
#include <cctype>
#include <functional>
#include <string>
#include <string_view>

namespace crashcov {

/// Join key for a method: dotted fully-qualified class name plus the simple
/// method name. Stack frames carry no parameter types, so overloads collapse
/// onto one key.
struct MethodKey {
  std::string class_fqn;
  std::string method_name;

  auto operator<=>(const MethodKey&) const = default;
};

/// Removes every whitespace character. Incident dumps wrap long class names
/// across lines, which injects spaces into the middle of the name.
inline std::string strip_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (!std::isspace(c)) out.push_back(static_cast<char>(c));
  }
  return out;
}

/// Converts a slash-qualified class name ("org/example/Foo$Bar") to the
/// dotted form used everywhere else. Nested-class '$' survives verbatim.
inline std::string dots_from_slashes(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '/') c = '.';
  }
  return out;
}

/// Canonical key: whitespace stripped from both parts, class name dotted.
inline MethodKey make_method_key(std::string_view class_name, std::string_view method_name) {
  return MethodKey{dots_from_slashes(strip_whitespace(class_name)),
                   strip_whitespace(method_name)};
}

}  // namespace crashcov

template <>
struct std::hash<crashcov::MethodKey> {
  std::size_t operator()(const crashcov::MethodKey& k) const noexcept {
    std::size_t h1 = std::hash<std::string>{}(k.class_fqn);
    std::size_t h2 = std::hash<std::string>{}(k.method_name);
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
  }
};

#endif
