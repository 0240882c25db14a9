#ifndef CRASHCOV_ERRORS_HPP
#define CRASHCOV_ERRORS_HPP

#include <exception>
#include <filesystem>
#include <stdexcept>

namespace crashcov {

// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitEmptyScope = 3,
  kExitInternal = 4,
};

// Problem with an input file, directory, or option value.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed syntax in a single document (incident JSON, coverage XML).
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

// Syntactically valid document missing required fields or carrying
// out-of-range values.
class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

// Unusable run configuration: unsupported depth, bad override row, ...
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

// The scoped record set is empty; nothing to analyze.
class EmptyScopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const EmptyScopeError*>(&e)) return kExitEmptyScope;
  if (dynamic_cast<const InputError*>(&e)) return kExitInputError;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitInputError;
  if (dynamic_cast<const std::logic_error*>(&e)) return kExitInternal;
  return kExitInternal;
}

}  // namespace crashcov

#endif
