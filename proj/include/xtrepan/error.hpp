#ifndef XTREPAN_ERROR_HPP
#define XTREPAN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace xtrepan {

// Base error. `kind` maps to CLI exit codes: validation -> 1, runtime -> 2.
class Error : public std::runtime_error {
public:
  enum class Kind { validation, runtime };

  Error(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

// Malformed input: bad file content, schema violations, contract misuse.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& message)
      : Error(Kind::validation, message) {}
};

// Failure while computing: divergence, unsatisfiable sampling, I/O.
class RuntimeError : public Error {
public:
  explicit RuntimeError(const std::string& message)
      : Error(Kind::runtime, message) {}
};

}  // namespace xtrepan

#endif
