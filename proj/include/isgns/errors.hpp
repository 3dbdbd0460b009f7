#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isgns {

/// Malformed input text. `line()` is 1-based; 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownVertexError : public std::out_of_range {
 public:
  explicit UnknownVertexError(const std::string& label)
      : std::out_of_range("unknown vertex '" + label + "'"), label_(label) {}

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

/// A diff that does not describe a valid transition from the snapshot it is applied to.
class InconsistentDiffError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace isgns
