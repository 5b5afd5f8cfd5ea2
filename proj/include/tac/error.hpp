#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tac {

/// Raised for ill-formed inputs: arity mismatches, unknown symbols or states,
/// non-left-linear systems where linearity is required, and similar.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in a specification file, with a 1-based source location.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column,
             const std::string& file = {})
      : Error((file.empty() ? "" : file + ":") + std::to_string(line) + ":" +
              std::to_string(column) + ": " + message),
        message_(message),
        line_(line),
        column_(column) {}

  const std::string& message() const noexcept { return message_; }

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace tac
