#pragma once

#include <stdexcept>
#include <string>

namespace apa {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Source or text-format error with a 1-based position.
class ParseError : public Error {
public:
  ParseError(std::string message, int line, int column)
      : Error(format(message, line, column)), message_(std::move(message)),
        line_(line), column_(column) {}

  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

private:
  static std::string format(const std::string& m, int line, int column) {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + m;
  }

  std::string message_;
  int line_;
  int column_;
};

/// A change operation that cannot be applied to the current graph.
class ChangeError : public Error {
public:
  using Error::Error;
};

/// No reduction rule applies but more than one edge remains.
class IrreducibleError : public Error {
public:
  using Error::Error;
};

} // namespace apa
