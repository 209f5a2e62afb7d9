#include "pbdb/errors.h"

namespace pbdb {

namespace {

std::string format_parse_error(const std::string& message, int line, int column,
                               const std::vector<std::string>& expected) {
  std::string out = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  if (!expected.empty()) {
    out += " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) out += i + 1 == expected.size() ? " or " : ", ";
      out += expected[i];
    }
    out += ")";
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::string message, int line, int column,
                       std::vector<std::string> expected)
    : Error(format_parse_error(message, line, column, expected)),
      message_(std::move(message)),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

}  // namespace pbdb
