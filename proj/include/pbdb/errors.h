#ifndef PBDB_ERRORS_H_
#define PBDB_ERRORS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace pbdb {

// Root of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text: JSON values, DSL queries, rule programs.  Positions are
// 1-based.
class ParseError : public Error {
 public:
  ParseError(std::string message, int line, int column,
             std::vector<std::string> expected = {});

  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::string message_;
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

// Schema or shape mismatch, detected statically or while evaluating.
class TypeError : public Error {
 public:
  using Error::Error;
};

class UnknownTableError : public TypeError {
 public:
  explicit UnknownTableError(const std::string& table)
      : TypeError("unknown table '" + table + "'"), table_(table) {}
  const std::string& table() const { return table_; }

 private:
  std::string table_;
};

// A value that is well-typed but outside an operation's domain: "the" on an
// empty bag, a bernoulli parameter outside [0,1], integer overflow.
class EvalError : public Error {
 public:
  using Error::Error;
};

// A configured size guard (powerbag input size, exact world count) tripped.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Exact enumeration was requested for a distribution without finite support.
class NotFiniteError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid rule program (recursion, unbound head variables).
class ProgramError : public Error {
 public:
  using Error::Error;
};

// Probability weights failed the normalization check.
class ProbabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace pbdb

#endif  // PBDB_ERRORS_H_
