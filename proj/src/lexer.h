#ifndef PBDB_SRC_LEXER_H_
#define PBDB_SRC_LEXER_H_

// Tokenizer shared by the query language and the rule-program parser.

#include <string>
#include <string_view>
#include <vector>

#include "pbdb/errors.h"
#include "pbdb/value.h"

namespace pbdb::internal {

enum class Tok {
  kIdent,
  kInt,
  kReal,
  kString,
  kPipe,     // |>
  kArrow,    // <-
  kLParen,
  kRParen,
  kLBracket,
  kRBracket,
  kLBrace,
  kRBrace,
  kComma,
  kDot,
  kEq,
  kNe,
  kLt,
  kLe,
  kGt,
  kGe,
  kPlus,
  kMinus,
  kStar,
  kNewline,  // only emitted when requested
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;  // identifier, number spelling, or decoded string
  int line;
  int column;
};

std::string describe(Tok kind);

// Splits `text` into tokens.  `#` starts a comment running to end of line.
std::vector<Token> tokenize(std::string_view text, bool emit_newlines = false);

// Cursor over a token vector with error helpers.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const;
  bool at(Tok kind, std::size_t ahead = 0) const { return peek(ahead).kind == kind; }
  bool at_ident(std::string_view word, std::size_t ahead = 0) const;
  const Token& next();
  bool accept(Tok kind);
  bool accept_ident(std::string_view word);
  const Token& expect(Tok kind);
  void expect_ident(std::string_view word);
  std::string expect_identifier();

  [[noreturn]] void fail(const std::string& message,
                         std::vector<std::string> expected = {}) const;

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// Value literal grammar shared by `bag {...}`, `const ...`, and rule
// programs: 3, -2.5, "s", true, false, unit, null, inf, -inf, (a, b), (a,),
// (), tag(a, b), bag {a, b}.
Value parse_value(TokenStream& ts);

// Numeric literal immediately following an optional '-' sign.
Value number_token(const Token& t, bool negative);

}  // namespace pbdb::internal

#endif  // PBDB_SRC_LEXER_H_
