#include "lexer.h"

#include <charconv>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "pbdb/bag.h"

namespace pbdb::internal {

std::string describe(Tok kind) {
  switch (kind) {
    case Tok::kIdent: return "identifier";
    case Tok::kInt: return "integer";
    case Tok::kReal: return "number";
    case Tok::kString: return "string";
    case Tok::kPipe: return "'|>'";
    case Tok::kArrow: return "'<-'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kLBracket: return "'['";
    case Tok::kRBracket: return "']'";
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kComma: return "','";
    case Tok::kDot: return "'.'";
    case Tok::kEq: return "'='";
    case Tok::kNe: return "'!='";
    case Tok::kLt: return "'<'";
    case Tok::kLe: return "'<='";
    case Tok::kGt: return "'>'";
    case Tok::kGe: return "'>='";
    case Tok::kPlus: return "'+'";
    case Tok::kMinus: return "'-'";
    case Tok::kStar: return "'*'";
    case Tok::kNewline: return "end of line";
    case Tok::kEnd: return "end of input";
  }
  return "?";
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

}  // namespace

std::vector<Token> tokenize(std::string_view text, bool emit_newlines) {
  std::vector<Token> out;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
  };
  auto push = [&](Tok kind, std::size_t len, std::string spelling) {
    out.push_back(Token{kind, std::move(spelling), line, column});
    advance(len);
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      if (emit_newlines) {
        push(Tok::kNewline, 1, "");
      } else {
        advance(1);
      }
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      push(Tok::kIdent, j - i, std::string(text.substr(i, j - i)));
      continue;
    }
    if (is_digit(c)) {
      std::size_t j = i;
      while (j < text.size() && is_digit(text[j])) ++j;
      bool real = false;
      if (j + 1 < text.size() && text[j] == '.' && is_digit(text[j + 1])) {
        real = true;
        ++j;
        while (j < text.size() && is_digit(text[j])) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && is_digit(text[k])) {
          real = true;
          j = k;
          while (j < text.size() && is_digit(text[j])) ++j;
        }
      }
      push(real ? Tok::kReal : Tok::kInt, j - i, std::string(text.substr(i, j - i)));
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"' && text[j] != '\n') {
        if (text[j] == '\\') ++j;
        ++j;
      }
      if (j >= text.size() || text[j] != '"') {
        throw ParseError("unterminated string literal", line, column);
      }
      std::string raw(text.substr(i, j + 1 - i));
      std::string decoded;
      try {
        decoded = nlohmann::json::parse(raw).get<std::string>();
      } catch (const nlohmann::json::exception&) {
        throw ParseError("invalid string literal", line, column);
      }
      push(Tok::kString, j + 1 - i, std::move(decoded));
      continue;
    }
    auto two = text.substr(i, 2);
    if (two == "|>") { push(Tok::kPipe, 2, "|>"); continue; }
    if (two == "<-") { push(Tok::kArrow, 2, "<-"); continue; }
    if (two == "!=") { push(Tok::kNe, 2, "!="); continue; }
    if (two == "<=") { push(Tok::kLe, 2, "<="); continue; }
    if (two == ">=") { push(Tok::kGe, 2, ">="); continue; }
    switch (c) {
      case '(': push(Tok::kLParen, 1, "("); continue;
      case ')': push(Tok::kRParen, 1, ")"); continue;
      case '[': push(Tok::kLBracket, 1, "["); continue;
      case ']': push(Tok::kRBracket, 1, "]"); continue;
      case '{': push(Tok::kLBrace, 1, "{"); continue;
      case '}': push(Tok::kRBrace, 1, "}"); continue;
      case ',': push(Tok::kComma, 1, ","); continue;
      case '.': push(Tok::kDot, 1, "."); continue;
      case '=': push(Tok::kEq, 1, "="); continue;
      case '<': push(Tok::kLt, 1, "<"); continue;
      case '>': push(Tok::kGt, 1, ">"); continue;
      case '+': push(Tok::kPlus, 1, "+"); continue;
      case '-': push(Tok::kMinus, 1, "-"); continue;
      case '*': push(Tok::kStar, 1, "*"); continue;
      default: break;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, column);
  }
  out.push_back(Token{Tok::kEnd, "", line, column});
  return out;
}

const Token& TokenStream::peek(std::size_t ahead) const {
  std::size_t k = pos_ + ahead;
  return k < tokens_.size() ? tokens_[k] : tokens_.back();
}

bool TokenStream::at_ident(std::string_view word, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == Tok::kIdent && t.text == word;
}

const Token& TokenStream::next() {
  const Token& t = peek();
  if (pos_ < tokens_.size() - 1) ++pos_;
  return t;
}

bool TokenStream::accept(Tok kind) {
  if (!at(kind)) return false;
  next();
  return true;
}

bool TokenStream::accept_ident(std::string_view word) {
  if (!at_ident(word)) return false;
  next();
  return true;
}

const Token& TokenStream::expect(Tok kind) {
  if (!at(kind)) {
    fail("unexpected " + (at(Tok::kEnd) ? std::string("end of input")
                                        : "'" + peek().text + "'"),
         {describe(kind)});
  }
  return next();
}

void TokenStream::expect_ident(std::string_view word) {
  if (!at_ident(word)) {
    fail("unexpected " + (at(Tok::kEnd) ? std::string("end of input")
                                        : "'" + peek().text + "'"),
         {"'" + std::string(word) + "'"});
  }
  next();
}

std::string TokenStream::expect_identifier() { return expect(Tok::kIdent).text; }

void TokenStream::fail(const std::string& message, std::vector<std::string> expected) const {
  const Token& t = peek();
  throw ParseError(message, t.line, t.column, std::move(expected));
}

Value number_token(const Token& t, bool negative) {
  std::string spelling = (negative ? "-" : "") + t.text;
  const char* first = spelling.data();
  const char* last = spelling.data() + spelling.size();
  if (t.kind == Tok::kInt) {
    std::int64_t v = 0;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
      throw ParseError("integer literal out of range", t.line, t.column);
    }
    return Value::integer(v);
  }
  double v = 0;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || std::isinf(v)) {
    throw ParseError("real literal out of range", t.line, t.column);
  }
  return Value::real(v);
}

Value parse_value(TokenStream& ts) {
  const Token& t = ts.peek();
  switch (t.kind) {
    case Tok::kInt:
    case Tok::kReal: return number_token(ts.next(), false);
    case Tok::kMinus: {
      ts.next();
      if (ts.at(Tok::kInt) || ts.at(Tok::kReal)) return number_token(ts.next(), true);
      if (ts.accept_ident("inf")) return Value::real(-std::numeric_limits<double>::infinity());
      ts.fail("expected a number after '-'", {"number"});
    }
    case Tok::kString: return Value::str(ts.next().text);
    case Tok::kLParen: {
      ts.next();
      std::vector<Value> items;
      bool trailing_comma = false;
      while (!ts.at(Tok::kRParen)) {
        items.push_back(parse_value(ts));
        trailing_comma = false;
        if (!ts.accept(Tok::kComma)) break;
        trailing_comma = true;
      }
      ts.expect(Tok::kRParen);
      if (items.size() == 1 && !trailing_comma) return items.front();
      return Value::tuple(std::move(items));
    }
    case Tok::kIdent: {
      // Any identifier followed by '(' is a tag, even a keyword.
      if (ts.at(Tok::kLParen, 1)) {
        std::string tag = ts.next().text;
        ts.next();
        std::vector<Value> items;
        while (!ts.at(Tok::kRParen)) {
          items.push_back(parse_value(ts));
          if (!ts.accept(Tok::kComma)) break;
        }
        ts.expect(Tok::kRParen);
        return Value::tagged(std::move(tag), items.size() == 1
                                                 ? std::move(items.front())
                                                 : Value::tuple(std::move(items)));
      }
      if (ts.accept_ident("true")) return Value::boolean(true);
      if (ts.accept_ident("false")) return Value::boolean(false);
      if (ts.accept_ident("unit") || ts.accept_ident("null")) return Value::unit();
      if (ts.accept_ident("inf")) return Value::real(std::numeric_limits<double>::infinity());
      if (ts.at_ident("bag") && ts.at(Tok::kLBrace, 1)) {
        ts.next();
        ts.next();
        std::vector<Value> items;
        while (!ts.at(Tok::kRBrace)) {
          items.push_back(parse_value(ts));
          if (!ts.accept(Tok::kComma)) break;
        }
        ts.expect(Tok::kRBrace);
        return Value::bag(Bag::from_values(std::move(items)));
      }
      ts.fail("unexpected '" + t.text + "'", {"value"});
    }
    default:
      ts.fail(t.kind == Tok::kEnd ? "unexpected end of input"
                                  : "unexpected '" + t.text + "'",
              {"value"});
  }
}

}  // namespace pbdb::internal
