#include "pbdb/dsl.h"

#include <algorithm>
#include <optional>

#include "lexer.h"
#include "pbdb/errors.h"

namespace pbdb {

using internal::Tok;
using internal::Token;
using internal::TokenStream;

namespace {

// Column names of the current row; nullopt when the arity is not known
// statically.  Unnamed positions hold "".
using Scope = std::optional<std::vector<std::string>>;

const char* const kKeywords[] = {"true", "false", "unit", "null", "row",  "and",
                                 "or",   "not",   "inf",  "const", "bag"};

bool is_keyword(const std::string& s) {
  return std::find(std::begin(kKeywords), std::end(kKeywords), s) != std::end(kKeywords);
}

const char* agg_name(AggKind kind) {
  switch (kind) {
    case AggKind::kSize: return "size";
    case AggKind::kThe: return "the";
    case AggKind::kSum: return "sum";
  }
  return "?";
}

std::optional<AggKind> agg_from_name(const std::string& s) {
  if (s == "size") return AggKind::kSize;
  if (s == "the") return AggKind::kThe;
  if (s == "sum") return AggKind::kSum;
  return std::nullopt;
}

class QueryParser {
 public:
  explicit QueryParser(std::string_view text) : ts_(internal::tokenize(text)) {}

  QueryPtr parse_all() {
    Scope scope;
    QueryPtr q = parse_query(scope);
    if (!ts_.at(Tok::kEnd)) ts_.fail("unexpected '" + ts_.peek().text + "'", {"'|>'"});
    return q;
  }

 private:
  QueryPtr parse_query(Scope& scope) {
    QueryPtr q = parse_source(scope);
    while (ts_.accept(Tok::kPipe)) q = parse_stage(std::move(q), scope);
    return q;
  }

  QueryPtr parse_source(Scope& scope) {
    scope.reset();
    if (ts_.accept_ident("table")) return qb::table(ts_.expect_identifier());
    if (ts_.accept_ident("empty")) return qb::lit(Bag());
    if (ts_.at_ident("bag")) {
      Value v = internal::parse_value(ts_);
      return qb::lit(v.as_bag());
    }
    ts_.fail(ts_.at(Tok::kEnd) ? "unexpected end of input"
                               : "unexpected '" + ts_.peek().text + "'",
             {"'table'", "'bag'", "'empty'"});
  }

  QueryPtr parse_subquery() {
    ts_.expect(Tok::kLParen);
    Scope inner;
    QueryPtr q = parse_query(inner);
    ts_.expect(Tok::kRParen);
    last_subquery_scope_ = inner;
    return q;
  }

  QueryPtr parse_stage(QueryPtr in, Scope& scope) {
    const Token& t = ts_.peek();
    if (t.kind != Tok::kIdent) ts_.fail("expected a query stage", {"stage name"});
    std::string op = ts_.next().text;
    if (op == "map") {
      if (!ts_.at(Tok::kLParen)) ts_.fail("map needs a parenthesized expression", {"'('"});
      ExprPtr f = parse_primary(scope);
      scope.reset();
      return qb::map(std::move(f), std::move(in));
    }
    if (op == "select") {
      ts_.expect(Tok::kLParen);
      ExprPtr pred = parse_expr(scope);
      ts_.expect(Tok::kRParen);
      return qb::select(std::move(pred), std::move(in));
    }
    if (op == "project") {
      std::vector<int> indices = parse_index_list(scope);
      bool in_scope = scope && std::all_of(indices.begin(), indices.end(), [&](int i) {
        return static_cast<std::size_t>(i) <= scope->size();
      });
      if (in_scope) {
        std::vector<std::string> names;
        for (int i : indices) names.push_back((*scope)[static_cast<std::size_t>(i - 1)]);
        scope = names;
      } else {
        scope = std::vector<std::string>(indices.size());
      }
      return qb::project(std::move(indices), std::move(in));
    }
    if (op == "product") {
      QueryPtr right = parse_subquery();
      if (scope && last_subquery_scope_) {
        scope->insert(scope->end(), last_subquery_scope_->begin(), last_subquery_scope_->end());
      } else {
        scope.reset();
      }
      return qb::binary(QueryOp::kProduct, std::move(in), std::move(right));
    }
    static const std::pair<const char*, QueryOp> kBinary[] = {
        {"dunion", QueryOp::kDUnion},
        {"difference", QueryOp::kDifference},
        {"union", QueryOp::kUnion},
        {"intersect", QueryOp::kIntersect},
    };
    for (const auto& [name, qop] : kBinary) {
      if (op == name) return qb::binary(qop, std::move(in), parse_subquery());
    }
    if (op == "dedup") return qb::unary(QueryOp::kDedup, std::move(in));
    static const std::pair<const char*, QueryOp> kUnary[] = {
        {"powerbag", QueryOp::kPowerBag},
        {"powerset", QueryOp::kPowerSet},
        {"flatten", QueryOp::kFlatten},
        {"singleton", QueryOp::kSingleton},
    };
    for (const auto& [name, qop] : kUnary) {
      if (op == name) {
        scope.reset();
        return qb::unary(qop, std::move(in));
      }
    }
    if (op == "group") {
      if (!ts_.at(Tok::kLBracket)) {
        scope.reset();
        return qb::unary(QueryOp::kGroupPrime, std::move(in));
      }
      std::vector<int> keys = parse_index_list(scope);
      std::vector<int> values = parse_index_list(scope);
      scope.reset();
      return qb::group(std::move(keys), std::move(values), std::move(in));
    }
    if (op == "agg") {
      const Token& k = ts_.peek();
      auto kind = k.kind == Tok::kIdent ? agg_from_name(k.text) : std::nullopt;
      if (!kind) ts_.fail("unknown aggregate", {"'size'", "'the'", "'sum'"});
      ts_.next();
      scope.reset();
      return qb::agg(*kind, std::move(in));
    }
    if (op == "match") {
      std::string tag = ts_.expect_identifier();
      std::vector<std::string> names = parse_binders();
      scope = names;
      return match_tag(tag, std::move(in));
    }
    if (op == "joinmatch") {
      const Token& at = t;
      std::string table = ts_.expect_identifier();
      std::string tag = ts_.expect_identifier();
      std::vector<std::string> names = parse_binders();
      if (!scope) {
        throw ParseError("joinmatch needs a row of known arity on its left (use match first)",
                         at.line, at.column);
      }
      scope->insert(scope->end(), names.begin(), names.end());
      ts_.expect_ident("on");
      ts_.expect(Tok::kLParen);
      ExprPtr pred = parse_expr(scope);
      ts_.expect(Tok::kRParen);
      QueryPtr right = match_tag(tag, qb::table(table));
      return qb::select(std::move(pred),
                        qb::binary(QueryOp::kProduct, std::move(in), std::move(right)));
    }
    throw ParseError("unknown stage '" + op + "'", t.line, t.column);
  }

  static QueryPtr match_tag(const std::string& tag, QueryPtr in) {
    return qb::map(ex::untag(tag), qb::select(ex::is_tag(tag), std::move(in)));
  }

  std::vector<std::string> parse_binders() {
    ts_.expect_ident("as");
    ts_.expect(Tok::kLParen);
    std::vector<std::string> names;
    do {
      const Token& t = ts_.peek();
      std::string name = ts_.expect_identifier();
      if (is_keyword(name)) throw ParseError("'" + name + "' is reserved", t.line, t.column);
      names.push_back(std::move(name));
    } while (ts_.accept(Tok::kComma));
    ts_.expect(Tok::kRParen);
    return names;
  }

  std::vector<int> parse_index_list(const Scope& scope) {
    ts_.expect(Tok::kLBracket);
    std::vector<int> out;
    while (!ts_.at(Tok::kRBracket)) {
      const Token& t = ts_.peek();
      if (t.kind == Tok::kInt) {
        Value v = internal::number_token(ts_.next(), false);
        if (v.as_int() < 1 || v.as_int() > 1 << 20) {
          throw ParseError("index must be positive", t.line, t.column);
        }
        out.push_back(static_cast<int>(v.as_int()));
      } else if (t.kind == Tok::kIdent) {
        out.push_back(resolve(scope, ts_.next()));
      } else {
        ts_.fail("expected a column", {"integer", "name"});
      }
      if (!ts_.accept(Tok::kComma)) break;
    }
    ts_.expect(Tok::kRBracket);
    return out;
  }

  static int resolve(const Scope& scope, const Token& name) {
    if (scope) {
      for (std::size_t i = 0; i < scope->size(); ++i) {
        if ((*scope)[i] == name.text) return static_cast<int>(i + 1);
      }
    }
    throw ParseError("unknown column name '" + name.text + "'", name.line, name.column);
  }

  // -- expressions ----------------------------------------------------------

  ExprPtr parse_expr(const Scope& scope) { return parse_or(scope); }

  ExprPtr parse_or(const Scope& scope) {
    ExprPtr e = parse_and(scope);
    while (ts_.accept_ident("or")) e = ex::binary(ExprOp::kOr, e, parse_and(scope));
    return e;
  }

  ExprPtr parse_and(const Scope& scope) {
    ExprPtr e = parse_not(scope);
    while (ts_.accept_ident("and")) e = ex::binary(ExprOp::kAnd, e, parse_not(scope));
    return e;
  }

  ExprPtr parse_not(const Scope& scope) {
    if (ts_.accept_ident("not")) return ex::unary(ExprOp::kNot, parse_not(scope));
    return parse_cmp(scope);
  }

  ExprPtr parse_cmp(const Scope& scope) {
    ExprPtr e = parse_add(scope);
    static const std::pair<Tok, ExprOp> kOps[] = {
        {Tok::kEq, ExprOp::kEq}, {Tok::kNe, ExprOp::kNe}, {Tok::kLt, ExprOp::kLt},
        {Tok::kLe, ExprOp::kLe}, {Tok::kGt, ExprOp::kGt}, {Tok::kGe, ExprOp::kGe},
    };
    for (const auto& [tok, op] : kOps) {
      if (ts_.accept(tok)) return ex::binary(op, e, parse_add(scope));
    }
    return e;
  }

  ExprPtr parse_add(const Scope& scope) {
    ExprPtr e = parse_mul(scope);
    while (true) {
      if (ts_.accept(Tok::kPlus)) {
        e = ex::binary(ExprOp::kAdd, e, parse_mul(scope));
      } else if (ts_.accept(Tok::kMinus)) {
        e = ex::binary(ExprOp::kSub, e, parse_mul(scope));
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_mul(const Scope& scope) {
    ExprPtr e = parse_unary(scope);
    while (ts_.accept(Tok::kStar)) e = ex::binary(ExprOp::kMul, e, parse_unary(scope));
    return e;
  }

  ExprPtr parse_unary(const Scope& scope) {
    if (ts_.at(Tok::kMinus)) {
      if (ts_.at(Tok::kInt, 1) || ts_.at(Tok::kReal, 1) || ts_.at_ident("inf", 1)) {
        return parse_postfix(ex::lit(internal::parse_value(ts_)));
      }
      ts_.next();
      return ex::unary(ExprOp::kNeg, parse_unary(scope));
    }
    return parse_postfix(parse_primary(scope));
  }

  ExprPtr parse_postfix(ExprPtr e) {
    while (ts_.at(Tok::kDot) && ts_.at(Tok::kInt, 1)) {
      ts_.next();
      e = ex::field(field_index(ts_.next()), e);
    }
    return e;
  }

  static int field_index(const Token& t) {
    Value v = internal::number_token(t, false);
    if (v.as_int() < 1 || v.as_int() > 1 << 20) {
      throw ParseError("field index must be positive", t.line, t.column);
    }
    return static_cast<int>(v.as_int());
  }

  ExprPtr parse_primary(const Scope& scope) {
    const Token& t = ts_.peek();
    switch (t.kind) {
      case Tok::kInt:
      case Tok::kReal:
      case Tok::kString: return ex::lit(internal::parse_value(ts_));
      case Tok::kDot: {
        ts_.next();
        const Token& f = ts_.peek();
        if (f.kind == Tok::kInt) return ex::field(field_index(ts_.next()));
        if (f.kind == Tok::kIdent) return ex::field(resolve(scope, ts_.next()));
        ts_.fail("expected a field after '.'", {"integer", "name"});
      }
      case Tok::kLParen: {
        ts_.next();
        std::vector<ExprPtr> items;
        bool trailing_comma = false;
        while (!ts_.at(Tok::kRParen)) {
          items.push_back(parse_expr(scope));
          trailing_comma = false;
          if (!ts_.accept(Tok::kComma)) break;
          trailing_comma = true;
        }
        ts_.expect(Tok::kRParen);
        if (items.size() == 1 && !trailing_comma) return items.front();
        return ex::tuple(std::move(items));
      }
      case Tok::kIdent: return parse_word(scope);
      default:
        ts_.fail(t.kind == Tok::kEnd ? "unexpected end of input"
                                     : "unexpected '" + t.text + "'",
                 {"expression"});
    }
  }

  ExprPtr parse_word(const Scope& scope) {
    const Token& t = ts_.peek();
    const std::string& w = t.text;
    if (w == "true" || w == "false" || w == "unit" || w == "null" || w == "inf") {
      return ex::lit(internal::parse_value(ts_));
    }
    if (w == "bag" && ts_.at(Tok::kLBrace, 1)) return ex::lit(internal::parse_value(ts_));
    if (w == "const") {
      ts_.next();
      return ex::lit(internal::parse_value(ts_));
    }
    if (w == "row") {
      ts_.next();
      return ex::row();
    }
    if (ts_.at(Tok::kLParen, 1)) {
      if (auto kind = agg_from_name(w)) {
        ts_.next();
        ts_.next();
        ExprPtr of = parse_expr(scope);
        ts_.expect(Tok::kRParen);
        return ex::agg(*kind, std::move(of));
      }
      if (w == "istag" || w == "untag" || w == "tag") {
        ts_.next();
        ts_.next();
        std::string tag = ts_.expect_identifier();
        ts_.expect(Tok::kComma);
        ExprPtr of = parse_expr(scope);
        ts_.expect(Tok::kRParen);
        if (w == "istag") return ex::is_tag(std::move(tag), std::move(of));
        if (w == "untag") return ex::untag(std::move(tag), std::move(of));
        return ex::make_tag(std::move(tag), std::move(of));
      }
      throw ParseError("unknown function '" + w + "'", t.line, t.column);
    }
    if (is_keyword(w)) ts_.fail("unexpected '" + w + "'", {"expression"});
    return ex::field(resolve(scope, ts_.next()));
  }

  TokenStream ts_;
  Scope last_subquery_scope_;
};

// -- pretty printing ---------------------------------------------------------

void write_expr(std::string& out, const Expr& e);

void write_index_list(std::string& out, const std::vector<int>& indices) {
  out += '[';
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(indices[i]);
  }
  out += ']';
}

const char* binary_symbol(ExprOp op) {
  switch (op) {
    case ExprOp::kAdd: return "+";
    case ExprOp::kSub: return "-";
    case ExprOp::kMul: return "*";
    case ExprOp::kEq: return "=";
    case ExprOp::kNe: return "!=";
    case ExprOp::kLt: return "<";
    case ExprOp::kLe: return "<=";
    case ExprOp::kGt: return ">";
    case ExprOp::kGe: return ">=";
    case ExprOp::kAnd: return "and";
    case ExprOp::kOr: return "or";
    default: return "?";
  }
}

void write_literal_expr(std::string& out, const Value& v) {
  switch (v.kind()) {
    case ValueKind::kTuple:
    case ValueKind::kTagged:
      out += "const ";
      break;
    default:
      break;
  }
  out += to_literal(v);
}

void write_expr(std::string& out, const Expr& e) {
  switch (e.op) {
    case ExprOp::kRow: out += "row"; return;
    case ExprOp::kField:
      if (e.args[0]->op == ExprOp::kRow) {
        out += '.';
      } else {
        out += '(';
        write_expr(out, *e.args[0]);
        out += ").";
      }
      out += std::to_string(e.index);
      return;
    case ExprOp::kLit: write_literal_expr(out, e.literal); return;
    case ExprOp::kTuple:
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        write_expr(out, *e.args[i]);
      }
      if (e.args.size() == 1) out += ',';
      out += ')';
      return;
    case ExprOp::kTag:
    case ExprOp::kIsTag:
    case ExprOp::kUntag:
      out += e.op == ExprOp::kTag ? "tag(" : e.op == ExprOp::kIsTag ? "istag(" : "untag(";
      out += e.tag;
      out += ", ";
      write_expr(out, *e.args[0]);
      out += ')';
      return;
    case ExprOp::kNeg:
      out += "-(";
      write_expr(out, *e.args[0]);
      out += ')';
      return;
    case ExprOp::kNot:
      out += "(not ";
      write_expr(out, *e.args[0]);
      out += ')';
      return;
    case ExprOp::kAgg:
      out += agg_name(e.agg);
      out += '(';
      write_expr(out, *e.args[0]);
      out += ')';
      return;
    default:
      out += '(';
      write_expr(out, *e.args[0]);
      out += ' ';
      out += binary_symbol(e.op);
      out += ' ';
      write_expr(out, *e.args[1]);
      out += ')';
      return;
  }
}

void write_query(std::string& out, const Query& q) {
  switch (q.op) {
    case QueryOp::kTable: out += "table " + q.table; return;
    case QueryOp::kLit:
      out += q.literal.is_empty() ? "empty" : to_literal(Value::bag(q.literal));
      return;
    default: break;
  }
  write_query(out, *q.inputs[0]);
  out += " |> ";
  auto sub = [&](const char* name) {
    out += name;
    out += " (";
    write_query(out, *q.inputs[1]);
    out += ')';
  };
  switch (q.op) {
    case QueryOp::kSingleton: out += "singleton"; break;
    case QueryOp::kFlatten: out += "flatten"; break;
    case QueryOp::kMap: {
      out += "map ";
      const Expr& f = *q.expr;
      bool self_parenthesized = f.op == ExprOp::kTuple;
      if (!self_parenthesized) out += '(';
      write_expr(out, f);
      if (!self_parenthesized) out += ')';
      break;
    }
    case QueryOp::kProduct: sub("product"); break;
    case QueryOp::kProject:
      out += "project ";
      write_index_list(out, q.keys);
      break;
    case QueryOp::kSelect:
      out += "select (";
      write_expr(out, *q.expr);
      out += ')';
      break;
    case QueryOp::kDUnion: sub("dunion"); break;
    case QueryOp::kDifference: sub("difference"); break;
    case QueryOp::kPowerBag: out += "powerbag"; break;
    case QueryOp::kDedup: out += "dedup"; break;
    case QueryOp::kUnion: sub("union"); break;
    case QueryOp::kIntersect: sub("intersect"); break;
    case QueryOp::kPowerSet: out += "powerset"; break;
    case QueryOp::kGroup:
      out += "group ";
      write_index_list(out, q.keys);
      out += ' ';
      write_index_list(out, q.values);
      break;
    case QueryOp::kGroupPrime: out += "group"; break;
    case QueryOp::kAgg:
      out += "agg ";
      out += agg_name(q.agg);
      break;
    default: break;
  }
}

// -- checking ----------------------------------------------------------------

Schema bag_element(const Schema& s, const char* op) {
  if (s.kind() != Schema::Kind::kBag) {
    throw TypeError(std::string(op) + ": input is not a bag but " + to_string(s));
  }
  return s.element();
}

// Collects tags tested on the whole row by top-level conjuncts.
void row_tag_tests(const Expr& e, std::vector<std::string>& tags) {
  if (e.op == ExprOp::kAnd) {
    row_tag_tests(*e.args[0], tags);
    row_tag_tests(*e.args[1], tags);
  } else if (e.op == ExprOp::kIsTag && e.args[0]->op == ExprOp::kRow) {
    tags.push_back(e.tag);
  }
}

Schema project_schema(const std::vector<int>& indices, const Schema& row, const char* op) {
  if (row.is_any()) return Schema::any();
  std::vector<Schema> fields = row.row_fields();
  std::vector<Schema> out;
  for (int i : indices) {
    if (i < 1 || static_cast<std::size_t>(i) > fields.size()) {
      throw TypeError(std::string(op) + ": index " + std::to_string(i) +
                      " exceeds row arity " + std::to_string(fields.size()) + " of " +
                      to_string(row));
    }
    out.push_back(fields[static_cast<std::size_t>(i - 1)]);
  }
  return make_row_schema(std::move(out));
}

void require_bool(const Schema& s, const char* what) {
  if (!s.is_any() && s.kind() != Schema::Kind::kBool) {
    throw TypeError(std::string(what) + " must be boolean, got " + to_string(s));
  }
}

Schema aggregate_schema(AggKind kind, const Schema& element) {
  switch (kind) {
    case AggKind::kSize: return Schema::int_t();
    case AggKind::kThe: return element;
    case AggKind::kSum:
      if (element.is_any()) return Schema::int_t();
      if (!element.is_numeric()) {
        throw TypeError("sum over non-numeric elements " + to_string(element));
      }
      return element;
  }
  return Schema::any();
}

}  // namespace

QueryPtr parse_query(std::string_view text) { return QueryParser(text).parse_all(); }

Value parse_value_literal(std::string_view text) {
  TokenStream ts(internal::tokenize(text));
  Value v = internal::parse_value(ts);
  if (!ts.at(Tok::kEnd)) ts.fail("trailing input after value");
  return v;
}

std::string pretty(const Query& q) {
  std::string out;
  write_query(out, q);
  return out;
}

std::string pretty(const Expr& e) {
  std::string out;
  write_expr(out, e);
  return out;
}

Schema check_expr(const Expr& e, const Schema& row) {
  using Kind = Schema::Kind;
  auto arg = [&](std::size_t i) { return check_expr(*e.args[i], row); };
  switch (e.op) {
    case ExprOp::kRow: return row;
    case ExprOp::kField: {
      Schema of = arg(0);
      return project_schema({e.index}, of, "field");
    }
    case ExprOp::kLit: return infer_schema(e.literal);
    case ExprOp::kTuple: {
      std::vector<Schema> fields;
      for (std::size_t i = 0; i < e.args.size(); ++i) fields.push_back(arg(i));
      return Schema::tuple_t(std::move(fields));
    }
    case ExprOp::kTag: return Schema::tagged_t({{e.tag, arg(0)}});
    case ExprOp::kIsTag: {
      Schema of = arg(0);
      if (!of.is_any() && of.kind() != Kind::kTagged) {
        throw TypeError("istag " + e.tag + " on untagged " + to_string(of));
      }
      return Schema::bool_t();
    }
    case ExprOp::kUntag: {
      Schema of = arg(0);
      if (of.is_any()) return Schema::any();
      if (of.kind() != Kind::kTagged || of.variant(e.tag) == nullptr) {
        throw TypeError("untag " + e.tag + " on " + to_string(of));
      }
      if (of.variants().size() != 1) {
        throw TypeError("untag " + e.tag + " on " + to_string(of) +
                        ", which may carry other tags; select istag(" + e.tag +
                        ", row) first");
      }
      return *of.variant(e.tag);
    }
    case ExprOp::kNeg: {
      Schema a = arg(0);
      if (!a.is_any() && !a.is_numeric()) throw TypeError("negation of " + to_string(a));
      return a;
    }
    case ExprOp::kAdd:
    case ExprOp::kSub:
    case ExprOp::kMul: {
      Schema a = arg(0);
      Schema b = arg(1);
      for (const Schema* s : {&a, &b}) {
        if (!s->is_any() && !s->is_numeric()) {
          throw TypeError(std::string("arithmetic on ") + to_string(*s));
        }
      }
      if (a.is_any() || b.is_any()) return Schema::any();
      if (a.kind() == Kind::kInt && b.kind() == Kind::kInt) return Schema::int_t();
      return Schema::real_t();
    }
    case ExprOp::kEq:
    case ExprOp::kNe:
    case ExprOp::kLt:
    case ExprOp::kLe:
    case ExprOp::kGt:
    case ExprOp::kGe:
      arg(0);
      arg(1);
      return Schema::bool_t();
    case ExprOp::kAnd:
    case ExprOp::kOr:
      require_bool(arg(0), "operand");
      require_bool(arg(1), "operand");
      return Schema::bool_t();
    case ExprOp::kNot:
      require_bool(arg(0), "operand");
      return Schema::bool_t();
    case ExprOp::kAgg: {
      Schema of = arg(0);
      if (of.is_any()) return aggregate_schema(e.agg, Schema::any());
      return aggregate_schema(e.agg, bag_element(of, agg_name(e.agg)));
    }
  }
  throw TypeError("unknown expression");
}

Schema check(const Query& q, const Catalog& catalog) {
  auto input = [&](std::size_t i) { return check(*q.inputs[i], catalog); };
  using Kind = Schema::Kind;
  switch (q.op) {
    case QueryOp::kTable: {
      auto it = catalog.find(q.table);
      if (it == catalog.end()) throw UnknownTableError(q.table);
      return Schema::bag_t(it->second);
    }
    case QueryOp::kLit: return infer_schema(Value::bag(q.literal));
    case QueryOp::kSingleton: return Schema::bag_t(input(0));
    case QueryOp::kFlatten: {
      Schema element = bag_element(input(0), "flatten");
      if (element.is_any()) return Schema::bag_t(Schema::any());
      if (element.kind() != Kind::kBag) {
        throw TypeError("flatten: elements are " + to_string(element) + ", not bags");
      }
      return element;
    }
    case QueryOp::kMap:
      return Schema::bag_t(check_expr(*q.expr, bag_element(input(0), "map")));
    case QueryOp::kProduct: {
      Schema left = bag_element(input(0), "product");
      Schema right = bag_element(input(1), "product");
      if (left.is_any() || right.is_any()) return Schema::bag_t(Schema::any());
      std::vector<Schema> fields = left.row_fields();
      std::vector<Schema> rest = right.row_fields();
      fields.insert(fields.end(), rest.begin(), rest.end());
      return Schema::bag_t(Schema::tuple_t(std::move(fields)));
    }
    case QueryOp::kProject:
      return Schema::bag_t(project_schema(q.keys, bag_element(input(0), "project"), "project"));
    case QueryOp::kSelect: {
      Schema row = bag_element(input(0), "select");
      require_bool(check_expr(*q.expr, row), "select predicate");
      std::vector<std::string> tags;
      row_tag_tests(*q.expr, tags);
      if (!tags.empty() && row.kind() == Kind::kTagged) {
        std::sort(tags.begin(), tags.end());
        tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
        const Schema* payload = tags.size() == 1 ? row.variant(tags.front()) : nullptr;
        if (payload == nullptr) return Schema::bag_t(Schema::any());
        return Schema::bag_t(Schema::tagged_t({{tags.front(), *payload}}));
      }
      return Schema::bag_t(row);
    }
    case QueryOp::kDUnion:
    case QueryOp::kDifference:
    case QueryOp::kUnion:
    case QueryOp::kIntersect: {
      Schema left = bag_element(input(0), "bag operator");
      Schema right = bag_element(input(1), "bag operator");
      return Schema::bag_t(unify(left, right));
    }
    case QueryOp::kPowerBag:
    case QueryOp::kPowerSet:
    case QueryOp::kGroupPrime:
      return Schema::bag_t(Schema::bag_t(bag_element(input(0), "powerbag")));
    case QueryOp::kDedup: return Schema::bag_t(bag_element(input(0), "dedup"));
    case QueryOp::kGroup: {
      Schema row = bag_element(input(0), "group");
      Schema key = project_schema(q.keys, row, "group");
      Schema value = project_schema(q.values, row, "group");
      if (row.is_any()) return Schema::bag_t(Schema::any());
      return Schema::bag_t(Schema::tuple_t({key, Schema::bag_t(value)}));
    }
    case QueryOp::kAgg:
      return aggregate_schema(q.agg, bag_element(input(0), "agg"));
  }
  throw TypeError("unknown query operator");
}

}  // namespace pbdb
