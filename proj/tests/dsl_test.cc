#include <doctest.h>

#include <string>
#include <vector>

#include "pbdb/balg.h"
#include "pbdb/dsl.h"
#include "pbdb/errors.h"
#include "test_support.h"

using namespace pbdb;
using pbdb::testing::Rng;
using pbdb::testing::pick;

namespace {

Value i(std::int64_t x) { return Value::integer(x); }
Value s(std::string x) { return Value::str(std::move(x)); }
Value tup(std::vector<Value> v) { return Value::tuple(std::move(v)); }

const char* const kTables[] = {"t", "u", "db"};
const char* const kTags[] = {"cast", "gross", "alarm"};

ExprPtr random_expr(Rng& rng, int depth) {
  if (depth <= 0 || pick(rng, 4) == 0) {
    switch (pick(rng, 4)) {
      case 0: return ex::row();
      case 1: return ex::field(static_cast<int>(1 + pick(rng, 3)));
      default: return ex::lit(testing::random_value(rng, 2));
    }
  }
  static const ExprOp kBinary[] = {ExprOp::kAdd, ExprOp::kSub, ExprOp::kMul, ExprOp::kEq,
                                   ExprOp::kNe,  ExprOp::kLt,  ExprOp::kLe,  ExprOp::kGt,
                                   ExprOp::kGe,  ExprOp::kAnd, ExprOp::kOr};
  switch (pick(rng, 9)) {
    case 0: return ex::field(static_cast<int>(1 + pick(rng, 3)), random_expr(rng, depth - 1));
    case 1: {
      std::vector<ExprPtr> items(pick(rng, 4));
      for (auto& e : items) e = random_expr(rng, depth - 1);
      return ex::tuple(std::move(items));
    }
    case 2: return ex::make_tag(kTags[pick(rng, 3)], random_expr(rng, depth - 1));
    case 3: return ex::is_tag(kTags[pick(rng, 3)], random_expr(rng, depth - 1));
    case 4: return ex::untag(kTags[pick(rng, 3)], random_expr(rng, depth - 1));
    case 5: return ex::unary(pick(rng, 2) ? ExprOp::kNeg : ExprOp::kNot, random_expr(rng, depth - 1));
    case 6: {
      static const AggKind kAggs[] = {AggKind::kSize, AggKind::kThe, AggKind::kSum};
      return ex::agg(kAggs[pick(rng, 3)], random_expr(rng, depth - 1));
    }
    default:
      return ex::binary(kBinary[pick(rng, 11)], random_expr(rng, depth - 1),
                        random_expr(rng, depth - 1));
  }
}

std::vector<int> random_indices(Rng& rng) {
  std::vector<int> out(1 + pick(rng, 3));
  for (int& k : out) k = static_cast<int>(1 + pick(rng, 3));
  return out;
}

QueryPtr random_query(Rng& rng, int depth) {
  if (depth <= 0 || pick(rng, 5) == 0) {
    if (pick(rng, 4) == 0) {
      std::vector<Value> items(pick(rng, 3));
      for (auto& v : items) v = testing::random_value(rng, 2);
      return qb::lit(Bag::from_values(std::move(items)));
    }
    return qb::table(kTables[pick(rng, 3)]);
  }
  QueryPtr in = random_query(rng, depth - 1);
  switch (pick(rng, 17)) {
    case 0: return qb::unary(QueryOp::kSingleton, in);
    case 1: return qb::unary(QueryOp::kFlatten, in);
    case 2: return qb::map(random_expr(rng, 2), in);
    case 3: return qb::binary(QueryOp::kProduct, in, random_query(rng, depth - 1));
    case 4: return qb::project(random_indices(rng), in);
    case 5: return qb::select(random_expr(rng, 2), in);
    case 6: return qb::binary(QueryOp::kDUnion, in, random_query(rng, depth - 1));
    case 7: return qb::binary(QueryOp::kDifference, in, random_query(rng, depth - 1));
    case 8: return qb::unary(QueryOp::kPowerBag, in);
    case 9: return qb::unary(QueryOp::kDedup, in);
    case 10: return qb::binary(QueryOp::kUnion, in, random_query(rng, depth - 1));
    case 11: return qb::binary(QueryOp::kIntersect, in, random_query(rng, depth - 1));
    case 12: return qb::unary(QueryOp::kPowerSet, in);
    case 13: return qb::group(random_indices(rng), random_indices(rng), in);
    case 14: return qb::unary(QueryOp::kGroupPrime, in);
    case 15: {
      static const AggKind kAggs[] = {AggKind::kSize, AggKind::kThe, AggKind::kSum};
      return qb::agg(kAggs[pick(rng, 3)], in);
    }
    default: {
      // The desugared shape of `match`.
      std::string tag = kTags[pick(rng, 2)];
      return qb::map(ex::untag(tag), qb::select(ex::is_tag(tag), in));
    }
  }
}

// Typed generation for the soundness check: scalar-only rows so that most
// generated queries pass check().
ExprPtr typed_expr(Rng& rng, int depth) {
  if (depth <= 0 || pick(rng, 3) == 0) {
    switch (pick(rng, 5)) {
      case 0: return ex::row();
      case 1:
      case 2: return ex::field(static_cast<int>(1 + pick(rng, 2)));
      case 3: return ex::lit(i(static_cast<std::int64_t>(pick(rng, 5))));
      default: return ex::lit(s(pick(rng, 2) ? "a" : "M1"));
    }
  }
  static const ExprOp kOps[] = {ExprOp::kAdd, ExprOp::kMul, ExprOp::kEq, ExprOp::kLt,
                                ExprOp::kGe, ExprOp::kAnd, ExprOp::kOr, ExprOp::kSub};
  switch (pick(rng, 5)) {
    case 0: return ex::tuple({typed_expr(rng, depth - 1), typed_expr(rng, depth - 1)});
    case 1: return ex::unary(pick(rng, 2) ? ExprOp::kNot : ExprOp::kNeg, typed_expr(rng, depth - 1));
    default:
      return ex::binary(kOps[pick(rng, 8)], typed_expr(rng, depth - 1), typed_expr(rng, depth - 1));
  }
}

QueryPtr typed_query(Rng& rng, int depth) {
  if (depth <= 0 || pick(rng, 4) == 0) {
    switch (pick(rng, 4)) {
      case 0: return qb::table("t");
      case 1: return qb::table("u");
      case 2: return qb::lit(Bag());
      default: {
        std::string tag = kTags[pick(rng, 2)];
        return qb::map(ex::untag(tag), qb::select(ex::is_tag(tag), qb::table("db")));
      }
    }
  }
  QueryPtr in = typed_query(rng, depth - 1);
  switch (pick(rng, 14)) {
    case 0: return qb::map(typed_expr(rng, 2), in);
    case 1:
    case 2: return qb::select(typed_expr(rng, 2), in);
    case 3: return qb::project(random_indices(rng), in);
    case 4: return qb::binary(QueryOp::kProduct, in, typed_query(rng, depth - 1));
    case 5: return qb::binary(QueryOp::kDUnion, in, typed_query(rng, depth - 1));
    case 6: return qb::binary(QueryOp::kDifference, in, typed_query(rng, depth - 1));
    case 7: return qb::unary(QueryOp::kDedup, in);
    case 8: return qb::group({1}, {2}, in);
    case 9: return qb::unary(QueryOp::kFlatten, qb::unary(QueryOp::kGroupPrime, in));
    case 10: return qb::map(ex::agg(AggKind::kSize, ex::row()), qb::unary(QueryOp::kPowerSet, in));
    case 11: return qb::map(ex::agg(AggKind::kSum, ex::row()), qb::unary(QueryOp::kGroupPrime, in));
    case 12: return qb::binary(QueryOp::kIntersect, in, typed_query(rng, depth - 1));
    default: return qb::agg(AggKind::kSize, in);
  }
}

Catalog sample_catalog() {
  Schema tagged = Schema::tagged_t({
      {"cast", Schema::tuple_t({Schema::str_t(), Schema::str_t()})},
      {"gross", Schema::tuple_t({Schema::str_t(), Schema::int_t()})},
  });
  return Catalog{{"t", Schema::tuple_t({Schema::int_t(), Schema::str_t()})},
                 {"u", Schema::int_t()},
                 {"db", tagged}};
}

Env random_env(Rng& rng) {
  std::vector<Value> t, u, db;
  for (std::size_t k = pick(rng, 5); k > 0; --k) {
    t.push_back(tup({i(static_cast<std::int64_t>(pick(rng, 4))), s(pick(rng, 2) ? "a" : "M1")}));
  }
  for (std::size_t k = pick(rng, 5); k > 0; --k) u.push_back(i(static_cast<std::int64_t>(pick(rng, 4)) - 1));
  for (std::size_t k = pick(rng, 5); k > 0; --k) {
    if (pick(rng, 2)) {
      db.push_back(Value::tagged("cast", tup({s("A"), s(pick(rng, 2) ? "M1" : "M2")})));
    } else {
      db.push_back(Value::tagged("gross", tup({s("M1"), i(static_cast<std::int64_t>(pick(rng, 3)))})));
    }
  }
  return Env{{"t", Bag::from_values(t)}, {"u", Bag::from_values(u)}, {"db", Bag::from_values(db)}};
}

}  // namespace

TEST_CASE("parse: direct constructor mapping") {
  QueryPtr q = parse_query(R"(table cast |> select (.2 = "M1") |> project [1])");
  QueryPtr want = qb::project(
      {1}, qb::select(ex::binary(ExprOp::kEq, ex::field(2), ex::lit(s("M1"))), qb::table("cast")));
  CHECK(*q == *want);
}

TEST_CASE("parse: the actors query desugars to match, product and select") {
  QueryPtr q = parse_query(
      "table db |> match cast as (a,m) |> joinmatch db gross as (m2,r) on (.m = .m2) "
      "|> select (.r > 200000000) |> project [a]");
  auto match = [](const char* tag, QueryPtr in) {
    return qb::map(ex::untag(tag), qb::select(ex::is_tag(tag), std::move(in)));
  };
  QueryPtr joined = qb::select(ex::binary(ExprOp::kEq, ex::field(2), ex::field(3)),
                               qb::binary(QueryOp::kProduct, match("cast", qb::table("db")),
                                          match("gross", qb::table("db"))));
  QueryPtr want = qb::project(
      {1}, qb::select(ex::binary(ExprOp::kGt, ex::field(4), ex::lit(i(200000000))), joined));
  CHECK(*q == *want);
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_query("table |>");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 7);
  }
  try {
    parse_query("table t\n  |> frobnicate");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 6);
  }
  try {
    parse_query("table t |> select (.1 = )");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.column() == 25);
    CHECK_FALSE(e.expected().empty());
  }
  CHECK_THROWS_AS(parse_query("table t |> project [x]"), ParseError);
  CHECK_THROWS_AS(parse_query("table t |> joinmatch db gross as (m) on (.1 = .2)"), ParseError);
  CHECK_THROWS_AS(parse_query("table t |> project [0]"), ParseError);
  CHECK_THROWS_AS(parse_query("table t |> agg mean"), ParseError);
  CHECK_THROWS_AS(parse_query("table t |> match cast as (and)"), ParseError);
  CHECK_THROWS_AS(parse_query("table t table u"), ParseError);
  CHECK_THROWS_AS(parse_query("table t |> select (\"open"), ParseError);
}

TEST_CASE("parse: named columns follow projections and products") {
  QueryPtr q = parse_query(
      "table db |> match cast as (a, m) |> project [m, a] |> select (.a = \"x\")");
  CHECK(q->op == QueryOp::kSelect);
  CHECK(*q->expr == *ex::binary(ExprOp::kEq, ex::field(2), ex::lit(s("x"))));
  QueryPtr p = parse_query(
      "table db |> match cast as (a, m) |> product (table db |> match gross as (g, r)) "
      "|> project [r, a]");
  CHECK(p->keys == std::vector<int>{4, 1});
}

TEST_CASE("pretty forms") {
  CHECK(pretty(*qb::lit(Bag())) == "empty");
  CHECK(pretty(*qb::unary(QueryOp::kGroupPrime, qb::table("t"))) == "table t |> group");
  CHECK(pretty(*ex::binary(ExprOp::kAdd, ex::field(1), ex::lit(i(2)))) == "(.1 + 2)");
  CHECK(pretty(*ex::lit(tup({i(1), s("a")}))) == "const (1, \"a\")");
}

TEST_CASE("round trip: parse(pretty(ast)) == ast on random ASTs") {
  Rng rng(41);
  int checked = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    QueryPtr q = random_query(rng, 4);
    std::string text = pretty(*q);
    QueryPtr back;
    try {
      back = parse_query(text);
    } catch (const ParseError& e) {
      FAIL_CHECK("reparse failed: " << text << " at " << e.line() << ":" << e.column() << ": "
                                    << e.message());
      continue;
    }
    CHECK_MESSAGE(*back == *q, text);
    CHECK(pretty(*back) == text);
    ++checked;
  }
  CHECK(checked == 3000);
}

TEST_CASE("round trip: random expressions") {
  Rng rng(42);
  for (int trial = 0; trial < 3000; ++trial) {
    ExprPtr e = random_expr(rng, 4);
    QueryPtr q = qb::select(e, qb::table("t"));
    std::string text = pretty(*q);
    QueryPtr back = parse_query(text);
    CHECK_MESSAGE(*back->expr == *e, text);
  }
}

TEST_CASE("check: worked examples") {
  Schema x1 = Schema::int_t(), x2 = Schema::str_t(), y1 = Schema::real_t();
  Catalog cat{{"a", Schema::tuple_t({x1, x2})}, {"b", y1}};
  Schema prod = check(*qb::binary(QueryOp::kProduct, qb::table("a"), qb::table("b")), cat);
  CHECK(prod == Schema::bag_t(Schema::tuple_t({x1, x2, y1})));
  CHECK_THROWS_AS(check(*qb::project({3}, qb::table("a")), cat), TypeError);
  Catalog nested{{"n", Schema::bag_t(Schema::int_t())}};
  CHECK(check(*qb::unary(QueryOp::kFlatten, qb::table("n")), nested) ==
        Schema::bag_t(Schema::int_t()));
  CHECK_THROWS_AS(check(*qb::unary(QueryOp::kFlatten, qb::table("a")), cat), TypeError);
  CHECK_THROWS_AS(check(*qb::select(ex::lit(i(1)), qb::table("a")), cat), TypeError);
  CHECK_THROWS_AS(check(*qb::table("zzz"), cat), UnknownTableError);
  CHECK(check(*qb::agg(AggKind::kSize, qb::table("a")), cat) == Schema::int_t());
  CHECK(check(*qb::lit(Bag()), cat) == Schema::bag_t(Schema::any()));
}

TEST_CASE("check: match refines tagged rows") {
  Catalog cat = sample_catalog();
  QueryPtr q = parse_query(
      "table db |> match cast as (a, m) |> joinmatch db gross as (m2, r) on (.m = .m2) "
      "|> select (.r > 1) |> project [a]");
  CHECK(check(*q, cat) == Schema::bag_t(Schema::str_t()));
  // untag without a refining select is rejected: the rows may be gross.
  CHECK_THROWS_AS(check(*qb::map(ex::untag("cast"), qb::table("db")), cat), TypeError);
}

TEST_CASE("check is sound: checked queries never raise TypeError") {
  Rng rng(43);
  Catalog cat = sample_catalog();
  int accepted = 0;
  for (int trial = 0; trial < 4000; ++trial) {
    QueryPtr q = typed_query(rng, 3);
    Schema out;
    try {
      out = check(*q, cat);
    } catch (const TypeError&) {
      continue;
    }
    ++accepted;
    for (int db = 0; db < 5; ++db) {
      Env env = random_env(rng);
      for (const auto& [name, rows] : env) {
        for (const Value& row : rows) REQUIRE(typecheck(row, cat.at(name)));
      }
      try {
        Value v = eval(*q, env);
        CHECK_MESSAGE(typecheck(v, out), pretty(*q) << " gave " << to_literal(v) << " : "
                                                    << to_string(out));
      } catch (const TypeError& e) {
        FAIL_CHECK(pretty(*q) << ": " << e.what());
      } catch (const EvalError&) {
        // Domain errors (the of an empty bag, overflow) are not type errors.
      } catch (const ResourceError&) {
      }
    }
  }
  MESSAGE("accepted " << accepted << " of 4000 random queries");
  CHECK(accepted > 800);
}
