#include "pbdb/balg.h"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "pbdb/errors.h"

namespace pbdb {

// ---------------------------------------------------------------------------
// Expression construction and equality.

bool operator==(const Expr& a, const Expr& b) {
  if (a.op != b.op || a.index != b.index || a.tag != b.tag || a.agg != b.agg ||
      a.literal != b.literal || a.args.size() != b.args.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!(*a.args[i] == *b.args[i])) return false;
  }
  return true;
}

namespace ex {

namespace {
ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
}  // namespace

ExprPtr row() { return make(Expr{}); }

ExprPtr field(int index, ExprPtr of) {
  Expr e;
  e.op = ExprOp::kField;
  e.index = index;
  e.args = {std::move(of)};
  return make(std::move(e));
}

ExprPtr lit(Value v) {
  Expr e;
  e.op = ExprOp::kLit;
  e.literal = std::move(v);
  return make(std::move(e));
}

ExprPtr tuple(std::vector<ExprPtr> items) {
  Expr e;
  e.op = ExprOp::kTuple;
  e.args = std::move(items);
  return make(std::move(e));
}

ExprPtr make_tag(std::string tag, ExprPtr payload) {
  Expr e;
  e.op = ExprOp::kTag;
  e.tag = std::move(tag);
  e.args = {std::move(payload)};
  return make(std::move(e));
}

ExprPtr is_tag(std::string tag, ExprPtr of) {
  Expr e;
  e.op = ExprOp::kIsTag;
  e.tag = std::move(tag);
  e.args = {std::move(of)};
  return make(std::move(e));
}

ExprPtr untag(std::string tag, ExprPtr of) {
  Expr e;
  e.op = ExprOp::kUntag;
  e.tag = std::move(tag);
  e.args = {std::move(of)};
  return make(std::move(e));
}

ExprPtr unary(ExprOp op, ExprPtr a) {
  Expr e;
  e.op = op;
  e.args = {std::move(a)};
  return make(std::move(e));
}

ExprPtr binary(ExprOp op, ExprPtr a, ExprPtr b) {
  Expr e;
  e.op = op;
  e.args = {std::move(a), std::move(b)};
  return make(std::move(e));
}

ExprPtr agg(AggKind kind, ExprPtr of) {
  Expr e;
  e.op = ExprOp::kAgg;
  e.agg = kind;
  e.args = {std::move(of)};
  return make(std::move(e));
}

}  // namespace ex

// ---------------------------------------------------------------------------
// Expression evaluation.

namespace {

// Exact Int/Real comparison; long double holds every int64 exactly.
std::strong_ordering compare_mixed(const Value& a, const Value& b) {
  if (a.is_int() && b.is_real()) {
    long double x = static_cast<long double>(a.as_int());
    long double y = b.as_real();
    if (x < y) return std::strong_ordering::less;
    if (x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  if (a.is_real() && b.is_int()) {
    auto c = compare_mixed(b, a);
    if (c < 0) return std::strong_ordering::greater;
    if (c > 0) return std::strong_ordering::less;
    return c;
  }
  return compare(a, b);
}

Value checked_real(double r) {
  if (std::isnan(r)) throw EvalError("arithmetic produced NaN");
  return Value::real(r);
}

Value arithmetic(ExprOp op, const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) {
    throw TypeError("arithmetic on non-numeric values " + to_literal(a) + " and " +
                    to_literal(b));
  }
  if (a.is_int() && b.is_int()) {
    std::int64_t x = a.as_int();
    std::int64_t y = b.as_int();
    std::int64_t r = 0;
    bool overflow = false;
    switch (op) {
      case ExprOp::kAdd: overflow = __builtin_add_overflow(x, y, &r); break;
      case ExprOp::kSub: overflow = __builtin_sub_overflow(x, y, &r); break;
      default: overflow = __builtin_mul_overflow(x, y, &r); break;
    }
    if (overflow) throw EvalError("integer overflow");
    return Value::integer(r);
  }
  double x = a.as_number();
  double y = b.as_number();
  switch (op) {
    case ExprOp::kAdd: return checked_real(x + y);
    case ExprOp::kSub: return checked_real(x - y);
    default: return checked_real(x * y);
  }
}

bool truth(const Value& v) {
  if (!v.is_bool()) throw TypeError("expected bool, got " + to_literal(v));
  return v.as_bool();
}

}  // namespace

Value eval_expr(const Expr& e, const Value& row) {
  auto arg = [&](std::size_t i) { return eval_expr(*e.args[i], row); };
  switch (e.op) {
    case ExprOp::kRow: return row;
    case ExprOp::kField: {
      Value of = arg(0);
      std::size_t arity = row_arity(of);
      if (e.index < 1 || static_cast<std::size_t>(e.index) > arity) {
        throw TypeError("field ." + std::to_string(e.index) + " out of range for " +
                        to_literal(of));
      }
      if (!of.is_tuple()) return of;
      return of.as_tuple()[static_cast<std::size_t>(e.index - 1)];
    }
    case ExprOp::kLit: return e.literal;
    case ExprOp::kTuple: {
      std::vector<Value> items;
      items.reserve(e.args.size());
      for (std::size_t i = 0; i < e.args.size(); ++i) items.push_back(arg(i));
      return Value::tuple(std::move(items));
    }
    case ExprOp::kTag: return Value::tagged(e.tag, arg(0));
    case ExprOp::kIsTag: {
      Value of = arg(0);
      return Value::boolean(of.is_tagged() && of.tag() == e.tag);
    }
    case ExprOp::kUntag: {
      Value of = arg(0);
      if (!of.is_tagged() || of.tag() != e.tag) {
        throw TypeError("untag " + e.tag + ": got " + to_literal(of));
      }
      return of.payload();
    }
    case ExprOp::kNeg: {
      Value a = arg(0);
      if (a.is_int()) {
        std::int64_t r = 0;
        if (__builtin_sub_overflow(std::int64_t{0}, a.as_int(), &r)) {
          throw EvalError("integer overflow");
        }
        return Value::integer(r);
      }
      if (a.is_real()) return Value::real(-a.as_real());
      throw TypeError("negation of non-numeric value " + to_literal(a));
    }
    case ExprOp::kAdd:
    case ExprOp::kSub:
    case ExprOp::kMul: return arithmetic(e.op, arg(0), arg(1));
    case ExprOp::kEq:
    case ExprOp::kNe:
    case ExprOp::kLt:
    case ExprOp::kLe:
    case ExprOp::kGt:
    case ExprOp::kGe: {
      auto c = compare_mixed(arg(0), arg(1));
      bool r = false;
      switch (e.op) {
        case ExprOp::kEq: r = c == 0; break;
        case ExprOp::kNe: r = c != 0; break;
        case ExprOp::kLt: r = c < 0; break;
        case ExprOp::kLe: r = c <= 0; break;
        case ExprOp::kGt: r = c > 0; break;
        default: r = c >= 0; break;
      }
      return Value::boolean(r);
    }
    case ExprOp::kAnd: return Value::boolean(truth(arg(0)) && truth(arg(1)));
    case ExprOp::kOr: return Value::boolean(truth(arg(0)) || truth(arg(1)));
    case ExprOp::kNot: return Value::boolean(!truth(arg(0)));
    case ExprOp::kAgg: {
      Value of = arg(0);
      if (!of.is_bag()) throw TypeError("aggregate over non-bag " + to_literal(of));
      return aggregate(e.agg, of.as_bag());
    }
  }
  throw TypeError("unknown expression");
}

// ---------------------------------------------------------------------------
// Query construction and equality.

bool operator==(const Query& a, const Query& b) {
  if (a.op != b.op || a.table != b.table || a.literal != b.literal ||
      a.keys != b.keys || a.values != b.values || a.agg != b.agg ||
      a.inputs.size() != b.inputs.size()) {
    return false;
  }
  if ((a.expr == nullptr) != (b.expr == nullptr)) return false;
  if (a.expr && !(*a.expr == *b.expr)) return false;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    if (!(*a.inputs[i] == *b.inputs[i])) return false;
  }
  return true;
}

namespace qb {

namespace {
QueryPtr make(Query q) { return std::make_shared<const Query>(std::move(q)); }
}  // namespace

QueryPtr table(std::string name) {
  Query q;
  q.op = QueryOp::kTable;
  q.table = std::move(name);
  return make(std::move(q));
}

QueryPtr lit(Bag b) {
  Query q;
  q.op = QueryOp::kLit;
  q.literal = std::move(b);
  return make(std::move(q));
}

QueryPtr unary(QueryOp op, QueryPtr in) {
  Query q;
  q.op = op;
  q.inputs = {std::move(in)};
  return make(std::move(q));
}

QueryPtr binary(QueryOp op, QueryPtr left, QueryPtr right) {
  Query q;
  q.op = op;
  q.inputs = {std::move(left), std::move(right)};
  return make(std::move(q));
}

QueryPtr map(ExprPtr f, QueryPtr in) {
  Query q;
  q.op = QueryOp::kMap;
  q.expr = std::move(f);
  q.inputs = {std::move(in)};
  return make(std::move(q));
}

QueryPtr select(ExprPtr pred, QueryPtr in) {
  Query q;
  q.op = QueryOp::kSelect;
  q.expr = std::move(pred);
  q.inputs = {std::move(in)};
  return make(std::move(q));
}

QueryPtr project(std::vector<int> indices, QueryPtr in) {
  Query q;
  q.op = QueryOp::kProject;
  q.keys = std::move(indices);
  q.inputs = {std::move(in)};
  return make(std::move(q));
}

QueryPtr group(std::vector<int> keys, std::vector<int> values, QueryPtr in) {
  Query q;
  q.op = QueryOp::kGroup;
  q.keys = std::move(keys);
  q.values = std::move(values);
  q.inputs = {std::move(in)};
  return make(std::move(q));
}

QueryPtr agg(AggKind kind, QueryPtr in) {
  Query q;
  q.op = QueryOp::kAgg;
  q.agg = kind;
  q.inputs = {std::move(in)};
  return make(std::move(q));
}

}  // namespace qb

// ---------------------------------------------------------------------------
// Operators.

namespace {

Value project_row(const std::vector<int>& indices, const Value& row) {
  std::size_t arity = row_arity(row);
  std::vector<Value> out;
  out.reserve(indices.size());
  for (int i : indices) {
    if (i < 1 || static_cast<std::size_t>(i) > arity) {
      throw TypeError("projection index " + std::to_string(i) + " out of range for " +
                      to_literal(row));
    }
    out.push_back(row.is_tuple() ? row.as_tuple()[static_cast<std::size_t>(i - 1)] : row);
  }
  return make_row(std::move(out));
}

std::size_t uniform_arity(const Bag& b, const char* side) {
  std::size_t arity = 0;
  bool first = true;
  for (const Value& x : b) {
    std::size_t a = row_arity(x);
    if (first) {
      arity = a;
      first = false;
    } else if (a != arity) {
      throw TypeError(std::string("product: ") + side + " rows have mixed arity");
    }
  }
  return arity;
}

}  // namespace

Bag q_map(const std::function<Value(const Value&)>& f, const Bag& b) {
  return map(f, b);
}

Bag q_product(const Bag& b1, const Bag& b2) {
  uniform_arity(b1, "left");
  uniform_arity(b2, "right");
  std::vector<Value> out;
  out.reserve(b1.size() * b2.size());
  for (const Value& x : b1) {
    std::vector<Value> xs = row_fields(x);
    for (const Value& y : b2) {
      std::vector<Value> fields = xs;
      std::vector<Value> ys = row_fields(y);
      fields.insert(fields.end(), ys.begin(), ys.end());
      out.push_back(Value::tuple(std::move(fields)));
    }
  }
  return Bag::from_values(std::move(out));
}

Bag q_project(const std::vector<int>& indices, const Bag& b) {
  return map([&](const Value& row) { return project_row(indices, row); }, b);
}

Bag q_select(const std::function<bool(const Value&)>& pred, const Bag& b) {
  std::vector<Value> out;
  for (const Value& x : b) {
    if (pred(x)) out.push_back(x);
  }
  return Bag::from_sorted(std::move(out));
}

Bag q_dunion(const Bag& b1, const Bag& b2) { return uplus(b1, b2); }

Bag q_difference(const Bag& b1, const Bag& b2) {
  // Truncated subtraction of multiplicities; equal to fold_remove(b1, b2).
  std::vector<Value> out;
  std::set_difference(b1.begin(), b1.end(), b2.begin(), b2.end(),
                      std::back_inserter(out));
  return Bag::from_sorted(std::move(out));
}

Bag filter_not_equal(const Value& x, const Bag& b) {
  return q_select([&](const Value& y) { return y != x; }, b);
}

Bag dedup_acc(const Value& x, const Bag& b) { return add(x, filter_not_equal(x, b)); }

Bag power_acc(const Value& x, const Bag& b0) {
  Bag extended = map([&](const Value& sub) { return Value::bag(sub.as_bag().add(x)); }, b0);
  return uplus(b0, extended);
}

RemoveState rem_acc(const Value& x, RemoveState state) {
  if (state.removed) {
    state.rest = state.rest.add(x);
  } else if (x == state.target) {
    state.removed = true;
  } else {
    state.rest = state.rest.add(x);
  }
  return state;
}

Bag remove_by_fold(const Value& x, const Bag& b) {
  return fold(rem_acc, RemoveState{x, false, Bag()}, b).rest;
}

Bag q_powerbag(const Bag& b, const EvalOptions& options) {
  if (b.size() > options.max_powerbag_input) {
    throw ResourceError("powerbag of a bag with " + std::to_string(b.size()) +
                        " elements exceeds the guard of " +
                        std::to_string(options.max_powerbag_input));
  }
  return fold(power_acc, Bag({Value::bag(Bag())}), b);
}

Bag q_dedup(const Bag& b) {
  std::vector<Value> out(b.begin(), b.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return Bag::from_sorted(std::move(out));
}

Bag q_intersect(const Bag& b1, const Bag& b2) {
  return q_difference(b1, q_difference(b1, b2));
}

Bag q_union(const Bag& b1, const Bag& b2) {
  return q_dunion(b1, q_difference(b2, b1));
}

Bag q_powerset(const Bag& b, const EvalOptions& options) {
  return q_dedup(q_powerbag(b, options));
}

Bag q_group(const std::vector<int>& keys, const std::vector<int>& values, const Bag& b) {
  std::vector<std::pair<Value, Value>> pairs;
  pairs.reserve(b.size());
  for (const Value& row : b) {
    pairs.emplace_back(project_row(keys, row), project_row(values, row));
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Value> out;
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    std::vector<Value> group;
    while (j < pairs.size() && pairs[j].first == pairs[i].first) {
      group.push_back(pairs[j].second);
      ++j;
    }
    out.push_back(Value::tuple({pairs[i].first, Value::bag(Bag::from_values(std::move(group)))}));
    i = j;
  }
  return Bag::from_sorted(std::move(out));
}

Bag q_group_prime(const Bag& b) {
  std::vector<Value> out;
  for (const auto& [x, n] : b.counts()) {
    out.push_back(Value::bag(Bag::from_sorted(std::vector<Value>(n, x))));
  }
  return Bag::from_values(std::move(out));
}

std::int64_t agg_size(const Bag& b) {
  return free_extend([](const Value&) { return std::int64_t{1}; },
                     [](std::int64_t a, std::int64_t c) { return a + c; },
                     std::int64_t{0}, b);
}

Value agg_the(const Bag& b) {
  if (b.is_empty()) throw EvalError("the: empty bag");
  return b.elements().front();
}

Value agg_sum(const Bag& b) {
  bool all_int = true;
  for (const Value& x : b) {
    if (!x.is_numeric()) throw TypeError("sum: non-numeric element " + to_literal(x));
    all_int = all_int && x.is_int();
  }
  if (all_int) {
    return fold(
        [](const Value& x, Value acc) { return arithmetic(ExprOp::kAdd, x, acc); },
        Value::integer(0), b);
  }
  return fold(
      [](const Value& x, Value acc) {
        return checked_real(x.as_number() + acc.as_number());
      },
      Value::real(0.0), b);
}

Value aggregate(AggKind kind, const Bag& b) {
  switch (kind) {
    case AggKind::kSize: return Value::integer(agg_size(b));
    case AggKind::kThe: return agg_the(b);
    case AggKind::kSum: return agg_sum(b);
  }
  throw TypeError("unknown aggregate");
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

const Bag& expect_bag(const Value& v, const char* op) {
  if (!v.is_bag()) {
    throw TypeError(std::string(op) + ": input is not a bag but " + to_literal(v));
  }
  return v.as_bag();
}

const char* op_name(QueryOp op) {
  switch (op) {
    case QueryOp::kTable: return "table";
    case QueryOp::kLit: return "bag";
    case QueryOp::kSingleton: return "singleton";
    case QueryOp::kFlatten: return "flatten";
    case QueryOp::kMap: return "map";
    case QueryOp::kProduct: return "product";
    case QueryOp::kProject: return "project";
    case QueryOp::kSelect: return "select";
    case QueryOp::kDUnion: return "dunion";
    case QueryOp::kDifference: return "difference";
    case QueryOp::kPowerBag: return "powerbag";
    case QueryOp::kDedup: return "dedup";
    case QueryOp::kUnion: return "union";
    case QueryOp::kIntersect: return "intersect";
    case QueryOp::kPowerSet: return "powerset";
    case QueryOp::kGroup: return "group";
    case QueryOp::kGroupPrime: return "group'";
    case QueryOp::kAgg: return "agg";
  }
  return "?";
}

}  // namespace

Value eval(const Query& q, const Env& env, const EvalOptions& options) {
  auto input = [&](std::size_t i) { return eval(*q.inputs[i], env, options); };
  auto bag_input = [&](std::size_t i) {
    Value v = input(i);
    return expect_bag(v, op_name(q.op));
  };
  auto wrap = [](Bag b) { return Value::bag(std::move(b)); };
  switch (q.op) {
    case QueryOp::kTable: {
      auto it = env.find(q.table);
      if (it == env.end()) throw UnknownTableError(q.table);
      return wrap(it->second);
    }
    case QueryOp::kLit: return wrap(q.literal);
    case QueryOp::kSingleton: return wrap(q_singleton(input(0)));
    case QueryOp::kFlatten: return wrap(q_flatten(bag_input(0)));
    case QueryOp::kMap: {
      const Expr& f = *q.expr;
      return wrap(q_map([&](const Value& row) { return eval_expr(f, row); }, bag_input(0)));
    }
    case QueryOp::kProduct: return wrap(q_product(bag_input(0), bag_input(1)));
    case QueryOp::kProject: return wrap(q_project(q.keys, bag_input(0)));
    case QueryOp::kSelect: {
      const Expr& pred = *q.expr;
      return wrap(q_select([&](const Value& row) { return truth(eval_expr(pred, row)); },
                           bag_input(0)));
    }
    case QueryOp::kDUnion: return wrap(q_dunion(bag_input(0), bag_input(1)));
    case QueryOp::kDifference: return wrap(q_difference(bag_input(0), bag_input(1)));
    case QueryOp::kPowerBag: return wrap(q_powerbag(bag_input(0), options));
    case QueryOp::kDedup: return wrap(q_dedup(bag_input(0)));
    case QueryOp::kUnion: return wrap(q_union(bag_input(0), bag_input(1)));
    case QueryOp::kIntersect: return wrap(q_intersect(bag_input(0), bag_input(1)));
    case QueryOp::kPowerSet: return wrap(q_powerset(bag_input(0), options));
    case QueryOp::kGroup: return wrap(q_group(q.keys, q.values, bag_input(0)));
    case QueryOp::kGroupPrime: return wrap(q_group_prime(bag_input(0)));
    case QueryOp::kAgg: return aggregate(q.agg, bag_input(0));
  }
  throw TypeError("unknown query operator");
}

Bag eval_bag(const Query& q, const Env& env, const EvalOptions& options) {
  Value v = eval(q, env, options);
  return expect_bag(v, "query");
}

}  // namespace pbdb
