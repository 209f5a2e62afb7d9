#ifndef PBDB_BALG_H_
#define PBDB_BALG_H_

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pbdb/bag.h"
#include "pbdb/value.h"

namespace pbdb {

enum class AggKind { kSize, kThe, kSum };

// ---------------------------------------------------------------------------
// Row expressions: the parameter language of map and select.

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprOp {
  kRow,    // the current row
  kField,  // args[0].index (1-based)
  kLit,
  kTuple,
  kTag,    // construct Tagged(tag, args[0])
  kIsTag,  // args[0] is Tagged with this tag
  kUntag,  // payload of args[0]; TypeError if the tag differs
  kNeg,
  kAdd,
  kSub,
  kMul,
  kEq,
  kNe,
  kLt,
  kLe,
  kGt,
  kGe,
  kAnd,
  kOr,
  kNot,
  kAgg,    // aggregate over a bag-valued args[0]
};

struct Expr {
  ExprOp op = ExprOp::kRow;
  int index = 0;
  Value literal;
  std::string tag;
  AggKind agg = AggKind::kSize;
  std::vector<ExprPtr> args;
};

bool operator==(const Expr& a, const Expr& b);

namespace ex {
ExprPtr row();
ExprPtr field(int index, ExprPtr of = row());
ExprPtr lit(Value v);
ExprPtr tuple(std::vector<ExprPtr> items);
ExprPtr make_tag(std::string tag, ExprPtr payload);
ExprPtr is_tag(std::string tag, ExprPtr of = row());
ExprPtr untag(std::string tag, ExprPtr of = row());
ExprPtr unary(ExprOp op, ExprPtr a);
ExprPtr binary(ExprOp op, ExprPtr a, ExprPtr b);
ExprPtr agg(AggKind kind, ExprPtr of);
}  // namespace ex

// Evaluates `e` against one row.  Comparisons between an Int and a Real are
// numeric (1 = 1.0 holds); all other comparisons use the value order.
Value eval_expr(const Expr& e, const Value& row);

// ---------------------------------------------------------------------------
// Query AST.

struct Query;
using QueryPtr = std::shared_ptr<const Query>;

enum class QueryOp {
  kTable,
  kLit,
  kSingleton,
  kFlatten,
  kMap,
  kProduct,
  kProject,
  kSelect,
  kDUnion,
  kDifference,
  kPowerBag,
  kDedup,
  kUnion,
  kIntersect,
  kPowerSet,
  kGroup,
  kGroupPrime,
  kAgg,
};

struct Query {
  QueryOp op = QueryOp::kTable;
  std::string table;
  Bag literal;
  ExprPtr expr;
  std::vector<int> keys;    // project indices, or the group key projection
  std::vector<int> values;  // group value projection
  AggKind agg = AggKind::kSize;
  std::vector<QueryPtr> inputs;
};

bool operator==(const Query& a, const Query& b);

namespace qb {
QueryPtr table(std::string name);
QueryPtr lit(Bag b);
QueryPtr unary(QueryOp op, QueryPtr in);
QueryPtr binary(QueryOp op, QueryPtr left, QueryPtr right);
QueryPtr map(ExprPtr f, QueryPtr in);
QueryPtr select(ExprPtr pred, QueryPtr in);
QueryPtr project(std::vector<int> indices, QueryPtr in);
QueryPtr group(std::vector<int> keys, std::vector<int> values, QueryPtr in);
QueryPtr agg(AggKind kind, QueryPtr in);
}  // namespace qb

using Env = std::map<std::string, Bag, std::less<>>;

struct EvalOptions {
  // Largest input accepted by powerbag/powerset (2^20 sub-bags by default).
  std::size_t max_powerbag_input = 20;
};

// Evaluates q; the result is a bag (as a BagV value) or an aggregate scalar.
Value eval(const Query& q, const Env& env, const EvalOptions& options = {});
Bag eval_bag(const Query& q, const Env& env, const EvalOptions& options = {});

// ---------------------------------------------------------------------------
// Per-operator semantics.

inline Bag q_singleton(const Value& x) { return unit(x); }
inline Bag q_flatten(const Bag& bb) { return flatten(bb); }
Bag q_map(const std::function<Value(const Value&)>& f, const Bag& b);
Bag q_product(const Bag& b1, const Bag& b2);
Bag q_project(const std::vector<int>& indices, const Bag& b);
Bag q_select(const std::function<bool(const Value&)>& pred, const Bag& b);
Bag q_dunion(const Bag& b1, const Bag& b2);
Bag q_difference(const Bag& b1, const Bag& b2);
Bag q_powerbag(const Bag& b, const EvalOptions& options = {});
Bag q_dedup(const Bag& b);
Bag q_union(const Bag& b1, const Bag& b2);
Bag q_intersect(const Bag& b1, const Bag& b2);
Bag q_powerset(const Bag& b, const EvalOptions& options = {});
Bag q_group(const std::vector<int>& keys, const std::vector<int>& values, const Bag& b);
Bag q_group_prime(const Bag& b);

std::int64_t agg_size(const Bag& b);
// First element of the canonical order; EvalError on the empty bag.
Value agg_the(const Bag& b);
// Int when every element is an Int, Real otherwise; TypeError on
// non-numeric elements.
Value agg_sum(const Bag& b);
Value aggregate(AggKind kind, const Bag& b);

// Accumulators of the fold-based definitions.  They are exposed so the
// fold forms can be checked against the direct implementations above.

// filter_{≠x}
Bag filter_not_equal(const Value& x, const Bag& b);
// dedupAcc(x, b) = add(x, filter_{≠x}(b))
Bag dedup_acc(const Value& x, const Bag& b);
// powerAcc(x, b0) = b0 ⊎ B(add_x)(b0)
Bag power_acc(const Value& x, const Bag& b0);

// remAcc state ((x_rem, removed), bag).
struct RemoveState {
  Value target;
  bool removed = false;
  Bag rest;
};
RemoveState rem_acc(const Value& x, RemoveState state);
// π₂(fold_remAcc(((x, false), ∅), b))
Bag remove_by_fold(const Value& x, const Bag& b);

}  // namespace pbdb

#endif  // PBDB_BALG_H_
