#ifndef PBDB_VALUE_H_
#define PBDB_VALUE_H_

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pbdb {

class Bag;

// Variant rank; also the cross-variant order used by compare().
enum class ValueKind : std::uint8_t {
  kInt = 0,
  kReal,
  kBool,
  kStr,
  kUnit,
  kTuple,
  kTagged,
  kBag,
};

std::string_view kind_name(ValueKind kind);

// Universal immutable data value.  Compound payloads are shared, so copies
// are cheap and values may be handed between threads freely.
class Value {
 public:
  // Unit (the unique element of the one-point space).
  Value();

  static Value integer(std::int64_t v);
  // Throws TypeError on NaN.  Infinities are accepted.
  static Value real(double v);
  static Value boolean(bool v);
  static Value str(std::string v);
  static Value unit();
  static Value tuple(std::vector<Value> items);
  // `tag` must be a nonempty identifier ([A-Za-z_][A-Za-z0-9_]*).
  static Value tagged(std::string tag, Value payload);
  static Value bag(Bag b);

  ValueKind kind() const { return static_cast<ValueKind>(rep_.index()); }
  bool is_int() const { return kind() == ValueKind::kInt; }
  bool is_real() const { return kind() == ValueKind::kReal; }
  bool is_numeric() const { return is_int() || is_real(); }
  bool is_bool() const { return kind() == ValueKind::kBool; }
  bool is_str() const { return kind() == ValueKind::kStr; }
  bool is_unit() const { return kind() == ValueKind::kUnit; }
  bool is_tuple() const { return kind() == ValueKind::kTuple; }
  bool is_tagged() const { return kind() == ValueKind::kTagged; }
  bool is_bag() const { return kind() == ValueKind::kBag; }

  // Accessors throw TypeError when the variant does not match.
  std::int64_t as_int() const;
  double as_real() const;
  // Int or Real widened to double.
  double as_number() const;
  bool as_bool() const;
  const std::string& as_str() const;
  std::span<const Value> as_tuple() const;
  const std::string& tag() const;
  const Value& payload() const;
  const Bag& as_bag() const;

 private:
  struct TaggedRep;
  using Rep = std::variant<std::int64_t, double, bool, std::string,
                           std::monostate,
                           std::shared_ptr<const std::vector<Value>>,
                           std::shared_ptr<const TaggedRep>,
                           std::shared_ptr<const Bag>>;
  explicit Value(Rep rep) : rep_(std::move(rep)) {}

  Rep rep_;
};

// Total order on all values.  Variants are ranked by ValueKind; ints and
// reals compare numerically within their own variant; reals that are
// numerically equal but differ in bit pattern (-0.0, +0.0) are ordered by
// sign so that EQ coincides with bit-level equality.  Tuples, strings and
// bags (as canonical sequences) compare lexicographically; tagged values by
// tag, then payload.
std::strong_ordering compare(const Value& a, const Value& b);

inline bool operator==(const Value& a, const Value& b) {
  return compare(a, b) == std::strong_ordering::equal;
}
inline std::strong_ordering operator<=>(const Value& a, const Value& b) {
  return compare(a, b);
}

bool is_identifier(std::string_view s);

// A row seen as a sequence of fields: tuples expose their items, every other
// value is a 1-field row.
std::vector<Value> row_fields(const Value& row);
std::size_t row_arity(const Value& row);
// Inverse of row_fields for projections: one field collapses to the field.
Value make_row(std::vector<Value> fields);

// JSON encoding: Int/Real/Bool/Str as primitives, Unit as null, Tuple as
// array, Tagged as {"tag":t,"value":v}, Bag as {"bag":[...]}.  Infinite
// reals, which JSON cannot express, are written {"real":"inf"} and
// {"real":"-inf"}.
std::string serialize(const Value& v);
// Throws ParseError (with 1-based line/column) on malformed input.
Value deserialize(std::string_view text);

// Literal syntax shared with the query language: 3, 2.5, "s", true, unit,
// (a, b), (a,), (), tag(a, b), bag {a, b}, inf, -inf.
std::string to_literal(const Value& v);
std::ostream& operator<<(std::ostream& os, const Value& v);

}  // namespace pbdb

#endif  // PBDB_VALUE_H_
