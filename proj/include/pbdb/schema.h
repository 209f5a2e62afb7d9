#ifndef PBDB_SCHEMA_H_
#define PBDB_SCHEMA_H_

#include <string>
#include <utility>
#include <vector>

#include "pbdb/value.h"

namespace pbdb {

// Structural type of a value.  kAny is the element type of a bag that has
// no elements yet (empty tables, `empty`); it unifies with everything and is
// never inhabited by an actual row.
class Schema {
 public:
  enum class Kind { kAny, kInt, kReal, kBool, kStr, kUnit, kTuple, kTagged, kBag };

  Schema() : kind_(Kind::kAny) {}

  static Schema any() { return Schema(Kind::kAny); }
  static Schema int_t() { return Schema(Kind::kInt); }
  static Schema real_t() { return Schema(Kind::kReal); }
  static Schema bool_t() { return Schema(Kind::kBool); }
  static Schema str_t() { return Schema(Kind::kStr); }
  static Schema unit_t() { return Schema(Kind::kUnit); }
  static Schema tuple_t(std::vector<Schema> fields);
  // Variants are kept sorted by tag; duplicate tags are merged by unify().
  static Schema tagged_t(std::vector<std::pair<std::string, Schema>> variants);
  static Schema bag_t(Schema element);

  Kind kind() const { return kind_; }
  bool is_any() const { return kind_ == Kind::kAny; }
  bool is_numeric() const { return kind_ == Kind::kInt || kind_ == Kind::kReal; }

  const std::vector<Schema>& fields() const { return children_; }
  const std::vector<std::pair<std::string, Schema>>& variants() const { return variants_; }
  const Schema& element() const { return children_.front(); }
  // Payload schema of `tag`, or nullptr.
  const Schema* variant(const std::string& tag) const;

  // Row view mirroring row_fields(): tuples expose their fields, everything
  // else is a single field.
  std::vector<Schema> row_fields() const;
  std::size_t row_arity() const;

  friend bool operator==(const Schema& a, const Schema& b);

 private:
  explicit Schema(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::vector<Schema> children_;  // tuple fields, or the single bag element
  std::vector<std::pair<std::string, Schema>> variants_;
};

Schema make_row_schema(std::vector<Schema> fields);

// Least schema covering both, or TypeError.  Tagged schemas take the union
// of their variants; kAny is the identity.
Schema unify(const Schema& a, const Schema& b);

// Schema of a concrete value (bags unify their elements).
Schema infer_schema(const Value& v);

// True iff v inhabits s.
bool typecheck(const Value& v, const Schema& s);

std::string to_string(const Schema& s);

}  // namespace pbdb

#endif  // PBDB_SCHEMA_H_
