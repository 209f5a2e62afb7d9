#include "pbdb/schema.h"

#include <algorithm>

#include "pbdb/bag.h"
#include "pbdb/errors.h"

namespace pbdb {

Schema Schema::tuple_t(std::vector<Schema> fields) {
  Schema s(Kind::kTuple);
  s.children_ = std::move(fields);
  return s;
}

Schema Schema::tagged_t(std::vector<std::pair<std::string, Schema>> variants) {
  std::sort(variants.begin(), variants.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Schema s(Kind::kTagged);
  for (auto& [tag, payload] : variants) {
    if (!s.variants_.empty() && s.variants_.back().first == tag) {
      s.variants_.back().second = unify(s.variants_.back().second, payload);
    } else {
      s.variants_.emplace_back(std::move(tag), std::move(payload));
    }
  }
  return s;
}

Schema Schema::bag_t(Schema element) {
  Schema s(Kind::kBag);
  s.children_.push_back(std::move(element));
  return s;
}

const Schema* Schema::variant(const std::string& tag) const {
  auto it = std::lower_bound(
      variants_.begin(), variants_.end(), tag,
      [](const auto& v, const std::string& t) { return v.first < t; });
  if (it == variants_.end() || it->first != tag) return nullptr;
  return &it->second;
}

std::vector<Schema> Schema::row_fields() const {
  if (kind_ == Kind::kTuple) return children_;
  return {*this};
}

std::size_t Schema::row_arity() const {
  return kind_ == Kind::kTuple ? children_.size() : 1;
}

bool operator==(const Schema& a, const Schema& b) {
  return a.kind_ == b.kind_ && a.children_ == b.children_ &&
         a.variants_ == b.variants_;
}

Schema make_row_schema(std::vector<Schema> fields) {
  if (fields.size() == 1) return std::move(fields.front());
  return Schema::tuple_t(std::move(fields));
}

Schema unify(const Schema& a, const Schema& b) {
  using Kind = Schema::Kind;
  if (a.is_any()) return b;
  if (b.is_any()) return a;
  auto mismatch = [&]() -> TypeError {
    return TypeError("schema mismatch: " + to_string(a) + " vs " + to_string(b));
  };
  if (a.kind() != b.kind()) throw mismatch();
  switch (a.kind()) {
    case Kind::kTuple: {
      if (a.fields().size() != b.fields().size()) throw mismatch();
      std::vector<Schema> fields;
      for (std::size_t i = 0; i < a.fields().size(); ++i) {
        fields.push_back(unify(a.fields()[i], b.fields()[i]));
      }
      return Schema::tuple_t(std::move(fields));
    }
    case Kind::kTagged: {
      auto variants = a.variants();
      variants.insert(variants.end(), b.variants().begin(), b.variants().end());
      return Schema::tagged_t(std::move(variants));
    }
    case Kind::kBag:
      return Schema::bag_t(unify(a.element(), b.element()));
    default:
      return a;
  }
}

Schema infer_schema(const Value& v) {
  switch (v.kind()) {
    case ValueKind::kInt: return Schema::int_t();
    case ValueKind::kReal: return Schema::real_t();
    case ValueKind::kBool: return Schema::bool_t();
    case ValueKind::kStr: return Schema::str_t();
    case ValueKind::kUnit: return Schema::unit_t();
    case ValueKind::kTuple: {
      std::vector<Schema> fields;
      for (const Value& item : v.as_tuple()) fields.push_back(infer_schema(item));
      return Schema::tuple_t(std::move(fields));
    }
    case ValueKind::kTagged:
      return Schema::tagged_t({{v.tag(), infer_schema(v.payload())}});
    case ValueKind::kBag: {
      Schema element = Schema::any();
      for (const Value& e : v.as_bag()) element = unify(element, infer_schema(e));
      return Schema::bag_t(std::move(element));
    }
  }
  return Schema::any();
}

bool typecheck(const Value& v, const Schema& s) {
  using Kind = Schema::Kind;
  switch (s.kind()) {
    case Kind::kAny: return false;
    case Kind::kInt: return v.is_int();
    case Kind::kReal: return v.is_real();
    case Kind::kBool: return v.is_bool();
    case Kind::kStr: return v.is_str();
    case Kind::kUnit: return v.is_unit();
    case Kind::kTuple: {
      if (!v.is_tuple() || v.as_tuple().size() != s.fields().size()) return false;
      auto items = v.as_tuple();
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (!typecheck(items[i], s.fields()[i])) return false;
      }
      return true;
    }
    case Kind::kTagged: {
      if (!v.is_tagged()) return false;
      const Schema* payload = s.variant(v.tag());
      return payload != nullptr && typecheck(v.payload(), *payload);
    }
    case Kind::kBag: {
      if (!v.is_bag()) return false;
      const Bag& b = v.as_bag();
      return std::all_of(b.begin(), b.end(),
                         [&](const Value& e) { return typecheck(e, s.element()); });
    }
  }
  return false;
}

std::string to_string(const Schema& s) {
  using Kind = Schema::Kind;
  switch (s.kind()) {
    case Kind::kAny: return "?";
    case Kind::kInt: return "int";
    case Kind::kReal: return "real";
    case Kind::kBool: return "bool";
    case Kind::kStr: return "str";
    case Kind::kUnit: return "unit";
    case Kind::kTuple: {
      std::string out = "(";
      for (std::size_t i = 0; i < s.fields().size(); ++i) {
        if (i) out += " * ";
        out += to_string(s.fields()[i]);
      }
      return out + ")";
    }
    case Kind::kTagged: {
      std::string out = "<";
      for (std::size_t i = 0; i < s.variants().size(); ++i) {
        if (i) out += " | ";
        out += s.variants()[i].first + ": " + to_string(s.variants()[i].second);
      }
      return out + ">";
    }
    case Kind::kBag: return "B(" + to_string(s.element()) + ")";
  }
  return "?";
}

}  // namespace pbdb
