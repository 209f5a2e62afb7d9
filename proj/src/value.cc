#include "pbdb/value.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "pbdb/bag.h"
#include "pbdb/errors.h"

namespace pbdb {

struct Value::TaggedRep {
  std::string tag;
  Value payload;
};

std::string_view kind_name(ValueKind kind) {
  switch (kind) {
    case ValueKind::kInt: return "int";
    case ValueKind::kReal: return "real";
    case ValueKind::kBool: return "bool";
    case ValueKind::kStr: return "str";
    case ValueKind::kUnit: return "unit";
    case ValueKind::kTuple: return "tuple";
    case ValueKind::kTagged: return "tagged";
    case ValueKind::kBag: return "bag";
  }
  return "?";
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!alpha(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), [&](char c) {
    return alpha(c) || (c >= '0' && c <= '9');
  });
}

Value::Value() : rep_(std::in_place_index<4>) {}

Value Value::integer(std::int64_t v) { return Value(Rep(std::in_place_index<0>, v)); }

Value Value::real(double v) {
  if (std::isnan(v)) throw TypeError("NaN is not a valid real value");
  return Value(Rep(std::in_place_index<1>, v));
}

Value Value::boolean(bool v) { return Value(Rep(std::in_place_index<2>, v)); }

Value Value::str(std::string v) {
  return Value(Rep(std::in_place_index<3>, std::move(v)));
}

Value Value::unit() { return Value(); }

Value Value::tuple(std::vector<Value> items) {
  return Value(Rep(std::in_place_index<5>,
                   std::make_shared<const std::vector<Value>>(std::move(items))));
}

Value Value::tagged(std::string tag, Value payload) {
  if (!is_identifier(tag)) {
    throw TypeError("tag '" + tag + "' is not an identifier");
  }
  return Value(Rep(std::in_place_index<6>,
                   std::make_shared<const TaggedRep>(
                       TaggedRep{std::move(tag), std::move(payload)})));
}

Value Value::bag(Bag b) {
  return Value(Rep(std::in_place_index<7>,
                   std::make_shared<const Bag>(std::move(b))));
}

namespace {

[[noreturn]] void wrong_kind(ValueKind want, ValueKind got) {
  throw TypeError("expected " + std::string(kind_name(want)) + ", got " +
                  std::string(kind_name(got)));
}

}  // namespace

std::int64_t Value::as_int() const {
  if (!is_int()) wrong_kind(ValueKind::kInt, kind());
  return std::get<0>(rep_);
}

double Value::as_real() const {
  if (!is_real()) wrong_kind(ValueKind::kReal, kind());
  return std::get<1>(rep_);
}

double Value::as_number() const {
  if (is_int()) return static_cast<double>(std::get<0>(rep_));
  if (is_real()) return std::get<1>(rep_);
  throw TypeError("expected a number, got " + std::string(kind_name(kind())));
}

bool Value::as_bool() const {
  if (!is_bool()) wrong_kind(ValueKind::kBool, kind());
  return std::get<2>(rep_);
}

const std::string& Value::as_str() const {
  if (!is_str()) wrong_kind(ValueKind::kStr, kind());
  return std::get<3>(rep_);
}

std::span<const Value> Value::as_tuple() const {
  if (!is_tuple()) wrong_kind(ValueKind::kTuple, kind());
  return *std::get<5>(rep_);
}

const std::string& Value::tag() const {
  if (!is_tagged()) wrong_kind(ValueKind::kTagged, kind());
  return std::get<6>(rep_)->tag;
}

const Value& Value::payload() const {
  if (!is_tagged()) wrong_kind(ValueKind::kTagged, kind());
  return std::get<6>(rep_)->payload;
}

const Bag& Value::as_bag() const {
  if (!is_bag()) wrong_kind(ValueKind::kBag, kind());
  return *std::get<7>(rep_);
}

namespace {

template <typename Range>
std::strong_ordering compare_sequences(const Range& a, const Range& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    auto c = compare(*ia, *ib);
    if (c != std::strong_ordering::equal) return c;
  }
  if (ia == a.end() && ib == b.end()) return std::strong_ordering::equal;
  return ia == a.end() ? std::strong_ordering::less
                       : std::strong_ordering::greater;
}

std::strong_ordering compare_reals(double a, double b) {
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  // Numerically equal: only ±0 can still differ.
  bool na = std::signbit(a);
  bool nb = std::signbit(b);
  if (na == nb) return std::strong_ordering::equal;
  return na ? std::strong_ordering::less : std::strong_ordering::greater;
}

}  // namespace

std::strong_ordering compare(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return a.kind() <=> b.kind();
  switch (a.kind()) {
    case ValueKind::kInt: return a.as_int() <=> b.as_int();
    case ValueKind::kReal: return compare_reals(a.as_real(), b.as_real());
    case ValueKind::kBool: return a.as_bool() <=> b.as_bool();
    case ValueKind::kStr: return a.as_str().compare(b.as_str()) <=> 0;
    case ValueKind::kUnit: return std::strong_ordering::equal;
    case ValueKind::kTuple: return compare_sequences(a.as_tuple(), b.as_tuple());
    case ValueKind::kTagged: {
      auto c = a.tag().compare(b.tag()) <=> 0;
      if (c != std::strong_ordering::equal) return c;
      return compare(a.payload(), b.payload());
    }
    case ValueKind::kBag:
      return compare_sequences(a.as_bag().elements(), b.as_bag().elements());
  }
  return std::strong_ordering::equal;
}

std::vector<Value> row_fields(const Value& row) {
  if (row.is_tuple()) {
    auto items = row.as_tuple();
    return {items.begin(), items.end()};
  }
  return {row};
}

std::size_t row_arity(const Value& row) {
  return row.is_tuple() ? row.as_tuple().size() : 1;
}

Value make_row(std::vector<Value> fields) {
  if (fields.size() == 1) return std::move(fields.front());
  return Value::tuple(std::move(fields));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using Json = nlohmann::json;

Json to_json_node(const Value& v) {
  switch (v.kind()) {
    case ValueKind::kInt: return v.as_int();
    case ValueKind::kReal: {
      double r = v.as_real();
      if (std::isinf(r)) return Json{{"real", r > 0 ? "inf" : "-inf"}};
      return r;
    }
    case ValueKind::kBool: return v.as_bool();
    case ValueKind::kStr: return v.as_str();
    case ValueKind::kUnit: return nullptr;
    case ValueKind::kTuple: {
      Json arr = Json::array();
      for (const Value& item : v.as_tuple()) arr.push_back(to_json_node(item));
      return arr;
    }
    case ValueKind::kTagged:
      return Json{{"tag", v.tag()}, {"value", to_json_node(v.payload())}};
    case ValueKind::kBag: {
      Json arr = Json::array();
      for (const Value& item : v.as_bag()) arr.push_back(to_json_node(item));
      return Json{{"bag", std::move(arr)}};
    }
  }
  return nullptr;
}

struct ShapeError {
  std::string message;
};

Value from_json_node(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return Value::unit();
    case Json::value_t::boolean: return Value::boolean(j.get<bool>());
    case Json::value_t::number_integer: return Value::integer(j.get<std::int64_t>());
    case Json::value_t::number_unsigned: {
      auto u = j.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        throw ShapeError{"integer " + std::to_string(u) + " out of range"};
      }
      return Value::integer(static_cast<std::int64_t>(u));
    }
    case Json::value_t::number_float: return Value::real(j.get<double>());
    case Json::value_t::string: return Value::str(j.get<std::string>());
    case Json::value_t::array: {
      std::vector<Value> items;
      items.reserve(j.size());
      for (const Json& e : j) items.push_back(from_json_node(e));
      return Value::tuple(std::move(items));
    }
    case Json::value_t::object: {
      if (j.size() == 1 && j.contains("bag")) {
        const Json& elems = j.at("bag");
        if (!elems.is_array()) throw ShapeError{"\"bag\" must hold an array"};
        std::vector<Value> items;
        for (const Json& e : elems) items.push_back(from_json_node(e));
        return Value::bag(Bag::from_values(std::move(items)));
      }
      if (j.size() == 2 && j.contains("tag") && j.contains("value")) {
        const Json& tag = j.at("tag");
        if (!tag.is_string() || !is_identifier(tag.get<std::string>())) {
          throw ShapeError{"\"tag\" must be an identifier string"};
        }
        return Value::tagged(tag.get<std::string>(), from_json_node(j.at("value")));
      }
      if (j.size() == 1 && j.contains("real")) {
        const Json& r = j.at("real");
        if (r == "inf") return Value::real(std::numeric_limits<double>::infinity());
        if (r == "-inf") return Value::real(-std::numeric_limits<double>::infinity());
        throw ShapeError{"\"real\" must be \"inf\" or \"-inf\""};
      }
      throw ShapeError{"object is neither {\"bag\":...} nor {\"tag\":...,\"value\":...}"};
    }
    default:
      throw ShapeError{"unsupported JSON value"};
  }
}

// Converts a byte offset into a 1-based (line, column) pair.
std::pair<int, int> locate(std::string_view text, std::size_t offset) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

std::string serialize(const Value& v) { return to_json_node(v).dump(); }

Value deserialize(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    // nlohmann reports the offset one past the offending byte.
    std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, column] = locate(text, offset);
    throw ParseError("malformed JSON value", line, column);
  }
  try {
    return from_json_node(j);
  } catch (const ShapeError& e) {
    throw ParseError(e.message, 1, 1);
  } catch (const TypeError& e) {
    throw ParseError(e.what(), 1, 1);
  }
}

// ---------------------------------------------------------------------------
// Literal syntax

namespace {

std::string real_literal(double r) {
  if (std::isinf(r)) return r > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, r);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

void write_literal(std::string& out, const Value& v) {
  switch (v.kind()) {
    case ValueKind::kInt: out += std::to_string(v.as_int()); break;
    case ValueKind::kReal: out += real_literal(v.as_real()); break;
    case ValueKind::kBool: out += v.as_bool() ? "true" : "false"; break;
    case ValueKind::kStr: out += Json(v.as_str()).dump(); break;
    case ValueKind::kUnit: out += "unit"; break;
    case ValueKind::kTuple: {
      auto items = v.as_tuple();
      out += '(';
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        write_literal(out, items[i]);
      }
      if (items.size() == 1) out += ',';
      out += ')';
      break;
    }
    case ValueKind::kTagged: {
      out += v.tag();
      out += '(';
      const Value& p = v.payload();
      if (p.is_tuple() && p.as_tuple().size() != 1) {
        auto items = p.as_tuple();
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (i) out += ", ";
          write_literal(out, items[i]);
        }
      } else {
        write_literal(out, p);
      }
      out += ')';
      break;
    }
    case ValueKind::kBag: {
      out += "bag {";
      bool first = true;
      for (const Value& e : v.as_bag()) {
        if (!first) out += ", ";
        first = false;
        write_literal(out, e);
      }
      out += '}';
      break;
    }
  }
}

}  // namespace

std::string to_literal(const Value& v) {
  std::string out;
  write_literal(out, v);
  return out;
}

std::ostream& operator<<(std::ostream& os, const Value& v) {
  return os << to_literal(v);
}

}  // namespace pbdb
