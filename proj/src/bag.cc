#include "pbdb/bag.h"

#include <algorithm>
#include <cassert>
#include <iterator>

#include "pbdb/errors.h"

namespace pbdb {

Bag::Bag(std::initializer_list<Value> items) : elements_(items) {
  std::sort(elements_.begin(), elements_.end());
}

Bag Bag::from_values(std::vector<Value> items) {
  std::sort(items.begin(), items.end());
  return Bag(std::move(items));
}

Bag Bag::from_sorted(std::vector<Value> sorted) {
  assert(std::is_sorted(sorted.begin(), sorted.end()));
  return Bag(std::move(sorted));
}

std::size_t Bag::count(const Value& x) const {
  auto [lo, hi] = std::equal_range(elements_.begin(), elements_.end(), x);
  return static_cast<std::size_t>(hi - lo);
}

Bag Bag::add(const Value& x) const {
  std::vector<Value> out;
  out.reserve(elements_.size() + 1);
  auto pos = std::upper_bound(elements_.begin(), elements_.end(), x);
  out.insert(out.end(), elements_.begin(), pos);
  out.push_back(x);
  out.insert(out.end(), pos, elements_.end());
  return Bag(std::move(out));
}

Bag Bag::remove(const Value& x) const {
  auto pos = std::lower_bound(elements_.begin(), elements_.end(), x);
  if (pos == elements_.end() || *pos != x) return *this;
  std::vector<Value> out;
  out.reserve(elements_.size() - 1);
  out.insert(out.end(), elements_.begin(), pos);
  out.insert(out.end(), std::next(pos), elements_.end());
  return Bag(std::move(out));
}

bool Bag::is_canonical() const {
  return std::is_sorted(elements_.begin(), elements_.end());
}

std::vector<std::pair<Value, std::size_t>> Bag::counts() const {
  std::vector<std::pair<Value, std::size_t>> out;
  for (const Value& x : elements_) {
    if (!out.empty() && out.back().first == x) {
      ++out.back().second;
    } else {
      out.emplace_back(x, 1);
    }
  }
  return out;
}

bool operator==(const Bag& a, const Bag& b) {
  return a.elements_.size() == b.elements_.size() &&
         std::equal(a.elements_.begin(), a.elements_.end(), b.elements_.begin());
}

std::strong_ordering operator<=>(const Bag& a, const Bag& b) {
  return std::lexicographical_compare_three_way(
      a.elements_.begin(), a.elements_.end(), b.elements_.begin(),
      b.elements_.end(), [](const Value& x, const Value& y) { return compare(x, y); });
}

Bag uplus(const Bag& b1, const Bag& b2) {
  std::vector<Value> out;
  out.reserve(b1.size() + b2.size());
  std::merge(b1.begin(), b1.end(), b2.begin(), b2.end(), std::back_inserter(out));
  return Bag::from_sorted(std::move(out));
}

Bag flatten(const Bag& bb) {
  return bind(
      [](const Value& inner) -> const Bag& {
        if (!inner.is_bag()) {
          throw TypeError("flatten: element " + to_literal(inner) + " is not a bag");
        }
        return inner.as_bag();
      },
      bb);
}

Bag strength(const Value& x, const Bag& b) {
  using Acc = std::pair<Bag, Value>;
  Acc result = fold(
      [](const Value& y, Acc acc) {
        return Acc{acc.first.add(Value::tuple({acc.second, y})), acc.second};
      },
      Acc{Bag(), x}, b);
  return std::move(result.first);
}

}  // namespace pbdb
