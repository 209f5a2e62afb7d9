#ifndef PBDB_BAG_H_
#define PBDB_BAG_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "pbdb/value.h"

namespace pbdb {

// A finite multiset of values, stored as its canonical representative: the
// element sequence sorted non-decreasingly under compare().  Sorting is the
// section of the quotient X^n -> B_n X, so two bags are equal iff their
// sequences are.
class Bag {
 public:
  Bag() = default;
  Bag(std::initializer_list<Value> items);
  // Sorts `items` into canonical order.
  static Bag from_values(std::vector<Value> items);
  // Trusts that `sorted` is already canonical (checked in debug builds).
  static Bag from_sorted(std::vector<Value> sorted);

  std::span<const Value> elements() const { return elements_; }
  auto begin() const { return elements_.begin(); }
  auto end() const { return elements_.end(); }

  bool is_empty() const { return elements_.empty(); }
  std::size_t size() const { return elements_.size(); }
  // Multiplicity of x (binary search over the canonical sequence).
  std::size_t count(const Value& x) const;
  bool contains(const Value& x) const { return count(x) > 0; }

  // Increments the multiplicity of x by one.
  Bag add(const Value& x) const;
  // Decrements the multiplicity of x by one; a bag without x is returned
  // unchanged.
  Bag remove(const Value& x) const;

  bool is_canonical() const;

  // Distinct elements with their multiplicities, in canonical order.
  std::vector<std::pair<Value, std::size_t>> counts() const;

  friend bool operator==(const Bag& a, const Bag& b);
  friend std::strong_ordering operator<=>(const Bag& a, const Bag& b);

 private:
  explicit Bag(std::vector<Value> sorted) : elements_(std::move(sorted)) {}

  std::vector<Value> elements_;
};

inline Bag empty() { return Bag(); }
inline bool is_empty(const Bag& b) { return b.is_empty(); }
inline std::size_t size(const Bag& b) { return b.size(); }
inline std::size_t count(const Bag& b, const Value& x) { return b.count(x); }
inline Bag add(const Value& x, const Bag& b) { return b.add(x); }
inline Bag remove(const Value& x, const Bag& b) { return b.remove(x); }

// f(e1, f(e2, ... f(en, init))) over the canonical order e1..en.  The result
// is independent of order whenever f is commutative, i.e.
// f(x1, f(x2, y)) == f(x2, f(x1, y)).
template <typename Acc, typename F>
Acc fold(F&& f, Acc init, const Bag& b) {
  auto elems = b.elements();
  for (auto it = elems.rbegin(); it != elems.rend(); ++it) {
    init = f(*it, std::move(init));
  }
  return init;
}

// Disjoint (additive) union: multiplicities add.
Bag uplus(const Bag& b1, const Bag& b2);

// Bag monad.
inline Bag unit(const Value& x) { return Bag({x}); }

template <typename F>
Bag map(F&& g, const Bag& b) {
  std::vector<Value> out;
  out.reserve(b.size());
  for (const Value& x : b) out.push_back(g(x));
  return Bag::from_values(std::move(out));
}

// f =<< {|x1 .. xn|} = f(x1) ⊎ ... ⊎ f(xn).
template <typename F>
Bag bind(F&& f, const Bag& b) {
  std::vector<Value> out;
  for (const Value& x : b) {
    Bag part = f(x);
    out.insert(out.end(), part.begin(), part.end());
  }
  return Bag::from_values(std::move(out));
}

// Multiplication µ: every element must be a bag (TypeError otherwise).
Bag flatten(const Bag& bb);

// x, {|y1..yn|} -> {|(x,y1) .. (x,yn)|}, built as the fold of (add, π₂).
Bag strength(const Value& x, const Bag& b);

// Unique monoid homomorphism extending f : X -> M along the inclusion
// X -> B(X), for a commutative monoid (M, plus, e).
template <typename M, typename F, typename Plus>
M free_extend(F&& f, Plus&& plus, M e, const Bag& b) {
  return fold([&](const Value& x, M acc) { return plus(f(x), std::move(acc)); },
              std::move(e), b);
}

}  // namespace pbdb

#endif  // PBDB_BAG_H_
