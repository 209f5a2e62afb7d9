#ifndef PBDB_ORACLE_H_
#define PBDB_ORACLE_H_

// Reference implementations for testing.  Everything here is deliberately
// naive and shares no evaluation code with the engine beyond the value types
// and the rule-program parser.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbdb/prob.h"
#include "pbdb/rules.h"
#include "pbdb/value.h"

namespace pbdb::oracle {

// All possible worlds of a discrete rule program by direct recursion over
// every combination of draws.  NotFiniteError on normal or poisson heads.
ExactDist enum_worlds(const RuleProgram& program, const Bag& input);

// Independent-product enumeration of a list of distributions into a
// distribution over bags.
ExactDist product_enumeration(const std::vector<ExactDist>& dists);

template <typename X, typename Y>
struct Counterexample {
  X x1;
  X x2;
  Y y;
};

// Checks f(x1, f(x2, y)) == f(x2, f(x1, y)) on every triple drawn from the
// samples; returns the first violation in iteration order.
template <typename X, typename Y, typename F>
std::optional<Counterexample<X, Y>> check_commutative(F&& f, const std::vector<X>& xs,
                                                      const std::vector<Y>& ys) {
  for (const X& x1 : xs) {
    for (const X& x2 : xs) {
      for (const Y& y : ys) {
        if (!(f(x1, f(x2, y)) == f(x2, f(x1, y)))) return Counterexample<X, Y>{x1, x2, y};
      }
    }
  }
  return std::nullopt;
}

struct StatGate {
  std::size_t n = 0;
  double sigmas = 3.0;

  // Half-width of the acceptance band around probability p.
  double tolerance(double p) const { return sigmas * std::sqrt(p * (1 - p) / static_cast<double>(n)); }
};

struct GateReport {
  bool pass = true;
  std::vector<std::string> failures;  // one line per offending point
};

// Per-point check |p_hat - p| <= 3 sqrt(p (1 - p) / n) over the support of
// `exact`; any observed value outside the support fails.
GateReport gate(const std::map<Value, std::size_t>& empirical, const ExactDist& exact,
                const StatGate& g);

// Empirical counts of a list of sampled values.
std::map<Value, std::size_t> tally(const std::vector<Value>& samples);

// Closed-form multiplicity of x in each bag operator's result.
struct CountLaws {
  static std::size_t dunion(std::size_t a, std::size_t b) { return a + b; }
  static std::size_t difference(std::size_t a, std::size_t b) { return a > b ? a - b : 0; }
  static std::size_t intersect(std::size_t a, std::size_t b) { return a < b ? a : b; }
  static std::size_t union_(std::size_t a, std::size_t b) { return a > b ? a : b; }
  static std::size_t dedup(std::size_t a) { return a > 0 ? 1 : 0; }
};

// Multiplicity of sub-bag s in powerbag(b): prod_x C(count(b,x), count(s,x)).
std::size_t powerbag_multiplicity(const Bag& b, const Bag& s);

}  // namespace pbdb::oracle

#endif  // PBDB_ORACLE_H_
