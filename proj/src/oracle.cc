#include "pbdb/oracle.h"

#include <algorithm>
#include <sstream>

#include "pbdb/errors.h"

namespace pbdb::oracle {

namespace {

using Assignment = std::map<std::string, Value, std::less<>>;
using Outcome = std::pair<Value, double>;

Value lookup(const Term& t, const Assignment& env) {
  if (t.kind == Term::Kind::kVar) return env.at(t.var);
  return t.literal;
}

// Guard comparison: ints and reals compare as numbers, everything else by the
// value order.
bool holds(ExprOp op, const Value& a, const Value& b) {
  int c;
  if (a.is_numeric() && b.is_numeric() && a.kind() != b.kind()) {
    long double x = a.is_int() ? static_cast<long double>(a.as_int()) : a.as_real();
    long double y = b.is_int() ? static_cast<long double>(b.as_int()) : b.as_real();
    c = x < y ? -1 : (x > y ? 1 : 0);
  } else {
    auto o = compare(a, b);
    c = o < 0 ? -1 : (o > 0 ? 1 : 0);
  }
  switch (op) {
    case ExprOp::kEq: return c == 0;
    case ExprOp::kNe: return c != 0;
    case ExprOp::kLt: return c < 0;
    case ExprOp::kLe: return c <= 0;
    case ExprOp::kGt: return c > 0;
    case ExprOp::kGe: return c >= 0;
    default: throw EvalError("not a comparison");
  }
}

void all_matches(const Rule& rule, const std::vector<Value>& world, std::size_t k,
                 const Assignment& env, std::vector<Assignment>& out) {
  if (k == rule.body.size()) {
    for (const Guard& g : rule.guards) {
      if (!holds(g.op, lookup(g.lhs, env), lookup(g.rhs, env))) return;
    }
    out.push_back(env);
    return;
  }
  const Atom& atom = rule.body[k];
  for (const Value& fact : world) {
    if (!fact.is_tagged() || fact.tag() != atom.tag) continue;
    std::vector<Value> fields;
    if (fact.payload().is_tuple()) {
      for (const Value& f : fact.payload().as_tuple()) fields.push_back(f);
    } else {
      fields.push_back(fact.payload());
    }
    if (fields.size() != atom.args.size()) continue;
    Assignment next = env;
    bool ok = true;
    for (std::size_t j = 0; j < fields.size() && ok; ++j) {
      const Term& arg = atom.args[j];
      if (arg.kind == Term::Kind::kLit) {
        ok = compare(arg.literal, fields[j]) == 0;
      } else if (next.count(arg.var)) {
        ok = compare(next.at(arg.var), fields[j]) == 0;
      } else {
        next.emplace(arg.var, fields[j]);
      }
    }
    if (ok) all_matches(rule, world, k + 1, next, out);
  }
}

std::vector<Outcome> draw_outcomes(const Term& t, const Assignment& env) {
  auto param = [&](std::size_t i) {
    Value v = lookup(t.args[i], env);
    if (!v.is_numeric()) throw EvalError("non-numeric distribution parameter");
    return v.as_number();
  };
  std::vector<Outcome> out;
  switch (t.dist) {
    case DistKind::kBernoulli: {
      double p = param(0);
      if (p < 0 || p > 1) throw EvalError("bernoulli parameter outside [0, 1]");
      if (p < 1) out.emplace_back(Value::integer(0), 1 - p);
      if (p > 0) out.emplace_back(Value::integer(1), p);
      return out;
    }
    case DistKind::kPoisson:
      if (param(0) == 0) return {{Value::integer(0), 1.0}};
      throw NotFiniteError("poisson draw");
    case DistKind::kNormal: throw NotFiniteError("normal draw");
  }
  return out;
}

// Every head fact a match can produce, with its probability.
std::vector<Outcome> head_outcomes(const Rule& rule, const Assignment& env) {
  std::vector<std::pair<std::vector<Value>, double>> partial = {{{}, 1.0}};
  for (const Term& t : rule.head) {
    std::vector<std::pair<std::vector<Value>, double>> next;
    for (const auto& [fields, w] : partial) {
      if (t.kind == Term::Kind::kDist) {
        for (const auto& [v, p] : draw_outcomes(t, env)) {
          auto f = fields;
          f.push_back(v);
          next.emplace_back(std::move(f), w * p);
        }
      } else {
        auto f = fields;
        f.push_back(lookup(t, env));
        next.emplace_back(std::move(f), w);
      }
    }
    partial = std::move(next);
  }
  std::vector<Outcome> out;
  for (auto& [fields, w] : partial) {
    Value payload = fields.size() == 1 ? fields.front() : Value::tuple(std::move(fields));
    out.emplace_back(Value::tagged(rule.head_tag, std::move(payload)), w);
  }
  return out;
}

void run_from(const RuleProgram& program, std::size_t r, const std::vector<Value>& world,
              double weight, std::vector<std::pair<std::vector<Value>, double>>& leaves);

void choose(const RuleProgram& program, std::size_t r, const std::vector<Value>& world,
            const std::vector<std::vector<Outcome>>& options, std::size_t m,
            std::vector<Value>& added, double weight,
            std::vector<std::pair<std::vector<Value>, double>>& leaves) {
  if (m == options.size()) {
    std::vector<Value> next = world;
    next.insert(next.end(), added.begin(), added.end());
    run_from(program, r + 1, next, weight, leaves);
    return;
  }
  for (const auto& [fact, p] : options[m]) {
    added.push_back(fact);
    choose(program, r, world, options, m + 1, added, weight * p, leaves);
    added.pop_back();
  }
}

void run_from(const RuleProgram& program, std::size_t r, const std::vector<Value>& world,
              double weight, std::vector<std::pair<std::vector<Value>, double>>& leaves) {
  if (r == program.rules.size()) {
    leaves.emplace_back(world, weight);
    return;
  }
  const Rule& rule = program.rules[r];
  std::vector<Assignment> matches;
  all_matches(rule, world, 0, {}, matches);
  std::vector<std::vector<Outcome>> options;
  for (const Assignment& env : matches) options.push_back(head_outcomes(rule, env));
  std::vector<Value> added;
  choose(program, r, world, options, 0, added, weight, leaves);
}

// Sorts leaves by world and adds the weights of each world smallest first.
ExactDist collect(std::vector<std::pair<std::vector<Value>, double>> leaves) {
  std::vector<std::pair<Value, double>> keyed;
  keyed.reserve(leaves.size());
  for (auto& [elems, w] : leaves) {
    std::sort(elems.begin(), elems.end());
    keyed.emplace_back(Value::bag(Bag::from_sorted(std::move(elems))), w);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  std::vector<ExactDist::Entry> merged;
  for (auto& [v, w] : keyed) {
    if (!merged.empty() && merged.back().first == v) {
      merged.back().second += w;
    } else {
      merged.emplace_back(v, w);
    }
  }
  return ExactDist::from_weights(std::move(merged));
}

void enumerate_product(const std::vector<ExactDist>& dists, std::size_t i,
                       std::vector<Value>& chosen, double weight,
                       std::vector<std::pair<std::vector<Value>, double>>& leaves) {
  if (i == dists.size()) {
    leaves.emplace_back(chosen, weight);
    return;
  }
  for (const auto& [v, w] : dists[i]) {
    chosen.push_back(v);
    enumerate_product(dists, i + 1, chosen, weight * w, leaves);
    chosen.pop_back();
  }
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

ExactDist enum_worlds(const RuleProgram& program, const Bag& input) {
  std::vector<std::pair<std::vector<Value>, double>> leaves;
  std::vector<Value> world(input.begin(), input.end());
  run_from(program, 0, world, 1.0, leaves);
  return collect(std::move(leaves));
}

ExactDist product_enumeration(const std::vector<ExactDist>& dists) {
  std::vector<std::pair<std::vector<Value>, double>> leaves;
  std::vector<Value> chosen;
  enumerate_product(dists, 0, chosen, 1.0, leaves);
  return collect(std::move(leaves));
}

GateReport gate(const std::map<Value, std::size_t>& empirical, const ExactDist& exact,
                const StatGate& g) {
  GateReport report;
  auto fail = [&](std::string line) {
    report.pass = false;
    report.failures.push_back(std::move(line));
  };
  if (g.n == 0) {
    fail("no samples");
    return report;
  }
  std::size_t total = 0;
  for (const auto& [v, c] : empirical) {
    total += c;
    if (exact.weight(v) == 0) fail(to_literal(v) + ": observed " + std::to_string(c) +
                                   " times but has probability 0");
  }
  if (total != g.n) {
    fail("counts sum to " + std::to_string(total) + ", expected " + std::to_string(g.n));
  }
  for (const auto& [v, p] : exact) {
    auto it = empirical.find(v);
    double phat = it == empirical.end() ? 0.0
                                        : static_cast<double>(it->second) /
                                              static_cast<double>(g.n);
    double tol = g.tolerance(p);
    if (std::abs(phat - p) > tol) {
      std::ostringstream line;
      line << to_literal(v) << ": p_hat=" << phat << " p=" << p << " |diff|="
           << std::abs(phat - p) << " > " << tol;
      fail(line.str());
    }
  }
  return report;
}

std::map<Value, std::size_t> tally(const std::vector<Value>& samples) {
  std::map<Value, std::size_t> counts;
  for (const Value& v : samples) ++counts[v];
  return counts;
}

std::size_t powerbag_multiplicity(const Bag& b, const Bag& s) {
  std::size_t m = 1;
  for (const auto& [x, k] : s.counts()) m *= binomial(b.count(x), k);
  return m;
}

}  // namespace pbdb::oracle
