#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbdb/balg.h"
#include "pbdb/errors.h"
#include "pbdb/oracle.h"
#include "pbdb/prob.h"
#include "test_support.h"

using namespace pbdb;
using pbdb::testing::Rng;
using pbdb::testing::pick;

namespace {

Value i(std::int64_t x) { return Value::integer(x); }
Value s(std::string x) { return Value::str(std::move(x)); }
Value tup(std::vector<Value> v) { return Value::tuple(std::move(v)); }
Value bv(Bag b) { return Value::bag(std::move(b)); }

ExactDist dist(std::vector<ExactDist::Entry> e) { return ExactDist::from_weights(std::move(e)); }

constexpr double kEps = 1e-9;

// Kleisli arrows over the five-point space, deterministic in x.
ExactDist arrow_f(const Value& x) {
  std::string key = serialize(x);
  double p = 0.1 + 0.8 * static_cast<double>(key.size() % 5) / 4.0;
  return dist({{Value::tagged("f", x), p}, {i(static_cast<std::int64_t>(key.size())), 1 - p}});
}

ExactDist arrow_g(const Value& x) {
  return dist({{tup({x, i(0)}), 0.25}, {tup({x, i(1)}), 0.5}, {s("g"), 0.25}});
}

// Replaces every Table(name) in q2 by q1.
QueryPtr substitute(const QueryPtr& q2, const std::string& name, const QueryPtr& q1) {
  if (q2->op == QueryOp::kTable) return q2->table == name ? q1 : q2;
  auto copy = std::make_shared<Query>(*q2);
  for (auto& in : copy->inputs) in = substitute(in, name, q1);
  return copy;
}

QueryPtr random_int_query(Rng& rng, int depth, bool allow_scalar) {
  QueryPtr q = qb::table("db");
  for (int k = 0; k < depth; ++k) {
    auto c = i(static_cast<std::int64_t>(pick(rng, 4)));
    switch (pick(rng, 7)) {
      case 0: q = qb::select(ex::binary(ExprOp::kGt, ex::row(), ex::lit(c)), q); break;
      case 1: q = qb::map(ex::binary(ExprOp::kAdd, ex::row(), ex::lit(c)), q); break;
      case 2: q = qb::unary(QueryOp::kDedup, q); break;
      case 3: q = qb::binary(QueryOp::kDUnion, q, qb::lit(Bag{c})); break;
      case 4: q = qb::binary(QueryOp::kDifference, q, qb::lit(Bag{c, c})); break;
      case 5: q = qb::binary(QueryOp::kIntersect, q, qb::table("db")); break;
      default: q = qb::map(ex::binary(ExprOp::kMul, ex::row(), ex::lit(c)), q); break;
    }
  }
  if (allow_scalar && pick(rng, 3) == 0) q = qb::agg(AggKind::kSize, q);
  return q;
}

ExactDist random_world_dist(Rng& rng) {
  auto space = testing::int_space(4);
  std::vector<ExactDist::Entry> entries;
  std::size_t k = 1 + pick(rng, 4);
  double total = 0;
  std::vector<double> w(k);
  for (auto& x : w) total += (x = 0.1 + std::uniform_real_distribution<double>(0, 1)(rng));
  for (std::size_t j = 0; j < k; ++j) {
    entries.emplace_back(bv(testing::random_bag(rng, space, 4)), w[j] / total);
  }
  return dist(std::move(entries));
}

double mean_of(const std::vector<double>& xs) {
  double m = 0;
  for (double x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  double m = mean_of(xs), v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  return std::sqrt(v / static_cast<double>(xs.size() - 1));
}

std::vector<double> draws(const Sampler& smp, std::size_t n, std::uint64_t master) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = sample(smp, Seed(master, {k})).as_number();
  return out;
}

}  // namespace

TEST_CASE("ExactDist construction") {
  ExactDist d = dist({{i(2), 0.25}, {i(1), 0.5}, {i(2), 0.25}, {i(3), 0.0}});
  REQUIRE(d.size() == 2);
  CHECK(d.entries()[0].first == i(1));
  CHECK(d.weight(i(2)) == 0.5);
  CHECK(d.weight(i(3)) == 0.0);
  CHECK_THROWS_AS(dist({{i(1), 0.5}}), ProbabilityError);
  CHECK_THROWS_AS(dist({{i(1), 1.5}, {i(2), -0.5}}), ProbabilityError);
  CHECK_THROWS_AS(dist({}), ProbabilityError);
  CHECK_NOTHROW(dist({{i(1), 0.5 + 1e-10}, {i(2), 0.5}}));
}

TEST_CASE("Giry operations: worked examples") {
  ExactDist d1 = dirac(i(1));
  CHECK(d1.size() == 1);
  CHECK(d1.weight(i(1)) == 1.0);
  ExactDist coin = dist({{i(0), 0.5}, {i(1), 0.5}});
  ExactDist shifted = bind_exact([](const Value& x) { return dirac(i(x.as_int() + 1)); }, coin);
  CHECK(approx_equal(shifted, dist({{i(1), 0.5}, {i(2), 0.5}})));
  CHECK(approx_equal(strength_exact(i(9), coin),
                     dist({{tup({i(9), i(0)}), 0.5}, {tup({i(9), i(1)}), 0.5}})));
  ExactDist pair = product_exact(coin, dist({{s("a"), 0.25}, {s("b"), 0.75}}));
  CHECK(pair.size() == 4);
  CHECK(pair.weight(tup({i(1), s("b")})) == doctest::Approx(0.375));
  CHECK(approx_equal(map_exact([](const Value&) { return Value::unit(); }, coin), dirac(Value::unit())));
}

TEST_CASE("Giry monad laws on random distributions") {
  Rng rng(51);
  auto space = testing::five_point_space();
  for (int trial = 0; trial < 500; ++trial) {
    ExactDist p = testing::random_dist(rng, space);
    Value x = space[pick(rng, space.size())];
    CHECK(max_weight_diff(bind_exact(arrow_f, dirac(x)), arrow_f(x)) <= kEps);
    CHECK(max_weight_diff(bind_exact([](const Value& v) { return dirac(v); }, p), p) <= kEps);
    ExactDist lhs = bind_exact(arrow_g, bind_exact(arrow_f, p));
    ExactDist rhs = bind_exact([](const Value& v) { return bind_exact(arrow_g, arrow_f(v)); }, p);
    CHECK(max_weight_diff(lhs, rhs) <= kEps);
    CHECK(std::abs(lhs.total() - 1) <= kEps);
  }
}

TEST_CASE("seeds") {
  Seed a(7, {1, 2});
  CHECK(a.key() == Seed(7, {1, 2}).key());
  CHECK(a.child(3).path() == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(a.key() != Seed(7, {2, 1}).key());
  CHECK(a.key() != Seed(8, {1, 2}).key());
  CHECK(Seed(7).key() != Seed(7, {0}).key());
}

TEST_CASE("sampler determinism") {
  Sampler smp = smp::bind(smp::bernoulli(0.5), [](const Value& x) {
    return x.as_int() ? smp::normal(0, 1) : smp::poisson(4);
  });
  for (std::uint64_t k = 0; k < 200; ++k) {
    CHECK(sample(smp, Seed(99, {k})) == sample(smp, Seed(99, {k})));
  }
  CHECK(sample(smp::dirac(i(7)), Seed(1)) == i(7));
  CHECK(sample(smp::dirac(i(7)), Seed(12345, {9, 9})) == i(7));
}

TEST_CASE("distinct stream paths give distinct streams") {
  std::set<std::vector<std::uint64_t>> prefixes;
  const std::size_t kStreams = 2000;
  for (std::uint64_t k = 0; k < kStreams; ++k) {
    for (const Seed& seed : {Seed(3, {k}), Seed(3, {k, 0}), Seed(4, {k})}) {
      RandomStream r(seed);
      std::vector<std::uint64_t> prefix(64);
      for (auto& x : prefix) x = r.next_u64();
      prefixes.insert(prefix);
    }
  }
  CHECK(prefixes.size() == 3 * kStreams);
  // Neighbouring streams are uncorrelated: |corr| within 4 / sqrt(n).
  const std::size_t n = 100000;
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::uint64_t k = 0; k < n; ++k) {
    RandomStream a(Seed(5, {k})), b(Seed(5, {k + 1}));
    double x = a.uniform(), y = b.uniform();
    sx += x, sy += y, sxy += x * y, sxx += x * x, syy += y * y;
  }
  double dn = static_cast<double>(n);
  double corr = (sxy / dn - sx / dn * sy / dn) /
                std::sqrt((sxx / dn - sx * sx / dn / dn) * (syy / dn - sy * sy / dn / dn));
  CHECK(std::abs(corr) < 4 / std::sqrt(dn));
}

TEST_CASE("uniform stays in [0, 1)") {
  RandomStream r(Seed(0));
  double lo = 1, hi = 0;
  for (int k = 0; k < 100000; ++k) {
    double u = r.uniform();
    REQUIRE(u >= 0);
    REQUIRE(u < 1);
    lo = std::min(lo, u), hi = std::max(hi, u);
  }
  CHECK(lo < 1e-3);
  CHECK(hi > 1 - 1e-3);
}

TEST_CASE("moments of the primitive samplers, 3 sigma") {
  const std::size_t n = 100000;
  const double dn = static_cast<double>(n);
  SUBCASE("bernoulli(0.9)") {
    double m = mean_of(draws(smp::bernoulli(0.9), n, 1));
    CHECK(std::abs(m - 0.9) <= 3 * std::sqrt(0.9 * 0.1 / dn));
  }
  SUBCASE("poisson(3)") {
    auto xs = draws(smp::poisson(3), n, 2);
    CHECK(std::abs(mean_of(xs) - 3) <= 3 * std::sqrt(3 / dn));
    CHECK(std::abs(stddev_of(xs) / std::sqrt(3.0) - 1) < 0.02);
  }
  SUBCASE("poisson(80), rejection regime") {
    auto xs = draws(smp::poisson(80), n, 3);
    CHECK(std::abs(mean_of(xs) - 80) <= 3 * std::sqrt(80 / dn));
    CHECK(std::abs(stddev_of(xs) / std::sqrt(80.0) - 1) < 0.02);
  }
  SUBCASE("poisson(1e6)") {
    auto xs = draws(smp::poisson(1e6), 20000, 4);
    CHECK(std::abs(mean_of(xs) - 1e6) <= 3 * std::sqrt(1e6 / 20000.0));
  }
  SUBCASE("normal(5, 2)") {
    auto xs = draws(smp::normal(5, 2), n, 5);
    CHECK(std::abs(mean_of(xs) - 5) <= 3 * 2 / std::sqrt(dn));
    CHECK(std::abs(stddev_of(xs) / 2 - 1) < 0.02);
  }
}

TEST_CASE("poisson(3) frequencies match the pmf") {
  const std::size_t n = 100000;
  std::vector<std::size_t> counts(40, 0);
  Sampler smp = smp::poisson(3);
  for (std::size_t k = 0; k < n; ++k) {
    auto x = static_cast<std::size_t>(sample(smp, Seed(6, {k})).as_int());
    REQUIRE(x < counts.size());
    ++counts[x];
  }
  oracle::StatGate g{n};
  double pmf = std::exp(-3.0);
  for (std::size_t k = 0; k < 15; ++k) {
    double phat = static_cast<double>(counts[k]) / static_cast<double>(n);
    CHECK_MESSAGE(std::abs(phat - pmf) <= g.tolerance(pmf), "k=" << k);
    pmf *= 3.0 / static_cast<double>(k + 1);
  }
}

TEST_CASE("exact_of") {
  CHECK(approx_equal(exact_of(smp::bernoulli(0.25)), dist({{i(0), 0.75}, {i(1), 0.25}})));
  Sampler mix = smp::bind(smp::bernoulli(0.5), [](const Value& x) {
    return smp::bernoulli(x.as_int() ? 0.9 : 0.1);
  });
  CHECK(approx_equal(exact_of(mix), dist({{i(0), 0.5}, {i(1), 0.5}})));
  CHECK_THROWS_AS(exact_of(smp::normal(0, 1)), NotFiniteError);
  CHECK_THROWS_AS(exact_of(smp::poisson(3)), NotFiniteError);
  CHECK(approx_equal(exact_of(smp::poisson(0)), dirac(i(0))));
  CHECK(approx_equal(exact_of(smp::bernoulli(1)), dirac(i(1))));
  Sampler mapped = smp::map([](const Value& x) { return tup({x, x}); }, smp::bernoulli(0.5));
  CHECK(approx_equal(exact_of(mapped), dist({{tup({i(0), i(0)}), 0.5}, {tup({i(1), i(1)}), 0.5}})));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(smp::bernoulli(1.5), EvalError);
  CHECK_THROWS_AS(smp::bernoulli(-0.1), EvalError);
  CHECK_THROWS_AS(smp::normal(0, 0), EvalError);
  CHECK_THROWS_AS(smp::normal(INFINITY, 1), EvalError);
  CHECK_THROWS_AS(smp::poisson(-1), EvalError);
  CHECK_THROWS_AS(smp::poisson(INFINITY), EvalError);
}

TEST_CASE("discrete samplers: frequencies pass the 3 sigma gate against exact_of") {
  const std::size_t n = 100000;
  ExactDist cat = dist({{s("a"), 0.2}, {s("b"), 0.3}, {tup({i(1), i(2)}), 0.5}});
  std::vector<Sampler> samplers = {
      smp::bernoulli(0.3),
      smp::categorical(cat),
      smp::bind(smp::bernoulli(0.4),
                [](const Value& x) { return x.as_int() ? smp::bernoulli(0.7) : smp::dirac(i(5)); }),
      smp::map([](const Value& x) { return Value::tagged("t", x); }, smp::categorical(cat)),
      smp::bind(smp::categorical(cat), [](const Value& x) {
        return x.is_str() ? smp::bernoulli(0.5) : smp::dirac(x);
      }),
  };
  for (std::size_t idx = 0; idx < samplers.size(); ++idx) {
    std::vector<Value> xs(n);
    for (std::size_t k = 0; k < n; ++k) xs[k] = sample(samplers[idx], Seed(70 + idx, {k}));
    oracle::GateReport r = oracle::gate(oracle::tally(xs), exact_of(samplers[idx]), {n});
    CHECK_MESSAGE(r.pass, "sampler " << idx << ": " << (r.failures.empty() ? "" : r.failures[0]));
  }
}

TEST_CASE("pushforward_exact: worked examples") {
  ExactDist d = dist({{bv(Bag{i(1), i(2)}), 0.5}, {bv(Bag{i(3)}), 0.5}});
  CHECK(approx_equal(pushforward_exact(*qb::table("db"), d), d));
  QueryPtr pos = qb::select(ex::binary(ExprOp::kGt, ex::row(), ex::lit(i(0))), qb::table("db"));
  CHECK(approx_equal(pushforward_exact(*pos, dirac(bv(Bag{i(-1), i(1)}))), dirac(bv(Bag{i(1)}))));
  // Collapsing worlds merges weights.
  QueryPtr size = qb::agg(AggKind::kSize, qb::table("db"));
  ExactDist three = dist({{bv(Bag{i(1)}), 0.2}, {bv(Bag{i(2)}), 0.3}, {bv(Bag{i(1), i(2)}), 0.5}});
  CHECK(approx_equal(pushforward_exact(*size, three), dist({{i(1), 0.5}, {i(2), 0.5}})));
}

TEST_CASE("pushforward_exact: two-world gross example") {
  auto cast = [](const char* a, const char* m) { return Value::tagged("cast", tup({s(a), s(m)})); };
  auto gross = [](const char* m, double r) { return Value::tagged("gross", tup({s(m), Value::real(r)})); };
  Bag base{cast("Alice", "M1"), cast("Bob", "M1"), cast("Carol", "M2"), gross("M2", 1.5e8)};
  Bag world_a = base.add(gross("M1", 2.5e8));
  Bag world_b = base.add(gross("M1", 1.5e8));
  const double pa = 0.3;
  ExactDist d = dist({{bv(world_a), pa}, {bv(world_b), 1 - pa}});
  QueryPtr q1 = qb::project(
      {1},
      qb::select(ex::binary(ExprOp::kGt, ex::field(4), ex::lit(i(200000000))),
                 qb::select(ex::binary(ExprOp::kEq, ex::field(2), ex::field(3)),
                            qb::binary(QueryOp::kProduct,
                                       qb::map(ex::untag("cast"),
                                               qb::select(ex::is_tag("cast"), qb::table("db"))),
                                       qb::map(ex::untag("gross"),
                                               qb::select(ex::is_tag("gross"), qb::table("db")))))));
  // Per-world oracle evaluation.
  auto answer = [](const Bag& w) {
    std::vector<Value> out;
    for (const Value& x : w) {
      for (const Value& y : w) {
        if (x.tag() == "cast" && y.tag() == "gross" &&
            x.payload().as_tuple()[1] == y.payload().as_tuple()[0] &&
            y.payload().as_tuple()[1].as_real() > 2e8) {
          out.push_back(x.payload().as_tuple()[0]);
        }
      }
    }
    return Value::bag(Bag::from_values(out));
  };
  std::vector<ExactDist::Entry> oracle_entries = {{answer(world_a), pa}, {answer(world_b), 1 - pa}};
  ExactDist expected = dist(oracle_entries);
  ExactDist got = pushforward_exact(*q1, d);
  CHECK(approx_equal(got, expected));
  CHECK(got.weight(bv(Bag{s("Alice"), s("Bob")})) == doctest::Approx(pa).epsilon(1e-12));
  CHECK(got.weight(bv(Bag())) == doctest::Approx(1 - pa).epsilon(1e-12));
}

TEST_CASE("pushforward functoriality on random queries") {
  Rng rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    QueryPtr q1 = random_int_query(rng, 1 + static_cast<int>(pick(rng, 3)), false);
    QueryPtr q2 = random_int_query(rng, 1 + static_cast<int>(pick(rng, 3)), true);
    ExactDist d = random_world_dist(rng);
    ExactDist composed = pushforward_exact(*substitute(q2, "db", q1), d);
    ExactDist staged = pushforward_exact(*q2, pushforward_exact(*q1, d));
    CHECK(max_weight_diff(composed, staged) <= kEps);
  }
}

TEST_CASE("pushforward errors name the world") {
  QueryPtr bad = qb::agg(AggKind::kThe, qb::table("db"));
  ExactDist d = dist({{bv(Bag{i(1)}), 0.5}, {bv(Bag()), 0.5}});
  try {
    pushforward_exact(*bad, d);
    FAIL("expected an error");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("bag {}") != std::string::npos);
  }
  PBSampler sampler = [](std::uint64_t, std::uint64_t w) { return w == 7 ? Bag() : Bag{i(1)}; };
  try {
    pushforward_mc(*bad, sampler, 20, 0, 4);
    FAIL("expected an error");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("sampled world 7") != std::string::npos);
  }
}

TEST_CASE("pushforward_mc is independent of the thread count") {
  PBSampler sampler = [](std::uint64_t master, std::uint64_t w) {
    RandomStream r(Seed(master, {w}));
    std::vector<Value> rows;
    for (int k = 0; k < 5; ++k) rows.push_back(i(static_cast<std::int64_t>(r.next_u64() % 7)));
    return Bag::from_values(rows);
  };
  QueryPtr q = qb::unary(QueryOp::kDedup, qb::table("db"));
  auto one = pushforward_mc(*q, sampler, 3000, 11, 1);
  for (unsigned t : {2u, 4u, 8u}) CHECK(pushforward_mc(*q, sampler, 3000, 11, t) == one);
  auto tail = pushforward_mc_range(*q, sampler, 1000, 2000, 11, 3);
  CHECK(std::equal(tail.begin(), tail.end(), one.begin() + 1000));
  auto worlds = draw_worlds(sampler, 100, 11, 4);
  for (std::size_t k = 0; k < worlds.size(); ++k) CHECK(worlds[k] == sampler(11, k));
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  for (unsigned t : {1u, 3u, 8u}) {
    try {
      parallel_for(100, t, [](std::size_t k) {
        if (k == 13 || k == 77) throw std::runtime_error(std::to_string(k));
      });
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "13");
    }
  }
  std::vector<int> hits(1000, 0);
  parallel_for(1000, 8, [&](std::size_t k) { ++hits[k]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}
