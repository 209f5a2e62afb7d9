#include "pbdb/pbmonad.h"

#include "pbdb/errors.h"

namespace pbdb {

namespace {

void guard_worlds(const PBExact& m, const DistrOptions& options) {
  if (m.size() > options.max_worlds) {
    throw ResourceError("exact enumeration reached " + std::to_string(m.size()) +
                        " worlds (limit " + std::to_string(options.max_worlds) + ")");
  }
}

// distrAcc: double strength, then P(add).
PBExact distr_acc(const ExactDist& p, const PBExact& m) {
  return map_exact(
      [](const Value& pair) {
        auto xy = pair.as_tuple();
        return Value::bag(xy[1].as_bag().add(xy[0]));
      },
      product_exact(p, m));
}

Value flatten_world(const Value& w) { return Value::bag(flatten(w.as_bag())); }

}  // namespace

PBExact distr_exact(const std::vector<ExactDist>& dists, const DistrOptions& options) {
  PBExact acc = dirac(Value::bag(Bag()));
  for (auto it = dists.rbegin(); it != dists.rend(); ++it) {
    acc = distr_acc(*it, acc);
    guard_worlds(acc, options);
  }
  return acc;
}

Bag distr_sample(const std::vector<Sampler>& samplers, const Seed& seed) {
  std::vector<Value> draws;
  draws.reserve(samplers.size());
  for (std::size_t i = 0; i < samplers.size(); ++i) {
    draws.push_back(sample(samplers[i], seed.child(i)));
  }
  return Bag::from_values(std::move(draws));
}

PBExact pb_unit_bag(const Bag& b) { return dirac(Value::bag(b)); }

PBExact pb_unit_dist(const ExactDist& p) {
  return map_exact([](const Value& x) { return Value::bag(unit(x)); }, p);
}

PBExact pb_bind(const std::function<PBExact(const Value&)>& f, const PBExact& m,
                const DistrOptions& options) {
  return bind_exact(
      [&](const Value& w) {
        std::vector<ExactDist> parts;
        for (const Value& x : w.as_bag()) parts.push_back(f(x));
        return map_exact(flatten_world, distr_exact(parts, options));
      },
      m);
}

PBExact pb_uplus(const PBExact& m1, const PBExact& m2) {
  return map_exact(
      [](const Value& pair) {
        auto ab = pair.as_tuple();
        return Value::bag(uplus(ab[0].as_bag(), ab[1].as_bag()));
      },
      product_exact(m1, m2));
}

Bag poisson_bag(double rate, const Sampler& gen, const Seed& seed) {
  RandomStream count_rng(seed.child(0));
  std::int64_t n = sample_poisson(rate, count_rng);
  std::vector<Value> draws;
  draws.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    draws.push_back(sample(gen, seed.child(static_cast<std::uint64_t>(i) + 1)));
  }
  return Bag::from_values(std::move(draws));
}

PBSampler add_noise(const Bag& b, double stddev) {
  smp::normal(0, stddev);  // validates stddev
  std::vector<Sampler> rows;
  rows.reserve(b.size());
  for (const Value& row : b) {
    if (!row.is_tuple() || row.as_tuple().size() != 2 || !row.as_tuple()[1].is_real()) {
      throw TypeError("add_noise: row " + to_literal(row) + " is not a (key, real) pair");
    }
    Value key = row.as_tuple()[0];
    rows.push_back(smp::map([key](const Value& r) { return Value::tuple({key, r}); },
                            smp::normal(row.as_tuple()[1].as_real(), stddev)));
  }
  return [rows = std::move(rows)](std::uint64_t master, std::uint64_t world) {
    return distr_sample(rows, Seed(master, {world}));
  };
}

PBSampler add_remove(const Bag& b, double keep_p, double rate, const Sampler& gen) {
  Sampler keep = smp::bernoulli(keep_p);
  smp::poisson(rate);  // validates rate
  return [b, keep, rate, gen](std::uint64_t master, std::uint64_t world) {
    Seed base(master, {world});
    Seed keep_seed = base.child(0);
    std::vector<Value> kept;
    std::uint64_t j = 0;
    for (const Value& row : b) {
      if (sample(keep, keep_seed.child(j++)).as_int() == 1) kept.push_back(row);
    }
    return uplus(Bag::from_sorted(std::move(kept)), poisson_bag(rate, gen, base.child(1)));
  };
}

PBExact add_remove_exact(const Bag& b, double keep_p, double rate,
                         const Sampler& /*gen*/) {
  ExactDist keep = exact_of(smp::bernoulli(keep_p));
  if (exact_of(smp::poisson(rate)).size() != 1) {
    throw NotFiniteError("add_remove with a positive rate has unbounded support");
  }
  std::vector<ExactDist> parts;
  for (const Value& row : b) {
    parts.push_back(map_exact(
        [&](const Value& k) { return Value::bag(k.as_int() == 1 ? unit(row) : Bag()); }, keep));
  }
  return map_exact(flatten_world, distr_exact(parts));
}

}  // namespace pbdb
