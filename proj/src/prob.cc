#include "pbdb/prob.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "pbdb/errors.h"

namespace pbdb {

// ---------------------------------------------------------------------------
// ExactDist.

ExactDist ExactDist::from_weights(std::vector<Entry> weights) {
  for (const auto& [v, w] : weights) {
    if (!(w >= 0) || std::isinf(w)) {
      throw ProbabilityError("invalid weight " + std::to_string(w) + " for " + to_literal(v));
    }
  }
  std::stable_sort(weights.begin(), weights.end(),
                   [](const Entry& a, const Entry& b) { return a.first < b.first; });
  ExactDist d;
  for (auto& [v, w] : weights) {
    if (!d.entries_.empty() && d.entries_.back().first == v) {
      d.entries_.back().second += w;
    } else {
      d.entries_.emplace_back(std::move(v), w);
    }
  }
  std::erase_if(d.entries_, [](const Entry& e) { return e.second == 0; });
  double total = d.total();
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw ProbabilityError("weights sum to " + std::to_string(total) + ", not 1");
  }
  return d;
}

double ExactDist::weight(const Value& x) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                             [](const Entry& e, const Value& v) { return e.first < v; });
  return it != entries_.end() && it->first == x ? it->second : 0.0;
}

double ExactDist::total() const {
  double sum = 0;
  for (const auto& e : entries_) sum += e.second;
  return sum;
}

double max_weight_diff(const ExactDist& a, const ExactDist& b) {
  double worst = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    double diff;
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      diff = ia++->second;
    } else if (ia == a.end() || ib->first < ia->first) {
      diff = ib++->second;
    } else {
      diff = std::abs(ia++->second - ib++->second);
    }
    worst = std::max(worst, diff);
  }
  return worst;
}

bool approx_equal(const ExactDist& a, const ExactDist& b, double eps) {
  return max_weight_diff(a, b) <= eps;
}

ExactDist dirac(Value x) { return ExactDist::from_weights({{std::move(x), 1.0}}); }

ExactDist bind_exact(const std::function<ExactDist(const Value&)>& f, const ExactDist& p) {
  std::vector<ExactDist::Entry> out;
  for (const auto& [x, w] : p) {
    for (const auto& [y, v] : f(x)) out.emplace_back(y, w * v);
  }
  return ExactDist::from_weights(std::move(out));
}

ExactDist map_exact(const std::function<Value(const Value&)>& g, const ExactDist& p) {
  std::vector<ExactDist::Entry> out;
  out.reserve(p.size());
  for (const auto& [x, w] : p) out.emplace_back(g(x), w);
  return ExactDist::from_weights(std::move(out));
}

ExactDist strength_exact(const Value& x, const ExactDist& p) {
  return map_exact([&](const Value& y) { return Value::tuple({x, y}); }, p);
}

ExactDist product_exact(const ExactDist& p, const ExactDist& q) {
  // Strength on the right, then strength on the left.
  return bind_exact([&](const Value& x) { return strength_exact(x, q); }, p);
}

// ---------------------------------------------------------------------------
// Seeds and streams.

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Seed Seed::child(std::uint64_t index) const {
  std::vector<std::uint64_t> path = path_;
  path.push_back(index);
  return Seed(master_, std::move(path));
}

std::uint64_t Seed::key() const {
  std::uint64_t key = mix64(master_ + kGolden);
  for (std::uint64_t p : path_) key = mix64(key ^ mix64(p + kGolden * 2));
  return key;
}

std::uint64_t RandomStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RandomStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

bool sample_bernoulli(double p, RandomStream& rng) { return rng.uniform() < p; }

double sample_normal(double mean, double stddev, RandomStream& rng) {
  double u1 = 1.0 - rng.uniform();  // (0, 1]
  double u2 = rng.uniform();
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

namespace {

double log_factorial(std::int64_t k) {
  int sign = 0;
  return ::lgamma_r(static_cast<double>(k) + 1.0, &sign);
}

// Hormann's transformed rejection with squeeze.
std::int64_t poisson_ptrs(double rate, RandomStream& rng) {
  const double slam = std::sqrt(rate);
  const double loglam = std::log(rate);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  while (true) {
    double u = rng.uniform() - 0.5;
    double v = rng.uniform();
    double us = 0.5 - std::abs(u);
    auto k = static_cast<std::int64_t>(std::floor((2 * a / us + b) * u + rate + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -rate + static_cast<double>(k) * loglam - log_factorial(k)) {
      return k;
    }
  }
}

}  // namespace

std::int64_t sample_poisson(double rate, RandomStream& rng) {
  if (rate > 30) return poisson_ptrs(rate, rng);
  double u = rng.uniform();
  double p = std::exp(-rate);
  double cumulative = p;
  std::int64_t k = 0;
  while (u >= cumulative) {
    ++k;
    p *= rate / static_cast<double>(k);
    if (p == 0) break;
    cumulative += p;
  }
  return k;
}

const Value& sample_categorical(const ExactDist& d, RandomStream& rng) {
  double u = rng.uniform() * d.total();
  double cumulative = 0;
  for (const auto& [v, w] : d) {
    cumulative += w;
    if (u < cumulative) return v;
  }
  return d.entries().back().first;
}

// ---------------------------------------------------------------------------
// Sampler expressions.

namespace smp {

namespace {
Sampler make(SamplerNode n) { return std::make_shared<const SamplerNode>(std::move(n)); }
}  // namespace

Sampler dirac(Value v) {
  SamplerNode n;
  n.value = std::move(v);
  return make(std::move(n));
}

Sampler bernoulli(double p) {
  if (!(p >= 0 && p <= 1)) {
    throw EvalError("bernoulli parameter " + std::to_string(p) + " is outside [0, 1]");
  }
  SamplerNode n;
  n.op = SamplerOp::kBernoulli;
  n.a = p;
  return make(std::move(n));
}

Sampler normal(double mean, double stddev) {
  if (!std::isfinite(mean) || !std::isfinite(stddev) || !(stddev > 0)) {
    throw EvalError("normal needs a finite mean and a positive finite stddev, got (" +
                    std::to_string(mean) + ", " + std::to_string(stddev) + ")");
  }
  SamplerNode n;
  n.op = SamplerOp::kNormal;
  n.a = mean;
  n.b = stddev;
  return make(std::move(n));
}

Sampler poisson(double rate) {
  if (!(rate >= 0) || std::isinf(rate)) {
    throw EvalError("poisson rate " + std::to_string(rate) + " must be finite and >= 0");
  }
  SamplerNode n;
  n.op = SamplerOp::kPoisson;
  n.a = rate;
  return make(std::move(n));
}

Sampler categorical(ExactDist d) {
  SamplerNode n;
  n.op = SamplerOp::kCategorical;
  n.dist = std::make_shared<const ExactDist>(std::move(d));
  return make(std::move(n));
}

Sampler bind(Sampler s, std::function<Sampler(const Value&)> k) {
  SamplerNode n;
  n.op = SamplerOp::kBind;
  n.inner = std::move(s);
  n.cont = std::move(k);
  return make(std::move(n));
}

Sampler map(std::function<Value(const Value&)> f, Sampler s) {
  SamplerNode n;
  n.op = SamplerOp::kMap;
  n.inner = std::move(s);
  n.fn = std::move(f);
  return make(std::move(n));
}

}  // namespace smp

Value sample(const Sampler& s, RandomStream& rng) {
  switch (s->op) {
    case SamplerOp::kDirac: return s->value;
    case SamplerOp::kBernoulli: return Value::integer(sample_bernoulli(s->a, rng) ? 1 : 0);
    case SamplerOp::kNormal: return Value::real(sample_normal(s->a, s->b, rng));
    case SamplerOp::kPoisson: return Value::integer(sample_poisson(s->a, rng));
    case SamplerOp::kCategorical: return sample_categorical(*s->dist, rng);
    case SamplerOp::kBind: {
      Value x = sample(s->inner, rng);
      return sample(s->cont(x), rng);
    }
    case SamplerOp::kMap: return s->fn(sample(s->inner, rng));
  }
  throw EvalError("unknown sampler");
}

Value sample(const Sampler& s, const Seed& seed) {
  RandomStream rng(seed);
  return sample(s, rng);
}

ExactDist exact_of(const Sampler& s) {
  switch (s->op) {
    case SamplerOp::kDirac: return dirac(s->value);
    case SamplerOp::kBernoulli:
      return ExactDist::from_weights(
          {{Value::integer(0), 1.0 - s->a}, {Value::integer(1), s->a}});
    case SamplerOp::kNormal:
      throw NotFiniteError("normal distribution has no finite support");
    case SamplerOp::kPoisson:
      if (s->a == 0) return dirac(Value::integer(0));
      throw NotFiniteError("poisson distribution has no finite support");
    case SamplerOp::kCategorical: return *s->dist;
    case SamplerOp::kBind:
      return bind_exact([&](const Value& x) { return exact_of(s->cont(x)); }, exact_of(s->inner));
    case SamplerOp::kMap: return map_exact(s->fn, exact_of(s->inner));
  }
  throw EvalError("unknown sampler");
}

// ---------------------------------------------------------------------------
// Parallel drawing and pushforward.

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = n * w / workers;
    std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<Bag> draw_worlds(const PBSampler& sampler, std::size_t n, std::uint64_t master,
                             unsigned threads) {
  std::vector<Bag> worlds(n);
  parallel_for(n, threads, [&](std::size_t i) { worlds[i] = sampler(master, i); });
  return worlds;
}

namespace {

[[noreturn]] void rethrow_in_world(const std::string& where) {
  try {
    throw;
  } catch (const UnknownTableError&) {
    throw;
  } catch (const TypeError& e) {
    throw TypeError(std::string(e.what()) + where);
  } catch (const EvalError& e) {
    throw EvalError(std::string(e.what()) + where);
  } catch (const ResourceError& e) {
    throw ResourceError(std::string(e.what()) + where);
  }
}

Value eval_in_world(const Query& q, const Bag& world, const std::string& table,
                    const EvalOptions& options, const std::string& label) {
  Env env{{table, world}};
  try {
    return eval(q, env, options);
  } catch (const Error&) {
    rethrow_in_world(" (in " + label + ")");
  }
}

}  // namespace

ExactDist pushforward_exact(const Query& q, const ExactDist& d, const std::string& table,
                            const EvalOptions& options) {
  return map_exact(
      [&](const Value& w) {
        if (!w.is_bag()) throw TypeError("pushforward over a non-bag world " + to_literal(w));
        return eval_in_world(q, w.as_bag(), table, options, "world " + to_literal(w));
      },
      d);
}

std::vector<Value> pushforward_mc(const Query& q, const PBSampler& sampler, std::size_t n,
                                  std::uint64_t master, unsigned threads,
                                  const std::string& table, const EvalOptions& options) {
  return pushforward_mc_range(q, sampler, 0, n, master, threads, table, options);
}

std::vector<Value> pushforward_mc_range(const Query& q, const PBSampler& sampler,
                                        std::uint64_t first, std::size_t n,
                                        std::uint64_t master, unsigned threads,
                                        const std::string& table, const EvalOptions& options) {
  std::vector<Value> out(n);
  parallel_for(n, threads, [&](std::size_t i) {
    std::uint64_t world = first + i;
    out[i] = eval_in_world(q, sampler(master, world), table, options,
                           "sampled world " + std::to_string(world));
  });
  return out;
}

}  // namespace pbdb
