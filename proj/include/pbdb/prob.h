#ifndef PBDB_PROB_H_
#define PBDB_PROB_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pbdb/bag.h"
#include "pbdb/balg.h"
#include "pbdb/value.h"

namespace pbdb {

// Finite-support probability distribution.  Entries are sorted by value,
// carry strictly positive weights, and the weights sum to 1 within
// kWeightTolerance.  Nothing is renormalized: a violation is reported as a
// ProbabilityError.
class ExactDist {
 public:
  using Entry = std::pair<Value, double>;

  static constexpr double kWeightTolerance = 1e-9;

  // Merges duplicate values (weights add), drops zero weights, validates.
  static ExactDist from_weights(std::vector<Entry> weights);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  // Weight of x, 0 outside the support.
  double weight(const Value& x) const;
  double total() const;

 private:
  ExactDist() = default;
  std::vector<Entry> entries_;
};

// Same support (up to weights below eps) and every weight within eps.
bool approx_equal(const ExactDist& a, const ExactDist& b,
                  double eps = ExactDist::kWeightTolerance);
// Largest pointwise weight difference over the union of supports.
double max_weight_diff(const ExactDist& a, const ExactDist& b);

ExactDist dirac(Value x);
ExactDist bind_exact(const std::function<ExactDist(const Value&)>& f, const ExactDist& p);
ExactDist map_exact(const std::function<Value(const Value&)>& g, const ExactDist& p);
// s(x, p): the distribution of (x, y) for y ~ p.
ExactDist strength_exact(const Value& x, const ExactDist& p);
// Independent pair: the double strength P(X) x P(Y) -> P(X x Y).
ExactDist product_exact(const ExactDist& p, const ExactDist& q);

// ---------------------------------------------------------------------------
// Seeds and random streams.

// A reproducible stream identity: identical (master, path) give identical
// draws, and each extension of the path names an independent stream.
class Seed {
 public:
  explicit Seed(std::uint64_t master, std::vector<std::uint64_t> path = {})
      : master_(master), path_(std::move(path)) {}

  std::uint64_t master() const { return master_; }
  const std::vector<std::uint64_t>& path() const { return path_; }
  Seed child(std::uint64_t index) const;
  // 64-bit stream key mixed from master and path.
  std::uint64_t key() const;

 private:
  std::uint64_t master_;
  std::vector<std::uint64_t> path_;
};

// SplitMix64 generator keyed by a Seed.
class RandomStream {
 public:
  explicit RandomStream(const Seed& seed) : state_(seed.key()) {}

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

// Primitive samplers.  Parameters are validated by the SamplerExpr
// constructors below.
bool sample_bernoulli(double p, RandomStream& rng);
// Box-Muller; consumes exactly two uniforms per call.
double sample_normal(double mean, double stddev, RandomStream& rng);
// Sequential-search inversion for rate <= 30, PTRS rejection above.
std::int64_t sample_poisson(double rate, RandomStream& rng);
const Value& sample_categorical(const ExactDist& d, RandomStream& rng);

// ---------------------------------------------------------------------------
// Sampler expressions.

struct SamplerNode;
using Sampler = std::shared_ptr<const SamplerNode>;

enum class SamplerOp { kDirac, kBernoulli, kNormal, kPoisson, kCategorical, kBind, kMap };

struct SamplerNode {
  SamplerOp op = SamplerOp::kDirac;
  Value value;                    // kDirac
  double a = 0;                   // p, mean or rate
  double b = 0;                   // stddev
  std::shared_ptr<const ExactDist> dist;  // kCategorical
  Sampler inner;                  // kBind, kMap
  std::function<Sampler(const Value&)> cont;  // kBind
  std::function<Value(const Value&)> fn;      // kMap
};

namespace smp {
Sampler dirac(Value v);
// Over Int {0, 1}; EvalError unless 0 <= p <= 1.
Sampler bernoulli(double p);
// EvalError unless stddev > 0 and both parameters are finite.
Sampler normal(double mean, double stddev);
// Over Int {0, 1, ...}; EvalError unless 0 <= rate < inf.
Sampler poisson(double rate);
Sampler categorical(ExactDist d);
Sampler bind(Sampler s, std::function<Sampler(const Value&)> k);
Sampler map(std::function<Value(const Value&)> f, Sampler s);
}  // namespace smp

Value sample(const Sampler& s, RandomStream& rng);
Value sample(const Sampler& s, const Seed& seed);

// Exact enumeration.  Normal draws and Poisson draws with a positive rate
// have no finite support and raise NotFiniteError.
ExactDist exact_of(const Sampler& s);

// ---------------------------------------------------------------------------
// Probabilistic databases and pushforward.

// Monte-Carlo view of a distribution over bags: world i is a pure function
// of (master, i), so worlds can be drawn in any order or in parallel.
using PBSampler = std::function<Bag(std::uint64_t master, std::uint64_t world)>;

// Worlds 0..n-1, computed on `threads` workers and returned by index.
std::vector<Bag> draw_worlds(const PBSampler& sampler, std::size_t n, std::uint64_t master,
                             unsigned threads = 1);

// Distribution of eval(q, {table: w}) for w ~ d.  Evaluation errors are
// rethrown with the offending world appended to the message.
ExactDist pushforward_exact(const Query& q, const ExactDist& d, const std::string& table = "db",
                            const EvalOptions& options = {});

// eval(q, {table: w_i}) for the worlds w_0..w_{n-1} of `sampler`.
std::vector<Value> pushforward_mc(const Query& q, const PBSampler& sampler, std::size_t n,
                                  std::uint64_t master, unsigned threads = 1,
                                  const std::string& table = "db",
                                  const EvalOptions& options = {});
// Worlds first..first+n-1 only.
std::vector<Value> pushforward_mc_range(const Query& q, const PBSampler& sampler,
                                        std::uint64_t first, std::size_t n,
                                        std::uint64_t master, unsigned threads = 1,
                                        const std::string& table = "db",
                                        const EvalOptions& options = {});

// Runs body(i) for i in [0, n) on up to `threads` workers, each taking a
// contiguous index range.  The exception of the lowest failing index is
// rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace pbdb

#endif  // PBDB_PROB_H_
