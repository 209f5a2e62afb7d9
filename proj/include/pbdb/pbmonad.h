#ifndef PBDB_PBMONAD_H_
#define PBDB_PBMONAD_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "pbdb/bag.h"
#include "pbdb/prob.h"

namespace pbdb {

// A distribution over worlds: an ExactDist whose support values are bags.
using PBExact = ExactDist;

struct DistrOptions {
  // Largest intermediate support before ResourceError.
  std::size_t max_worlds = 1'000'000;
};

// Distributive law B(P(X)) -> P(B(X)) as fold_distrAcc from dirac(∅), where
// distrAcc(p, m) = P(add)(p ⊗ m).  The elements are independent; their order
// does not affect the result.
PBExact distr_exact(const std::vector<ExactDist>& dists, const DistrOptions& options = {});
// One draw per element, element i from seed.child(i), collected by add.
Bag distr_sample(const std::vector<Sampler>& samplers, const Seed& seed);

PBExact pb_unit_bag(const Bag& b);
PBExact pb_unit_dist(const ExactDist& p);

// Kleisli extension on P∘B: in each world w, distribute f over the elements
// of w, flatten, and mix by the weight of w.
PBExact pb_bind(const std::function<PBExact(const Value&)>& f, const PBExact& m,
                const DistrOptions& options = {});

// ⊎ lifted through the strength of P: independent combination.
PBExact pb_uplus(const PBExact& m1, const PBExact& m2);

// n ~ Poisson(rate) (drawn from seed.child(0)) followed by n independent
// draws of gen (draw i from seed.child(i + 1)).
Bag poisson_bag(double rate, const Sampler& gen, const Seed& seed);

// Each (key, r) row becomes (key, r') with r' ~ normal(r, stddev)
// independently; in world i, row j is drawn from Seed(master, {i, j}) with
// rows in canonical order.  Rows are checked eagerly: they must be 2-tuples whose
// second field is a Real (TypeError otherwise); stddev must be positive.
PBSampler add_noise(const Bag& b, double stddev);

// Keeps each row independently with probability keep_p, then adds
// poisson_bag(rate, gen).  In world i, row j is kept by a bernoulli drawn
// from Seed(master, {i, 0, j}); the added rows use Seed(master, {i, 1}).
PBSampler add_remove(const Bag& b, double keep_p, double rate, const Sampler& gen);
// Exact counterpart; rate must be 0 (NotFiniteError otherwise).
PBExact add_remove_exact(const Bag& b, double keep_p, double rate, const Sampler& gen);

}  // namespace pbdb

#endif  // PBDB_PBMONAD_H_
