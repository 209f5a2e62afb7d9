#ifndef PBDB_RULES_H_
#define PBDB_RULES_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pbdb/balg.h"
#include "pbdb/pbmonad.h"
#include "pbdb/prob.h"

namespace pbdb {

// Generative rule programs (non-recursive GDatalog).  One rule per line:
//
//   earthquake(c, bernoulli(0.1)) <- crimechance(c, r)
//   trigger(x, bernoulli(0.6)) <- address(x, c), earthquake(c, 1)
//   big(m) <- gross(m, r), r >= 200000000
//
// Body atoms match Tagged(tag, payload) elements whose payload has the atom's
// arity; a repeated variable joins, a literal must match exactly.  Guards
// compare a variable with a variable or literal.  Head terms are variables,
// literals, or bernoulli(a) / normal(a, b) / poisson(a) whose arguments are
// variables or literals.  `#` starts a comment.

enum class DistKind { kBernoulli, kNormal, kPoisson };

struct Term {
  enum class Kind { kVar, kLit, kDist };
  Kind kind = Kind::kLit;
  std::string var;
  Value literal;
  DistKind dist = DistKind::kBernoulli;
  std::vector<Term> args;  // distribution parameters
};

struct Atom {
  std::string tag;
  std::vector<Term> args;  // variables or literals
};

struct Guard {
  ExprOp op = ExprOp::kEq;  // one of the comparison operators
  Term lhs;
  Term rhs;
};

struct Rule {
  std::string head_tag;
  std::vector<Term> head;
  std::vector<Atom> body;
  std::vector<Guard> guards;
  int line = 0;
};

struct RuleProgram {
  std::vector<Rule> rules;
};

// Parses and validates.  ParseError on bad syntax; ProgramError when a head
// or guard variable is not bound by a body atom, or when the tag dependency
// graph (body tag -> head tag) has a cycle.
RuleProgram parse_rule_program(std::string_view text);
void validate_program(const RuleProgram& program);

using Binding = std::map<std::string, Value, std::less<>>;

// Satisfying assignments of the rule body over `world`, in match-ordinal
// order: body atoms are nested loops in body order, each scanning the world
// in canonical order.
std::vector<Binding> match_body(const Rule& rule, const Bag& world);

// Distribution of the head fact for one match.  Distribution parameters are
// checked here (EvalError when a bernoulli parameter is outside [0, 1]).
Sampler head_sampler(const Rule& rule, const Binding& binding);

// b_{k+1} = b_k ⊎ {| head | body <- b_k |} for each rule in order, with one
// independent draw per match.
PBExact run_rule_program_exact(const RuleProgram& program, const Bag& input,
                               const DistrOptions& options = {});

// World `world` of the Monte-Carlo backend: the draw for match ordinal o of
// rule k uses Seed(master, {k, world, o}).
Bag sample_rule_program(const RuleProgram& program, const Bag& input, std::uint64_t master,
                        std::uint64_t world);
PBSampler rule_program_sampler(RuleProgram program, Bag input);

}  // namespace pbdb

#endif  // PBDB_RULES_H_
