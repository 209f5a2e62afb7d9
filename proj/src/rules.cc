#include "pbdb/rules.h"

#include <functional>
#include <set>

#include "lexer.h"
#include "pbdb/errors.h"

namespace pbdb {

using internal::Tok;
using internal::Token;
using internal::TokenStream;

namespace {

struct DistSpec {
  const char* name;
  DistKind kind;
  std::size_t arity;
};

constexpr DistSpec kDists[] = {
    {"bernoulli", DistKind::kBernoulli, 1},
    {"normal", DistKind::kNormal, 2},
    {"poisson", DistKind::kPoisson, 1},
};

const DistSpec* find_dist(const std::string& name) {
  for (const auto& d : kDists) {
    if (name == d.name) return &d;
  }
  return nullptr;
}

bool is_value_word(const std::string& w) {
  return w == "true" || w == "false" || w == "unit" || w == "null" || w == "inf" || w == "bag";
}

class ProgramParser {
 public:
  explicit ProgramParser(std::string_view text) : ts_(internal::tokenize(text, true)) {}

  RuleProgram parse() {
    RuleProgram program;
    while (true) {
      while (ts_.accept(Tok::kNewline)) {
      }
      if (ts_.at(Tok::kEnd)) break;
      program.rules.push_back(parse_rule());
      if (!ts_.at(Tok::kEnd)) {
        if (!ts_.at(Tok::kNewline)) {
          ts_.fail("unexpected '" + ts_.peek().text + "'", {"','", "end of line"});
        }
      }
    }
    return program;
  }

 private:
  Rule parse_rule() {
    Rule rule;
    rule.line = ts_.peek().line;
    rule.head_tag = ts_.expect_identifier();
    ts_.expect(Tok::kLParen);
    if (!ts_.at(Tok::kRParen)) {
      do {
        rule.head.push_back(parse_term(true));
      } while (ts_.accept(Tok::kComma));
    }
    ts_.expect(Tok::kRParen);
    if (!ts_.accept(Tok::kArrow)) return rule;
    if (ts_.at(Tok::kNewline) || ts_.at(Tok::kEnd)) {
      ts_.fail("expected a rule body after '<-'", {"atom", "guard"});
    }
    do {
      parse_body_item(rule);
    } while (ts_.accept(Tok::kComma));
    return rule;
  }

  void parse_body_item(Rule& rule) {
    const Token& t = ts_.peek();
    if (t.kind == Tok::kIdent && ts_.at(Tok::kLParen, 1) && !is_value_word(t.text)) {
      if (find_dist(t.text)) {
        throw ParseError("distributions may only appear in rule heads", t.line, t.column);
      }
      Atom atom;
      atom.tag = ts_.next().text;
      ts_.expect(Tok::kLParen);
      if (!ts_.at(Tok::kRParen)) {
        do {
          atom.args.push_back(parse_term(false));
        } while (ts_.accept(Tok::kComma));
      }
      ts_.expect(Tok::kRParen);
      rule.body.push_back(std::move(atom));
      return;
    }
    Guard guard;
    guard.lhs = parse_term(false);
    static const std::pair<Tok, ExprOp> kOps[] = {
        {Tok::kEq, ExprOp::kEq}, {Tok::kNe, ExprOp::kNe}, {Tok::kLt, ExprOp::kLt},
        {Tok::kLe, ExprOp::kLe}, {Tok::kGt, ExprOp::kGt}, {Tok::kGe, ExprOp::kGe},
    };
    bool found = false;
    for (const auto& [tok, op] : kOps) {
      if (ts_.accept(tok)) {
        guard.op = op;
        found = true;
        break;
      }
    }
    if (!found) ts_.fail("expected a comparison", {"'='", "'!='", "'<'", "'<='", "'>'", "'>='"});
    guard.rhs = parse_term(false);
    rule.guards.push_back(std::move(guard));
  }

  Term parse_term(bool allow_dist) {
    const Token& t = ts_.peek();
    Term term;
    if (t.kind == Tok::kIdent && !is_value_word(t.text)) {
      if (ts_.at(Tok::kLParen, 1)) {
        const DistSpec* spec = find_dist(t.text);
        if (spec == nullptr) {
          term.literal = internal::parse_value(ts_);
          return term;
        }
        if (!allow_dist) {
          throw ParseError("distribution not allowed here", t.line, t.column);
        }
        ts_.next();
        ts_.expect(Tok::kLParen);
        term.kind = Term::Kind::kDist;
        term.dist = spec->kind;
        do {
          term.args.push_back(parse_term(false));
        } while (ts_.accept(Tok::kComma));
        ts_.expect(Tok::kRParen);
        if (term.args.size() != spec->arity) {
          throw ParseError(std::string(spec->name) + " takes " + std::to_string(spec->arity) +
                               " argument(s)",
                           t.line, t.column);
        }
        return term;
      }
      term.kind = Term::Kind::kVar;
      term.var = ts_.next().text;
      return term;
    }
    term.literal = internal::parse_value(ts_);
    return term;
  }

  TokenStream ts_;
};

void collect_vars(const Term& t, std::vector<std::string>& out) {
  if (t.kind == Term::Kind::kVar) out.push_back(t.var);
  for (const Term& a : t.args) collect_vars(a, out);
}

std::string rule_where(const Rule& r) { return "line " + std::to_string(r.line) + ": "; }

bool tag_cycle(const std::map<std::string, std::set<std::string>>& edges, std::string& witness) {
  // 0 unvisited, 1 on stack, 2 done.
  std::map<std::string, int> state;
  std::function<bool(const std::string&)> visit = [&](const std::string& u) {
    state[u] = 1;
    auto it = edges.find(u);
    if (it != edges.end()) {
      for (const std::string& v : it->second) {
        if (state[v] == 1) {
          witness = v;
          return true;
        }
        if (state[v] == 0 && visit(v)) return true;
      }
    }
    state[u] = 2;
    return false;
  };
  for (const auto& [u, _] : edges) {
    if (state[u] == 0 && visit(u)) return true;
  }
  return false;
}

const Value& term_value(const Term& t, const Binding& binding) {
  if (t.kind == Term::Kind::kVar) {
    auto it = binding.find(t.var);
    if (it == binding.end()) throw ProgramError("unbound variable " + t.var);
    return it->second;
  }
  return t.literal;
}

double numeric_param(const Term& t, const Binding& binding, const char* dist) {
  const Value& v = term_value(t, binding);
  if (!v.is_numeric()) {
    throw EvalError(std::string(dist) + " parameter must be numeric, got " + to_literal(v));
  }
  return v.as_number();
}

Sampler dist_sampler(const Term& t, const Binding& binding) {
  switch (t.dist) {
    case DistKind::kBernoulli: return smp::bernoulli(numeric_param(t.args[0], binding, "bernoulli"));
    case DistKind::kNormal:
      return smp::normal(numeric_param(t.args[0], binding, "normal"),
                         numeric_param(t.args[1], binding, "normal"));
    case DistKind::kPoisson: return smp::poisson(numeric_param(t.args[0], binding, "poisson"));
  }
  throw EvalError("unknown distribution");
}

Sampler build_head(const std::string& tag, const std::vector<Term>& head,
                   std::vector<Sampler> dists, std::size_t next_dist, std::size_t i,
                   std::vector<Value> fields, const Binding& binding) {
  for (; i < head.size(); ++i) {
    if (head[i].kind == Term::Kind::kDist) {
      Sampler s = dists[next_dist];
      return smp::bind(std::move(s), [tag, head, dists, next_dist, i, fields,
                                      binding](const Value& draw) {
        std::vector<Value> with = fields;
        with.push_back(draw);
        return build_head(tag, head, dists, next_dist + 1, i + 1, std::move(with), binding);
      });
    }
    fields.push_back(term_value(head[i], binding));
  }
  return smp::dirac(Value::tagged(tag, make_row(std::move(fields))));
}

void match_from(const Rule& rule, const Bag& world, std::size_t atom_index, Binding& binding,
                std::vector<Binding>& out) {
  if (atom_index == rule.body.size()) {
    for (const Guard& g : rule.guards) {
      Value ok = eval_expr(*ex::binary(g.op, ex::lit(term_value(g.lhs, binding)),
                                       ex::lit(term_value(g.rhs, binding))),
                           Value::unit());
      if (!ok.as_bool()) return;
    }
    out.push_back(binding);
    return;
  }
  const Atom& atom = rule.body[atom_index];
  for (const Value& fact : world) {
    if (!fact.is_tagged() || fact.tag() != atom.tag) continue;
    std::vector<Value> fields = row_fields(fact.payload());
    if (fields.size() != atom.args.size()) continue;
    std::vector<std::string> bound_here;
    bool ok = true;
    for (std::size_t j = 0; j < fields.size() && ok; ++j) {
      const Term& arg = atom.args[j];
      if (arg.kind == Term::Kind::kLit) {
        ok = arg.literal == fields[j];
      } else if (auto it = binding.find(arg.var); it != binding.end()) {
        ok = it->second == fields[j];
      } else {
        binding.emplace(arg.var, fields[j]);
        bound_here.push_back(arg.var);
      }
    }
    if (ok) match_from(rule, world, atom_index + 1, binding, out);
    for (const std::string& v : bound_here) binding.erase(v);
  }
}

}  // namespace

RuleProgram parse_rule_program(std::string_view text) {
  RuleProgram program = ProgramParser(text).parse();
  validate_program(program);
  return program;
}

void validate_program(const RuleProgram& program) {
  std::map<std::string, std::set<std::string>> edges;
  for (const Rule& rule : program.rules) {
    if (!is_identifier(rule.head_tag)) {
      throw ProgramError(rule_where(rule) + "invalid head tag '" + rule.head_tag + "'");
    }
    std::set<std::string> bound;
    for (const Atom& atom : rule.body) {
      for (const Term& t : atom.args) {
        if (t.kind == Term::Kind::kDist) {
          throw ProgramError(rule_where(rule) + "distribution in a rule body");
        }
        if (t.kind == Term::Kind::kVar) bound.insert(t.var);
      }
      edges[atom.tag].insert(rule.head_tag);
    }
    std::vector<std::string> used;
    for (const Term& t : rule.head) {
      if (t.kind == Term::Kind::kDist) {
        for (const Term& a : t.args) {
          if (a.kind == Term::Kind::kDist) {
            throw ProgramError(rule_where(rule) + "nested distribution");
          }
        }
      }
      collect_vars(t, used);
    }
    for (const Guard& g : rule.guards) {
      collect_vars(g.lhs, used);
      collect_vars(g.rhs, used);
    }
    for (const std::string& v : used) {
      if (!bound.count(v)) {
        throw ProgramError(rule_where(rule) + "variable '" + v +
                           "' is not bound by a body atom");
      }
    }
  }
  std::string witness;
  if (tag_cycle(edges, witness)) {
    throw ProgramError("recursive program: tag '" + witness + "' depends on itself");
  }
}

std::vector<Binding> match_body(const Rule& rule, const Bag& world) {
  std::vector<Binding> out;
  Binding binding;
  match_from(rule, world, 0, binding, out);
  return out;
}

Sampler head_sampler(const Rule& rule, const Binding& binding) {
  std::vector<Sampler> dists;
  for (const Term& t : rule.head) {
    if (t.kind == Term::Kind::kDist) dists.push_back(dist_sampler(t, binding));
  }
  return build_head(rule.head_tag, rule.head, std::move(dists), 0, 0, {}, binding);
}

PBExact run_rule_program_exact(const RuleProgram& program, const Bag& input,
                               const DistrOptions& options) {
  PBExact worlds = pb_unit_bag(input);
  for (const Rule& rule : program.rules) {
    worlds = bind_exact(
        [&](const Value& w) {
          const Bag& world = w.as_bag();
          std::vector<ExactDist> heads;
          for (const Binding& b : match_body(rule, world)) {
            heads.push_back(exact_of(head_sampler(rule, b)));
          }
          return map_exact(
              [&](const Value& added) { return Value::bag(uplus(world, added.as_bag())); },
              distr_exact(heads, options));
        },
        worlds);
    if (worlds.size() > options.max_worlds) {
      throw ResourceError("exact enumeration reached " + std::to_string(worlds.size()) +
                          " worlds (limit " + std::to_string(options.max_worlds) + ")");
    }
  }
  return worlds;
}

Bag sample_rule_program(const RuleProgram& program, const Bag& input, std::uint64_t master,
                        std::uint64_t world) {
  Bag current = input;
  for (std::size_t k = 0; k < program.rules.size(); ++k) {
    const Rule& rule = program.rules[k];
    std::vector<Value> draws;
    std::uint64_t ordinal = 0;
    for (const Binding& b : match_body(rule, current)) {
      draws.push_back(sample(head_sampler(rule, b), Seed(master, {k, world, ordinal++})));
    }
    current = uplus(current, Bag::from_values(std::move(draws)));
  }
  return current;
}

PBSampler rule_program_sampler(RuleProgram program, Bag input) {
  return [program = std::move(program), input = std::move(input)](std::uint64_t master,
                                                                 std::uint64_t world) {
    return sample_rule_program(program, input, master, world);
  };
}

}  // namespace pbdb
