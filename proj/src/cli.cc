#include "pbdb/cli.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pbdb/errors.h"
#include "pbdb/pbmonad.h"
#include "pbdb/prob.h"
#include "pbdb/rules.h"

namespace pbdb::cli {

namespace {

using Json = nlohmann::json;

// Bad invocation or unreadable file.
class UsageError : public Error {
 public:
  using Error::Error;
};

constexpr std::size_t kChunk = 4096;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json to_json(const Value& v) { return Json::parse(serialize(v)); }

struct Options {
  std::vector<std::string> db;
  std::string query;
  std::string program;
  std::string backend;
  std::string stat = "tuple-prob";
  std::string output = "-";
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

// Parse errors in a named file carry the file name in the message.
template <typename F>
auto with_file(const std::string& file, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(file + ": " + e.message(), e.line(), e.column(), e.expected());
  }
}

QueryPtr load_query(const std::string& file) {
  std::string text = read_file(file);
  return with_file(file, [&] { return parse_query(text); });
}

RuleProgram load_program(const std::string& file) {
  std::string text = read_file(file);
  return with_file(file, [&] { return parse_rule_program(text); });
}

Database load(const Options& o) {
  std::vector<std::filesystem::path> files(o.db.begin(), o.db.end());
  return load_database(files);
}

// The generative program reads one bag holding every input row.
Bag program_input(const Database& db) {
  Bag all;
  for (const auto& [name, rows] : db.tables) all = uplus(all, rows);
  return all;
}

void require_samples(const Options& o) {
  if (o.samples == 0) throw UsageError("--samples must be a positive integer for --backend mc");
}

// Runs worlds through `consume` in index order, computing each chunk on
// `threads` workers.
void for_each_result(const Query* q, const PBSampler& sampler, const Options& o,
                     const std::function<void(std::size_t, const Bag*, const Value*)>& consume) {
  for (std::size_t base = 0; base < o.samples; base += kChunk) {
    std::size_t m = std::min(kChunk, o.samples - base);
    if (q == nullptr) {
      std::vector<Bag> worlds(m);
      parallel_for(m, o.threads, [&](std::size_t j) { worlds[j] = sampler(o.seed, base + j); });
      for (std::size_t j = 0; j < m; ++j) consume(base + j, &worlds[j], nullptr);
    } else {
      std::vector<Value> results =
          pushforward_mc_range(*q, sampler, base, m, o.seed, o.threads, "db");
      for (std::size_t j = 0; j < m; ++j) consume(base + j, nullptr, &results[j]);
    }
  }
}

int cmd_query(const Options& o, std::ostream& out) {
  Database db = load(o);
  QueryPtr q = load_query(o.query);
  check(*q, db.schemas);
  out << serialize(eval(*q, db.tables)) << "\n";
  return kOk;
}

int cmd_generate(const Options& o, std::ostream& out) {
  Database db = load(o);
  RuleProgram program = load_program(o.program);
  Bag input = program_input(db);
  if (o.backend == "exact") {
    PBExact worlds = run_rule_program_exact(program, input);
    Json j;
    j["backend"] = "exact";
    j["worlds"] = Json::array();
    for (const auto& [w, p] : worlds) j["worlds"].push_back({{"weight", p}, {"world", to_json(w)}});
    out << j.dump() << "\n";
    return kOk;
  }
  require_samples(o);
  PBSampler sampler = rule_program_sampler(std::move(program), std::move(input));
  out << "{\"backend\":\"mc\",\"samples\":" << o.samples << ",\"seed\":" << o.seed
      << ",\"worlds\":[";
  for_each_result(nullptr, sampler, o, [&](std::size_t i, const Bag* w, const Value*) {
    if (i) out << ",";
    out << serialize(Value::bag(*w));
  });
  out << "]}\n";
  return kOk;
}

// Numbers contained in one query result: a numeric scalar, or the numeric
// elements of a bag.
void numbers_of(const Value& v, std::vector<double>& out) {
  if (v.is_numeric()) {
    out.push_back(v.as_number());
    return;
  }
  if (v.is_bag()) {
    for (const Value& x : v.as_bag()) {
      if (!x.is_numeric()) throw TypeError("mean: non-numeric element " + to_literal(x));
      out.push_back(x.as_number());
    }
    return;
  }
  throw TypeError("mean: query result " + to_literal(v) + " is neither numeric nor a bag");
}

const Bag& result_bag(const Value& v, const char* stat) {
  if (!v.is_bag()) {
    throw TypeError(std::string(stat) + ": query result " + to_literal(v) + " is not a bag");
  }
  return v.as_bag();
}

Json interval(double center, double stderr_) {
  return Json::array({center - 3 * stderr_, center + 3 * stderr_});
}

Json estimate_exact(const Query& q, const PBExact& worlds, const std::string& stat) {
  ExactDist results = pushforward_exact(q, worlds, "db");
  Json j;
  if (stat == "tuple-prob") {
    std::map<Value, double> prob;
    for (const auto& [r, w] : results) {
      for (const auto& [x, c] : result_bag(r, "tuple-prob").counts()) prob[x] += w;
    }
    j["tuples"] = Json::array();
    for (const auto& [x, p] : prob) {
      j["tuples"].push_back({{"ci", interval(p, 0)}, {"p", p}, {"stderr", 0.0}, {"tuple", to_json(x)}});
    }
  } else if (stat == "mean") {
    double weighted_sum = 0;
    double weighted_count = 0;
    double weighted_sq = 0;
    for (const auto& [r, w] : results) {
      std::vector<double> xs;
      numbers_of(r, xs);
      for (double x : xs) {
        weighted_sum += w * x;
        weighted_sq += w * x * x;
      }
      weighted_count += w * static_cast<double>(xs.size());
    }
    if (weighted_count == 0) throw EvalError("mean: the query never yields any number");
    double mean = weighted_sum / weighted_count;
    double var = std::max(0.0, weighted_sq / weighted_count - mean * mean);
    j["ci"] = interval(mean, 0);
    j["mean"] = mean;
    j["stddev"] = std::sqrt(var);
    j["stderr"] = 0.0;
  } else {
    j["values"] = Json::array();
    for (const auto& [r, w] : results) {
      j["values"].push_back({{"ci", interval(w, 0)}, {"p", w}, {"stderr", 0.0}, {"value", to_json(r)}});
    }
  }
  j["backend"] = "exact";
  j["stat"] = stat;
  return j;
}

Json estimate_mc(const Query& q, const PBSampler& sampler, const Options& o) {
  const double n = static_cast<double>(o.samples);
  Json j;
  if (o.stat == "tuple-prob") {
    std::map<Value, std::size_t> present;
    for_each_result(&q, sampler, o, [&](std::size_t, const Bag*, const Value* r) {
      for (const auto& [x, c] : result_bag(*r, "tuple-prob").counts()) ++present[x];
    });
    j["tuples"] = Json::array();
    for (const auto& [x, c] : present) {
      double p = static_cast<double>(c) / n;
      double se = std::sqrt(p * (1 - p) / n);
      j["tuples"].push_back({{"ci", interval(p, se)}, {"count", c}, {"p", p}, {"stderr", se},
                             {"tuple", to_json(x)}});
    }
  } else if (o.stat == "mean") {
    // Welford's update in world order keeps the result independent of
    // the worker count.
    std::size_t count = 0;
    double mean = 0;
    double m2 = 0;
    for_each_result(&q, sampler, o, [&](std::size_t, const Bag*, const Value* r) {
      std::vector<double> xs;
      numbers_of(*r, xs);
      for (double x : xs) {
        ++count;
        double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
      }
    });
    if (count == 0) throw EvalError("mean: the query never yields any number");
    double sd = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0;
    double se = sd / std::sqrt(static_cast<double>(count));
    j["ci"] = interval(mean, se);
    j["count"] = count;
    j["mean"] = mean;
    j["stddev"] = sd;
    j["stderr"] = se;
  } else {
    std::map<Value, std::size_t> counts;
    for_each_result(&q, sampler, o,
                    [&](std::size_t, const Bag*, const Value* r) { ++counts[*r]; });
    j["values"] = Json::array();
    for (const auto& [v, c] : counts) {
      double p = static_cast<double>(c) / n;
      double se = std::sqrt(p * (1 - p) / n);
      j["values"].push_back({{"ci", interval(p, se)}, {"count", c}, {"p", p}, {"stderr", se},
                             {"value", to_json(v)}});
    }
  }
  j["backend"] = "mc";
  j["samples"] = o.samples;
  j["seed"] = o.seed;
  j["stat"] = o.stat;
  return j;
}

int cmd_estimate(const Options& o, std::ostream& out) {
  Database db = load(o);
  RuleProgram program = load_program(o.program);
  QueryPtr q = load_query(o.query);
  check(*q, Catalog{{"db", Schema::any()}});
  Bag input = program_input(db);
  if (o.backend == "exact") {
    out << estimate_exact(*q, run_rule_program_exact(program, input), o.stat).dump() << "\n";
    return kOk;
  }
  require_samples(o);
  PBSampler sampler = rule_program_sampler(std::move(program), std::move(input));
  out << estimate_mc(*q, sampler, o).dump() << "\n";
  return kOk;
}

int report(std::ostream& err, int code, const std::string& message) {
  err << "pbdb: " << message << "\n";
  return code;
}

}  // namespace

Database load_database(const std::vector<std::filesystem::path>& files) {
  Database db;
  for (const auto& path : files) {
    std::string name = path.stem().string();
    if (!is_identifier(name)) {
      throw UsageError(path.string() + ": table name '" + name + "' is not an identifier");
    }
    if (db.tables.count(name)) throw UsageError("duplicate table '" + name + "'");
    std::istringstream in(read_file(path));
    std::vector<Value> rows;
    Schema schema = Schema::any();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      Value row;
      try {
        row = deserialize(line);
      } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), lineno, e.column(), e.expected());
      }
      try {
        schema = unify(schema, infer_schema(row));
      } catch (const TypeError& e) {
        throw TypeError(path.string() + ":" + std::to_string(lineno) + ": row " +
                        to_literal(row) + " does not match the table schema " +
                        to_string(schema) + " (" + e.what() + ")");
      }
      rows.push_back(std::move(row));
    }
    db.tables.emplace(name, Bag::from_values(std::move(rows)));
    db.schemas.emplace(name, schema);
  }
  return db;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic bag database engine", "pbdb"};
  app.require_subcommand(1);
  Options o;
  auto add_db = [&](CLI::App* cmd) {
    cmd->add_option("--db", o.db, "JSONL table files (table name = file stem)")->expected(0, -1);
    cmd->add_option("--output", o.output, "Output file, or - for stdout");
  };
  std::string generate_backend = "exact";
  std::string estimate_backend = "mc";
  auto add_sampling = [&](CLI::App* cmd, std::string& backend) {
    cmd->add_option("--program", o.program, "Rule program file")->required();
    cmd->add_option("--backend", backend, "exact or mc")
        ->check(CLI::IsMember({"exact", "mc"}))
        ->capture_default_str();
    cmd->add_option("--samples", o.samples, "Number of Monte-Carlo worlds");
    cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
  };

  CLI::App* query = app.add_subcommand("query", "Evaluate a query over a database");
  add_db(query);
  query->add_option("--query", o.query, "Query file")->required();

  CLI::App* generate = app.add_subcommand("generate", "Run a generative rule program");
  add_db(generate);

  CLI::App* estimate = app.add_subcommand("estimate", "Estimate a query statistic");
  add_db(estimate);
  estimate->add_option("--query", o.query, "Query file")->required();
  estimate->add_option("--stat", o.stat, "tuple-prob, mean or dist")
      ->check(CLI::IsMember({"tuple-prob", "mean", "dist"}))
      ->capture_default_str();

  std::vector<std::string> argv_storage = {"pbdb"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  add_sampling(generate, generate_backend);
  add_sampling(estimate, estimate_backend);

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  o.backend = generate->parsed() ? generate_backend : estimate_backend;

  std::ofstream file;
  std::ostream* sink = &out;
  if (o.output != "-") {
    file.open(o.output, std::ios::binary);
    if (!file) return report(err, kUsage, "cannot write " + o.output);
    sink = &file;
  }

  try {
    if (query->parsed()) return cmd_query(o, *sink);
    if (generate->parsed()) return cmd_generate(o, *sink);
    return cmd_estimate(o, *sink);
  } catch (const UsageError& e) {
    return report(err, kUsage, e.what());
  } catch (const ParseError& e) {
    return report(err, kParse, e.what());
  } catch (const NotFiniteError& e) {
    return report(err, kNotFinite,
                  std::string(e.what()) + "; exact enumeration is impossible, use --backend mc");
  } catch (const ResourceError& e) {
    return report(err, kResource, e.what());
  } catch (const Error& e) {
    return report(err, kType, e.what());
  }
}

}  // namespace pbdb::cli
