#ifndef PBDB_DSL_H_
#define PBDB_DSL_H_

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "pbdb/balg.h"
#include "pbdb/schema.h"

namespace pbdb {

// Textual query language.  A query is a source followed by `|>` stages:
//
//   table db |> match cast as (a, m)
//            |> joinmatch db gross as (m2, r) on (.m = .m2)
//            |> select (.r > 200000000) |> project [a]
//
// `match TAG as (x, ...)` keeps the rows tagged TAG and replaces each by its
// payload, naming the payload fields; `joinmatch TABLE TAG as (...) on (p)`
// is a product with a matched table followed by select(p).  Names are
// resolved to positions while parsing, so the resulting AST is purely
// positional.
//
// Throws ParseError with the position of the first offending token.
QueryPtr parse_query(std::string_view text);

// Parses a value literal (see to_literal()).
Value parse_value_literal(std::string_view text);

// Renders an AST in the surface syntax; parse_query(pretty(q)) == q.
std::string pretty(const Query& q);
std::string pretty(const Expr& e);

using Catalog = std::map<std::string, Schema, std::less<>>;

// Static check against table row schemas.  Returns the schema of the query
// result (BagT(...) for bag-valued queries) or throws TypeError.
Schema check(const Query& q, const Catalog& catalog);
Schema check_expr(const Expr& e, const Schema& row);

}  // namespace pbdb

#endif  // PBDB_DSL_H_
