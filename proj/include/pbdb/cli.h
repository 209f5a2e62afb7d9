#ifndef PBDB_CLI_H_
#define PBDB_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pbdb/balg.h"
#include "pbdb/dsl.h"

namespace pbdb::cli {

enum ExitCode {
  kOk = 0,
  kUsage = 1,  // bad flags, unreadable files
  kParse = 2,
  kType = 3,   // type, evaluation and program errors
  kResource = 4,
  kNotFinite = 5,
};

// Tables loaded from JSONL files: one value per line, table name = file
// stem, row schema inferred from the first rows and enforced on the rest.
struct Database {
  Env tables;
  Catalog schemas;
};

Database load_database(const std::vector<std::filesystem::path>& files);

// Runs `pbdb <args...>` (args excludes the program name) and returns the
// exit code.  Results go to `out` unless --output names a file;
// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pbdb::cli

#endif  // PBDB_CLI_H_
