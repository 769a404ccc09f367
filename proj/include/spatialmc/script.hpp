#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "spatialmc/formula.hpp"
#include "spatialmc/imgio.hpp"

namespace spatialmc {

// One analysis-script statement. Line-oriented concrete syntax:
//   load <attrprefix> = image "<path>" | volume "<path>"
//   neighborhood moore | vonneumann | extended <k>
//   spacing <s0> <s1> [<s2>]
//   let <ident> = <formula>
//   save mask "<path>" <ident>
//   save overlay "<path>" base=<attr> <ident>:<#RRGGBB> ...
//   print stats <ident>
struct Statement {
  enum class Kind { load, neighborhood, spacing, let, save_mask, save_overlay, print_stats };

  Kind kind;
  int line = 0;
  std::string name;  // load prefix / let, save, print identifier
  std::string path;
  bool is_volume = false;
  std::string preset;  // neighborhood preset name
  int extent = 0;      // extended k
  std::vector<double> values;
  FormulaPtr formula;  // let body, let-names already substituted
  std::string base_attr;
  std::vector<std::pair<std::string, Rgb>> layers;
};

struct Script {
  std::vector<Statement> statements;
};

struct RunOptions {
  bool verbose = false;
  int threads = 0;  // 0 = hardware default
  // Directory against which relative paths in the script resolve; empty = cwd.
  std::string base_dir;
};

// Parses and resolves let-name substitution. Use-before-bind of save/print
// identifiers, a let before any load, or a second load are parse errors;
// attribute existence is checked at run time once the model is loaded.
Script parse_script(std::string_view text);
Script parse_script_file(const std::string& path);

// Executes statements in order; first error aborts. Exit code 0 on success,
// 1 on script errors, 2 on I/O errors.
int run_script(const Script& script, const RunOptions& opts, std::ostream& out, std::ostream& err);
int run_script_file(const std::string& path, RunOptions opts, std::ostream& out, std::ostream& err);

}  // namespace spatialmc
