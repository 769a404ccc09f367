#include "spatialmc/script.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "spatialmc/checker.hpp"
#include "spatialmc/parallel.hpp"

namespace spatialmc {

namespace {

// '#' starts a comment only where a new token would begin, so layer colors
// like tumor:#FFA500 survive.
std::vector<std::string> tokenize_line(const std::string& line, int line_no) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '"') {
      std::size_t close = line.find('"', i + 1);
      if (close == std::string::npos) {
        throw ParseError("unterminated string", line_no, static_cast<int>(i) + 1);
      }
      tokens.push_back(line.substr(i, close - i + 1));
      i = close + 1;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

bool is_quoted(const std::string& t) { return t.size() >= 2 && t.front() == '"' && t.back() == '"'; }
std::string unquote(const std::string& t) { return t.substr(1, t.size() - 2); }

bool valid_ident(const std::string& t) {
  if (t.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(t[0])) || t[0] == '_')) return false;
  for (char c : t) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

// Replaces bare references to let-bound names by their formulas. A bound name
// used with any constraint other than the bare form (name = 1) is an error.
FormulaPtr substitute(const FormulaPtr& f, const std::map<std::string, FormulaPtr>& env,
                      int line_no) {
  switch (f->kind) {
    case FormulaKind::truth:
      return f;
    case FormulaKind::atom: {
      auto it = env.find(f->atom.attribute);
      if (it == env.end()) return f;
      if (f->atom.cmp != Comparator::eq || f->atom.threshold != 1.0) {
        throw ParseError("'" + f->atom.attribute + "' names a formula and cannot be compared",
                         line_no, 1);
      }
      return it->second;
    }
    case FormulaKind::negation:
      return Formula::negation(substitute(f->lhs, env, line_no));
    case FormulaKind::near:
      return Formula::near(substitute(f->lhs, env, line_no));
    case FormulaKind::conjunction:
      return Formula::conjunction(substitute(f->lhs, env, line_no),
                                  substitute(f->rhs, env, line_no));
    case FormulaKind::disjunction:
      return Formula::disjunction(substitute(f->lhs, env, line_no),
                                  substitute(f->rhs, env, line_no));
    case FormulaKind::surrounded:
      return Formula::surrounded(substitute(f->lhs, env, line_no),
                                 substitute(f->rhs, env, line_no));
    case FormulaKind::distance:
      return Formula::distance(f->dpred, substitute(f->lhs, env, line_no));
    case FormulaKind::scmp: {
      if (env.count(f->scmp.attribute)) {
        throw ParseError("SCMP attribute '" + f->scmp.attribute + "' must name a model attribute",
                         line_no, 1);
      }
      return Formula::scmp_of(f->scmp, substitute(f->lhs, env, line_no));
    }
  }
  throw ParseError("unknown formula kind", line_no, 1);
}

double parse_positive_real(const std::string& t, int line_no, const std::string& what) {
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0' || !(v > 0.0)) {
    throw ParseError(what + " must be a positive number", line_no, 1);
  }
  return v;
}

}  // namespace

Script parse_script(std::string_view text) {
  Script script;
  std::map<std::string, FormulaPtr> bindings;
  bool model_loaded = false;
  bool lets_started = false;

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = tokenize_line(line, line_no);
    if (tokens.empty()) continue;

    Statement st;
    st.line = line_no;
    const std::string& head = tokens[0];

    if (head == "load") {
      if (tokens.size() != 5 || tokens[2] != "=" || !is_quoted(tokens[4]) ||
          (tokens[3] != "image" && tokens[3] != "volume")) {
        throw ParseError("expected: load <name> = image|volume \"<path>\"", line_no, 1);
      }
      if (model_loaded) throw ParseError("only one model may be loaded", line_no, 1);
      if (!valid_ident(tokens[1])) throw ParseError("bad load name", line_no, 1);
      st.kind = Statement::Kind::load;
      st.name = tokens[1];
      st.is_volume = tokens[3] == "volume";
      st.path = unquote(tokens[4]);
      model_loaded = true;
    } else if (head == "neighborhood") {
      if (lets_started) {
        throw ParseError("neighborhood must precede the first let", line_no, 1);
      }
      st.kind = Statement::Kind::neighborhood;
      if (tokens.size() == 2 && (tokens[1] == "moore" || tokens[1] == "vonneumann")) {
        st.preset = tokens[1];
      } else if (tokens.size() == 3 && tokens[1] == "extended") {
        st.preset = tokens[1];
        char* end = nullptr;
        long k = std::strtol(tokens[2].c_str(), &end, 10);
        if (end == tokens[2].c_str() || *end != '\0' || k < 1) {
          throw ParseError("extended neighborhood needs a positive integer", line_no, 1);
        }
        st.extent = static_cast<int>(k);
      } else {
        throw ParseError("expected: neighborhood moore|vonneumann|extended <k>", line_no, 1);
      }
    } else if (head == "spacing") {
      if (lets_started) throw ParseError("spacing must precede the first let", line_no, 1);
      if (tokens.size() < 3 || tokens.size() > 4) {
        throw ParseError("expected: spacing <s0> <s1> [<s2>]", line_no, 1);
      }
      st.kind = Statement::Kind::spacing;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        st.values.push_back(parse_positive_real(tokens[i], line_no, "spacing"));
      }
    } else if (head == "let") {
      if (!model_loaded) throw ParseError("a model must be loaded before let", line_no, 1);
      if (tokens.size() < 4 || tokens[2] != "=") {
        throw ParseError("expected: let <name> = <formula>", line_no, 1);
      }
      if (!valid_ident(tokens[1])) throw ParseError("bad let name", line_no, 1);
      if (bindings.count(tokens[1])) {
        throw ParseError("'" + tokens[1] + "' is already bound", line_no, 1);
      }
      st.kind = Statement::Kind::let;
      st.name = tokens[1];
      std::size_t eq = line.find('=');
      std::string body = line.substr(eq + 1);
      if (auto hash = body.find('#'); hash != std::string::npos) body = body.substr(0, hash);
      FormulaPtr parsed;
      try {
        parsed = parse_formula(body);
      } catch (const ParseError& e) {
        throw ParseError(std::string("in formula: ") + e.what(), line_no, e.column);
      }
      st.formula = substitute(parsed, bindings, line_no);
      bindings.emplace(st.name, st.formula);
      lets_started = true;
    } else if (head == "save") {
      if (tokens.size() >= 2 && tokens[1] == "mask") {
        if (tokens.size() != 4 || !is_quoted(tokens[2])) {
          throw ParseError("expected: save mask \"<path>\" <name>", line_no, 1);
        }
        st.kind = Statement::Kind::save_mask;
        st.path = unquote(tokens[2]);
        st.name = tokens[3];
        if (!bindings.count(st.name)) {
          throw ParseError("'" + st.name + "' is not bound", line_no, 1);
        }
      } else if (tokens.size() >= 2 && tokens[1] == "overlay") {
        if (tokens.size() < 4 || !is_quoted(tokens[2]) || tokens[3].rfind("base=", 0) != 0) {
          throw ParseError("expected: save overlay \"<path>\" base=<attr> <name>:<#RRGGBB> ...",
                           line_no, 1);
        }
        st.kind = Statement::Kind::save_overlay;
        st.path = unquote(tokens[2]);
        st.base_attr = tokens[3].substr(5);
        for (std::size_t i = 4; i < tokens.size(); ++i) {
          auto colon = tokens[i].find(':');
          if (colon == std::string::npos) {
            throw ParseError("expected <name>:<#RRGGBB>", line_no, 1);
          }
          std::string name = tokens[i].substr(0, colon);
          if (!bindings.count(name)) {
            throw ParseError("'" + name + "' is not bound", line_no, 1);
          }
          Rgb color;
          try {
            color = parse_color(tokens[i].substr(colon + 1));
          } catch (const ParseError&) {
            throw ParseError("bad overlay color in '" + tokens[i] + "'", line_no, 1);
          }
          st.layers.emplace_back(name, color);
        }
      } else {
        throw ParseError("expected: save mask|overlay ...", line_no, 1);
      }
    } else if (head == "print") {
      if (tokens.size() != 3 || tokens[1] != "stats") {
        throw ParseError("expected: print stats <name>", line_no, 1);
      }
      st.kind = Statement::Kind::print_stats;
      st.name = tokens[2];
      if (!bindings.count(st.name)) {
        throw ParseError("'" + st.name + "' is not bound", line_no, 1);
      }
    } else {
      throw ParseError("unknown statement '" + head + "'", line_no, 1);
    }
    script.statements.push_back(std::move(st));
  }
  return script;
}

Script parse_script_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open script " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str());
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (base_dir.empty() || p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

struct Session {
  VoxelGrid grid;
  std::string nb_preset;
  int nb_extent = 0;
  std::optional<std::vector<double>> spacing_override;
  std::optional<Model> model;
  std::optional<CheckContext> ctx;
  std::map<std::string, PointSet> results;

  // Builds the model lazily at the first let; neighborhood defaults to Moore
  // with Euclidean weights, spacing comes from the loaded file unless
  // overridden.
  void freeze(int threads) {
    if (model) return;
    if (spacing_override) {
      if (spacing_override->size() != grid.ndims()) {
        throw ModelError("spacing arity does not match the loaded model");
      }
      grid.spacing = *spacing_override;
    }
    NeighborhoodSpec nb = NeighborhoodSpec::moore(grid.ndims());
    if (nb_preset == "vonneumann") {
      nb = NeighborhoodSpec::von_neumann(grid.ndims());
    } else if (nb_preset == "extended") {
      nb = NeighborhoodSpec::extended(grid.ndims(), nb_extent);
    }
    model = make_model(std::move(grid), std::move(nb));
    ctx.emplace(*model, threads);
  }
};

}  // namespace

int run_script(const Script& script, const RunOptions& opts, std::ostream& out,
               std::ostream& err) {
  int threads = opts.threads > 0 ? opts.threads : default_thread_count();
  Session session;
  int current_line = 0;
  try {
    for (const Statement& st : script.statements) {
      current_line = st.line;
      switch (st.kind) {
        case Statement::Kind::load: {
          std::string path = resolve(opts.base_dir, st.path);
          session.grid = st.is_volume ? load_volume(path) : load_image2d(path);
          // Register prefixed aliases alongside the bare channel names.
          std::vector<std::pair<std::string, ScalarField>> aliases;
          for (const auto& [name, field] : session.grid.attributes) {
            aliases.emplace_back(st.name + "." + name, field);
          }
          for (auto& [name, field] : aliases) {
            session.grid.attributes.emplace(std::move(name), std::move(field));
          }
          if (opts.verbose) {
            out << "loaded " << st.path << ":";
            for (std::size_t d : session.grid.dims) out << " " << d;
            out << "\n";
          }
          break;
        }
        case Statement::Kind::neighborhood:
          session.nb_preset = st.preset;
          session.nb_extent = st.extent;
          break;
        case Statement::Kind::spacing:
          session.spacing_override = st.values;
          break;
        case Statement::Kind::let: {
          session.freeze(threads);
          auto errors = validate(*st.formula, *session.model);
          if (!errors.empty()) {
            for (const auto& e : errors) {
              err << "script:" << st.line << ": " << e << "\n";
            }
            return 1;
          }
          auto t0 = std::chrono::steady_clock::now();
          PointSet result = check(*session.ctx, *st.formula);
          auto t1 = std::chrono::steady_clock::now();
          if (opts.verbose) {
            double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            out << "let " << st.name << ": " << result.count() << " points, " << std::fixed
                << std::setprecision(2) << ms << " ms\n";
            out.unsetf(std::ios::fixed);
          }
          session.results.insert_or_assign(st.name, std::move(result));
          break;
        }
        case Statement::Kind::save_mask:
          save_mask(resolve(opts.base_dir, st.path), session.results.at(st.name));
          break;
        case Statement::Kind::save_overlay: {
          OverlaySpec spec;
          spec.base = st.base_attr;
          for (const auto& [name, color] : st.layers) {
            spec.layers.push_back({session.results.at(name), color});
          }
          save_overlay(resolve(opts.base_dir, st.path), session.model ? session.model->grid
                                                                      : session.grid,
                       spec);
          break;
        }
        case Statement::Kind::print_stats: {
          const PointSet& s = session.results.at(st.name);
          double percent =
              static_cast<double>(s.count()) / static_cast<double>(s.size()) * 100.0;
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.4f", percent);
          out << "stats " << st.name << ": count=" << s.count() << " percent=" << buf << "\n";
          break;
        }
      }
    }
  } catch (const LoadError& e) {
    err << "script:" << current_line << ": " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "script:" << current_line << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "script:" << current_line << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run_script_file(const std::string& path, RunOptions opts, std::ostream& out,
                    std::ostream& err) {
  Script script;
  try {
    script = parse_script_file(path);
  } catch (const LoadError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << path << ":" << e.what() << "\n";
    return 1;
  }
  if (opts.base_dir.empty()) {
    opts.base_dir = std::filesystem::path(path).parent_path().string();
  }
  return run_script(script, opts, out, err);
}

}  // namespace spatialmc
