#include "spatialmc/formula.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace spatialmc {

bool compare(double value, Comparator cmp, double threshold) {
  switch (cmp) {
    case Comparator::lt: return value < threshold;
    case Comparator::le: return value <= threshold;
    case Comparator::eq: return value == threshold;
    case Comparator::ge: return value >= threshold;
    case Comparator::gt: return value > threshold;
  }
  return false;
}

std::string_view comparator_token(Comparator cmp) {
  switch (cmp) {
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    case Comparator::eq: return "=";
    case Comparator::ge: return ">=";
    case Comparator::gt: return ">";
  }
  return "=";
}

static Comparator flipped(Comparator cmp) {
  switch (cmp) {
    case Comparator::lt: return Comparator::gt;
    case Comparator::le: return Comparator::ge;
    case Comparator::eq: return Comparator::eq;
    case Comparator::ge: return Comparator::le;
    case Comparator::gt: return Comparator::lt;
  }
  return cmp;
}

bool DistancePredicate::matches(double d) const {
  if (lower) {
    if (lower_strict ? !(d > *lower) : !(d >= *lower)) return false;
  }
  if (upper) {
    if (upper_strict ? !(d < *upper) : !(d <= *upper)) return false;
  }
  return true;
}

FormulaPtr Formula::truth() {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::truth;
  return f;
}

FormulaPtr Formula::make_atom(Constraint c) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::atom;
  f->atom = std::move(c);
  return f;
}

FormulaPtr Formula::negation(FormulaPtr sub) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::negation;
  f->lhs = std::move(sub);
  return f;
}

FormulaPtr Formula::conjunction(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::conjunction;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr Formula::disjunction(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::disjunction;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr Formula::near(FormulaPtr sub) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::near;
  f->lhs = std::move(sub);
  return f;
}

FormulaPtr Formula::surrounded(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::surrounded;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr Formula::distance(DistancePredicate p, FormulaPtr sub) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::distance;
  f->dpred = p;
  f->lhs = std::move(sub);
  return f;
}

FormulaPtr Formula::scmp_of(ScmpParams p, FormulaPtr sa) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::scmp;
  f->scmp = std::move(p);
  f->lhs = std::move(sa);
  return f;
}

bool equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case FormulaKind::truth: return true;
    case FormulaKind::atom: return a.atom == b.atom;
    case FormulaKind::negation:
    case FormulaKind::near: return equal(*a.lhs, *b.lhs);
    case FormulaKind::conjunction:
    case FormulaKind::disjunction:
    case FormulaKind::surrounded: return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    case FormulaKind::distance: return a.dpred == b.dpred && equal(*a.lhs, *b.lhs);
    case FormulaKind::scmp: return a.scmp == b.scmp && equal(*a.lhs, *b.lhs);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  ident,
  number,
  lparen,
  rparen,
  lbracket,
  rbracket,
  comma,
  bang,
  amp,
  pipe,
  cmp,
  end,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double value = 0.0;
  Comparator cmp = Comparator::eq;
  int line = 1;
  int column = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text, int first_line = 1) : text_(text), line_(first_line) {
    advance();
  }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& message, const Token& at) const {
    throw ParseError(message, at.line, at.column);
  }

 private:
  void advance() {
    skip_space();
    current_ = Token{};
    current_.line = line_;
    current_.column = column();
    if (pos_ >= text_.size()) {
      current_.kind = Tok::end;
      return;
    }
    char c = text_[pos_];
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      current_.kind = Tok::ident;
      current_.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
        (c == '.' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      lex_number();
      return;
    }
    switch (c) {
      case '(': single(Tok::lparen); return;
      case ')': single(Tok::rparen); return;
      case '[': single(Tok::lbracket); return;
      case ']': single(Tok::rbracket); return;
      case ',': single(Tok::comma); return;
      case '!': single(Tok::bang); return;
      case '&': single(Tok::amp); return;
      case '|': single(Tok::pipe); return;
      case '<':
        ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '=') {
          ++pos_;
          comparator(Comparator::le);
        } else {
          comparator(Comparator::lt);
        }
        return;
      case '>':
        ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '=') {
          ++pos_;
          comparator(Comparator::ge);
        } else {
          comparator(Comparator::gt);
        }
        return;
      case '=':
        ++pos_;
        comparator(Comparator::eq);
        return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_, column());
    }
  }

  void single(Tok kind) {
    current_.kind = kind;
    current_.text = text_[pos_];
    ++pos_;
  }

  void comparator(Comparator cmp) {
    current_.kind = Tok::cmp;
    current_.cmp = cmp;
    current_.text = std::string(comparator_token(cmp));
  }

  void lex_number() {
    std::size_t start = pos_;
    if (text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;
      }
    }
    std::string lit(text_.substr(start, pos_ - start));
    if (lit == "-") throw ParseError("malformed number", line_, column());
    current_.kind = Tok::number;
    current_.text = lit;
    current_.value = std::strtod(lit.c_str(), nullptr);
    if (std::isnan(current_.value)) throw ParseError("malformed number", line_, column());
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int column() const { return static_cast<int>(pos_ - line_start_) + 1; }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
  Token current_;
};

// ---------------------------------------------------------------------------
// Parser

bool is_reserved(const std::string& name) {
  return name == "tt" || name == "N" || name == "S" || name == "D" || name == "SCMP" ||
         name == "z";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) {}

  FormulaPtr parse() {
    FormulaPtr f = parse_phi();
    if (lex_.peek().kind != Tok::end) {
      lex_.fail("unexpected trailing input", lex_.peek());
    }
    return f;
  }

 private:
  FormulaPtr parse_phi() {
    FormulaPtr f = parse_or();
    while (lex_.peek().kind == Tok::ident && lex_.peek().text == "S") {
      lex_.take();
      f = Formula::surrounded(std::move(f), parse_or());
    }
    return f;
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (lex_.peek().kind == Tok::pipe) {
      lex_.take();
      f = Formula::disjunction(std::move(f), parse_and());
    }
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_unary();
    while (lex_.peek().kind == Tok::amp) {
      lex_.take();
      f = Formula::conjunction(std::move(f), parse_unary());
    }
    return f;
  }

  FormulaPtr parse_unary() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::bang) {
      lex_.take();
      return Formula::negation(parse_unary());
    }
    if (t.kind == Tok::ident) {
      if (t.text == "N") {
        lex_.take();
        return Formula::near(parse_unary());
      }
      if (t.text == "D") {
        return parse_distance();
      }
      if (t.text == "SCMP") {
        return parse_scmp();
      }
      if (t.text == "tt") {
        lex_.take();
        return Formula::truth();
      }
      if (t.text == "z") {
        lex_.fail("'z' is only admitted inside a distance constraint", t);
      }
      return parse_atom_from_ident();
    }
    if (t.kind == Tok::number) {
      return parse_atom_from_number();
    }
    if (t.kind == Tok::lparen) {
      lex_.take();
      FormulaPtr f = parse_phi();
      expect(Tok::rparen, "expected ')'");
      return f;
    }
    lex_.fail("expected a formula", t);
  }

  FormulaPtr parse_atom_from_ident() {
    Token name = lex_.take();
    if (is_reserved(name.text)) lex_.fail("'" + name.text + "' is a reserved word", name);
    if (lex_.peek().kind == Tok::cmp) {
      Comparator cmp = lex_.take().cmp;
      Token num = expect(Tok::number, "expected a number after comparator");
      return Formula::make_atom(Constraint{name.text, cmp, num.value});
    }
    // Bare attribute name: shorthand for name = 1.
    return Formula::make_atom(Constraint{name.text, Comparator::eq, 1.0});
  }

  FormulaPtr parse_atom_from_number() {
    Token num = lex_.take();
    Token cmp_tok = expect(Tok::cmp, "expected a comparator after number");
    Token name = expect(Tok::ident, "expected an attribute name");
    if (is_reserved(name.text)) lex_.fail("'" + name.text + "' is a reserved word", name);
    return Formula::make_atom(Constraint{name.text, flipped(cmp_tok.cmp), num.value});
  }

  FormulaPtr parse_distance() {
    lex_.take();  // D
    expect(Tok::lbracket, "expected '[' after D");
    DistancePredicate p = parse_dpred();
    expect(Tok::rbracket, "expected ']'");
    expect(Tok::lparen, "expected '(' after distance predicate");
    FormulaPtr sub = parse_phi();
    expect(Tok::rparen, "expected ')'");
    return Formula::distance(p, std::move(sub));
  }

  DistancePredicate parse_dpred() {
    const Token& t = lex_.peek();
    DistancePredicate p;
    if (t.kind == Tok::ident && t.text == "z") {
      lex_.take();
      Token cmp_tok = expect(Tok::cmp, "expected a comparator after z");
      Token num = expect(Tok::number, "expected a number");
      switch (cmp_tok.cmp) {
        case Comparator::lt: p.upper = num.value; p.upper_strict = true; break;
        case Comparator::le: p.upper = num.value; break;
        case Comparator::eq: p.lower = num.value; p.upper = num.value; break;
        case Comparator::ge: p.lower = num.value; break;
        case Comparator::gt: p.lower = num.value; p.lower_strict = true; break;
      }
    } else if (t.kind == Tok::number) {
      Token low = lex_.take();
      Token c1 = expect(Tok::cmp, "expected '<=' in doughnut predicate");
      if (c1.cmp != Comparator::le) lex_.fail("doughnut predicate requires '<='", c1);
      Token z_tok = expect(Tok::ident, "expected 'z'");
      if (z_tok.text != "z") lex_.fail("only 'z' may appear in distance constraints", z_tok);
      Token c2 = expect(Tok::cmp, "expected '<=' in doughnut predicate");
      if (c2.cmp != Comparator::le) lex_.fail("doughnut predicate requires '<='", c2);
      Token high = expect(Tok::number, "expected a number");
      p.lower = low.value;
      p.upper = high.value;
    } else if (t.kind == Tok::ident) {
      lex_.fail("only 'z' may appear in distance constraints", t);
    } else {
      lex_.fail("expected a distance constraint", t);
    }
    if (p.lower && *p.lower < 0.0) {
      lex_.fail("distance lower bound must be >= 0", t);
    }
    if (p.lower && p.upper && *p.lower > *p.upper) {
      lex_.fail("distance lower bound exceeds upper bound", t);
    }
    return p;
  }

  FormulaPtr parse_scmp() {
    Token head = lex_.take();  // SCMP
    expect(Tok::lparen, "expected '(' after SCMP");
    ScmpParams params;
    params.threshold = expect(Tok::number, "expected SCMP threshold").value;
    expect(Tok::comma, "expected ','");
    params.radius = take_int("SCMP radius");
    expect(Tok::comma, "expected ','");
    params.nbins = take_int("SCMP bin count");
    expect(Tok::comma, "expected ','");
    params.vmin = expect(Tok::number, "expected SCMP vmin").value;
    expect(Tok::comma, "expected ','");
    params.vmax = expect(Tok::number, "expected SCMP vmax").value;
    expect(Tok::comma, "expected ','");
    Token attr = expect(Tok::ident, "expected SCMP attribute name");
    if (is_reserved(attr.text)) lex_.fail("'" + attr.text + "' is a reserved word", attr);
    params.attribute = attr.text;
    expect(Tok::comma, "expected ','");
    FormulaPtr sa = parse_phi();
    expect(Tok::rparen, "expected ')'");
    if (params.threshold < -1.0 || params.threshold > 1.0) {
      lex_.fail("SCMP threshold must lie in [-1, 1]", head);
    }
    if (params.radius < 1) lex_.fail("SCMP radius must be a positive integer", head);
    if (params.nbins < 1) lex_.fail("SCMP bin count must be a positive integer", head);
    if (!(params.vmin < params.vmax)) lex_.fail("SCMP requires vmin < vmax", head);
    return Formula::scmp_of(std::move(params), std::move(sa));
  }

  int take_int(const std::string& what) {
    Token num = expect(Tok::number, "expected " + what);
    double rounded = std::floor(num.value);
    if (rounded != num.value || num.value < -2147483648.0 || num.value > 2147483647.0) {
      lex_.fail(what + " must be an integer", num);
    }
    return static_cast<int>(rounded);
  }

  Token expect(Tok kind, const std::string& message) {
    if (lex_.peek().kind != kind) lex_.fail(message, lex_.peek());
    return lex_.take();
  }

  Lexer lex_;
};

// ---------------------------------------------------------------------------
// Printer

std::string number_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Binding strength, loosest first: surrounded, or, and, unary/atomic.
enum Level { level_phi = 0, level_or = 1, level_and = 2, level_unary = 3 };

int level_of(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::surrounded: return level_phi;
    case FormulaKind::disjunction: return level_or;
    case FormulaKind::conjunction: return level_and;
    default: return level_unary;
  }
}

void print_dpred(const DistancePredicate& p, std::string& out) {
  if (p.lower && p.upper) {
    if (p.lower_strict || p.upper_strict) {
      throw std::invalid_argument("strict doughnut bounds are not expressible in the syntax");
    }
    if (*p.lower == *p.upper) {
      out += "z = " + number_text(*p.lower);
    } else {
      out += number_text(*p.lower) + " <= z <= " + number_text(*p.upper);
    }
    return;
  }
  if (p.lower) {
    out += p.lower_strict ? "z > " : "z >= ";
    out += number_text(*p.lower);
    return;
  }
  if (p.upper) {
    out += p.upper_strict ? "z < " : "z <= ";
    out += number_text(*p.upper);
    return;
  }
  throw std::invalid_argument("distance predicate needs at least one bound");
}

void print_into(const Formula& f, int min_level, std::string& out) {
  bool parens = level_of(f) < min_level;
  if (parens) out += "(";
  switch (f.kind) {
    case FormulaKind::truth:
      out += "tt";
      break;
    case FormulaKind::atom:
      out += f.atom.attribute;
      out += " ";
      out += comparator_token(f.atom.cmp);
      out += " ";
      out += number_text(f.atom.threshold);
      break;
    case FormulaKind::negation:
      out += "!";
      print_into(*f.lhs, level_unary, out);
      break;
    case FormulaKind::near:
      out += "N ";
      print_into(*f.lhs, level_unary, out);
      break;
    case FormulaKind::conjunction:
      print_into(*f.lhs, level_and, out);
      out += " & ";
      print_into(*f.rhs, level_unary, out);
      break;
    case FormulaKind::disjunction:
      print_into(*f.lhs, level_or, out);
      out += " | ";
      print_into(*f.rhs, level_and, out);
      break;
    case FormulaKind::surrounded:
      print_into(*f.lhs, level_phi, out);
      out += " S ";
      print_into(*f.rhs, level_or, out);
      break;
    case FormulaKind::distance:
      out += "D[";
      print_dpred(f.dpred, out);
      out += "](";
      print_into(*f.lhs, level_phi, out);
      out += ")";
      break;
    case FormulaKind::scmp:
      out += "SCMP(";
      out += number_text(f.scmp.threshold);
      out += ", " + std::to_string(f.scmp.radius);
      out += ", " + std::to_string(f.scmp.nbins);
      out += ", " + number_text(f.scmp.vmin);
      out += ", " + number_text(f.scmp.vmax);
      out += ", " + f.scmp.attribute;
      out += ", ";
      print_into(*f.lhs, level_phi, out);
      out += ")";
      break;
  }
  if (parens) out += ")";
}

}  // namespace

FormulaPtr parse_formula(std::string_view text) { return Parser(text).parse(); }

std::string print_formula(const Formula& f) {
  std::string out;
  print_into(f, level_phi, out);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void validate_into(const Formula& f, const Model& m, std::vector<std::string>& errors) {
  switch (f.kind) {
    case FormulaKind::truth:
      break;
    case FormulaKind::atom:
      if (!m.grid.has_attribute(f.atom.attribute)) {
        errors.push_back("unknown attribute " + f.atom.attribute);
      }
      if (std::isnan(f.atom.threshold) || std::isinf(f.atom.threshold)) {
        errors.push_back("constraint threshold must be finite");
      }
      break;
    case FormulaKind::negation:
    case FormulaKind::near:
      validate_into(*f.lhs, m, errors);
      break;
    case FormulaKind::conjunction:
    case FormulaKind::disjunction:
    case FormulaKind::surrounded:
      validate_into(*f.lhs, m, errors);
      validate_into(*f.rhs, m, errors);
      break;
    case FormulaKind::distance: {
      const DistancePredicate& p = f.dpred;
      if (!p.lower && !p.upper) errors.push_back("distance predicate needs at least one bound");
      if (p.lower && *p.lower < 0.0) errors.push_back("distance lower bound must be >= 0");
      if (p.lower && p.upper && *p.lower > *p.upper) {
        errors.push_back("distance lower bound exceeds upper bound");
      }
      validate_into(*f.lhs, m, errors);
      break;
    }
    case FormulaKind::scmp: {
      const ScmpParams& p = f.scmp;
      if (!m.grid.has_attribute(p.attribute)) {
        errors.push_back("unknown attribute " + p.attribute);
      }
      if (p.threshold < -1.0 || p.threshold > 1.0) {
        errors.push_back("SCMP threshold must lie in [-1, 1]");
      }
      if (p.radius < 1) errors.push_back("SCMP radius must be positive");
      if (p.nbins < 1) errors.push_back("SCMP bin count must be positive");
      if (!(p.vmin < p.vmax)) errors.push_back("SCMP requires vmin < vmax");
      validate_into(*f.lhs, m, errors);
      break;
    }
  }
}

}  // namespace

std::vector<std::string> validate(const Formula& f, const Model& m) {
  std::vector<std::string> errors;
  validate_into(f, m, errors);
  return errors;
}

}  // namespace spatialmc
