#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spatialmc/grid.hpp"

namespace spatialmc {

enum class Comparator { lt, le, eq, ge, gt };

bool compare(double value, Comparator cmp, double threshold);
std::string_view comparator_token(Comparator cmp);

// Numeric constraint over one attribute; a bare attribute name in the
// concrete syntax is shorthand for name = 1.
struct Constraint {
  std::string attribute;
  Comparator cmp = Comparator::eq;
  double threshold = 1.0;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

// Interval constraint e(z) on a distance value. Both-bounds form is the
// doughnut operator k1 <= z <= k2.
struct DistancePredicate {
  std::optional<double> lower;
  std::optional<double> upper;
  bool lower_strict = false;
  bool upper_strict = false;

  bool matches(double d) const;

  friend bool operator==(const DistancePredicate&, const DistancePredicate&) = default;
};

struct ScmpParams {
  double threshold = 0.0;  // in [-1, 1]
  int radius = 1;          // Chebyshev window half-width, voxels
  int nbins = 1;
  double vmin = 0.0;
  double vmax = 0.0;  // vmin < vmax required
  std::string attribute;

  friend bool operator==(const ScmpParams&, const ScmpParams&) = default;
};

enum class FormulaKind {
  truth,
  atom,
  negation,
  conjunction,
  disjunction,
  near,
  surrounded,
  distance,
  scmp,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable AST node. lhs holds the only child of unary operators.
struct Formula {
  FormulaKind kind = FormulaKind::truth;
  Constraint atom;
  DistancePredicate dpred;
  ScmpParams scmp;
  FormulaPtr lhs;
  FormulaPtr rhs;

  static FormulaPtr truth();
  static FormulaPtr make_atom(Constraint c);
  static FormulaPtr negation(FormulaPtr f);
  static FormulaPtr conjunction(FormulaPtr a, FormulaPtr b);
  static FormulaPtr disjunction(FormulaPtr a, FormulaPtr b);
  static FormulaPtr near(FormulaPtr f);
  static FormulaPtr surrounded(FormulaPtr a, FormulaPtr b);
  static FormulaPtr distance(DistancePredicate p, FormulaPtr f);
  static FormulaPtr scmp_of(ScmpParams p, FormulaPtr sa);
};

bool equal(const Formula& a, const Formula& b);

// Concrete syntax:
//   phi   := or_ ( 'S' or_ )*
//   or_   := and_ ( '|' and_ )*
//   and_  := unary ( '&' unary )*
//   unary := '!' unary | 'N' unary | 'D' '[' dpred ']' '(' phi ')'
//          | 'SCMP' '(' num ',' int ',' int ',' num ',' num ',' ident ',' phi ')'
//          | 'tt' | atom | '(' phi ')'
//   atom  := ident | ident cmp num | num cmp ident
//   dpred := 'z' cmp num | num '<=' 'z' '<=' num
//   cmp   := '<' | '<=' | '=' | '>=' | '>'
FormulaPtr parse_formula(std::string_view text);

// Inverse of parse_formula up to AST equality.
std::string print_formula(const Formula& f);

// Checks attribute references and numeric parameter invariants against a
// model; collects problems instead of aborting.
std::vector<std::string> validate(const Formula& f, const Model& m);

}  // namespace spatialmc
