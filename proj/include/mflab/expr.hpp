#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mflab/common.hpp"

namespace mflab {

/// Arithmetic expression over variables x0..x{d-1} used for jump rates and
/// kernel entries. Grammar:
///
///   expr   := term (('+'|'-') term)*
///   term   := factor ('*' factor)*
///   factor := atom ('^' uint)?
///   atom   := number | 'x'uint | '(' expr ')' | 'max0(' expr ')'
///
/// No division, no roots, no unary minus: evaluation is total on R^d.
/// max0(e) = max(e, 0) is the nonnegativity guard for rates.
class RateExpr {
 public:
  RateExpr() = default;

  /// Parses `text` against the grammar; variable indices must be < dim.
  /// Throws ParseError with the byte offset of the failure.
  static RateExpr parse(const std::string& text, int dim);

  /// Fast evaluation of the compiled postfix program.
  double eval(std::span<const double> y) const;
  double operator()(std::span<const double> y) const { return eval(y); }

  /// Reference recursive tree evaluation (kept as the slow oracle path).
  double eval_tree(std::span<const double> y) const;

  /// Canonical re-parsable rendering of the tree.
  std::string str() const;

  /// The exact text this expression was parsed from.
  const std::string& source() const { return source_; }

  int dim() const { return dim_; }
  bool empty() const { return nodes_.empty(); }

 private:
  enum class Kind : std::uint8_t { constant, variable, add, sub, mul, pow, max0 };
  struct Node {
    Kind kind;
    double value = 0.0;   // constant
    int var = -1;         // variable
    int lhs = -1, rhs = -1;
    unsigned exponent = 0;
  };

  enum class Op : std::uint8_t { push_const, push_var, add, sub, mul, pow, max0 };
  struct Instr {
    Op op;
    unsigned aux = 0;
    double k = 0.0;
  };

  double eval_node(int idx, std::span<const double> y) const;
  void print_node(int idx, int parent_prec, std::string& out) const;
  void compile();

  std::vector<Node> nodes_;
  int root_ = -1;
  int dim_ = 0;
  std::string source_;
  std::vector<Instr> prog_;
  int stack_need_ = 0;

  friend class ExprParser;
};

}  // namespace mflab
