#include "mflab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace mflab {

std::string fmt_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

class ExprParser {
 public:
  ExprParser(const std::string& text, int dim, RateExpr& out)
      : text_(text), dim_(dim), out_(out) {}

  void run() {
    if (text_.empty()) throw ParseError("empty expression", 0);
    out_.dim_ = dim_;
    out_.source_ = text_;
    out_.root_ = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("trailing input", pos_);
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  int add_node(RateExpr::Node n) {
    out_.nodes_.push_back(n);
    return static_cast<int>(out_.nodes_.size() - 1);
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      int rhs = parse_term();
      RateExpr::Node n;
      n.kind = (c == '+') ? RateExpr::Kind::add : RateExpr::Kind::sub;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = add_node(n);
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    while (peek() == '*') {
      ++pos_;
      int rhs = parse_factor();
      RateExpr::Node n;
      n.kind = RateExpr::Kind::mul;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = add_node(n);
    }
    return lhs;
  }

  int parse_factor() {
    int base = parse_atom();
    if (peek() != '^') return base;
    ++pos_;
    skip_ws();
    RateExpr::Node n;
    n.kind = RateExpr::Kind::pow;
    n.lhs = base;
    n.exponent = parse_uint("exponent");
    return add_node(n);
  }

  unsigned parse_uint(const char* what) {
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
      throw ParseError(std::string("expected unsigned integer ") + what, pos_);
    unsigned value = 0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{}) throw ParseError(std::string("bad unsigned integer ") + what, pos_);
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return value;
  }

  int parse_atom() {
    char c = peek();
    if (c == '\0') throw ParseError("expected number, variable, '(' or 'max0('", pos_);
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw ParseError("unexpected character", pos_);
  }

  int parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ == start || (pos_ == start + 1 && text_[start] == '.'))
      throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // the 'e' belongs to something else; not ours
      }
    }
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc{}) throw ParseError("malformed number", start);
    RateExpr::Node n;
    n.kind = RateExpr::Kind::constant;
    n.value = value;
    return add_node(n);
  }

  int parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    std::string ident = text_.substr(start, pos_ - start);
    if (ident.size() >= 2 && ident[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < ident.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(ident[i]))) digits = false;
      if (digits) {
        int idx = 0;
        std::from_chars(ident.data() + 1, ident.data() + ident.size(), idx);
        if (idx >= dim_)
          throw ParseError("variable index " + std::to_string(idx) + " out of range for dim " +
                               std::to_string(dim_),
                           start);
        RateExpr::Node n;
        n.kind = RateExpr::Kind::variable;
        n.var = idx;
        return add_node(n);
      }
    }
    if (ident == "max0") {
      if (peek() != '(') throw ParseError("expected '(' after max0", pos_);
      ++pos_;
      int inner = parse_expr();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      RateExpr::Node n;
      n.kind = RateExpr::Kind::max0;
      n.lhs = inner;
      return add_node(n);
    }
    throw ParseError("unknown identifier '" + ident + "'", start);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int dim_;
  RateExpr& out_;
};

RateExpr RateExpr::parse(const std::string& text, int dim) {
  RateExpr e;
  ExprParser(text, dim, e).run();
  e.compile();
  return e;
}

double RateExpr::eval_node(int idx, std::span<const double> y) const {
  const Node& n = nodes_[static_cast<std::size_t>(idx)];
  switch (n.kind) {
    case Kind::constant:
      return n.value;
    case Kind::variable:
      return y[static_cast<std::size_t>(n.var)];
    case Kind::add:
      return eval_node(n.lhs, y) + eval_node(n.rhs, y);
    case Kind::sub:
      return eval_node(n.lhs, y) - eval_node(n.rhs, y);
    case Kind::mul:
      return eval_node(n.lhs, y) * eval_node(n.rhs, y);
    case Kind::pow: {
      double base = eval_node(n.lhs, y);
      double r = 1.0;
      for (unsigned i = 0; i < n.exponent; ++i) r *= base;
      return r;
    }
    case Kind::max0: {
      double v = eval_node(n.lhs, y);
      return v > 0.0 ? v : 0.0;
    }
  }
  return 0.0;
}

double RateExpr::eval_tree(std::span<const double> y) const { return eval_node(root_, y); }

void RateExpr::compile() {
  prog_.clear();
  // post-order emission with explicit stack
  std::vector<std::pair<int, bool>> work;
  work.emplace_back(root_, false);
  while (!work.empty()) {
    auto [idx, expanded] = work.back();
    work.pop_back();
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    if (!expanded) {
      switch (n.kind) {
        case Kind::constant:
          prog_.push_back({Op::push_const, 0, n.value});
          break;
        case Kind::variable:
          prog_.push_back({Op::push_var, static_cast<unsigned>(n.var), 0.0});
          break;
        case Kind::pow:
        case Kind::max0:
          work.emplace_back(idx, true);
          work.emplace_back(n.lhs, false);
          break;
        default:
          work.emplace_back(idx, true);
          work.emplace_back(n.rhs, false);
          work.emplace_back(n.lhs, false);
          break;
      }
    } else {
      switch (n.kind) {
        case Kind::add:
          prog_.push_back({Op::add, 0, 0.0});
          break;
        case Kind::sub:
          prog_.push_back({Op::sub, 0, 0.0});
          break;
        case Kind::mul:
          prog_.push_back({Op::mul, 0, 0.0});
          break;
        case Kind::pow:
          prog_.push_back({Op::pow, n.exponent, 0.0});
          break;
        case Kind::max0:
          prog_.push_back({Op::max0, 0, 0.0});
          break;
        default:
          break;
      }
    }
  }
  int depth = 0;
  stack_need_ = 0;
  for (const Instr& ins : prog_) {
    if (ins.op == Op::push_const || ins.op == Op::push_var)
      ++depth;
    else if (ins.op == Op::add || ins.op == Op::sub || ins.op == Op::mul)
      --depth;
    if (depth > stack_need_) stack_need_ = depth;
  }
}

double RateExpr::eval(std::span<const double> y) const {
  if (prog_.empty()) return 0.0;
  double fixed[64];
  std::vector<double> heap;
  double* st = fixed;
  if (stack_need_ > 64) {
    heap.resize(static_cast<std::size_t>(stack_need_));
    st = heap.data();
  }
  int top = 0;
  for (const Instr& ins : prog_) {
    switch (ins.op) {
      case Op::push_const:
        st[top++] = ins.k;
        break;
      case Op::push_var:
        st[top++] = y[ins.aux];
        break;
      case Op::add:
        --top;
        st[top - 1] += st[top];
        break;
      case Op::sub:
        --top;
        st[top - 1] -= st[top];
        break;
      case Op::mul:
        --top;
        st[top - 1] *= st[top];
        break;
      case Op::pow: {
        double base = st[top - 1];
        double r = 1.0;
        for (unsigned i = 0; i < ins.aux; ++i) r *= base;
        st[top - 1] = r;
        break;
      }
      case Op::max0:
        if (st[top - 1] < 0.0) st[top - 1] = 0.0;
        break;
    }
  }
  return st[0];
}

// precedence levels: 1 add/sub, 2 mul, 3 pow, 4 atoms
void RateExpr::print_node(int idx, int parent_prec, std::string& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(idx)];
  int prec = 4;
  switch (n.kind) {
    case Kind::add:
    case Kind::sub:
      prec = 1;
      break;
    case Kind::mul:
      prec = 2;
      break;
    case Kind::pow:
      prec = 3;
      break;
    default:
      prec = 4;
      break;
  }
  bool paren = prec < parent_prec;
  if (paren) out += '(';
  switch (n.kind) {
    case Kind::constant:
      out += fmt_full(n.value);
      break;
    case Kind::variable:
      out += 'x';
      out += std::to_string(n.var);
      break;
    case Kind::add:
      print_node(n.lhs, 1, out);
      out += " + ";
      print_node(n.rhs, 2, out);
      break;
    case Kind::sub:
      print_node(n.lhs, 1, out);
      out += " - ";
      print_node(n.rhs, 2, out);  // right operand binds tighter under '-'
      break;
    case Kind::mul:
      print_node(n.lhs, 2, out);
      out += '*';
      print_node(n.rhs, 3, out);
      break;
    case Kind::pow:
      print_node(n.lhs, 4, out);
      out += '^';
      out += std::to_string(n.exponent);
      break;
    case Kind::max0:
      out += "max0(";
      print_node(n.lhs, 1, out);
      out += ')';
      break;
  }
  if (paren) out += ')';
}

std::string RateExpr::str() const {
  std::string out;
  if (root_ >= 0) print_node(root_, 1, out);
  return out;
}

}  // namespace mflab
