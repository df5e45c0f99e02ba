#pragma once

// Surface expressions: parsing, printing and evaluation.
//
// Grammar (whitespace ignored):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | 'X' | 'Y' | 'pi' | name '(' expr ')' | '(' expr ')'
// The exponent of '^' may not depend on X or Y.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"

namespace platemorph {

enum class Func { Sin, Cos, Tan, Sinh, Cosh, Tanh, Sech, Exp, Ln, Sqrt, Abs, Arcsinh, Arccos, Arcsin };

inline constexpr std::array<std::pair<std::string_view, Func>, 14> kFunctions{{
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tan", Func::Tan},
    {"sinh", Func::Sinh},
    {"cosh", Func::Cosh},
    {"tanh", Func::Tanh},
    {"sech", Func::Sech},
    {"exp", Func::Exp},
    {"ln", Func::Ln},
    {"sqrt", Func::Sqrt},
    {"abs", Func::Abs},
    {"arcsinh", Func::Arcsinh},
    {"arccos", Func::Arccos},
    {"arcsin", Func::Arcsin},
}};

inline std::string_view func_name(Func f) {
  for (auto& [n, g] : kFunctions)
    if (g == f) return n;
  return "?";
}

enum class Op { Num, X, Y, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Num;
  double value = 0.0;
  Func fn = Func::Sin;
  NodePtr a, b;
};

inline bool same_tree(const NodePtr& p, const NodePtr& q) {
  if (!p || !q) return !p && !q;
  if (p->op != q->op) return false;
  if (p->op == Op::Num && p->value != q->value) return false;
  if (p->op == Op::Call && p->fn != q->fn) return false;
  return same_tree(p->a, q->a) && same_tree(p->b, q->b);
}

inline bool depends_on_xy(const NodePtr& n) {
  if (!n) return false;
  if (n->op == Op::X || n->op == Op::Y) return true;
  return depends_on_xy(n->a) || depends_on_xy(n->b);
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Fully parenthesised text; parsing it again yields the same tree.
inline void print_node(const NodePtr& n, std::string& out) {
  switch (n->op) {
    case Op::Num: out += format_number(n->value); return;
    case Op::X: out += 'X'; return;
    case Op::Y: out += 'Y'; return;
    case Op::Pi: out += "pi"; return;
    case Op::Neg:
      out += "(-";
      print_node(n->a, out);
      out += ')';
      return;
    case Op::Call:
      out += func_name(n->fn);
      out += '(';
      print_node(n->a, out);
      out += ')';
      return;
    default: break;
  }
  const char* sym = n->op == Op::Add ? " + " : n->op == Op::Sub ? " - " : n->op == Op::Mul ? " * " : n->op == Op::Div ? " / " : " ^ ";
  out += '(';
  print_node(n->a, out);
  out += sym;
  print_node(n->b, out);
  out += ')';
}

namespace detail {

inline NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(pos_, std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+')) lhs = make(Op::Add, lhs, term());
      else if (eat('-')) lhs = make(Op::Sub, lhs, term());
      else return lhs;
    }
  }
  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (eat('*')) lhs = make(Op::Mul, lhs, unary());
      else if (eat('/')) lhs = make(Op::Div, lhs, unary());
      else return lhs;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(Op::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (eat('^')) {
      skip();
      std::size_t at = pos_;
      NodePtr ex = unary();
      if (depends_on_xy(ex)) throw ParseError(at, "exponent must be constant");
      return make(Op::Pow, base, ex);
    }
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError(pos_, "unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) throw ParseError(pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(pos_, std::string("unexpected '") + c + "'");
  }
  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc() || ptr != s_.data() + pos_) throw ParseError(start, "malformed number");
    auto n = std::make_shared<Node>();
    n->op = Op::Num;
    n->value = v;
    return n;
  }
  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string_view id = s_.substr(start, pos_ - start);
    if (id == "X") return make(Op::X);
    if (id == "Y") return make(Op::Y);
    if (id == "pi") return make(Op::Pi);
    for (auto& [name, f] : kFunctions) {
      if (id != name) continue;
      if (!eat('(')) throw ParseError(pos_, "expected '(' after " + std::string(id));
      NodePtr arg = expr();
      if (!eat(')')) throw ParseError(pos_, "expected ')'");
      auto n = std::make_shared<Node>();
      n->op = Op::Call;
      n->fn = f;
      n->a = arg;
      return n;
    }
    throw ParseError(start, "unknown identifier '" + std::string(id) + "'");
  }
};

}  // namespace detail

// Scalar function application with domain checks. T is a floating type or a jet.
template <class T>
inline T apply(Func f, const T& u) {
  using std::abs;
  using std::acos;
  using std::asin;
  using std::asinh;
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  using std::tan;
  using std::tanh;
  double a = static_cast<double>(value_of(u));
  switch (f) {
    case Func::Sin: return sin(u);
    case Func::Cos: return cos(u);
    case Func::Tan: return tan(u);
    case Func::Sinh: return sinh(u);
    case Func::Cosh: return cosh(u);
    case Func::Tanh: return tanh(u);
    case Func::Sech: return sech(u);
    case Func::Exp: return exp(u);
    case Func::Ln:
      if (!(a > 0.0)) throw Error(ErrorKind::Domain, "ln of non-positive argument");
      return log(u);
    case Func::Sqrt:
      if (a < 0.0) throw Error(ErrorKind::Domain, "sqrt of negative argument");
      return sqrt(u);
    case Func::Abs: return abs(u);
    case Func::Arcsinh: return asinh(u);
    case Func::Arccos:
      if (std::abs(a) > 1.0) throw Error(ErrorKind::Domain, "arccos argument outside [-1, 1]");
      return acos(u);
    case Func::Arcsin:
      if (std::abs(a) > 1.0) throw Error(ErrorKind::Domain, "arcsin argument outside [-1, 1]");
      return asin(u);
  }
  return u;
}

template <class T>
inline T apply_pow(const T& u, double p) {
  using std::pow;
  double a = static_cast<double>(value_of(u));
  if constexpr (std::is_floating_point_v<T>) {
    if (a < 0.0 && p != std::floor(p)) throw Error(ErrorKind::Domain, "fractional power of negative argument");
    if (a == 0.0 && p < 0.0) throw Error(ErrorKind::Domain, "division by zero");
  }
  return pow(u, p);
}

template <class T>
inline T divide(const T& a, const T& b) {
  if (value_of(b) == 0.0) throw Error(ErrorKind::Domain, "division by zero");
  return a / b;
}

// Postfix program with constant subtrees folded.
class Program {
 public:
  struct Instr {
    Op op;
    Func fn = Func::Sin;
    double value = 0.0;
  };

  Program() = default;
  explicit Program(const NodePtr& root) {
    emit(root);
    int d = 0;
    for (auto& in : code_) {
      switch (in.op) {
        case Op::Num:
        case Op::X:
        case Op::Y: ++d; break;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: --d; break;
        default: break;
      }
      depth_ = std::max(depth_, d);
    }
  }

  template <class T>
  T operator()(const T& X, const T& Y) const {
    if (depth_ <= 24) {
      std::array<T, 24> st;
      return run(st.data(), X, Y);
    }
    std::vector<T> st(depth_);
    return run(st.data(), X, Y);
  }

  std::size_t size() const { return code_.size(); }

 private:
  std::vector<Instr> code_;
  int depth_ = 0;

  static std::optional<double> fold(const NodePtr& n) {
    switch (n->op) {
      case Op::Num: return n->value;
      case Op::Pi: return std::numbers::pi;
      case Op::X:
      case Op::Y: return std::nullopt;
      default: break;
    }
    auto a = fold(n->a);
    if (!a) return std::nullopt;
    if (n->op == Op::Neg) return -*a;
    if (n->op == Op::Call) return apply(n->fn, *a);
    auto b = fold(n->b);
    if (!b) return std::nullopt;
    switch (n->op) {
      case Op::Add: return *a + *b;
      case Op::Sub: return *a - *b;
      case Op::Mul: return *a * *b;
      case Op::Div: return divide(*a, *b);
      case Op::Pow: return apply_pow(*a, *b);
      default: return std::nullopt;
    }
  }

  void emit(const NodePtr& n) {
    if (auto c = fold(n)) {
      code_.push_back({Op::Num, Func::Sin, *c});
      return;
    }
    switch (n->op) {
      case Op::X:
      case Op::Y: code_.push_back({n->op}); return;
      case Op::Neg: emit(n->a); code_.push_back({Op::Neg}); return;
      case Op::Call: emit(n->a); code_.push_back({Op::Call, n->fn}); return;
      case Op::Pow: emit(n->a); code_.push_back({Op::Pow, Func::Sin, *fold(n->b)}); return;
      default:
        emit(n->a);
        emit(n->b);
        code_.push_back({n->op});
    }
  }

  template <class T>
  T run(T* st, const T& X, const T& Y) const {
    int sp = 0;
    for (const auto& in : code_) {
      switch (in.op) {
        case Op::Num: st[sp++] = T(in.value); break;
        case Op::X: st[sp++] = X; break;
        case Op::Y: st[sp++] = Y; break;
        case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
        case Op::Call: st[sp - 1] = apply(in.fn, st[sp - 1]); break;
        case Op::Pow: st[sp - 1] = apply_pow(st[sp - 1], in.value); break;
        case Op::Add: --sp; st[sp - 1] = st[sp - 1] + st[sp]; break;
        case Op::Sub: --sp; st[sp - 1] = st[sp - 1] - st[sp]; break;
        case Op::Mul: --sp; st[sp - 1] = st[sp - 1] * st[sp]; break;
        case Op::Div: --sp; st[sp - 1] = divide(st[sp - 1], st[sp]); break;
        default: break;
      }
    }
    return st[0];
  }
};

class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)), prog_(root_) {}

  static Expr parse(std::string_view source) { return Expr(detail::Parser(source).parse()); }

  const NodePtr& root() const { return root_; }
  std::string print() const {
    std::string s;
    if (root_) print_node(root_, s);
    return s;
  }

  template <class T>
  T eval(const T& X, const T& Y) const { return prog_(X, Y); }

  double operator()(double X, double Y) const { return prog_(X, Y); }

  Jet2<double> jet(double X, double Y) const {
    return prog_(Jet2<double>::var_x(X), Jet2<double>::var_y(Y));
  }

  friend bool operator==(const Expr& a, const Expr& b) { return same_tree(a.root_, b.root_); }

 private:
  NodePtr root_;
  Program prog_;
};

inline Expr parse(std::string_view source) { return Expr::parse(source); }

}  // namespace platemorph
