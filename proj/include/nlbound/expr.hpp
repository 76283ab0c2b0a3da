#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "nlbound/box.hpp"
#include "nlbound/errors.hpp"
#include "nlbound/interval.hpp"

namespace nlbound {

enum class Op : std::uint8_t {
  Const,
  Var,
  // unary
  Neg,
  Abs,
  Sqr,
  Sqrt,
  Exp,
  Sin,
  Cos,
  PowInt,
  // binary
  Add,
  Sub,
  Mul,
  Div,
  Max,
};

constexpr bool is_unary(Op op) { return op >= Op::Neg && op <= Op::PowInt; }
constexpr bool is_binary(Op op) { return op >= Op::Add; }

namespace detail {
struct Node;
}

/// Immutable expression tree over named variables.
///
/// Nodes are shared, so copying an Expr is cheap and subtrees may be reused
/// by several parents. All builders below apply a conservative simplifier:
/// exact constant folding, 0/1 identities, `x*x -> sqr(x)`, sign pushing into
/// constant factors. Division is never reassociated.
class Expr {
 public:
  Expr() = default;  // null handle; only used for absent children

  static Expr constant(double v);
  static Expr variable(std::string name);

  Op op() const;
  double value() const;
  const std::string& name() const;
  int exponent() const;
  const Expr& arg() const;
  const Expr& lhs() const;
  const Expr& rhs() const;

  bool is_null() const noexcept { return node_ == nullptr; }
  bool is_constant() const { return op() == Op::Const; }
  bool is_const(double v) const { return op() == Op::Const && value() == v; }

  /// Identity of the shared node; used to memoize over DAGs.
  const void* id() const noexcept { return node_.get(); }

 private:
  friend Expr make_node(Op, double, int, std::string, Expr, Expr);
  explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  Op op;
  double value = 0.0;
  int exponent = 0;
  std::string name;
  Expr a;
  Expr b;
};
}  // namespace detail

/// Raw node construction without simplification.
inline Expr make_node(Op op, double value, int exponent, std::string name, Expr a, Expr b) {
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->value = value;
  n->exponent = exponent;
  n->name = std::move(name);
  n->a = std::move(a);
  n->b = std::move(b);
  return Expr(std::move(n));
}

inline Expr Expr::constant(double v) {
  if (!std::isfinite(v)) throw DomainError("expression constants must be finite");
  return make_node(Op::Const, v == 0.0 ? 0.0 : v, 0, {}, {}, {});
}
inline Expr Expr::variable(std::string name) {
  return make_node(Op::Var, 0.0, 0, std::move(name), {}, {});
}
inline Op Expr::op() const { return node_->op; }
inline double Expr::value() const { return node_->value; }
inline const std::string& Expr::name() const { return node_->name; }
inline int Expr::exponent() const { return node_->exponent; }
inline const Expr& Expr::arg() const { return node_->a; }
inline const Expr& Expr::lhs() const { return node_->a; }
inline const Expr& Expr::rhs() const { return node_->b; }

inline Expr constant(double v) { return Expr::constant(v); }
inline Expr var(std::string name) { return Expr::variable(std::move(name)); }

/// Structural equality (same tree shape, constants, and variable names).
inline bool equal(const Expr& x, const Expr& y) {
  if (x.id() == y.id()) return true;
  if (x.is_null() || y.is_null()) return false;
  if (x.op() != y.op()) return false;
  switch (x.op()) {
    case Op::Const: return x.value() == y.value();
    case Op::Var: return x.name() == y.name();
    case Op::PowInt: return x.exponent() == y.exponent() && equal(x.arg(), y.arg());
    default: break;
  }
  if (is_unary(x.op())) return equal(x.arg(), y.arg());
  return equal(x.lhs(), y.lhs()) && equal(x.rhs(), y.rhs());
}

namespace detail {

// Folds only when the interval result is a single double, so folding never
// changes the function being certified.
template <class F>
std::optional<Expr> fold_exact(F&& f) {
  try {
    const Interval r = f();
    if (r.is_degenerate()) return Expr::constant(r.lo());
  } catch (const Error&) {
  }
  return std::nullopt;
}

inline Expr raw_unary(Op op, Expr a, int k = 0) { return make_node(op, 0.0, k, {}, std::move(a), {}); }
inline Expr raw_binary(Op op, Expr a, Expr b) {
  return make_node(op, 0.0, 0, {}, std::move(a), std::move(b));
}

inline Interval const_iv(const Expr& e) { return Interval(e.value()); }

}  // namespace detail

Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr sqr(const Expr& a);

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant())
    if (auto f = detail::fold_exact([&] { return detail::const_iv(a) + detail::const_iv(b); })) return *f;
  if (a.is_const(0.0)) return b;
  if (b.is_const(0.0)) return a;
  return detail::raw_binary(Op::Add, a, b);
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant())
    if (auto f = detail::fold_exact([&] { return detail::const_iv(a) - detail::const_iv(b); })) return *f;
  if (b.is_const(0.0)) return a;
  if (a.is_const(0.0)) return -b;
  return detail::raw_binary(Op::Sub, a, b);
}

inline Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.op() == Op::Neg) return a.arg();
  if (a.op() == Op::Mul && a.lhs().is_constant())
    return detail::raw_binary(Op::Mul, Expr::constant(-a.lhs().value()), a.rhs());
  return detail::raw_unary(Op::Neg, a);
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant())
    if (auto f = detail::fold_exact([&] { return detail::const_iv(a) * detail::const_iv(b); })) return *f;
  if (a.is_const(0.0) || b.is_const(0.0)) return Expr::constant(0.0);
  if (a.is_const(1.0)) return b;
  if (b.is_const(1.0)) return a;
  if (a.is_const(-1.0)) return -b;
  if (b.is_const(-1.0)) return -a;
  if (b.is_constant() && !a.is_constant()) return b * a;
  if (a.is_constant()) {
    if (b.op() == Op::Neg) return Expr::constant(-a.value()) * b.arg();
    if (b.op() == Op::Mul && b.lhs().is_constant())
      if (auto f = detail::fold_exact([&] { return detail::const_iv(a) * detail::const_iv(b.lhs()); }))
        return *f * b.rhs();
  }
  if (equal(a, b)) return sqr(a);
  if (b.op() == Op::Mul && b.lhs().is_constant() && equal(a, b.rhs())) return b.lhs() * sqr(a);
  if (a.op() == Op::Mul && a.lhs().is_constant() && equal(a.rhs(), b)) return a.lhs() * sqr(b);
  return detail::raw_binary(Op::Mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant())
    if (auto f = detail::fold_exact([&] { return detail::const_iv(a) / detail::const_iv(b); })) return *f;
  if (b.is_const(1.0)) return a;
  return detail::raw_binary(Op::Div, a, b);
}

inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }

inline Expr sqr(const Expr& a) {
  if (a.is_constant())
    if (auto f = detail::fold_exact([&] { return sqr(detail::const_iv(a)); })) return *f;
  if (a.op() == Op::Neg || a.op() == Op::Abs) return sqr(a.arg());
  return detail::raw_unary(Op::Sqr, a);
}

inline Expr pow_int(const Expr& a, int k) {
  if (k < 1) throw DomainError("integer power exponent must be >= 1");
  if (k == 1) return a;
  if (a.is_constant())
    if (auto f = detail::fold_exact([&] { return pow_int(detail::const_iv(a), k); })) return *f;
  return detail::raw_unary(Op::PowInt, a, k);
}

inline Expr abs(const Expr& a) {
  if (a.is_constant()) return Expr::constant(std::fabs(a.value()));
  switch (a.op()) {
    case Op::Neg: return abs(a.arg());
    case Op::Abs:
    case Op::Sqr:
    case Op::Exp: return a;
    case Op::PowInt:
      if (a.exponent() % 2 == 0) return a;
      break;
    default: break;
  }
  return detail::raw_unary(Op::Abs, a);
}

inline Expr sqrt(const Expr& a) {
  if (a.is_constant() && a.value() >= 0.0)
    if (auto f = detail::fold_exact([&] { return sqrt(detail::const_iv(a)); })) return *f;
  return detail::raw_unary(Op::Sqrt, a);
}

inline Expr exp(const Expr& a) {
  if (a.is_const(0.0)) return Expr::constant(1.0);
  return detail::raw_unary(Op::Exp, a);
}

inline Expr sin(const Expr& a) {
  if (a.is_const(0.0)) return Expr::constant(0.0);
  return detail::raw_unary(Op::Sin, a);
}

inline Expr cos(const Expr& a) {
  if (a.is_const(0.0)) return Expr::constant(1.0);
  return detail::raw_unary(Op::Cos, a);
}

inline Expr max(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(std::max(a.value(), b.value()));
  if (equal(a, b)) return a;
  return detail::raw_binary(Op::Max, a, b);
}

/// Sum of a list of terms (0 when empty).
inline Expr sum(std::span<const Expr> terms) {
  Expr acc = Expr::constant(0.0);
  for (const auto& t : terms) acc = acc + t;
  return acc;
}

// ---------------------------------------------------------------------------
// Queries

inline void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.is_null()) return;
  switch (e.op()) {
    case Op::Const: return;
    case Op::Var: out.insert(e.name()); return;
    default: break;
  }
  collect_vars(e.lhs(), out);
  if (is_binary(e.op())) collect_vars(e.rhs(), out);
}

inline std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

inline std::size_t node_count(const Expr& e) {
  if (e.is_null()) return 0;
  if (e.op() == Op::Const || e.op() == Op::Var) return 1;
  if (is_unary(e.op())) return 1 + node_count(e.arg());
  return 1 + node_count(e.lhs()) + node_count(e.rhs());
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::PowInt: return 4;
    default: return 5;
  }
}

inline const char* function_name(Op op) {
  switch (op) {
    case Op::Abs: return "abs";
    case Op::Sqr: return "sqr";
    case Op::Sqrt: return "sqrt";
    case Op::Exp: return "exp";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Max: return "max";
    default: return "";
  }
}

inline const char* binary_symbol(Op op) {
  switch (op) {
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    default: return "?";
  }
}

}  // namespace detail

/// Text form accepted by `parse`; constants use the shortest round-trip representation.
inline std::string print(const Expr& e) {
  auto wrap = [](const Expr& c, bool paren) {
    std::string s = print(c);
    return paren ? "(" + s + ")" : s;
  };
  switch (e.op()) {
    case Op::Const: {
      std::string s = fmt::format("{}", e.value());
      return e.value() < 0.0 ? "(" + s + ")" : s;
    }
    case Op::Var: return e.name();
    case Op::Neg: return "-" + wrap(e.arg(), detail::precedence(e.arg()) < 3);
    case Op::PowInt:
      return wrap(e.arg(), detail::precedence(e.arg()) < 5) + "^" + std::to_string(e.exponent());
    case Op::Max: return "max(" + print(e.lhs()) + ", " + print(e.rhs()) + ")";
    default: break;
  }
  if (is_unary(e.op())) return std::string(detail::function_name(e.op())) + "(" + print(e.arg()) + ")";
  const int p = detail::precedence(e);
  return wrap(e.lhs(), detail::precedence(e.lhs()) < p) + detail::binary_symbol(e.op()) +
         wrap(e.rhs(), detail::precedence(e.rhs()) <= p);
}

// ---------------------------------------------------------------------------
// Compiled evaluation

/// Flat, slot-per-node program for fast repeated point or interval evaluation.
///
/// Variables are bound by position to the list given at construction; a box
/// or point passed to `eval` must follow that order.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  CompiledExpr(const Expr& e, std::span<const std::string> vars, int trig_degree = kDefaultTrigDegree)
      : vars_(vars.begin(), vars.end()), trig_degree_(trig_degree) {
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < vars_.size(); ++i) index.emplace(vars_[i], static_cast<int>(i));
    std::unordered_map<const void*, int> memo;
    result_ = emit(e, index, memo);
    numbering_.clear();
  }

  std::size_t size() const noexcept { return code_.size(); }

  const std::vector<std::string>& vars() const noexcept { return vars_; }
  std::size_t arity() const noexcept { return vars_.size(); }

  double eval(std::span<const double> x) const { return run<double>(x); }

  Interval eval(const Box& b) const {
    if (b.size() != vars_.size()) throw DimensionMismatch("box dimension does not match expression variables");
    return run<Interval>(std::span<const Interval>(b.dims()));
  }

  Interval eval(const Box& b, int segments) const {
    return refined_eval([this](const Box& s) { return eval(s); }, b, segments);
  }

 private:
  struct Instr {
    Op op;
    int a = -1;
    int b = -1;
    int k = 0;  // variable index or exponent
    double value = 0.0;
  };

  int emit(const Expr& e, const std::unordered_map<std::string, int>& index,
           std::unordered_map<const void*, int>& memo) {
    if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
    Instr in{e.op()};
    switch (e.op()) {
      case Op::Const: in.value = e.value(); break;
      case Op::Var: {
        auto it = index.find(e.name());
        if (it == index.end()) throw UnboundVariable(e.name());
        in.k = it->second;
        break;
      }
      default:
        in.a = emit(e.lhs(), index, memo);
        if (is_binary(e.op())) in.b = emit(e.rhs(), index, memo);
        in.k = e.exponent();
        break;
    }
    // structurally identical subtrees share one slot
    const InstrKey key{static_cast<int>(in.op), in.a, in.b, in.k, std::bit_cast<std::uint64_t>(in.value)};
    auto [pos, fresh] = numbering_.emplace(key, static_cast<int>(code_.size()));
    if (fresh) code_.push_back(in);
    memo.emplace(e.id(), pos->second);
    return pos->second;
  }

  using InstrKey = std::tuple<int, int, int, int, std::uint64_t>;
  std::map<InstrKey, int> numbering_;

  static double apply(const Instr& in, double a, double b, int) {
    switch (in.op) {
      case Op::Neg: return -a;
      case Op::Abs: return std::fabs(a);
      case Op::Sqr: return a * a;
      case Op::Sqrt: return std::sqrt(a);
      case Op::Exp: return std::exp(a);
      case Op::Sin: return std::sin(a);
      case Op::Cos: return std::cos(a);
      case Op::PowInt: return std::pow(a, in.k);
      case Op::Add: return a + b;
      case Op::Sub: return a - b;
      case Op::Mul: return a * b;
      case Op::Div: return a / b;
      case Op::Max: return std::max(a, b);
      default: return 0.0;
    }
  }

  static Interval apply(const Instr& in, const Interval& a, const Interval& b, int degree) {
    switch (in.op) {
      case Op::Neg: return -a;
      case Op::Abs: return abs(a);
      case Op::Sqr: return sqr(a);
      case Op::Sqrt: return sqrt(a);
      case Op::Exp: return exp(a);
      case Op::Sin: return sin(a, degree);
      case Op::Cos: return cos(a, degree);
      case Op::PowInt: return pow_int(a, in.k);
      case Op::Add: return a + b;
      case Op::Sub: return a - b;
      case Op::Mul: return a * b;
      case Op::Div: return a / b;
      case Op::Max: return max(a, b);
      default: return {};
    }
  }

  template <class T>
  T run(std::span<const T> x) const {
    if (code_.empty()) throw EvaluationError("empty expression");
    thread_local std::vector<T> slots;
    slots.resize(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
      const Instr& in = code_[i];
      switch (in.op) {
        case Op::Const: slots[i] = T(in.value); break;
        case Op::Var: slots[i] = x[in.k]; break;
        default:
          slots[i] = apply(in, slots[in.a], in.b >= 0 ? slots[in.b] : slots[in.a], trig_degree_);
          break;
      }
    }
    return slots[result_];
  }

  std::vector<std::string> vars_;
  std::vector<Instr> code_;
  int result_ = -1;
  int trig_degree_ = kDefaultTrigDegree;
};

/// Point evaluation with named variable values.
inline double eval_real(const Expr& e, const std::map<std::string, double>& point) {
  const auto fv = free_vars(e);
  std::vector<std::string> names(fv.begin(), fv.end());
  std::vector<double> x;
  for (const auto& n : names) {
    auto it = point.find(n);
    if (it == point.end()) throw UnboundVariable(n);
    x.push_back(it->second);
  }
  return CompiledExpr(e, names).eval(x);
}

/// Interval evaluation over a labelled box, refined with `segments` slabs.
inline Interval eval_interval(const Expr& e, const Box& b, int segments = 1,
                              int trig_degree = kDefaultTrigDegree) {
  if (b.labels().size() != b.size()) throw DimensionMismatch("eval_interval needs a labelled box");
  const auto fv = free_vars(e);
  std::vector<std::size_t> idx;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (fv.count(b.labels()[i])) {
      idx.push_back(i);
      names.push_back(b.labels()[i]);
    }
  for (const auto& v : fv)
    if (std::find(names.begin(), names.end(), v) == names.end()) throw UnboundVariable(v);
  return CompiledExpr(e, names, trig_degree).eval(b.select(idx), segments);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace detail {

inline bool provably_nonneg(const Expr& e);

inline bool provably_pos(const Expr& e) {
  switch (e.op()) {
    case Op::Const: return e.value() > 0.0;
    case Op::Exp: return true;
    case Op::Add:
      return (provably_pos(e.lhs()) && provably_nonneg(e.rhs())) ||
             (provably_nonneg(e.lhs()) && provably_pos(e.rhs()));
    case Op::Mul:
    case Op::Div: return provably_pos(e.lhs()) && provably_pos(e.rhs());
    default: return false;
  }
}

inline bool provably_nonneg(const Expr& e) {
  switch (e.op()) {
    case Op::Const: return e.value() >= 0.0;
    case Op::Sqr:
    case Op::Abs:
    case Op::Exp:
    case Op::Sqrt: return true;
    case Op::PowInt: return e.exponent() % 2 == 0 || provably_nonneg(e.arg());
    case Op::Add:
    case Op::Mul:
    case Op::Max: return provably_nonneg(e.lhs()) && provably_nonneg(e.rhs());
    case Op::Div: return provably_nonneg(e.lhs()) && provably_pos(e.rhs());
    default: return false;
  }
}

// Sign of `e` over `domain`: +1 if >= 0 everywhere, -1 if <= 0, 0 if unknown.
// `strict` asks for > 0 instead of >= 0.
inline int sign_over(const Expr& e, const Box* domain, bool strict) {
  if (strict ? provably_pos(e) : provably_nonneg(e)) return 1;
  if (domain == nullptr) return 0;
  try {
    const Interval r = eval_interval(e, *domain);
    if (strict ? r.lo() > 0.0 : r.lo() >= 0.0) return 1;
    if (!strict && r.hi() <= 0.0) return -1;
  } catch (const Error&) {
  }
  return 0;
}

}  // namespace detail

/// Symbolic partial derivative of `e` with respect to variable `v`.
///
/// `abs` and `sqrt` are only differentiated where the sign of their argument
/// can be established, structurally or by interval evaluation over `domain`.
inline Expr differentiate(const Expr& e, const std::string& v, const Box* domain = nullptr) {
  auto d = [&](const Expr& c) { return differentiate(c, v, domain); };
  switch (e.op()) {
    case Op::Const: return Expr::constant(0.0);
    case Op::Var: return Expr::constant(e.name() == v ? 1.0 : 0.0);
    case Op::Neg: return -d(e.arg());
    case Op::Add: return d(e.lhs()) + d(e.rhs());
    case Op::Sub: return d(e.lhs()) - d(e.rhs());
    case Op::Mul: return d(e.lhs()) * e.rhs() + e.lhs() * d(e.rhs());
    case Op::Div: {
      const Expr da = d(e.lhs());
      const Expr db = d(e.rhs());
      if (db.is_const(0.0)) return da / e.rhs();
      return (da * e.rhs() - e.lhs() * db) / sqr(e.rhs());
    }
    case Op::PowInt: {
      const Expr da = d(e.arg());
      if (da.is_const(0.0)) return da;
      return (Expr::constant(e.exponent()) * pow_int(e.arg(), e.exponent() - 1)) * da;
    }
    case Op::Sqr: {
      const Expr da = d(e.arg());
      if (da.is_const(0.0)) return da;
      return (Expr::constant(2.0) * e.arg()) * da;
    }
    case Op::Abs: {
      const Expr da = d(e.arg());
      if (da.is_const(0.0)) return da;
      const int s = detail::sign_over(e.arg(), domain, false);
      if (s > 0) return da;
      if (s < 0) return -da;
      throw NonDifferentiable("abs(" + print(e.arg()) + ") may change sign");
    }
    case Op::Sqrt: {
      const Expr da = d(e.arg());
      if (da.is_const(0.0)) return da;
      if (detail::sign_over(e.arg(), domain, true) <= 0)
        throw NonDifferentiable("sqrt(" + print(e.arg()) + ") may touch zero");
      return da / (Expr::constant(2.0) * e);
    }
    case Op::Exp: return e * d(e.arg());
    case Op::Sin: return cos(e.arg()) * d(e.arg());
    case Op::Cos: return -(sin(e.arg()) * d(e.arg()));
    case Op::Max: throw NonDifferentiable("max is not differentiable");
  }
  throw NonDifferentiable("unknown expression node");
}

// ---------------------------------------------------------------------------
// Structural keys

namespace detail {

struct CanonNode {
  std::string shape;  // variable-blind description used for ordering
  Op op = Op::Const;
  double value = 0.0;
  int exponent = 0;
  std::string name;
  std::vector<CanonNode> kids;
};

inline bool commutative(Op op) { return op == Op::Add || op == Op::Mul || op == Op::Max; }

inline void flatten(const Expr& e, Op op, std::vector<Expr>& out) {
  if (e.op() == op) {
    flatten(e.lhs(), op, out);
    flatten(e.rhs(), op, out);
  } else {
    out.push_back(e);
  }
}

inline const char* op_tag(Op op) {
  switch (op) {
    case Op::Const: return "c";
    case Op::Var: return "v";
    case Op::Neg: return "neg";
    case Op::Abs: return "abs";
    case Op::Sqr: return "sqr";
    case Op::Sqrt: return "sqrt";
    case Op::Exp: return "exp";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::PowInt: return "pow";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Max: return "max";
  }
  return "?";
}

inline CanonNode canonicalize(const Expr& e) {
  CanonNode n;
  n.op = e.op();
  switch (e.op()) {
    case Op::Const:
      n.value = e.value();
      n.shape = fmt::format("c{}", e.value());
      return n;
    case Op::Var:
      n.name = e.name();
      n.shape = "v";
      return n;
    default: break;
  }
  std::vector<Expr> operands;
  if (commutative(e.op())) {
    flatten(e, e.op(), operands);
  } else if (is_unary(e.op())) {
    operands.push_back(e.arg());
  } else {
    operands = {e.lhs(), e.rhs()};
  }
  for (const auto& o : operands) n.kids.push_back(canonicalize(o));
  if (commutative(e.op()))
    std::stable_sort(n.kids.begin(), n.kids.end(),
                     [](const CanonNode& x, const CanonNode& y) { return x.shape < y.shape; });
  n.exponent = e.exponent();
  n.shape = op_tag(e.op());
  if (e.op() == Op::PowInt) n.shape += std::to_string(e.exponent());
  n.shape += "(";
  for (std::size_t i = 0; i < n.kids.size(); ++i) n.shape += (i ? "," : "") + n.kids[i].shape;
  n.shape += ")";
  return n;
}

inline void serialize(const CanonNode& n, std::map<std::string, int>& rename, std::vector<std::string>& order,
                      std::string& out) {
  switch (n.op) {
    case Op::Const: out += n.shape; return;
    case Op::Var: {
      auto [it, fresh] = rename.emplace(n.name, static_cast<int>(rename.size()));
      if (fresh) order.push_back(n.name);
      out += "v" + std::to_string(it->second);
      return;
    }
    default: break;
  }
  out += op_tag(n.op);
  if (n.op == Op::PowInt) out += std::to_string(n.exponent);
  out += "(";
  for (std::size_t i = 0; i < n.kids.size(); ++i) {
    if (i) out += ",";
    serialize(n.kids[i], rename, order, out);
  }
  out += ")";
}

}  // namespace detail

/// Canonical form of an expression up to variable renaming.
struct CanonicalForm {
  std::string key;
  /// Original variable names in the order they were renamed v0, v1, ...
  std::vector<std::string> var_order;
};

/// Key that is equal for expressions identical up to a consistent renaming of
/// variables and reordering of commutative chains (+, *, max).
inline CanonicalForm canonical_form(const Expr& e) {
  const detail::CanonNode root = detail::canonicalize(e);
  CanonicalForm out;
  std::map<std::string, int> rename;
  detail::serialize(root, rename, out.var_order, out.key);
  return out;
}

inline std::string structural_key(const Expr& e) { return canonical_form(e).key; }

}  // namespace nlbound
