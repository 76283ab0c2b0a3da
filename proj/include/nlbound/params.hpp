#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "nlbound/bnb.hpp"
#include "nlbound/box.hpp"
#include "nlbound/eigen.hpp"
#include "nlbound/errors.hpp"
#include "nlbound/expr.hpp"
#include "nlbound/interval.hpp"
#include "nlbound/model.hpp"
#include "nlbound/parallel.hpp"

namespace nlbound {

struct Options {
  BnBConfig bnb;
  unsigned workers = 1;  // 0 = hardware concurrency
};

/// Aggregate over the BnB runs behind one constant.
struct RunStats {
  std::uint64_t subproblems = 0;  // BnB runs (constant objectives are not counted)
  std::uint64_t splits = 0;
  std::uint64_t evals = 0;
  double wall_time_ms = 0.0;

  RunStats& operator+=(const RunStats& o) {
    subproblems += o.subproblems;
    splits += o.splits;
    evals += o.evals;
    return *this;
  }
};

/// Certified bounds on max (or min) of one objective.
struct Bound {
  double lower = 0.0;
  double upper = 0.0;
  bool eps_optimal = true;
  RunStats stats;

  double gap() const { return upper - lower; }
};

namespace detail {

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// Restrict `domain` to the free variables of `e`, keeping the domain's order.
inline std::pair<Box, std::vector<std::string>> reduce(const Expr& e, const Box& domain) {
  const auto fv = free_vars(e);
  std::vector<std::size_t> idx;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (fv.count(domain.labels()[i])) {
      idx.push_back(i);
      names.push_back(domain.labels()[i]);
    }
  if (names.size() != fv.size())
    for (const auto& v : fv)
      if (std::find(names.begin(), names.end(), v) == names.end()) throw UnboundVariable(v);
  return {domain.select(idx), names};
}

inline Bound to_bound(const BnBResult& r) {
  if (!r.valid) throw EvaluationError(r.error);
  Bound b;
  b.lower = r.lower;
  b.upper = r.upper;
  b.eps_optimal = r.eps_optimal;
  b.stats.subproblems = 1;
  b.stats.splits = r.stats.splits;
  b.stats.evals = r.stats.evals;
  b.stats.wall_time_ms = r.stats.wall_time_ms;
  return b;
}

}  // namespace detail

/// Certified enclosure of max_{domain} e. Only the free variables of `e` are
/// searched; a constant objective is evaluated directly.
inline Bound maximize_expr(const Expr& e, const Box& domain, const BnBConfig& cfg, const BnBHooks& hooks = {}) {
  auto [box, names] = detail::reduce(e, domain);
  if (names.empty()) {
    const Interval v = CompiledExpr(e, names).eval(Box{});
    return Bound{v.lo(), v.hi(), v.width() <= cfg.eps_h, {}};
  }
  CompiledExpr c(e, names);
  BnBHooks h = hooks;
  h.keep_cover = false;
  return detail::to_bound(maximize([&c](std::span<const double> x) { return c.eval(x); },
                                   [&c](const Box& b) { return c.eval(b); }, box, cfg, h));
}

/// Certified enclosure of min_{domain} e.
inline Bound minimize_expr(const Expr& e, const Box& domain, const BnBConfig& cfg, const BnBHooks& hooks = {}) {
  auto [box, names] = detail::reduce(e, domain);
  if (names.empty()) {
    const Interval v = CompiledExpr(e, names).eval(Box{});
    return Bound{v.lo(), v.hi(), v.width() <= cfg.eps_h, {}};
  }
  CompiledExpr c(e, names);
  BnBHooks h = hooks;
  h.keep_cover = false;
  return detail::to_bound(minimize([&c](std::span<const double> x) { return c.eval(x); },
                                   [&c](const Box& b) { return c.eval(b); }, box, cfg, h));
}

// ---------------------------------------------------------------------------
// Symbolic building blocks

/// ∂f_i/∂x_j for every state x_j, differentiated over the model domain.
inline std::vector<Expr> state_gradient(const ModelDef& m, const Expr& fi) {
  const Box dom = m.domain();
  std::vector<Expr> g;
  for (const auto& x : m.states) g.push_back(differentiate(fi, x.name, &dom));
  return g;
}

inline Expr sum_of_squares(const std::vector<Expr>& terms) {
  Expr acc = Expr::constant(0.0);
  for (const auto& t : terms)
    if (!t.is_const(0.0)) acc = acc + sqr(t);
  return acc;
}

/// Σ_j (∂f_i/∂x_j)² over state variables only (i is zero-based).
inline Expr grad_sq_norm(const ModelDef& m, std::size_t i) {
  if (i >= m.g()) throw DimensionMismatch("component index out of range");
  return sum_of_squares(state_gradient(m, m.f[i]));
}

/// ξ_i = Σ_j G_ij f_j.
inline std::vector<Expr> build_xi_components(const ModelDef& m) {
  const Matrix G = m.G_or_identity();
  std::vector<Expr> xi;
  for (std::size_t i = 0; i < G.size(); ++i) {
    Expr acc = Expr::constant(0.0);
    for (std::size_t j = 0; j < m.g(); ++j)
      if (G[i][j] != 0.0) acc = acc + Expr::constant(G[i][j]) * m.f[j];
    xi.push_back(acc);
  }
  return xi;
}

using ExprMatrix = std::vector<std::vector<Expr>>;

/// Ξ_ij = Σ_k G_ik ∂f_k/∂x_j  (n x n).
inline ExprMatrix build_xi(const ModelDef& m) {
  const Matrix G = m.G_or_identity();
  if (G.size() != m.n()) throw DimensionMismatch("G must have n rows");
  for (const auto& row : G)
    if (row.size() != m.g()) throw DimensionMismatch("G must have g columns");
  std::vector<std::vector<Expr>> jac;  // jac[k][j] = ∂f_k/∂x_j
  for (const auto& fk : m.f) jac.push_back(state_gradient(m, fk));
  ExprMatrix xi(m.n(), std::vector<Expr>(m.n(), Expr::constant(0.0)));
  for (std::size_t i = 0; i < m.n(); ++i)
    for (std::size_t j = 0; j < m.n(); ++j) {
      Expr acc = Expr::constant(0.0);
      for (std::size_t k = 0; k < m.g(); ++k)
        if (G[i][k] != 0.0) acc = acc + Expr::constant(G[i][k]) * jac[k][j];
      xi[i][j] = acc;
    }
  return xi;
}

/// Ψ = ½(Ξ + Ξᵀ).
inline ExprMatrix build_psi(const ExprMatrix& xi) {
  const std::size_t n = xi.size();
  ExprMatrix psi = xi;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && !equal(xi[i][j], xi[j][i])) psi[i][j] = Expr::constant(0.5) * (xi[i][j] + xi[j][i]);
  return psi;
}

inline ExprMatrix build_psi(const ModelDef& m) { return build_psi(build_xi(m)); }

// ---------------------------------------------------------------------------
// Results

struct JacobianEntry {
  std::size_t i = 0, j = 0;
  Expr derivative;
  Interval bounds;  // [f̲_ij, f̄_ij]
  bool structural_zero = false;
  Bound max, min;
};

struct JacobianBounds {
  std::size_t rows = 0, cols = 0;
  std::vector<JacobianEntry> entries;  // row-major
  bool eps_optimal = true;
  RunStats stats;

  const JacobianEntry& at(std::size_t i, std::size_t j) const { return entries.at(i * cols + j); }
};

enum class LipschitzCase { one = 1, two = 2 };

struct UniqueSubproblem {
  std::string key;
  std::size_t count = 0;
  std::vector<std::size_t> members;  // zero-based component indices
  Bound bound;
};

struct LipschitzResult {
  double gamma = 0.0;
  double lower = 0.0;
  double gap = 0.0;  // u - l of the underlying maximization (sum for case 2)
  bool eps_optimal = true;
  LipschitzCase which = LipschitzCase::one;
  std::vector<UniqueSubproblem> unique;  // case 2 only
  RunStats stats;
};

enum class OslEstimator { frobenius, gershgorin, zeta };

inline const char* to_string(OslEstimator e) {
  switch (e) {
    case OslEstimator::frobenius: return "frobenius";
    case OslEstimator::gershgorin: return "gershgorin";
    case OslEstimator::zeta: return "zeta";
  }
  return "?";
}

inline std::optional<OslEstimator> parse_estimator(const std::string& s) {
  if (s == "frobenius") return OslEstimator::frobenius;
  if (s == "gershgorin") return OslEstimator::gershgorin;
  if (s == "zeta") return OslEstimator::zeta;
  return std::nullopt;
}

struct OSLResult {
  double gamma_s = 0.0;  // certified upper bound (may be negative)
  double lower = 0.0;    // lower end of the certified maximization
  double gap = 0.0;
  bool eps_optimal = true;
  OslEstimator estimator = OslEstimator::gershgorin;
  std::optional<double> lower_gamma;  // γ̲, certified lower bound on λ_min(Ψ)
  RunStats stats;
};

struct QIBResult {
  double gamma_q1 = 0.0;
  double gamma_q2 = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double gamma_m = 0.0;
  double gamma_bar = 0.0;    // γ̄
  double gamma_under = 0.0;  // γ̲
  OslEstimator estimator = OslEstimator::gershgorin;
  bool distributed = false;
  bool eps_optimal = true;
  RunStats stats;
};

struct QBResult {
  std::vector<double> gamma;  // diagonal of Γ
  std::vector<double> lower;
  bool eps_optimal = true;
  RunStats stats;
};

// ---------------------------------------------------------------------------
// Operations

namespace detail {

enum class Sense { max, min };

struct Task {
  Expr objective;
  Sense sense = Sense::max;
  BnBConfig cfg;
};

inline std::vector<Bound> solve_all(const std::vector<Task>& tasks, const Box& domain, unsigned workers) {
  std::vector<Bound> out(tasks.size());
  parallel_for(tasks.size(), workers, [&](std::size_t k) {
    const Task& t = tasks[k];
    out[k] = t.sense == Sense::max ? maximize_expr(t.objective, domain, t.cfg)
                                   : minimize_expr(t.objective, domain, t.cfg);
  });
  return out;
}

inline double sqrt_up_nonneg(double v) { return rounding::sqrt_up(std::max(v, 0.0)); }
inline double sqrt_down_nonneg(double v) { return rounding::sqrt_down(std::max(v, 0.0)); }

inline Expr max_chain(const std::vector<Expr>& terms) {
  if (terms.empty()) return Expr::constant(0.0);
  Expr acc = terms.front();
  for (std::size_t k = 1; k < terms.size(); ++k) acc = max(acc, terms[k]);
  return acc;
}

}  // namespace detail

/// Certified bounds of every ∂f_i/∂x_j over Ω.
inline JacobianBounds jacobian_bounds(const ModelDef& m, const Options& opt = {}) {
  const detail::Stopwatch sw;
  const Box dom = m.domain();
  JacobianBounds jb;
  jb.rows = m.g();
  jb.cols = m.n();
  std::vector<detail::Task> tasks;
  std::vector<std::size_t> task_entry;
  for (std::size_t i = 0; i < m.g(); ++i) {
    const auto grad = state_gradient(m, m.f[i]);
    for (std::size_t j = 0; j < m.n(); ++j) {
      JacobianEntry e;
      e.i = i;
      e.j = j;
      e.derivative = grad[j];
      if (grad[j].is_constant()) {
        e.structural_zero = grad[j].is_const(0.0);
        e.bounds = Interval(grad[j].value());
        e.max = e.min = Bound{grad[j].value(), grad[j].value(), true, {}};
      } else {
        tasks.push_back({grad[j], detail::Sense::max, opt.bnb});
        tasks.push_back({grad[j], detail::Sense::min, opt.bnb});
        task_entry.push_back(jb.entries.size());
      }
      jb.entries.push_back(std::move(e));
    }
  }
  const auto res = detail::solve_all(tasks, dom, opt.workers);
  for (std::size_t k = 0; k < task_entry.size(); ++k) {
    JacobianEntry& e = jb.entries[task_entry[k]];
    e.max = res[2 * k];
    e.min = res[2 * k + 1];
    e.bounds = Interval(e.min.lower, e.max.upper);
    jb.eps_optimal = jb.eps_optimal && e.max.eps_optimal && e.min.eps_optimal;
    jb.stats += e.max.stats;
    jb.stats += e.min.stats;
  }
  jb.stats.wall_time_ms = sw.ms();
  return jb;
}

/// γ_l from a single maximization of Σ_i ‖∇_x f_i‖².
inline LipschitzResult lipschitz_case1(const ModelDef& m, const Options& opt = {}) {
  if (m.g() < 1) throw PreconditionViolated("model has no f components");
  const detail::Stopwatch sw;
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < m.g(); ++i) terms.push_back(grad_sq_norm(m, i));
  const Bound b = maximize_expr(sum(terms), m.domain(), opt.bnb);
  LipschitzResult r;
  r.which = LipschitzCase::one;
  r.gamma = detail::sqrt_up_nonneg(b.upper);
  r.lower = detail::sqrt_down_nonneg(b.lower);
  r.gap = b.gap();
  r.eps_optimal = b.eps_optimal;
  r.stats = b.stats;
  r.stats.wall_time_ms = sw.ms();
  return r;
}

/// Key identifying ‖∇f_i‖² up to variable renaming, including the bounds of
/// the renamed variables so that only truly identical problems are merged.
inline std::string dedup_key(const Expr& e, const Box& domain) {
  const CanonicalForm cf = canonical_form(e);
  std::string key = cf.key;
  for (const auto& v : cf.var_order) {
    const auto& labels = domain.labels();
    const auto it = std::find(labels.begin(), labels.end(), v);
    if (it == labels.end()) throw UnboundVariable(v);
    const Interval& iv = domain[static_cast<std::size_t>(it - labels.begin())];
    key += fmt::format("|[{:a},{:a}]", iv.lo(), iv.hi());
  }
  return key;
}

/// γ_l = sqrt(Σ_i max ‖∇_x f_i‖²), solving each distinct problem once.
inline LipschitzResult lipschitz_case2(const ModelDef& m, const Options& opt = {}) {
  if (m.g() < 1) throw PreconditionViolated("model has no f components");
  const detail::Stopwatch sw;
  const Box dom = m.domain();
  LipschitzResult r;
  r.which = LipschitzCase::two;
  std::map<std::string, std::size_t> seen;
  std::vector<detail::Task> tasks;
  for (std::size_t i = 0; i < m.g(); ++i) {
    const Expr e = grad_sq_norm(m, i);
    const std::string key = dedup_key(e, dom);
    auto [it, fresh] = seen.emplace(key, r.unique.size());
    if (fresh) {
      r.unique.push_back({key, 0, {}, {}});
      tasks.push_back({e, detail::Sense::max, opt.bnb});
    }
    r.unique[it->second].count += 1;
    r.unique[it->second].members.push_back(i);
  }
  const auto res = detail::solve_all(tasks, dom, opt.workers);
  Interval up(0.0), lo(0.0);
  for (std::size_t z = 0; z < r.unique.size(); ++z) {
    r.unique[z].bound = res[z];
    const Interval c(static_cast<double>(r.unique[z].count));
    up += c * Interval(res[z].upper);
    lo += c * Interval(res[z].lower);
    r.eps_optimal = r.eps_optimal && res[z].eps_optimal;
    r.stats += res[z].stats;
  }
  r.gamma = detail::sqrt_up_nonneg(up.hi());
  r.lower = detail::sqrt_down_nonneg(lo.lo());
  r.gap = up.hi() - lo.lo();
  r.stats.wall_time_ms = sw.ms();
  return r;
}

namespace detail {

inline Expr frobenius_objective(const ExprMatrix& xi) {
  std::vector<Expr> all;
  for (const auto& row : xi)
    for (const auto& e : row) all.push_back(e);
  return sum_of_squares(all);
}

inline Expr gershgorin_row(const ExprMatrix& psi, std::size_t i, bool upper) {
  Expr acc = psi[i][i];
  for (std::size_t j = 0; j < psi.size(); ++j) {
    if (j == i || psi[i][j].is_const(0.0)) continue;
    acc = upper ? acc + abs(psi[i][j]) : acc - abs(psi[i][j]);
  }
  return acc;
}

inline Expr zeta_row(const ExprMatrix& psi, std::size_t i) {
  std::vector<Expr> offs;
  for (std::size_t j = 0; j < psi.size(); ++j)
    if (j != i && !psi[i][j].is_const(0.0)) offs.push_back(abs(psi[i][j]));
  const double z = zeta(static_cast<int>(psi.size()));
  return psi[i][i] + Expr::constant(z) * max_chain(offs);
}

// γ̲ = min_i min_x (Ψ_ii − Σ_{j≠i} |Ψ_ij|), certified from below.
inline std::pair<double, std::vector<Bound>> gershgorin_lower(const ExprMatrix& psi, const Box& dom,
                                                              const Options& opt) {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < psi.size(); ++i) tasks.push_back({gershgorin_row(psi, i, false), Sense::min, opt.bnb});
  auto res = solve_all(tasks, dom, opt.workers);
  double g = rounding::kInf;
  for (const auto& b : res) g = std::min(g, b.lower);
  return {g, std::move(res)};
}

}  // namespace detail

inline OSLResult osl(const ModelDef& m, OslEstimator est, const Options& opt = {}) {
  const detail::Stopwatch sw;
  const Box dom = m.domain();
  const ExprMatrix xi = build_xi(m);
  OSLResult r;
  r.estimator = est;

  if (est == OslEstimator::frobenius) {
    const Bound b = maximize_expr(detail::frobenius_objective(xi), dom, opt.bnb);
    r.gamma_s = detail::sqrt_up_nonneg(b.upper);
    r.lower = detail::sqrt_down_nonneg(b.lower);
    r.gap = b.gap();
    r.eps_optimal = b.eps_optimal;
    r.stats = b.stats;
  } else {
    const ExprMatrix psi = build_psi(xi);
    if (psi.size() < 2 && est == OslEstimator::zeta) throw InvalidDimension("zeta estimator requires n >= 2");
    std::vector<detail::Task> tasks;
    for (std::size_t i = 0; i < psi.size(); ++i)
      tasks.push_back({est == OslEstimator::gershgorin ? detail::gershgorin_row(psi, i, true) : detail::zeta_row(psi, i),
                       detail::Sense::max, opt.bnb});
    const auto res = detail::solve_all(tasks, dom, opt.workers);
    r.gamma_s = -rounding::kInf;
    r.lower = -rounding::kInf;
    for (const auto& b : res) {
      r.gamma_s = std::max(r.gamma_s, b.upper);
      r.lower = std::max(r.lower, b.lower);
      r.eps_optimal = r.eps_optimal && b.eps_optimal;
      r.stats += b.stats;
    }
    r.gap = r.gamma_s - r.lower;
    r.eps_optimal = r.eps_optimal && r.gap <= opt.bnb.eps_h;
    if (est == OslEstimator::gershgorin) {
      auto [g, lows] = detail::gershgorin_lower(psi, dom, opt);
      r.lower_gamma = g;
      for (const auto& b : lows) r.stats += b.stats;
    }
  }
  r.stats.wall_time_ms = sw.ms();
  return r;
}

inline OSLResult osl_frobenius(const ModelDef& m, const Options& opt = {}) {
  return osl(m, OslEstimator::frobenius, opt);
}
inline OSLResult osl_gershgorin(const ModelDef& m, const Options& opt = {}) {
  return osl(m, OslEstimator::gershgorin, opt);
}
inline OSLResult osl_zeta(const ModelDef& m, const Options& opt = {}) { return osl(m, OslEstimator::zeta, opt); }

/// QIB constants γ_q1 = ε1·γ̄ − ε2·γ̲ + γ_m and γ_q2 = ε2 − ε1.
///
/// γ̄ and γ̲ enter multiplied by ε1 and ε2, so their searches use eps_h scaled
/// down by those factors; the BnB gap then stays at eps_h in γ_q1.
inline QIBResult qib(const ModelDef& m, double eps1, double eps2, OslEstimator est = OslEstimator::gershgorin,
                     const Options& opt = {}, bool distributed = false) {
  if (!(eps1 >= 0.0) || !(eps2 >= 0.0) || !std::isfinite(eps1) || !std::isfinite(eps2))
    throw DomainError("eps1 and eps2 must be finite and >= 0");
  const detail::Stopwatch sw;
  const Box dom = m.domain();
  QIBResult r;
  r.eps1 = eps1;
  r.eps2 = eps2;
  r.estimator = est;
  r.distributed = distributed;

  Options o1 = opt;
  o1.bnb.eps_h = opt.bnb.eps_h / std::max(1.0, eps1);
  const OSLResult bar = osl(m, est, o1);
  r.gamma_bar = bar.gamma_s;
  r.stats += bar.stats;

  Options o2 = opt;
  o2.bnb.eps_h = opt.bnb.eps_h / std::max(1.0, eps2);
  auto [under, lows] = detail::gershgorin_lower(build_psi(m), dom, o2);
  r.gamma_under = under;
  bool opt_ok = bar.eps_optimal;
  for (const auto& b : lows) {
    r.stats += b.stats;
    opt_ok = opt_ok && b.eps_optimal;
  }

  const auto xi = build_xi_components(m);
  if (distributed) {
    std::vector<detail::Task> tasks;
    for (const auto& x : xi) tasks.push_back({sum_of_squares(state_gradient(m, x)), detail::Sense::max, opt.bnb});
    const auto res = detail::solve_all(tasks, dom, opt.workers);
    Interval acc(0.0);
    for (const auto& b : res) {
      acc += Interval(b.upper);
      opt_ok = opt_ok && b.eps_optimal;
      r.stats += b.stats;
    }
    r.gamma_m = acc.hi();
  } else {
    std::vector<Expr> terms;
    for (const auto& x : xi) terms.push_back(sum_of_squares(state_gradient(m, x)));
    const Bound b = maximize_expr(sum(terms), dom, opt.bnb);
    r.gamma_m = b.upper;
    opt_ok = opt_ok && b.eps_optimal;
    r.stats += b.stats;
  }

  const Interval q1 = Interval(eps1) * Interval(r.gamma_bar) - Interval(eps2) * Interval(r.gamma_under) +
                      Interval(r.gamma_m);
  r.gamma_q1 = q1.hi();
  r.gamma_q2 = eps2 - eps1;
  r.eps_optimal = opt_ok;
  r.stats.wall_time_ms = sw.ms();
  return r;
}

/// Diagonal Γ with Γ_jj = sqrt(max_𝒳 n Σ_i (∂f_i/∂x_j)²).
inline QBResult qb(const ModelDef& m, const Options& opt = {}) {
  if (m.m() != 0) throw PreconditionViolated("QB requires f independent of inputs (model declares inputs)");
  const Box dom = m.state_domain();
  for (std::size_t j = 0; j < dom.size(); ++j)
    if (!dom[j].contains(0.0)) throw PreconditionViolated("QB requires 0 in the state domain (" + m.states[j].name + ")");
  {
    const std::vector<double> zero(m.n(), 0.0);
    const auto names = m.state_names();
    double norm2 = 0.0;
    for (const auto& fi : m.f) {
      const double v = CompiledExpr(fi, names).eval(zero);
      norm2 += v * v;
    }
    if (!(std::sqrt(norm2) <= 1e-12)) throw PreconditionViolated("QB requires f(0) = 0");
  }
  const detail::Stopwatch sw;
  std::vector<std::vector<Expr>> jac;
  for (const auto& fi : m.f) jac.push_back(state_gradient(m, fi));
  std::vector<detail::Task> tasks;
  const double n = static_cast<double>(m.n());
  for (std::size_t j = 0; j < m.n(); ++j) {
    std::vector<Expr> col;
    for (const auto& row : jac) col.push_back(row[j]);
    tasks.push_back({Expr::constant(n) * sum_of_squares(col), detail::Sense::max, opt.bnb});
  }
  const auto res = detail::solve_all(tasks, dom, opt.workers);
  QBResult r;
  for (const auto& b : res) {
    r.gamma.push_back(detail::sqrt_up_nonneg(b.upper));
    r.lower.push_back(detail::sqrt_down_nonneg(b.lower));
    r.eps_optimal = r.eps_optimal && b.eps_optimal;
    r.stats += b.stats;
  }
  r.stats.wall_time_ms = sw.ms();
  return r;
}

/// Lipschitz constant implied by QIB constants: sqrt(2γ_q1 + γ_q2²).
inline double qib_to_lipschitz(double gamma_q1, double gamma_q2) {
  const Interval v = Interval(2.0) * Interval(gamma_q1) + sqr(Interval(gamma_q2));
  if (v.hi() < 0.0)
    throw NecessaryConditionViolated("2*gamma_q1 + gamma_q2^2 < 0: no QIB function has these constants");
  return rounding::sqrt_up(std::max(v.hi(), 0.0));
}

}  // namespace nlbound
