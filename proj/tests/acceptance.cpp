// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <span>
#include <sstream>
#include <string>

#include "corpus.hpp"
#include "nlbound/baselines.hpp"
#include "nlbound/eigen.hpp"
#include "nlbound/models.hpp"
#include "nlbound/params.hpp"
#include "oracles.hpp"
#include "sampling.hpp"

using namespace nlbound;
using sampling::diff;
using sampling::dot;
using sampling::Sampler;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) note << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Options default_options(unsigned workers = 0) {
  Options o;
  o.bnb.eps_h = 1e-4;
  o.bnb.eps_om = 1e-7;
  o.workers = workers;
  return o;
}

Expr case1_objective(const ModelDef& m) {
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < m.g(); ++i) terms.push_back(grad_sq_norm(m, i));
  return sum(terms);
}

// Every certified constant of one model, computed once and shared by criteria 8-10.
struct Constants {
  ModelDef model;
  LipschitzResult l1, l2;
  OSLResult s1, s2, s3;
  QIBResult q;
  JacobianBounds jac;
  std::optional<QBResult> qb;
};

std::vector<Constants>& corpus_constants() {
  static std::vector<Constants> all = [] {
    std::vector<Constants> out;
    const Options o = default_options();
    for (ModelDef& m : sampling::sampling_models()) {
      Constants c;
      c.l1 = lipschitz_case1(m, o);
      c.l2 = lipschitz_case2(m, o);
      c.s1 = osl_frobenius(m, o);
      c.s2 = osl_gershgorin(m, o);
      c.s3 = osl_zeta(m, o);
      c.q = qib(m, 2.0, 0.1, OslEstimator::gershgorin, o);
      c.jac = jacobian_bounds(m, o);
      if (m.m() == 0 && m.state_domain().contains(std::vector<double>(m.n(), 0.0))) c.qb = qb(m, o);
      c.model = std::move(m);
      out.push_back(std::move(c));
    }
    return out;
  }();
  return all;
}

// 1. Case-1 Lipschitz constants of the traffic model.
void criterion1(Outcome& r) {
  const struct {
    int s;
    double expect;
  } rows[] = {{5, 0.4579}, {10, 0.6445}};
  for (const auto& row : rows) {
    const ModelDef m = build_traffic({.sections = row.s}).model;
    const auto t0 = Clock::now();
    const LipschitzResult l = lipschitz_case1(m, default_options());
    const double t = seconds_since(t0);
    r.note << "n=" << m.n() << " gamma=" << l.gamma << " eps_optimal=" << l.eps_optimal << " t=" << t << "s; ";
    r.require(std::fabs(l.gamma - row.expect) <= 5e-4, "gamma tolerance");
    r.require(l.eps_optimal, "eps_optimal");
    r.require(t < 300, "runtime");
  }
}

// 2. Case 2 agrees with Case 1 and is fast.
void criterion2(Outcome& r) {
  for (int s : {5, 10}) {
    const ModelDef m = build_traffic({.sections = s}).model;
    const double g1 = lipschitz_case1(m, default_options()).gamma;
    const auto t0 = Clock::now();
    const LipschitzResult l2 = lipschitz_case2(m, default_options());
    const double t = seconds_since(t0);
    r.note << "n=" << m.n() << " |g1-g2|=" << std::fabs(g1 - l2.gamma) << " unique=" << l2.unique.size()
           << " t=" << t << "s; ";
    r.require(std::fabs(g1 - l2.gamma) <= 1e-3, "case agreement");
    r.require(l2.unique.size() == 5, "five deduplicated subproblems");
    r.require(t < 5, "runtime");
  }
}

// 3. Moving-object OSL.
void criterion3(Outcome& r) {
  const ModelDef m = build_moving_object();
  const OSLResult o = osl_gershgorin(m, default_options());
  const QIBResult q = qib(m, 0.0, 0.1, OslEstimator::gershgorin, default_options());
  r.note << "gamma_s=" << o.gamma_s << " gamma_lower=" << *o.lower_gamma << " gamma_m=" << q.gamma_m;
  r.require(o.gamma_s >= -1e-4 && o.gamma_s <= 1e-4, "gamma_s");
  r.require(std::fabs(*o.lower_gamma + 150) <= 1e-3, "gamma_lower");
  r.require(std::fabs(q.gamma_m - 25000) <= 0.1, "gamma_m");
}

// 4. Moving-object QIB.
void criterion4(Outcome& r) {
  const ModelDef m = build_moving_object();
  for (double e1 : {0.0, 1.0, 10.0, 1e4, 1e5}) {
    const QIBResult q = qib(m, e1, 0.1, OslEstimator::gershgorin, default_options());
    r.note << "eps1=" << e1 << ": q1=" << q.gamma_q1 << " q2=" << q.gamma_q2 << "; ";
    r.require(std::fabs(q.gamma_q1 - 25015) <= 0.2, "gamma_q1");
    r.require(q.gamma_q2 == 0.1 - e1, "gamma_q2");
  }
}

// 5. ζ_n against vertex enumeration.
void criterion5(Outcome& r) {
  double worst = 0;
  for (int n = 2; n <= 8; ++n) {
    const double v = oracle::min_v_by_vertices(n);
    const double z = (1 - v) / v;
    worst = std::max({worst, std::fabs(z - (n - 1)), std::fabs(zeta(n) - z)});
  }
  r.note << "max deviation " << worst << " over n=2..8";
  r.require(worst <= 1e-9, "zeta");
}

// 6. Sandwich property on random polynomials and corpus objectives.
void criterion6(Outcome& r) {
  struct Problem {
    std::string name;
    Expr e;
    Box box;
  };
  std::vector<Problem> problems;
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 24; ++k) {
    const int nv = 1 + k % 4;
    const Expr e = corpus::random_polynomial(nv, 1 + k % 4, rng);
    std::vector<std::string> vars;
    for (int v = 1; v <= nv; ++v) vars.push_back("x" + std::to_string(v));
    problems.push_back({"poly" + std::to_string(k), e, Box(std::vector<Interval>(nv, Interval(-1.5, 1.5)), vars)});
  }
  for (const auto& it : corpus::expressions()) problems.push_back({it.text, parse(it.text), corpus::box_of(it)});
  for (const ModelDef& m : sampling::sampling_models())
    problems.push_back({m.name + " case-1", case1_objective(m), m.domain()});

  BnBConfig cfg;
  cfg.eps_h = 1e-4;
  cfg.max_steps = 200000;
  std::size_t checked = 0, trace_steps = 0;
  for (const auto& p : problems) {
    std::vector<std::pair<double, double>> trace;
    BnBHooks hooks;
    hooks.on_step = [&](double l, double u) { trace.emplace_back(l, u); };
    const CompiledExpr c(p.e, p.box.labels());
    const BnBResult b = maximize([&c](std::span<const double> x) { return c.eval(x); },
                                 [&c](const Box& x) { return c.eval(x); }, p.box, cfg, hooks);
    for (std::size_t k = 1; k < trace.size(); ++k) {
      r.require(trace[k].first >= trace[k - 1].first, p.name + ": l decreased");
      r.require(trace[k].second <= trace[k - 1].second, p.name + ": u increased");
    }
    trace_steps += trace.size();

    // l is certified by a point of the box: l <= enclosure of f at the witness.
    r.require(b.argmax.size() == p.box.size() && p.box.contains(b.argmax), p.name + ": witness outside box");
    if (b.argmax.size() == p.box.size()) {
      r.require(c.eval(Box::point(b.argmax, p.box.labels())).lo() >= b.lower, p.name + ": witness below l");
      r.require(c.eval(b.argmax) >= b.lower, p.name + ": witness value below l");
    }

    // u dominates every sampled value.
    double best = -HUGE_VAL;
    auto take = [&](const std::vector<double>& x) {
      const double v = c.eval(x);
      if (std::isfinite(v)) best = std::max(best, v);
    };
    for (const auto& x : halton(std::max<std::size_t>(1, p.box.size()), 20000))
      take(detail::map_to_box(x, p.box));
    for (int k = 0; k < 20000; ++k) take(corpus::random_point(p.box, rng));
    if (p.box.size() <= 12)
      for (std::size_t mask = 0; mask < (std::size_t{1} << p.box.size()); ++mask) take(p.box.corner(mask));
    r.require(best <= b.upper + 1e-9, p.name + ": sampled max above u");
    r.require(b.lower <= b.upper, p.name + ": l > u");
    ++checked;
  }
  r.note << checked << " objectives, " << trace_steps << " recorded iterations";
  r.require(checked >= 20, "corpus size");
}

// 7. Enclosure of point values and of high-precision sin/cos.
void criterion7(Outcome& r) {
  std::mt19937_64 rng(7);
  std::size_t points = 0;
  for (const auto& it : corpus::expressions()) {
    const Expr e = parse(it.text);
    const Box dom = corpus::box_of(it);
    const CompiledExpr c(e, it.vars);
    const Interval whole = c.eval(dom);
    for (int k = 0; k < 10000; ++k) {
      const Box sub = corpus::random_subbox(dom, rng);
      const auto x = corpus::random_point(sub, rng);
      std::map<std::string, double> pt;
      for (std::size_t d = 0; d < x.size(); ++d) pt[it.vars[d]] = x[d];
      const double v = eval_real(e, pt);
      if (!std::isfinite(v)) continue;
      r.require(whole.contains(v), it.text + ": point outside domain enclosure");
      r.require(c.eval(sub).contains(v), it.text + ": point outside sub-box enclosure");
      ++points;
    }
  }
  std::uniform_real_distribution<double> arg(-40, 40), wid(0, 0.5);
  int beyond_pi = 0;
  for (int k = 0; k < 1000; ++k) {
    const double x = arg(rng);
    if (std::fabs(x) > M_PI) ++beyond_pi;
    const Interval s = sin(Interval(x)), co = cos(Interval(x));
    r.require(oracle::contains(s.lo(), s.hi(), oracle::sin_q(x)), "sin at " + std::to_string(x));
    r.require(oracle::contains(co.lo(), co.hi(), oracle::cos_q(x)), "cos at " + std::to_string(x));
    const Interval X(x, x + wid(rng));
    const double y = X.lo() + (X.hi() - X.lo()) * std::uniform_real_distribution<double>(0, 1)(rng);
    r.require(oracle::contains(sin(X).lo(), sin(X).hi(), oracle::sin_q(y)), "sin on interval");
    r.require(oracle::contains(cos(X).lo(), cos(X).hi(), oracle::cos_q(y)), "cos on interval");
  }
  r.note << points << " expression points; 1000 trig arguments (" << beyond_pi << " with |x|>pi)";
}

// 8. Eigenvalue bounds and estimator ordering.
void criterion8(Outcome& r) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = HUGE_VAL;
  for (int k = 0; k < 1000; ++k) {
    const int n = 2 + k % 7;
    DenseMatrix a(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) a[i][j] = a[j][i] = u(rng);
    const double lmax = jacobi_eigenvalues(a).back();
    worst = std::min({worst, gershgorin_upper(a) - lmax, zeta_upper(a) - lmax});
  }
  r.note << "min margin " << worst << "; ";
  r.require(worst >= -1e-10, "eigen bound margin");
  for (const auto& c : corpus_constants()) {
    if (c.s1.gamma_s < 0) continue;
    r.note << c.model.name << ": s2=" << c.s2.gamma_s << " s1=" << c.s1.gamma_s << "; ";
    r.require(c.s2.gamma_s <= c.s1.gamma_s, c.model.name + ": gamma_s2 > gamma_s1");
  }
}

// 9. Defining inequalities on sampled pairs.
void criterion9(Outcome& r) {
  constexpr double rel = 1e-9;
  std::mt19937_64 rng(9);
  std::size_t pairs = 0;
  for (const auto& c : corpus_constants()) {
    const ModelDef& m = c.model;
    const Sampler s(m);
    const std::size_t n = m.n();
    const double gs[] = {c.s1.gamma_s, c.s2.gamma_s, c.s3.gamma_s};
    for (int k = 0; k < 10000; ++k) {
      auto [p, pq] = s.pair(rng);
      const auto df = diff(s.eval(p), s.eval(pq));
      const auto dx = diff(p, pq);
      const double dx2 = dot(dx, dx, n), df2 = dot(df, df, df.size());
      const auto Gdf = s.Gtimes(df);
      const double inner = dot(Gdf, dx, n);
      for (double g : {c.l1.gamma, c.l2.gamma})
        r.require(std::sqrt(df2) <= g * std::sqrt(dx2) * (1 + rel), m.name + ": Lipschitz");
      for (double g : gs) r.require(inner <= g * dx2 + rel * (std::fabs(g) * dx2 + std::fabs(inner)), m.name + ": OSL");
      const double gl = *c.s2.lower_gamma;
      r.require(inner >= gl * dx2 - rel * (std::fabs(gl) * dx2 + std::fabs(inner)), m.name + ": OSL lower");
      const double lhs = dot(Gdf, Gdf, n), rhs = c.q.gamma_q1 * dx2 + c.q.gamma_q2 * inner;
      r.require(lhs <= rhs + rel * (std::fabs(c.q.gamma_q1) * dx2 + std::fabs(c.q.gamma_q2 * inner) + lhs),
                m.name + ": QIB");
      ++pairs;
    }
    const auto names = m.var_names();
    std::vector<CompiledExpr> d;
    for (const auto& e : c.jac.entries) d.emplace_back(e.derivative, names);
    for (int k = 0; k < 10000; ++k) {
      const auto x = corpus::random_point(s.dom, rng);
      for (std::size_t e = 0; e < d.size(); ++e) {
        const double v = d[e].eval(x);
        const Interval b = c.jac.entries[e].bounds;
        r.require(v >= b.lo() - rel * std::fabs(v) && v <= b.hi() + rel * std::fabs(v), m.name + ": Jacobian");
      }
      if (c.qb) {
        const auto fx = s.eval(x);
        double rhs = 0;
        for (std::size_t j = 0; j < n; ++j) rhs += c.qb->gamma[j] * c.qb->gamma[j] * x[j] * x[j];
        r.require(dot(fx, fx, fx.size()) <= rhs * (1 + rel), m.name + ": QB");
      }
    }
  }
  r.note << corpus_constants().size() << " models, " << pairs << " pairs";
}

// 10. Sampling baselines never beat certified bounds.
void criterion10(Outcome& r) {
  BnBConfig cfg;
  cfg.eps_h = 1e-4;
  cfg.max_steps = 200000;
  const SampleMethod methods[] = {SampleMethod::halton, SampleMethod::corners, SampleMethod::midpoint,
                                  SampleMethod::multistart_local};
  std::size_t reports = 0;
  auto check = [&](const std::string& name, const Expr& e, const Box& b) {
    const Bound u = maximize_expr(e, b, cfg);
    for (auto method : methods) {
      const auto s = sample_max(e, b, 10000, method);
      r.require(s.best_value <= u.upper + 1e-9, name + " " + to_string(method));
      ++reports;
    }
  };
  for (const auto& it : corpus::expressions()) check(it.text, parse(it.text), corpus::box_of(it));
  for (const auto& c : corpus_constants()) {
    check(c.model.name, case1_objective(c.model), c.model.domain());
    const auto jn = jacobian_norm_sampled(c.model, 10000);
    r.require(jn.best_value <= c.l1.gamma + 1e-6, c.model.name + ": sampled Jacobian norm");
    ++reports;
  }
  const ModelDef t = build_traffic({.sections = 5}).model;
  const auto h = sample_max(case1_objective(t), t.domain(), 10000, SampleMethod::halton);
  const double g = std::sqrt(h.best_value);
  r.note << reports << " reports dominated; Halton n=31 gives " << g << "; ";
  r.require(g <= 0.4579 - 0.05, "Halton under-approximation margin");
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"Case-1 traffic Lipschitz constants (n=31, 61)", criterion1},
      {"Case-2 agrees with Case-1, five subproblems, fast", criterion2},
      {"moving-object OSL (gershgorin), lower bound and gamma_m", criterion3},
      {"moving-object QIB constants", criterion4},
      {"zeta_n against vertex enumeration", criterion5},
      {"sandwich property and monotone traces", criterion6},
      {"point and trig enclosure", criterion7},
      {"eigenvalue bounds and estimator ordering", criterion8},
      {"defining inequalities on sampled pairs", criterion9},
      {"baseline dominance and Halton under-approximation", criterion10},
  };
  int failed = 0, k = 0;
  for (const auto& [title, fn] : criteria) {
    ++k;
    Outcome r;
    const auto t0 = Clock::now();
    try {
      fn(r);
    } catch (const std::exception& e) {
      r.pass = false;
      r.note << "exception: " << e.what();
    }
    std::printf("criterion %2d: %s  %s  [%s] (%.1fs)\n", k, r.pass ? "PASS" : "FAIL", title, r.note.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d/%d criteria passed\n", k - failed, k);
  return failed == 0 ? 0 : 1;
}
