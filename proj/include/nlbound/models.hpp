#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlbound/errors.hpp"
#include "nlbound/expr.hpp"
#include "nlbound/interval.hpp"
#include "nlbound/model.hpp"

namespace nlbound {

// ---------------------------------------------------------------------------
// Freeway traffic (free-flow regime)

struct TrafficConfig {
  int sections = 5;
  double v_f = 31.3;     // free-flow speed, m/s
  double rho_m = 0.053;  // jam density, veh/m
  double seg_len = 500;  // m
  double alpha = 0.5;    // off-ramp split ratio

  double delta() const { return v_f / (seg_len * rho_m); }
  double rho_c() const { return rho_m / 2; }
};

/// Multiplicity of each nonlinearity type a..e.
struct TrafficCounts {
  std::array<int, 5> by_type{};  // a, b, c, d, e
  int& operator[](int t) { return by_type[t]; }
  int operator[](int t) const { return by_type[t]; }
};

struct TrafficModel {
  ModelDef model;
  TrafficCounts counts;
  std::vector<char> types;  // 'a'..'e' per f component
};

/// n = 6s+1 states: an upstream segment x1, then per section the template
///
///     m1 (c)  on-ramp q (a)  m2 (b)  m3 (c)  m4 (d)  off-ramp r (e)
///
/// where each section's m1 is fed by the previous section's m4 (or x1).
inline TrafficModel build_traffic(const TrafficConfig& cfg = {}) {
  if (cfg.sections < 1) throw DomainError("traffic model needs at least one section");
  if (!(cfg.v_f > 0 && cfg.rho_m > 0 && cfg.seg_len > 0 && cfg.alpha >= 0))
    throw DomainError("traffic parameters must be positive");
  const double d = cfg.delta();
  const Interval bounds(0.0, cfg.rho_c());
  const Expr D = Expr::constant(d);
  auto sq = [](const std::string& v) { return pow_int(var(v), 2); };

  TrafficModel tm;
  ModelDef& m = tm.model;
  m.name = "traffic_s" + std::to_string(cfg.sections);
  m.constants = {{"v_f", cfg.v_f}, {"rho_m", cfg.rho_m}, {"seg_len", cfg.seg_len}, {"alpha", cfg.alpha}, {"delta", d}};

  auto add = [&](const std::string& name, Expr f, char type) {
    m.states.push_back({name, bounds});
    m.f_names.push_back("f" + std::to_string(m.f.size() + 1));
    m.f.push_back(std::move(f));
    tm.types.push_back(type);
    tm.counts[type - 'a'] += 1;
  };

  const int n = 6 * cfg.sections + 1;
  std::vector<std::string> x;
  for (int i = 1; i <= n; ++i) x.push_back("x" + std::to_string(i));

  add(x[0], D * sq(x[0]), 'a');
  std::string prev = x[0];
  for (int k = 0; k < cfg.sections; ++k) {
    const int b = 1 + 6 * k;
    const std::string &m1 = x[b], &q = x[b + 1], &m2 = x[b + 2], &m3 = x[b + 3], &m4 = x[b + 4], &r = x[b + 5];
    add(m1, D * (sq(m1) - sq(prev)), 'c');
    add(q, D * sq(q), 'a');
    add(m2, D * (sq(m2) - sq(m1) - sq(q)), 'b');
    add(m3, D * (sq(m3) - sq(m2)), 'c');
    add(m4, D * (sq(m4) - sq(m3) + Expr::constant(cfg.alpha) * sq(r)), 'd');
    add(r, Expr::constant(-d * cfg.alpha) * sq(r), 'e');
    prev = m4;
  }
  m.validate();
  return tm;
}

// ---------------------------------------------------------------------------
// Synchronous generator (fourth-order transient model)

struct GeneratorConfig {
  std::optional<double> a1, a3, a4, a6, a8, a10;
  std::optional<std::array<Interval, 4>> state_bounds;  // x1..x4
  std::optional<std::array<Interval, 4>> input_bounds;  // u1..u4
};

struct GeneratorModel {
  ModelDef model;
  std::vector<std::string> warnings;
};

/// An illustrative operating region (rotor angle within (0, π/2)); the
/// published case study's region is not available.
inline GeneratorConfig illustrative_generator_config() {
  GeneratorConfig c;
  c.state_bounds = std::array<Interval, 4>{Interval(0.4, 1.2), Interval(0.99, 1.01), Interval(0.7, 1.1),
                                           Interval(-0.3, 0.3)};
  c.input_bounds = std::array<Interval, 4>{Interval(0.5, 1.0), Interval(1.5, 2.5), Interval(0.5, 1.5),
                                           Interval(-0.5, 0.5)};
  return c;
}

inline GeneratorModel build_generator(const GeneratorConfig& cfg) {
  if (!cfg.state_bounds || !cfg.input_bounds)
    throw MissingBounds("generator model needs explicit state and input bounds");
  GeneratorModel gm;
  auto alpha = [&](const std::optional<double>& a, const char* name) {
    if (a) return *a;
    gm.warnings.push_back(std::string("generator constant ") + name + " not given; using placeholder 1.0");
    return 1.0;
  };
  const double a1 = alpha(cfg.a1, "alpha1"), a3 = alpha(cfg.a3, "alpha3"), a4 = alpha(cfg.a4, "alpha4"),
               a6 = alpha(cfg.a6, "alpha6"), a8 = alpha(cfg.a8, "alpha8"), a10 = alpha(cfg.a10, "alpha10");

  ModelDef& m = gm.model;
  m.name = "generator";
  m.constants = {{"alpha1", a1}, {"alpha3", a3}, {"alpha4", a4}, {"alpha6", a6}, {"alpha8", a8}, {"alpha10", a10}};
  for (int i = 0; i < 4; ++i) m.states.push_back({"x" + std::to_string(i + 1), (*cfg.state_bounds)[i]});
  for (int i = 0; i < 4; ++i) m.inputs.push_back({"u" + std::to_string(i + 1), (*cfg.input_bounds)[i]});

  const std::map<std::string, double> k = {{"alpha1", a1}, {"alpha3", a3}, {"alpha4", a4},
                                           {"alpha6", a6}, {"alpha8", a8}, {"alpha10", a10}};
  const char* f[] = {
      "-alpha1",
      "alpha3*x4*u4*cos(x1) - alpha3*x3*u4*sin(x1) - alpha3*x4*u3*sin(x1) - alpha3*x3*u3*cos(x1)"
      " + alpha4*u3*u4*cos(2*x1) + 0.5*alpha4*(u4^2 - u3^2)*sin(2*x1) + alpha6",
      "alpha8*u4*cos(x1) - alpha8*u3*sin(x1)",
      "alpha10*u3*cos(x1) + alpha10*u4*sin(x1)",
  };
  for (int i = 0; i < 4; ++i) {
    m.f_names.push_back("f" + std::to_string(i + 1));
    m.f.push_back(parse(f[i], k));
  }
  m.validate();
  return gm;
}

// ---------------------------------------------------------------------------
// Moving object in the plane

struct MovingObjectConfig {
  double r = 5.0;
};

inline ModelDef build_moving_object(const MovingObjectConfig& cfg = {}) {
  if (!(cfg.r > 0)) throw DomainError("moving object radius must be positive");
  ModelDef m;
  m.name = "moving_object";
  m.states = {{"x1", Interval(-cfg.r, cfg.r)}, {"x2", Interval(-cfg.r, cfg.r)}};
  const Expr x1 = var("x1"), x2 = var("x2");
  const Expr r2 = pow_int(x1, 2) + pow_int(x2, 2);
  m.f = {-(x1 * r2), -(x2 * r2)};
  m.f_names = {"f1", "f2"};
  m.G = Matrix{{1.0, 0.0}, {0.0, 1.0}};
  m.validate();
  return m;
}

}  // namespace nlbound
