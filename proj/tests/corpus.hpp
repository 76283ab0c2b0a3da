#pragma once

// Expressions and models exercised by the property suites.

#include <random>
#include <string>
#include <vector>

#include "nlbound/box.hpp"
#include "nlbound/expr.hpp"
#include "nlbound/models.hpp"
#include "nlbound/parser.hpp"

namespace corpus {

struct Item {
  std::string text;
  std::vector<std::string> vars;
  std::vector<nlbound::Interval> bounds;
};

inline std::vector<Item> expressions() {
  using nlbound::Interval;
  const Interval w(-2, 2);
  return {
      {"x*(1-x)", {"x"}, {Interval(0, 1)}},
      {"x1^2 - x2^2", {"x1", "x2"}, {w, w}},
      {"-2*x1*x2", {"x1", "x2"}, {w, w}},
      {"sin(x1)*cos(x2)", {"x1", "x2"}, {w, w}},
      {"exp(x1)/(2 + x2^2)", {"x1", "x2"}, {w, w}},
      {"sqrt(x1^2 + 1) - x2", {"x1", "x2"}, {w, w}},
      {"abs(x1 - x2)*x1", {"x1", "x2"}, {w, w}},
      {"sqr(x1 + x2) - x1^3", {"x1", "x2"}, {w, w}},
      {"cos(2*x1) + sin(x1*x2)", {"x1", "x2"}, {Interval(-1.5, 1.5), Interval(-1.5, 1.5)}},
      {"max(x1, x2^2) - x3", {"x1", "x2", "x3"}, {w, w, w}},
      {"1.1811320754716981*(x5^2 - x4^2)", {"x4", "x5"}, {Interval(0, 0.0265), Interval(0, 0.0265)}},
      {"-x1*(x1^2 + x2^2)", {"x1", "x2"}, {Interval(-5, 5), Interval(-5, 5)}},
      {"x4*u4*cos(x1) - x3*u4*sin(x1) - x4*u3*sin(x1) - x3*u3*cos(x1) + u3*u4*cos(2*x1)"
       " + 0.5*(u4^2 - u3^2)*sin(2*x1) + 1",
       {"x1", "x3", "x4", "u3", "u4"},
       {Interval(0.4, 1.2), Interval(0.7, 1.1), Interval(-0.3, 0.3), Interval(0.5, 1.5), Interval(-0.5, 0.5)}},
      {"x1^4 - 3*x1^2*x2 + x2/(x1^2 + 1)", {"x1", "x2"}, {w, w}},
      {"exp(-x1^2)*sin(3*x2)", {"x1", "x2"}, {Interval(-1, 1), Interval(-1, 1)}},
  };
}

inline nlbound::Box box_of(const Item& it) { return nlbound::Box(it.bounds, it.vars); }

/// Random sub-box of `b` (each side a random sub-interval).
inline nlbound::Box random_subbox(const nlbound::Box& b, std::mt19937_64& rng) {
  std::vector<nlbound::Interval> d;
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::uniform_real_distribution<double> u(b[i].lo(), b[i].hi());
    double x = u(rng), y = u(rng);
    if (x > y) std::swap(x, y);
    d.emplace_back(x, y);
  }
  return nlbound::Box(d, b.labels());
}

inline std::vector<double> random_point(const nlbound::Box& b, std::mt19937_64& rng) {
  std::vector<double> x(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::uniform_real_distribution<double> u(b[i].lo(), b[i].hi());
    x[i] = b[i].is_degenerate() ? b[i].lo() : u(rng);
  }
  return x;
}

/// Random polynomial of total degree <= `degree` in `nvars` variables x1..xn.
inline nlbound::Expr random_polynomial(int nvars, int degree, std::mt19937_64& rng) {
  using namespace nlbound;
  std::uniform_int_distribution<int> nterms(2, 6), pick_var(1, nvars), pick_pow(1, degree);
  std::uniform_real_distribution<double> coef(-2, 2);
  Expr acc = Expr::constant(0.0);
  const int t = nterms(rng);
  for (int k = 0; k < t; ++k) {
    int budget = std::uniform_int_distribution<int>(0, degree)(rng);
    Expr term = Expr::constant(std::round(coef(rng) * 100) / 100);
    while (budget > 0) {
      const int p = std::min(budget, pick_pow(rng));
      term = term * pow_int(var("x" + std::to_string(pick_var(rng))), p);
      budget -= p;
    }
    acc = acc + term;
  }
  return acc;
}

}  // namespace corpus
