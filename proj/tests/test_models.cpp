#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "nlbound/models.hpp"
#include "nlbound/params.hpp"

using namespace nlbound;

namespace {

std::map<std::string, double> at(const ModelDef& m, const std::vector<double>& x) {
  std::map<std::string, double> p;
  const auto names = m.var_names();
  for (std::size_t k = 0; k < names.size(); ++k) p[names[k]] = x[k];
  return p;
}

// Central differences of every f_i against its symbolic state gradient.
void check_gradients(const ModelDef& m, int points) {
  std::mt19937_64 rng(11);
  const Box dom = m.domain();
  const auto names = m.var_names();
  for (std::size_t i = 0; i < m.g(); ++i) {
    const auto grad = state_gradient(m, m.f[i]);
    const CompiledExpr f(m.f[i], names);
    for (std::size_t j = 0; j < m.n(); ++j) {
      const CompiledExpr d(grad[j], names);
      const double h = 1e-6 * std::max(1.0, dom[j].width());
      for (int k = 0; k < points; ++k) {
        auto x = corpus::random_point(dom, rng);
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (f.eval(xp) - f.eval(xm)) / (2 * h);
        const double sym = d.eval(x);
        ASSERT_NEAR(sym, fd, 1e-5 * (1 + std::fabs(sym))) << m.name << " d" << m.f_names[i] << "/d" << names[j];
      }
    }
  }
}

}  // namespace

TEST(Traffic, CountsAndDimensions) {
  for (int s = 1; s <= 10; ++s) {
    const TrafficModel t = build_traffic({.sections = s});
    EXPECT_EQ(t.model.n(), static_cast<std::size_t>(6 * s + 1));
    EXPECT_EQ(t.model.g(), t.model.n());
    EXPECT_EQ(t.model.m(), 0u);
    EXPECT_EQ(t.counts.by_type, (std::array<int, 5>{s + 1, s, 2 * s, s, s}));
    EXPECT_EQ(t.types.size(), t.model.n());
  }
  const TrafficModel t5 = build_traffic({.sections = 5});
  EXPECT_EQ(t5.counts.by_type, (std::array<int, 5>{6, 5, 10, 5, 5}));
  EXPECT_EQ(t5.model.name, "traffic_s5");
  EXPECT_THROW(build_traffic({.sections = 0}), DomainError);
}

TEST(Traffic, ParametersAndDomain) {
  const TrafficConfig cfg;
  EXPECT_NEAR(cfg.delta(), 1.181132, 1e-6);
  EXPECT_DOUBLE_EQ(cfg.delta(), 31.3 / (500 * 0.053));
  const ModelDef m = build_traffic(cfg).model;
  for (const auto& s : m.states) {
    EXPECT_EQ(s.bounds.lo(), 0.0);
    EXPECT_EQ(s.bounds.hi(), 0.053 / 2);
  }
  // f1 = δ x1²
  std::vector<double> x(m.n(), 0.0);
  x[0] = 0.02;
  EXPECT_NEAR(eval_real(m.f[0], at(m, x)), cfg.delta() * 0.0004, 1e-15);
}

TEST(Traffic, TypeFormulas) {
  const TrafficModel t = build_traffic({.sections = 1});
  const ModelDef& m = t.model;
  EXPECT_EQ(std::string(t.types.begin(), t.types.end()), "acabcde");
  const double d = TrafficConfig{}.delta();
  const std::vector<double> x = {0.01, 0.02, 0.003, 0.004, 0.005, 0.006, 0.007};
  const auto p = at(m, x);
  auto sq = [](double v) { return v * v; };
  EXPECT_NEAR(eval_real(m.f[1], p), d * (sq(x[1]) - sq(x[0])), 1e-15);
  EXPECT_NEAR(eval_real(m.f[2], p), d * sq(x[2]), 1e-15);
  EXPECT_NEAR(eval_real(m.f[3], p), d * (sq(x[3]) - sq(x[1]) - sq(x[2])), 1e-15);
  EXPECT_NEAR(eval_real(m.f[4], p), d * (sq(x[4]) - sq(x[3])), 1e-15);
  EXPECT_NEAR(eval_real(m.f[5], p), d * (sq(x[5]) - sq(x[4]) + 0.5 * sq(x[6])), 1e-15);
  EXPECT_NEAR(eval_real(m.f[6], p), -d * 0.5 * sq(x[6]), 1e-15);
}

TEST(Generator, Examples) {
  GeneratorConfig cfg = illustrative_generator_config();
  cfg.a1 = 0.7;
  cfg.a8 = 2.5;
  cfg.a10 = 1.5;
  const GeneratorModel gm = build_generator(cfg);
  const ModelDef& m = gm.model;
  EXPECT_EQ(m.n(), 4u);
  EXPECT_EQ(m.m(), 4u);
  EXPECT_EQ(gm.warnings.size(), 3u);  // alpha3, alpha4, alpha6 left at placeholders

  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const auto x = corpus::random_point(m.domain(), rng);
    EXPECT_DOUBLE_EQ(eval_real(m.f[0], at(m, x)), -0.7);
  }
  // f3 at x1 = 0 reduces to α8·u4
  std::vector<double> x = {0.0, 1.0, 0.9, 0.1, 0.8, 2.0, 1.1, 0.37};
  EXPECT_NEAR(eval_real(m.f[2], at(m, x)), 2.5 * 0.37, 1e-15);

  // ∂f4/∂x1 = -α10·u3·sin x1 + α10·u4·cos x1
  const Expr d = differentiate(m.f[3], "x1");
  for (int k = 0; k < 200; ++k) {
    const auto y = corpus::random_point(m.domain(), rng);
    const double expect = -1.5 * y[6] * std::sin(y[0]) + 1.5 * y[7] * std::cos(y[0]);
    EXPECT_NEAR(eval_real(d, at(m, y)), expect, 1e-12);
  }
}

TEST(Generator, DoubleAngleTerms) {
  const GeneratorModel gm = build_generator(illustrative_generator_config());
  const ModelDef& m = gm.model;
  EXPECT_EQ(gm.warnings.size(), 6u);
  const std::vector<double> y = {0.9, 1.0, 0.8, 0.2, 0.7, 2.0, 1.2, -0.3};
  const double x1 = y[0], x3 = y[2], x4 = y[3], u3 = y[6], u4 = y[7];
  const double expect = x4 * u4 * std::cos(x1) - x3 * u4 * std::sin(x1) - x4 * u3 * std::sin(x1) -
                        x3 * u3 * std::cos(x1) + u3 * u4 * std::cos(2 * x1) +
                        0.5 * (u4 * u4 - u3 * u3) * std::sin(2 * x1) + 1.0;
  EXPECT_NEAR(eval_real(m.f[1], at(m, y)), expect, 1e-13);
}

TEST(Generator, MissingBounds) {
  EXPECT_THROW(build_generator(GeneratorConfig{}), MissingBounds);
  GeneratorConfig c = illustrative_generator_config();
  c.input_bounds.reset();
  EXPECT_THROW(build_generator(c), MissingBounds);
}

TEST(MovingObject, Examples) {
  const ModelDef m = build_moving_object();
  EXPECT_EQ(m.n(), 2u);
  EXPECT_EQ(m.m(), 0u);
  ASSERT_TRUE(m.G.has_value());
  EXPECT_EQ(*m.G, (Matrix{{1, 0}, {0, 1}}));
  EXPECT_EQ(m.states[0].bounds.lo(), -5.0);
  EXPECT_EQ(m.states[1].bounds.hi(), 5.0);
  EXPECT_EQ(eval_real(m.f[0], {{"x1", 0}, {"x2", 0}}), 0.0);
  EXPECT_EQ(eval_real(m.f[1], {{"x1", 0}, {"x2", 0}}), 0.0);
  EXPECT_EQ(eval_real(m.f[0], {{"x1", 1}, {"x2", 1}}), -2.0);
  EXPECT_EQ(eval_real(m.f[1], {{"x1", 1}, {"x2", 1}}), -2.0);
  EXPECT_EQ(build_moving_object({.r = 2}).states[0].bounds.lo(), -2.0);
  EXPECT_THROW(build_moving_object({.r = 0}), DomainError);
}

TEST(MovingObject, OslNearZero) {
  const OSLResult r = osl(build_moving_object(), OslEstimator::gershgorin);
  EXPECT_GE(r.gamma_s, -1e-4);
  EXPECT_LE(r.gamma_s, 1e-4);
}

TEST(Models, GradientsMatchFiniteDifferences) {
  check_gradients(build_traffic({.sections = 2}).model, 200);
  check_gradients(build_moving_object(), 500);
  check_gradients(build_generator(illustrative_generator_config()).model, 500);
}

TEST(Traffic, Case1AgreesWithCase2) {
  for (int s = 1; s <= 5; ++s) {
    const ModelDef m = build_traffic({.sections = s}).model;
    const LipschitzResult a = lipschitz_case1(m), b = lipschitz_case2(m);
    EXPECT_NEAR(a.gamma, b.gamma, 1e-3) << "s=" << s;
    EXPECT_TRUE(a.eps_optimal);
    EXPECT_TRUE(b.eps_optimal);
    EXPECT_EQ(b.unique.size(), 5u);
  }
}
