#pragma once

// Point sampling of model functions for checking the defining inequalities.

#include <random>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "nlbound/model.hpp"
#include "nlbound/models.hpp"

namespace sampling {

using namespace nlbound;

// Point evaluation of f and G for a model, for sampling the defining inequalities.
struct Sampler {
  const ModelDef& m;
  std::vector<CompiledExpr> f;
  Matrix G;
  Box dom;

  explicit Sampler(const ModelDef& model) : m(model), G(model.G_or_identity()), dom(model.domain()) {
    const auto names = m.var_names();
    for (const auto& fi : m.f) f.emplace_back(fi, names);
  }

  std::vector<double> eval(const std::vector<double>& p) const {
    std::vector<double> out;
    for (const auto& c : f) out.push_back(c.eval(p));
    return out;
  }
  std::vector<double> Gtimes(const std::vector<double>& v) const {
    std::vector<double> out(G.size(), 0.0);
    for (std::size_t i = 0; i < G.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) out[i] += G[i][j] * v[j];
    return out;
  }

  // (x, u) and (x̂, u): same inputs, independent states.
  std::pair<std::vector<double>, std::vector<double>> pair(std::mt19937_64& rng) const {
    auto p = corpus::random_point(dom, rng);
    auto q = corpus::random_point(dom, rng);
    for (std::size_t k = m.n(); k < p.size(); ++k) q[k] = p[k];
    return {p, q};
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

/// Models used by the sampled-inequality suites.
inline std::vector<ModelDef> sampling_models() {
  return {build_traffic({.sections = 1}).model, build_traffic({.sections = 2}).model, build_moving_object(),
          build_generator(illustrative_generator_config()).model,
          parse_model("[states]\nx1 = [-1, 1]\nx2 = [-0.5, 1.5]\n[inputs]\nu = [0, 1]\n[f]\n"
                      "f1 = \"sin(x1)*x2 + u*x1\"\nf2 = \"x1*x2 - u*x2^2\"\n[G]\n1 0.5\n0 2\n",
                      "mixed")};
}

}  // namespace sampling
