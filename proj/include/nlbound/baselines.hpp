#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlbound/box.hpp"
#include "nlbound/eigen.hpp"
#include "nlbound/errors.hpp"
#include "nlbound/expr.hpp"
#include "nlbound/model.hpp"
#include "nlbound/params.hpp"

namespace nlbound {

/// First `count` primes.
inline std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> p;
  for (std::uint32_t c = 2; p.size() < count; ++c) {
    bool prime = true;
    for (std::uint32_t q : p) {
      if (q * q > c) break;
      if (c % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) p.push_back(c);
  }
  return p;
}

inline double radical_inverse(std::uint64_t index, std::uint32_t base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Halton sequence in [0,1]^dim; point k uses index k+1 so the first point is (1/2, 1/3, ...).
class Halton {
 public:
  explicit Halton(std::size_t dim) : bases_(first_primes(dim)) {
    if (dim < 1) throw InvalidDimension("halton requires dim >= 1");
  }

  std::vector<double> next() {
    ++index_;
    std::vector<double> x(bases_.size());
    for (std::size_t d = 0; d < bases_.size(); ++d) x[d] = radical_inverse(index_, bases_[d]);
    return x;
  }

  std::size_t dim() const noexcept { return bases_.size(); }

 private:
  std::vector<std::uint32_t> bases_;
  std::uint64_t index_ = 0;
};

inline std::vector<std::vector<double>> halton(std::size_t dim, std::size_t count) {
  Halton h(dim);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(h.next());
  return out;
}

enum class SampleMethod { halton, corners, midpoint, multistart_local };

inline const char* to_string(SampleMethod m) {
  switch (m) {
    case SampleMethod::halton: return "halton";
    case SampleMethod::corners: return "corners";
    case SampleMethod::midpoint: return "midpoint";
    case SampleMethod::multistart_local: return "multistart_local";
  }
  return "?";
}

inline std::optional<SampleMethod> parse_sample_method(const std::string& s) {
  if (s == "halton") return SampleMethod::halton;
  if (s == "corners") return SampleMethod::corners;
  if (s == "midpoint") return SampleMethod::midpoint;
  if (s == "multistart_local") return SampleMethod::multistart_local;
  return std::nullopt;
}

struct SampleReport {
  double best_value = -HUGE_VAL;
  std::vector<double> best_point;
  std::size_t samples = 0;
  SampleMethod method = SampleMethod::halton;
};

using PointObjective = std::function<double(std::span<const double>)>;

namespace detail {

inline std::vector<double> map_to_box(const std::vector<double>& unit, const Box& b) {
  std::vector<double> x(unit.size());
  for (std::size_t d = 0; d < unit.size(); ++d) {
    const double lo = b[d].lo(), hi = b[d].hi();
    x[d] = std::clamp(lo + unit[d] * (hi - lo), lo, hi);
  }
  return x;
}

inline void consider(SampleReport& r, const PointObjective& h, const std::vector<double>& x) {
  const double v = h(x);
  ++r.samples;
  if (std::isfinite(v) && (r.best_point.empty() || v > r.best_value)) {
    r.best_value = v;
    r.best_point = x;
  }
}

// Coordinate pattern search: probe ±step per coordinate, halve on failure.
inline void pattern_search(SampleReport& r, const PointObjective& h, const Box& b, std::vector<double> x,
                           std::size_t budget) {
  double fx = h(x);
  ++r.samples;
  std::vector<double> step(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) step[d] = 0.25 * (b[d].hi() - b[d].lo());
  std::size_t used = 1;
  while (used < budget) {
    bool improved = false, any = false;
    for (std::size_t d = 0; d < x.size() && used < budget; ++d) {
      if (step[d] <= 1e-12 * std::max(1.0, std::fabs(x[d]))) continue;
      any = true;
      for (double dir : {1.0, -1.0}) {
        std::vector<double> y = x;
        y[d] = std::clamp(x[d] + dir * step[d], b[d].lo(), b[d].hi());
        if (y[d] == x[d]) continue;
        const double fy = h(y);
        ++r.samples;
        ++used;
        if (std::isfinite(fy) && fy > fx) {
          x = std::move(y);
          fx = fy;
          improved = true;
          break;
        }
      }
    }
    if (!any) break;
    if (!improved)
      for (double& s : step) s *= 0.5;
  }
  if (std::isfinite(fx) && (r.best_point.empty() || fx > r.best_value)) {
    r.best_value = fx;
    r.best_point = x;
  }
}

}  // namespace detail

inline constexpr std::size_t kMaxCorners = std::size_t{1} << 20;
inline constexpr std::size_t kMultistartCount = 32;

/// Best objective value over a deterministic point set in `domain`. Never a
/// certified bound; it under-approximates the maximum.
inline SampleReport sample_max(const PointObjective& h, const Box& domain, std::size_t count, SampleMethod method) {
  if (count < 1) throw DomainError("sample count must be >= 1");
  SampleReport r;
  r.method = method;
  if (domain.size() == 0) {
    detail::consider(r, h, {});
    return r;
  }
  switch (method) {
    case SampleMethod::halton: {
      Halton seq(domain.size());
      for (std::size_t k = 0; k < count; ++k) detail::consider(r, h, detail::map_to_box(seq.next(), domain));
      break;
    }
    case SampleMethod::corners: {
      const std::size_t total = domain.size() >= 20 ? kMaxCorners : (std::size_t{1} << domain.size());
      for (std::size_t mask = 0; mask < total; ++mask)
        detail::consider(r, h, domain.corner(mask));
      break;
    }
    case SampleMethod::midpoint: detail::consider(r, h, domain.midpoint()); break;
    case SampleMethod::multistart_local: {
      Halton seq(domain.size());
      const std::size_t per_start = std::max<std::size_t>(1, count / kMultistartCount);
      for (std::size_t s = 0; s < kMultistartCount; ++s)
        detail::pattern_search(r, h, domain, detail::map_to_box(seq.next(), domain), per_start);
      break;
    }
  }
  return r;
}

inline SampleReport sample_max(const Expr& e, const Box& domain, std::size_t count, SampleMethod method) {
  auto [box, names] = detail::reduce(e, domain);
  CompiledExpr c(e, names);
  SampleReport r = sample_max([&c](std::span<const double> x) { return c.eval(x); }, box, count, method);
  // Report the point in the coordinates of the full domain (unused variables at their midpoints).
  std::vector<double> full = domain.midpoint();
  for (std::size_t k = 0; k < names.size(); ++k)
    for (std::size_t d = 0; d < domain.size(); ++d)
      if (domain.labels()[d] == names[k] && k < r.best_point.size()) full[d] = r.best_point[k];
  r.best_point = full;
  return r;
}

/// Numeric Jacobian D_x f at a point of Ω (ordered states then inputs).
class JacobianEvaluator {
 public:
  explicit JacobianEvaluator(const ModelDef& m) : names_(m.var_names()), n_(m.n()) {
    for (const auto& fi : m.f) {
      std::vector<CompiledExpr> row;
      for (const auto& d : state_gradient(m, fi)) row.emplace_back(d, names_);
      rows_.push_back(std::move(row));
    }
  }

  DenseMatrix operator()(std::span<const double> x) const {
    DenseMatrix d(rows_.size(), std::vector<double>(n_));
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (std::size_t j = 0; j < n_; ++j) d[i][j] = rows_[i][j].eval(x);
    return d;
  }

 private:
  std::vector<std::string> names_;
  std::size_t n_;
  std::vector<std::vector<CompiledExpr>> rows_;
};

/// max over Halton points of ‖D_x f‖₂ — a non-certified reference estimate.
inline SampleReport jacobian_norm_sampled(const ModelDef& m, const Box& domain, std::size_t count) {
  JacobianEvaluator jac(m);
  return sample_max([&jac](std::span<const double> x) { return spectral_norm(jac(x)); }, domain, count,
                    SampleMethod::halton);
}

inline SampleReport jacobian_norm_sampled(const ModelDef& m, std::size_t count) {
  return jacobian_norm_sampled(m, m.domain(), count);
}

/// Pointwise extreme eigenvalues of Ψ(x) over Halton points: a sampled
/// diagnostic for the exact OSL objective, never a certified bound.
struct PsiEigenSample {
  double lambda_max = -HUGE_VAL;
  double lambda_min = HUGE_VAL;
  std::size_t samples = 0;
};

inline PsiEigenSample psi_eigen_sampled(const ModelDef& m, std::size_t count) {
  const ExprMatrix psi = build_psi(m);
  const auto names = m.var_names();
  std::vector<std::vector<CompiledExpr>> c;
  for (const auto& row : psi) {
    std::vector<CompiledExpr> cr;
    for (const auto& e : row) cr.emplace_back(e, names);
    c.push_back(std::move(cr));
  }
  const Box dom = m.domain();
  Halton seq(dom.size());
  PsiEigenSample out;
  for (std::size_t k = 0; k < count; ++k) {
    const auto x = detail::map_to_box(seq.next(), dom);
    DenseMatrix a(c.size(), std::vector<double>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) a[i][j] = c[i][j].eval(x);
    const auto ev = jacobi_eigenvalues(a);
    out.lambda_max = std::max(out.lambda_max, ev.back());
    out.lambda_min = std::min(out.lambda_min, ev.front());
    ++out.samples;
  }
  return out;
}

}  // namespace nlbound
