#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "nlbound/errors.hpp"

namespace nlbound {

namespace rounding {

// Directed rounding without touching the FPU mode. Each primitive is computed
// in round-to-nearest and the sign of its exact rounding error (recovered with
// an error-free transformation) decides whether the endpoint must move by one
// ulp. Below kSafeMagnitude the transformations may lose exactness to
// underflow, so those results are widened unconditionally.

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSafeMagnitude = 0x1p-900;

inline double next_down(double x) { return std::nextafter(x, -kInf); }
inline double next_up(double x) { return std::nextafter(x, kInf); }

inline double widen_down(double r, double err) { return err < 0.0 ? next_down(r) : r; }
inline double widen_up(double r, double err) { return err > 0.0 ? next_up(r) : r; }

inline double two_sum_err(double a, double b, double s) {
  const double bb = s - a;
  return (a - (s - bb)) + (b - bb);
}

inline double add_down(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return s;
  return widen_down(s, two_sum_err(a, b, s));
}

inline double add_up(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return s;
  return widen_up(s, two_sum_err(a, b, s));
}

inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

inline double mul_down(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  const double p = a * b;
  if (!std::isfinite(p)) return p;
  if (std::fabs(p) < kSafeMagnitude) return next_down(p);
  return widen_down(p, std::fma(a, b, -p));
}

inline double mul_up(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  const double p = a * b;
  if (!std::isfinite(p)) return p;
  if (std::fabs(p) < kSafeMagnitude) return next_up(p);
  return widen_up(p, std::fma(a, b, -p));
}

// Sign of (a / b - q) is sign(a - q*b) * sign(b); a - q*b is exact via fma.
inline double div_err_sign(double a, double b, double q) {
  const double r = std::fma(-q, b, a);
  return b > 0.0 ? r : -r;
}

inline double div_down(double a, double b) {
  if (a == 0.0) return 0.0;
  const double q = a / b;
  if (!std::isfinite(q)) return q;
  if (std::fabs(q) < kSafeMagnitude || std::fabs(a) < kSafeMagnitude) return next_down(q);
  return widen_down(q, div_err_sign(a, b, q));
}

inline double div_up(double a, double b) {
  if (a == 0.0) return 0.0;
  const double q = a / b;
  if (!std::isfinite(q)) return q;
  if (std::fabs(q) < kSafeMagnitude || std::fabs(a) < kSafeMagnitude) return next_up(q);
  return widen_up(q, div_err_sign(a, b, q));
}

inline double sqrt_down(double a) {
  if (a == 0.0) return 0.0;
  const double s = std::sqrt(a);
  if (a < kSafeMagnitude) return next_down(s);
  return widen_down(s, std::fma(-s, s, a));
}

inline double sqrt_up(double a) {
  if (a == 0.0) return 0.0;
  const double s = std::sqrt(a);
  if (a < kSafeMagnitude) return next_up(s);
  return widen_up(s, std::fma(-s, s, a));
}

}  // namespace rounding

/// Closed interval [lo, hi] with finite endpoints.
class Interval {
 public:
  constexpr Interval() = default;

  /// Degenerate interval [v, v].
  explicit Interval(double v) : Interval(v, v) {}

  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw DomainError("interval endpoint is not finite");
    if (!(lo <= hi))
      throw DomainError("interval lower endpoint exceeds upper endpoint");
    // Normalize -0 so that printing and hashing are stable.
    if (lo_ == 0.0) lo_ = 0.0;
    if (hi_ == 0.0) hi_ = 0.0;
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  /// Width rounded upward.
  double width() const noexcept { return rounding::sub_up(hi_, lo_); }

  /// Center point; always lies inside the interval.
  double mid() const noexcept {
    if (lo_ == hi_) return lo_;
    const double m = lo_ + 0.5 * (hi_ - lo_);
    return std::clamp(m, lo_, hi_);
  }

  double mag() const noexcept { return std::max(std::fabs(lo_), std::fabs(hi_)); }

  bool is_degenerate() const noexcept { return lo_ == hi_; }
  bool contains(double x) const noexcept { return lo_ <= x && x <= hi_; }
  bool contains_zero() const noexcept { return lo_ <= 0.0 && 0.0 <= hi_; }
  bool subset_of(const Interval& o) const noexcept { return o.lo_ <= lo_ && hi_ <= o.hi_; }

  friend bool operator==(const Interval& a, const Interval& b) noexcept {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

inline std::ostream& operator<<(std::ostream& os, const Interval& x) {
  return os << '[' << x.lo() << ", " << x.hi() << ']';
}

inline Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

/// Intersection of two intervals known to overlap (both enclose the same quantity).
inline Interval intersect(const Interval& a, const Interval& b) {
  const double lo = std::max(a.lo(), b.lo());
  const double hi = std::min(a.hi(), b.hi());
  if (lo > hi) throw DomainError("intersection of disjoint intervals");
  return {lo, hi};
}

inline Interval operator-(const Interval& a) { return {-a.hi(), -a.lo()}; }

inline Interval operator+(const Interval& a, const Interval& b) {
  return {rounding::add_down(a.lo(), b.lo()), rounding::add_up(a.hi(), b.hi())};
}

inline Interval operator-(const Interval& a, const Interval& b) {
  return {rounding::sub_down(a.lo(), b.hi()), rounding::sub_up(a.hi(), b.lo())};
}

inline Interval operator*(const Interval& a, const Interval& b) {
  using rounding::mul_down;
  using rounding::mul_up;
  const double lo = std::min({mul_down(a.lo(), b.lo()), mul_down(a.lo(), b.hi()),
                              mul_down(a.hi(), b.lo()), mul_down(a.hi(), b.hi())});
  const double hi = std::max({mul_up(a.lo(), b.lo()), mul_up(a.lo(), b.hi()),
                              mul_up(a.hi(), b.lo()), mul_up(a.hi(), b.hi())});
  return {lo, hi};
}

inline Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero()) throw DivisionByZeroInterval();
  using rounding::div_down;
  using rounding::div_up;
  const double lo = std::min({div_down(a.lo(), b.lo()), div_down(a.lo(), b.hi()),
                              div_down(a.hi(), b.lo()), div_down(a.hi(), b.hi())});
  const double hi = std::max({div_up(a.lo(), b.lo()), div_up(a.lo(), b.hi()),
                              div_up(a.hi(), b.lo()), div_up(a.hi(), b.hi())});
  return {lo, hi};
}

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }

inline Interval abs(const Interval& a) {
  if (a.lo() >= 0.0) return a;
  if (a.hi() <= 0.0) return -a;
  return {0.0, a.mag()};
}

inline Interval sqr(const Interval& a) {
  const Interval m = abs(a);
  return {rounding::mul_down(m.lo(), m.lo()), rounding::mul_up(m.hi(), m.hi())};
}

namespace detail {

// x^k for x >= 0 by square-and-multiply with directed rounding.
inline double pow_nonneg_down(double x, int k) {
  double r = 1.0, b = x;
  for (; k > 0; k >>= 1) {
    if (k & 1) r = rounding::mul_down(r, b);
    if (k > 1) b = rounding::mul_down(b, b);
  }
  return r;
}

inline double pow_nonneg_up(double x, int k) {
  double r = 1.0, b = x;
  for (; k > 0; k >>= 1) {
    if (k & 1) r = rounding::mul_up(r, b);
    if (k > 1) b = rounding::mul_up(b, b);
  }
  return r;
}

}  // namespace detail

inline Interval pow_int(const Interval& a, int k) {
  if (k < 1) throw DomainError("integer power exponent must be >= 1");
  if (k == 1) return a;
  if (k % 2 == 0) {
    const Interval m = abs(a);
    return {detail::pow_nonneg_down(m.lo(), k), detail::pow_nonneg_up(m.hi(), k)};
  }
  // odd power is monotone increasing
  auto lower = [k](double x) {
    return x >= 0.0 ? detail::pow_nonneg_down(x, k) : -detail::pow_nonneg_up(-x, k);
  };
  auto upper = [k](double x) {
    return x >= 0.0 ? detail::pow_nonneg_up(x, k) : -detail::pow_nonneg_down(-x, k);
  };
  return {lower(a.lo()), upper(a.hi())};
}

inline Interval sqrt(const Interval& a) {
  if (a.lo() < 0.0) throw DomainError("sqrt of an interval with negative values");
  return {rounding::sqrt_down(a.lo()), rounding::sqrt_up(a.hi())};
}

inline Interval exp(const Interval& a) {
  // libm exp is accurate to within one ulp; two ulps of widening keeps a margin.
  using rounding::next_down;
  using rounding::next_up;
  const double lo = std::max(0.0, next_down(next_down(std::exp(a.lo()))));
  const double hi = next_up(next_up(std::exp(a.hi())));
  if (!std::isfinite(hi)) throw DomainError("exp overflow");
  return {lo, hi};
}

inline Interval max(const Interval& a, const Interval& b) {
  return {std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

// ---------------------------------------------------------------------------
// sin / cos from truncated Taylor series

/// Two-sided enclosure of pi: the double nearest pi lies below it.
inline constexpr double kPiLo = 3.141592653589793;
inline const double kPiHi = std::nextafter(kPiLo, rounding::kInf);
inline constexpr double kHalfPiLo = kPiLo / 2;  // exact halving
inline const double kHalfPiHi = kPiHi / 2;

inline constexpr int kDefaultTrigDegree = 4;

namespace detail {

// Partial sums of the sine (odd == true) or cosine series at x >= 0: the sum
// of the first `terms` terms and of the first `terms + 1` terms, enclosed.
//
// The sums are computed in floating point. Term t_k carries at most 3k
// roundings and recursive summation of m terms adds m more, so each sum is
// within γ_{4m}·Σ|t_k| of the exact partial sum (plus underflow slack).
struct PartialSums {
  double lower;  // <= exact sum of `terms` terms
  double upper;  // >= exact sum of `terms + 1` terms
};

inline PartialSums trig_partial_sums(double x, int terms, bool odd) {
  const double x2 = x * x;
  double t = odd ? x : 1.0;
  double s = t, mag = std::fabs(t);
  int k = odd ? 1 : 0;
  double s_terms = s, mag_terms = mag;
  for (int i = 1; i <= terms; ++i) {
    if (i == terms) {
      s_terms = s;
      mag_terms = mag;
    }
    t = -(t * x2) / static_cast<double>((k + 1) * (k + 2));
    s += t;
    mag += std::fabs(t);
    k += 2;
  }
  constexpr double u = 0x1p-53;
  auto slack = [&](double a, int m) {
    return rounding::add_up(4.2 * m * u * a, 4.0 * m * std::numeric_limits<double>::denorm_min());
  };
  return {rounding::sub_down(s_terms, slack(mag_terms, terms)), rounding::add_up(s, slack(mag, terms + 1))};
}

// For 0 <= x <= pi the series terms decrease in magnitude from the second
// term on, so an even number of terms underestimates and an odd number
// overestimates (alternating series remainder).
inline double sin_lb_nonneg(double x, int degree) { return trig_partial_sums(x, 2 * degree, true).lower; }
inline double sin_ub_nonneg(double x, int degree) { return trig_partial_sums(x, 2 * degree, true).upper; }

inline double sin_lb(double x, int degree) {
  return x >= 0.0 ? sin_lb_nonneg(x, degree) : -sin_ub_nonneg(-x, degree);
}
inline double sin_ub(double x, int degree) {
  return x >= 0.0 ? sin_ub_nonneg(x, degree) : -sin_lb_nonneg(-x, degree);
}

// cos is even, so only |x| matters.
inline double cos_lb(double x, int degree) { return trig_partial_sums(std::fabs(x), 2 * degree, false).lower; }
inline double cos_ub(double x, int degree) { return trig_partial_sums(std::fabs(x), 2 * degree, false).upper; }

inline Interval clamp_unit(double lo, double hi) {
  lo = std::clamp(lo, -1.0, 1.0);
  hi = std::clamp(hi, -1.0, 1.0);
  return {std::min(lo, hi), hi};
}

}  // namespace detail

/// Interval sine from degree-`degree` partial-series bounds.
///
/// Monotone and unimodal pieces of [-pi, pi] are handled with the series
/// bounds at the endpoints; anything else falls back to [-1, 1].
inline Interval sin(const Interval& a, int degree = kDefaultTrigDegree) {
  if (degree < 1) throw DomainError("trigonometric series degree must be >= 1");
  const double lo = a.lo(), hi = a.hi();
  using detail::sin_lb;
  using detail::sin_ub;
  if (lo >= -kHalfPiLo && hi <= kHalfPiLo)  // increasing
    return detail::clamp_unit(sin_lb(lo, degree), sin_ub(hi, degree));
  if (lo >= kHalfPiHi && hi <= kPiLo)  // decreasing
    return detail::clamp_unit(sin_lb(hi, degree), sin_ub(lo, degree));
  if (lo >= -kHalfPiLo && hi <= kPiLo)  // rises to the peak at pi/2, then falls
    return detail::clamp_unit(std::min(sin_lb(lo, degree), sin_lb(hi, degree)), 1.0);
  if (lo >= -kPiLo && hi <= kHalfPiLo)  // mirror image of the cases above
    return -sin(Interval(-hi, -lo), degree);
  return {-1.0, 1.0};
}

/// Interval cosine from degree-`degree` partial-series bounds.
inline Interval cos(const Interval& a, int degree = kDefaultTrigDegree) {
  if (degree < 1) throw DomainError("trigonometric series degree must be >= 1");
  const double lo = a.lo(), hi = a.hi();
  using detail::cos_lb;
  using detail::cos_ub;
  if (lo >= 0.0 && hi <= kPiLo)  // decreasing
    return detail::clamp_unit(cos_lb(hi, degree), cos_ub(lo, degree));
  if (lo >= -kPiLo && hi <= 0.0) return cos(-a, degree);
  if (lo >= -kPiLo && hi <= kPiLo)  // peak at 0
    return detail::clamp_unit(std::min(cos_lb(lo, degree), cos_lb(hi, degree)), 1.0);
  return {-1.0, 1.0};
}

}  // namespace nlbound
