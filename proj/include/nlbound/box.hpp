#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlbound/errors.hpp"
#include "nlbound/interval.hpp"

namespace nlbound {

/// Axis-aligned box: one interval per labelled variable.
class Box {
 public:
  Box() = default;

  explicit Box(std::vector<Interval> dims, std::vector<std::string> labels = {})
      : dims_(std::move(dims)), labels_(std::move(labels)) {
    if (!labels_.empty() && labels_.size() != dims_.size())
      throw DimensionMismatch("box labels do not match its dimension");
  }

  /// Degenerate box at a point.
  static Box point(std::span<const double> x, std::vector<std::string> labels = {}) {
    std::vector<Interval> dims;
    dims.reserve(x.size());
    for (double v : x) dims.emplace_back(v);
    return Box(std::move(dims), std::move(labels));
  }

  std::size_t size() const noexcept { return dims_.size(); }
  const Interval& operator[](std::size_t i) const { return dims_[i]; }
  const std::vector<Interval>& dims() const noexcept { return dims_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Largest per-dimension width (0 for a zero-dimensional box).
  double width() const noexcept {
    double w = 0.0;
    for (const auto& d : dims_) w = std::max(w, d.width());
    return w;
  }

  /// Index of the widest dimension; the first one wins ties.
  std::size_t widest_dim() const noexcept {
    std::size_t best = 0;
    double w = -1.0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (dims_[i].width() > w) {
        w = dims_[i].width();
        best = i;
      }
    }
    return best;
  }

  std::vector<double> midpoint() const {
    std::vector<double> m(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) m[i] = dims_[i].mid();
    return m;
  }

  std::vector<double> lower_corner() const {
    std::vector<double> c(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) c[i] = dims_[i].lo();
    return c;
  }

  std::vector<double> upper_corner() const {
    std::vector<double> c(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) c[i] = dims_[i].hi();
    return c;
  }

  /// Corner selected by a bit mask: bit i set picks the upper end of dimension i.
  std::vector<double> corner(std::uint64_t mask) const {
    std::vector<double> c(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i)
      c[i] = (i < 64 && ((mask >> i) & 1U)) ? dims_[i].hi() : dims_[i].lo();
    return c;
  }

  bool contains(std::span<const double> x) const {
    if (x.size() != dims_.size()) return false;
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (!dims_[i].contains(x[i])) return false;
    return true;
  }

  bool subset_of(const Box& o) const {
    if (o.size() != size()) return false;
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (!dims_[i].subset_of(o[i])) return false;
    return true;
  }

  /// True when `dim` can be cut at its midpoint into two nonempty pieces.
  bool splittable(std::size_t dim) const {
    const Interval& d = dims_.at(dim);
    const double m = d.mid();
    return d.lo() < m && m < d.hi();
  }

  /// Cut along `dim` at `at`; the two halves share the face at `at`.
  std::pair<Box, Box> split(std::size_t dim, double at) const {
    if (dim >= dims_.size()) throw DimensionMismatch("split dimension out of range");
    const Interval& d = dims_[dim];
    if (d.is_degenerate()) throw DegenerateSplit("cannot split a zero-width dimension");
    if (!(d.lo() < at && at < d.hi()))
      throw DegenerateSplit("split point is not strictly inside the interval");
    Box left = *this, right = *this;
    left.dims_[dim] = Interval(d.lo(), at);
    right.dims_[dim] = Interval(at, d.hi());
    return {std::move(left), std::move(right)};
  }

  /// Midpoint bisection of the widest dimension.
  std::pair<Box, Box> bisect() const {
    const std::size_t dim = widest_dim();
    if (dims_.empty()) throw DegenerateSplit("cannot split a zero-dimensional box");
    return split(dim, dims_[dim].mid());
  }

  /// Sub-box over the listed dimensions, in the given order.
  Box select(std::span<const std::size_t> idx) const {
    std::vector<Interval> d;
    std::vector<std::string> l;
    for (std::size_t i : idx) {
      d.push_back(dims_.at(i));
      if (!labels_.empty()) l.push_back(labels_[i]);
    }
    return Box(std::move(d), std::move(l));
  }

 private:
  std::vector<Interval> dims_;
  std::vector<std::string> labels_;
};

/// Enclosure of `f` over `b` tightened by slicing the widest dimension of
/// `b` into `segments` equal slabs and taking the hull of the slab images.
///
/// The hull is intersected with the unrefined image, so the result is never
/// wider than a single evaluation.
template <class IntervalFn>
Interval refined_eval(IntervalFn&& f, const Box& b, int segments) {
  if (segments < 1) throw DomainError("segments must be >= 1");
  const Interval whole = f(b);
  if (segments == 1 || b.size() == 0) return whole;
  const std::size_t dim = b.widest_dim();
  const Interval d = b[dim];
  if (d.is_degenerate()) return whole;

  std::vector<Interval> dims = b.dims();
  double lo_acc = rounding::kInf, hi_acc = -rounding::kInf;
  double left = d.lo();
  for (int k = 1; k <= segments; ++k) {
    double right = (k == segments) ? d.hi() : d.lo() + (d.hi() - d.lo()) * k / segments;
    right = std::clamp(right, left, d.hi());
    dims[dim] = Interval(left, right);
    const Interval part = f(Box(dims));
    lo_acc = std::min(lo_acc, part.lo());
    hi_acc = std::max(hi_acc, part.hi());
    left = right;
  }
  return intersect(Interval(lo_acc, hi_acc), whole);
}

}  // namespace nlbound
