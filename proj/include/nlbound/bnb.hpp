#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "nlbound/box.hpp"
#include "nlbound/errors.hpp"
#include "nlbound/interval.hpp"

namespace nlbound {

struct BnBConfig {
  double eps_h = 1e-4;    // objective gap tolerance
  double eps_om = 1e-7;   // boxes no wider than this are not split
  int segments = 10;      // slabs for refined evaluation
  std::uint64_t max_steps = 10'000'000;
  // Also try both corners of the incumbent after every step of the search
  // loops; only raises l. Matters when maximizers lie on the domain boundary.
  bool corner_probe = true;

  void validate() const {
    if (!(eps_h > 0.0) || !std::isfinite(eps_h)) throw DomainError("eps_h must be positive");
    if (!(eps_om > 0.0) || !std::isfinite(eps_om)) throw DomainError("eps_om must be positive");
    if (segments < 1) throw DomainError("segments must be >= 1");
    if (max_steps < 1) throw DomainError("max_steps must be >= 1");
  }
};

struct Subproblem {
  Box box;
  double hi = 0.0;  // sup of the interval objective over box
  double lo = 0.0;  // inf of the interval objective over box
  std::uint64_t seq = 0;
};

struct BnBStats {
  std::uint64_t splits = 0;
  std::uint64_t evals = 0;        // refined interval evaluations (one per subproblem)
  std::uint64_t point_evals = 0;  // candidates for the lower bound
  double wall_time_ms = 0.0;
};

struct BnBResult {
  double lower = 0.0;  // l
  double upper = 0.0;  // u
  bool eps_optimal = false;
  bool valid = true;       // false when an evaluation failed mid-run
  bool exhausted = false;  // max_steps reached
  std::string error;
  std::vector<double> argmax;  // point certifying `lower` (empty if l came from a warm start)
  std::vector<Subproblem> final_cover;
  BnBStats stats;

  double gap() const { return upper - lower; }
};

struct BnBHooks {
  /// Any value known to be <= the maximum (e.g. from sampling a verified point).
  std::optional<double> warm_start_lower;
  /// Called with (l, u) after initialization and after every change.
  std::function<void(double, double)> on_step;
  bool keep_cover = true;
};

/// Interval branch-and-bound maximizer.
///
/// `h(span<const double>)` evaluates the objective at a point and
/// `hI(const Box&)` returns an enclosure of its range over a box. Subproblem
/// bounds come from `refined_eval(hI, box, cfg.segments)`; the lower bound
/// `l` only ever takes values certified to be attained, so h* ∈ [l, u].
template <class PointFn, class IntervalFn>
class BranchAndBound {
 public:
  BranchAndBound(PointFn h, IntervalFn hI, BnBConfig cfg) : h_(std::move(h)), hI_(std::move(hI)), cfg_(cfg) {
    cfg_.validate();
  }

  /// Reset the cover to {domain} and set l from the domain midpoint.
  void init(const Box& domain, std::optional<double> warm = std::nullopt) {
    init_empty();
    if (warm) l_ = *warm;
    insert(make(domain));
    raise_lower(domain.midpoint());
    prune();
    u_ = store_[incumbent()].hi;
  }

  /// Replace the cover with explicit subproblems (bounds taken as given) and set l.
  void load(std::vector<Subproblem> cover, double l) {
    init_empty();
    l_ = l;
    for (auto& s : cover) {
      s.seq = next_seq_++;
      insert(std::move(s));
    }
    if (live_ > 0) u_ = store_[incumbent()].hi;
  }

  double lower() const noexcept { return l_; }
  const std::vector<double>& witness() const noexcept { return witness_; }
  double upper() const noexcept { return u_; }
  std::size_t live() const noexcept { return live_; }
  const BnBStats& stats() const noexcept { return stats_; }
  const BnBConfig& config() const noexcept { return cfg_; }
  const Subproblem& at(std::size_t idx) const { return store_.at(idx); }

  /// Index of the live subproblem with maximal hi (ties: wider, then older).
  std::size_t incumbent() {
    clean(by_hi_);
    return by_hi_.top();
  }

  /// Live subproblem of maximal lo, optionally restricted to splittable ones.
  std::optional<std::size_t> max_lo(bool splittable_only) {
    auto& q = splittable_only ? by_lo_split_ : by_lo_;
    clean(q);
    if (q.empty()) return std::nullopt;
    return q.top();
  }

  bool splittable(std::size_t idx) const { return splittable(store_[idx].box); }

  /// One OptBnB step on live subproblem `idx`: bisect, re-bound, raise l at the
  /// midpoint of the max-lo box, prune, and refresh u.
  void step(std::size_t idx) {
    if (idx >= store_.size() || !alive_[idx]) throw PreconditionViolated("step on a subproblem not in the cover");
    const Subproblem parent = store_[idx];
    if (!(parent.box.width() > cfg_.eps_om)) throw DegenerateSplit("subproblem is narrower than eps_om");
    auto [left, right] = parent.box.bisect();
    kill(idx);
    ++stats_.splits;
    insert(make(std::move(left), &parent));
    insert(make(std::move(right), &parent));
    if (auto best = max_lo(false)) raise_lower(store_[*best].box.midpoint());
    prune();
    u_ = store_[incumbent()].hi;
  }

  void probe_incumbent() {
    if (!cfg_.corner_probe) return;
    const double before = l_;
    const Box& b = store_[incumbent()].box;
    raise_lower(b.upper_corner());
    raise_lower(b.lower_corner());
    if (l_ > before) {
      prune();
      u_ = store_[incumbent()].hi;
    }
  }

  /// Raise l with the value at `x` if it is larger. Returns the certified value at x.
  double raise_lower(const std::vector<double>& x) {
    const double v = point_lower(x);
    if (v > l_) {
      l_ = v;
      witness_ = x;
    }
    return v;
  }

  /// Drop every subproblem whose hi is below l.
  void prune() {
    for (;;) {
      clean(by_hi_min_);
      if (by_hi_min_.empty() || live_ <= 1) return;
      const std::size_t i = by_hi_min_.top();
      if (!(store_[i].hi < l_)) return;
      kill(i);
    }
  }

  std::vector<Subproblem> cover() const {
    std::vector<Subproblem> out;
    for (std::size_t i = 0; i < store_.size(); ++i)
      if (alive_[i]) out.push_back(store_[i]);
    return out;
  }

  std::vector<std::size_t> live_by_hi_desc() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < store_.size(); ++i)
      if (alive_[i]) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), HiOrder{&store_});
    std::reverse(idx.begin(), idx.end());
    return idx;
  }

  /// Full search: loop 1 on the max-hi box, loop 2 on max-lo splittable boxes,
  /// then corner evaluations in descending-hi order.
  BnBResult run(const Box& domain, const BnBHooks& hooks = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    BnBResult res;
    auto report = [&] {
      if (hooks.on_step) hooks.on_step(l_, u_);
    };
    try {
      init(domain, hooks.warm_start_lower);
      report();
      std::uint64_t steps = 0;

      while (u_ - l_ > cfg_.eps_h) {
        const std::size_t s = incumbent();
        if (!splittable(s)) break;
        if (steps++ >= cfg_.max_steps) {
          res.exhausted = true;
          break;
        }
        step(s);
        probe_incumbent();
        report();
      }

      while (!res.exhausted && u_ - l_ > cfg_.eps_h) {
        const auto s = max_lo(true);
        if (!s) break;
        if (steps++ >= cfg_.max_steps) {
          res.exhausted = true;
          break;
        }
        step(*s);
        probe_incumbent();
        report();
      }

      if (u_ - l_ > cfg_.eps_h) {
        for (std::size_t i : live_by_hi_desc()) {
          if (!alive_[i]) continue;
          const double before = l_;
          raise_lower(store_[i].box.lower_corner());
          raise_lower(store_[i].box.upper_corner());
          if (l_ > before) {
            prune();
            u_ = store_[incumbent()].hi;
            report();
          }
          if (u_ - l_ <= cfg_.eps_h) break;
        }
      }
    } catch (const EvaluationError& e) {
      res.valid = false;
      res.error = e.what();
    }
    res.lower = l_;
    res.upper = u_;
    res.argmax = witness_;
    res.eps_optimal = res.valid && (u_ - l_ <= cfg_.eps_h);
    if (hooks.keep_cover) res.final_cover = cover();
    stats_.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    res.stats = stats_;
    return res;
  }

 private:
  struct HiOrder {  // "a ranks below b" for a max-heap on hi
    const std::vector<Subproblem>* s;
    bool operator()(std::size_t a, std::size_t b) const {
      const auto &x = (*s)[a], &y = (*s)[b];
      if (x.hi != y.hi) return x.hi < y.hi;
      const double wx = x.box.width(), wy = y.box.width();
      if (wx != wy) return wx < wy;
      return x.seq > y.seq;
    }
  };
  struct LoOrder {
    const std::vector<Subproblem>* s;
    bool operator()(std::size_t a, std::size_t b) const {
      const auto &x = (*s)[a], &y = (*s)[b];
      if (x.lo != y.lo) return x.lo < y.lo;
      const double wx = x.box.width(), wy = y.box.width();
      if (wx != wy) return wx < wy;
      return x.seq > y.seq;
    }
  };
  struct HiMinOrder {
    const std::vector<Subproblem>* s;
    bool operator()(std::size_t a, std::size_t b) const { return (*s)[a].hi > (*s)[b].hi; }
  };

  void init_empty() {
    store_.clear();
    alive_.clear();
    by_hi_ = Heap<HiOrder>(HiOrder{&store_});
    by_lo_ = Heap<LoOrder>(LoOrder{&store_});
    by_lo_split_ = Heap<LoOrder>(LoOrder{&store_});
    by_hi_min_ = Heap<HiMinOrder>(HiMinOrder{&store_});
    live_ = 0;
    witness_.clear();
    l_ = -rounding::kInf;
    u_ = rounding::kInf;
  }

  template <class Cmp>
  using Heap = std::priority_queue<std::size_t, std::vector<std::size_t>, Cmp>;

  bool splittable(const Box& b) const {
    return b.size() > 0 && b.width() > cfg_.eps_om && b.splittable(b.widest_dim());
  }

  Subproblem make(Box b, const Subproblem* parent = nullptr) {
    Interval r;
    try {
      r = refined_eval(hI_, b, cfg_.segments);
    } catch (const Error& e) {
      throw EvaluationError(std::string("objective evaluation failed: ") + e.what());
    }
    ++stats_.evals;
    double lo = r.lo(), hi = r.hi();
    if (parent != nullptr) {
      // The parent's enclosure is also valid on the child; keeping the tighter
      // of the two makes u non-increasing.
      if (parent->hi < hi && parent->hi >= lo) hi = parent->hi;
      if (parent->lo > lo && parent->lo <= hi) lo = parent->lo;
    }
    return Subproblem{std::move(b), hi, lo, next_seq_++};
  }

  void insert(Subproblem s) {
    const std::size_t idx = store_.size();
    const bool split_ok = splittable(s.box);
    store_.push_back(std::move(s));
    alive_.push_back(true);
    ++live_;
    by_hi_.push(idx);
    by_lo_.push(idx);
    by_hi_min_.push(idx);
    if (split_ok) by_lo_split_.push(idx);
  }

  void kill(std::size_t idx) {
    if (alive_[idx]) {
      alive_[idx] = false;
      --live_;
    }
  }

  template <class Q>
  void clean(Q& q) {
    while (!q.empty() && !alive_[q.top()]) q.pop();
  }

  // Certified lower bound on h(x): the low end of the enclosure at the point,
  // also capped by the floating-point value so l never exceeds it.
  double point_lower(const std::vector<double>& x) {
    ++stats_.point_evals;
    double v;
    try {
      v = hI_(Box::point(x)).lo();
    } catch (const Error&) {
      return -rounding::kInf;
    }
    const double p = h_(std::span<const double>(x));
    if (std::isfinite(p) && p < v) v = p;
    return v;
  }

  PointFn h_;
  IntervalFn hI_;
  BnBConfig cfg_;
  std::vector<Subproblem> store_;
  std::vector<bool> alive_;
  std::size_t live_ = 0;
  std::uint64_t next_seq_ = 0;
  Heap<HiOrder> by_hi_{HiOrder{&store_}};
  Heap<LoOrder> by_lo_{LoOrder{&store_}};
  Heap<LoOrder> by_lo_split_{LoOrder{&store_}};
  Heap<HiMinOrder> by_hi_min_{HiMinOrder{&store_}};
  double l_ = -rounding::kInf;
  double u_ = rounding::kInf;
  std::vector<double> witness_;
  BnBStats stats_;
};

template <class PointFn, class IntervalFn>
BnBResult maximize(PointFn&& h, IntervalFn&& hI, const Box& domain, const BnBConfig& cfg,
                   const BnBHooks& hooks = {}) {
  BranchAndBound<std::decay_t<PointFn>, std::decay_t<IntervalFn>> engine(std::forward<PointFn>(h),
                                                                         std::forward<IntervalFn>(hI), cfg);
  return engine.run(domain, hooks);
}

/// min h = -max(-h); bounds are negated and swapped.
template <class PointFn, class IntervalFn>
BnBResult minimize(PointFn&& h, IntervalFn&& hI, const Box& domain, const BnBConfig& cfg,
                   const BnBHooks& hooks = {}) {
  BnBHooks neg = hooks;
  if (hooks.warm_start_lower) neg.warm_start_lower.reset();
  if (hooks.on_step) neg.on_step = [&hooks](double l, double u) { hooks.on_step(-u, -l); };
  auto nh = [&h](std::span<const double> x) { return -h(x); };
  auto nhI = [&hI](const Box& b) { return -hI(b); };
  BnBResult r = maximize(nh, nhI, domain, cfg, neg);
  std::swap(r.lower, r.upper);
  r.lower = -r.lower;
  r.upper = -r.upper;
  for (auto& s : r.final_cover) {
    std::swap(s.lo, s.hi);
    s.lo = -s.lo;
    s.hi = -s.hi;
  }
  return r;
}

/// Outcome of a single OptBnB step applied to an explicit cover.
struct StepResult {
  std::vector<Subproblem> cover;
  Subproblem incumbent;
  double lower;
  double upper;
};

/// Functional form of one OptBnB step: `cover[chosen]` is bisected, l raised,
/// the cover pruned. Bounds of the given subproblems are taken as-is.
template <class PointFn, class IntervalFn>
StepResult opt_bnb_step(std::vector<Subproblem> cover, std::size_t chosen, double l, PointFn h, IntervalFn hI,
                        const BnBConfig& cfg) {
  if (chosen >= cover.size()) throw PreconditionViolated("chosen subproblem is not in the cover");
  BranchAndBound<PointFn, IntervalFn> engine(std::move(h), std::move(hI), cfg);
  engine.load(std::move(cover), l);
  engine.step(chosen);
  const std::size_t inc = engine.incumbent();
  return StepResult{engine.cover(), engine.at(inc), engine.lower(), engine.upper()};
}

}  // namespace nlbound
