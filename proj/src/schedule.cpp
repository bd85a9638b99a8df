#include "fds/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fds/errors.hpp"
#include "fds/window_search.hpp"

namespace fds {

BranchingSchedule::BranchingSchedule(std::vector<Run> runs) {
  for (const Run& r : runs) {
    if (r.child_count != 1 && r.child_count != 2) {
      throw DomainError("child count must be 1 or 2, got " + std::to_string(r.child_count));
    }
    if (r.length <= 0) throw DomainError("run lengths must be positive");
    if (!runs_.empty() && runs_.back().child_count == r.child_count) {
      runs_.back().length += r.length;
    } else {
      runs_.push_back(r);
    }
  }
  run_start_.reserve(runs_.size());
  run_sum_.reserve(runs_.size());
  std::int64_t sum = 0;
  for (const Run& r : runs_) {
    run_start_.push_back(depth_);
    run_sum_.push_back(sum);
    depth_ += r.length;
    sum += r.child_count == 2 ? r.length : 0;
  }
}

BranchingSchedule BranchingSchedule::from_counts(std::span<const int> counts) {
  std::vector<Run> runs;
  for (int c : counts) {
    if (!runs.empty() && runs.back().child_count == c) {
      ++runs.back().length;
    } else {
      runs.push_back({1, c});
    }
  }
  return BranchingSchedule(std::move(runs));
}

BranchingSchedule BranchingSchedule::uniform(Level depth, int child_count) {
  if (depth < 0) throw DomainError("negative depth");
  if (depth == 0) return BranchingSchedule();
  return BranchingSchedule({{depth, child_count}});
}

std::int64_t BranchingSchedule::prefix_sum(Level m) const {
  if (m < 0 || m > depth_) {
    throw DomainError("level " + std::to_string(m) + " outside [0, " + std::to_string(depth_) + "]");
  }
  if (m == 0) return 0;
  auto it = std::upper_bound(run_start_.begin(), run_start_.end(), m - 1);
  auto r = static_cast<std::size_t>(it - run_start_.begin()) - 1;
  return run_sum_[r] + (runs_[r].child_count == 2 ? m - run_start_[r] : 0);
}

int BranchingSchedule::child_count(Level j) const {
  if (j < 1 || j > depth_) throw DomainError("schedule level " + std::to_string(j) + " out of range");
  return static_cast<int>(prefix_sum(j) - prefix_sum(j - 1)) + 1;
}

std::vector<std::int64_t> BranchingSchedule::prefix_sums() const {
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(depth_) + 1);
  out.push_back(0);
  std::int64_t sum = 0;
  for (const Run& r : runs_) {
    for (Level k = 0; k < r.length; ++k) {
      sum += r.child_count - 1;
      out.push_back(sum);
    }
  }
  return out;
}

namespace {

void require_window(Level depth, Level m, Level m_prime) {
  if (m < 0 || m_prime <= m || m_prime > depth) {
    throw DomainError("window (" + std::to_string(m) + ", " + std::to_string(m_prime) +
                      ") outside 0 <= m < m' <= " + std::to_string(depth));
  }
}

void require_range(Level depth, const Rational& theta, LevelRange range) {
  if (theta <= Rational(0) || theta >= Rational(1)) throw DomainError("theta must lie in (0,1)");
  if (range.lo < 1 || range.hi < range.lo || range.hi > depth) {
    throw DomainError("level range [" + std::to_string(range.lo) + ", " + std::to_string(range.hi) +
                      "] not within [1, " + std::to_string(depth) + "]");
  }
  if (max_coarse_level(depth, theta) < range.lo) {
    throw DomainError("no window (m, ceil(m/theta)) with m >= " + std::to_string(range.lo) +
                      " fits depth " + std::to_string(depth) + " at theta = " + theta.str());
  }
}

SpectrumPoint to_point(const SlopeWindow& w) { return {w.value(), w.m, w.m_prime, Index(0)}; }

}  // namespace

std::int64_t analytic_local_count(const BranchingSchedule& s, Level m, Level m_prime) {
  require_window(s.depth(), m, m_prime);
  return s.prefix_sum(m_prime) - s.prefix_sum(m);
}

Rational analytic_alpha(const BranchingSchedule& s, Level m, Level m_prime) {
  return Rational(analytic_local_count(s, m, m_prime), m_prime - m);
}

SpectrumPoint analytic_spectrum(const BranchingSchedule& s, const Rational& theta, LevelRange range) {
  require_range(s.depth(), theta, range);
  auto prefix = s.prefix_sums();
  auto w = best_spectrum_window({prefix, 0, s.depth()}, theta, range.lo, range.hi);
  return to_point(*w);
}

SpectrumPoint analytic_upper(const BranchingSchedule& s, const Rational& theta, LevelRange range) {
  require_range(s.depth(), theta, range);
  auto prefix = s.prefix_sums();
  auto w = best_upper_window({prefix, 0, s.depth()}, theta, range.lo, range.hi);
  return to_point(*w);
}

DyadicTree materialize(const BranchingSchedule& s, std::size_t max_nodes) {
  std::size_t total = 0;
  for (Level m = 0; m <= s.depth(); ++m) {
    std::int64_t e = s.prefix_sum(m);
    if (e >= 62 || (total += std::size_t{1} << e) > max_nodes) {
      throw ResourceError("materializing the schedule needs more than " + std::to_string(max_nodes) +
                          " nodes");
    }
  }
  std::vector<std::vector<Index>> levels(static_cast<std::size_t>(s.depth()) + 1);
  levels[0].push_back(Index(0));
  for (Level j = 1; j <= s.depth(); ++j) {
    const bool both = s.child_count(j) == 2;
    const auto& above = levels[static_cast<std::size_t>(j - 1)];
    auto& here = levels[static_cast<std::size_t>(j)];
    here.reserve(above.size() * (both ? 2 : 1));
    for (const Index& k : above) {
      Index left = k << 1;
      here.push_back(left);
      if (both) here.push_back(left + 1);
    }
  }
  return DyadicTree(s.depth(), std::move(levels));
}

CompositeSet::CompositeSet(std::vector<Component> components, bool include_origin)
    : components_(std::move(components)), include_origin_(include_origin) {
  Level previous = 0;
  depth_ = components_.empty() ? 0 : std::numeric_limits<Level>::max();
  for (const Component& c : components_) {
    if (c.shift < previous + 1) {
      throw DomainError("component shifts must be strictly increasing and >= 1");
    }
    previous = c.shift;
    depth_ = std::min(depth_, c.shift + c.schedule.depth());
  }
}

double log2_sum_pow2(bool zero_term, std::span<const std::int64_t> exponents) {
  if (!zero_term && exponents.empty()) return -std::numeric_limits<double>::infinity();
  std::int64_t top = zero_term ? 0 : exponents.front();
  for (auto a : exponents) top = std::max(top, a);
  double sum = zero_term ? std::ldexp(1.0, static_cast<int>(-std::min<std::int64_t>(top, 2000))) : 0.0;
  for (auto a : exponents) sum += std::ldexp(1.0, static_cast<int>(std::max<std::int64_t>(a - top, -2000)));
  return static_cast<double>(top) + std::log2(sum);
}

namespace {

bool zero_present(const CompositeSet& cs, Level m) {
  return cs.include_origin() || cs.max_shift() > m;
}

void require_composite_level(const CompositeSet& cs, Level m) {
  if (m < 0 || m > cs.depth()) {
    throw DomainError("level " + std::to_string(m) + " outside [0, " + std::to_string(cs.depth()) + "]");
  }
}

}  // namespace

double composite_log2_level_count(const CompositeSet& cs, Level m) {
  require_composite_level(cs, m);
  std::vector<std::int64_t> exponents;
  for (const Component& c : cs.components()) {
    if (c.shift <= m) exponents.push_back(c.schedule.prefix_sum(m - c.shift));
  }
  return log2_sum_pow2(zero_present(cs, m), exponents);
}

SpectrumPoint composite_alpha(const CompositeSet& cs, Level m, Level m_prime) {
  require_window(cs.depth(), m, m_prime);
  const double run = static_cast<double>(m_prime - m);
  SpectrumPoint best{-1.0, m, m_prime, Index(0)};
  if (zero_present(cs, m)) {
    std::vector<std::int64_t> exponents;
    for (const Component& c : cs.components()) {
      if (c.shift > m && c.shift <= m_prime) exponents.push_back(c.schedule.prefix_sum(m_prime - c.shift));
    }
    best.value = log2_sum_pow2(zero_present(cs, m_prime), exponents) / run;
  }
  // Later components sit closer to the origin, so their leftmost nodes have smaller indices.
  for (auto it = cs.components().rbegin(); it != cs.components().rend(); ++it) {
    if (it->shift > m) continue;
    const auto& sched = it->schedule;
    double value = static_cast<double>(sched.prefix_sum(m_prime - it->shift) - sched.prefix_sum(m - it->shift)) / run;
    if (value > best.value) best = {value, m, m_prime, Index(1) << static_cast<unsigned>(m - it->shift)};
  }
  return best;
}

SpectrumPoint composite_spectrum(const CompositeSet& cs, const Rational& theta, LevelRange range) {
  if (cs.components().empty()) throw DomainError("composite has no components");
  require_range(cs.depth(), theta, range);
  std::optional<SpectrumPoint> best;
  const Level hi = std::min(range.hi, max_coarse_level(cs.depth(), theta));
  for (Level m = range.lo; m <= hi; ++m) {
    auto p = composite_alpha(cs, m, fine_level(m, theta));
    if (!best || p.value > best->value) best = p;
  }
  return *best;
}

DyadicTree materialize(const CompositeSet& cs, std::size_t max_nodes) {
  std::vector<DyadicTree> parts;
  std::size_t budget = max_nodes;
  for (const Component& c : cs.components()) {
    std::vector<Run> runs;
    Level remaining = cs.depth() - c.shift;
    for (const Run& r : c.schedule.runs()) {
      if (remaining <= 0) break;
      runs.push_back({std::min(r.length, remaining), r.child_count});
      remaining -= runs.back().length;
    }
    auto tree = materialize(BranchingSchedule(std::move(runs)), budget);
    budget -= std::min(budget, tree.node_count());
    parts.push_back(embed(tree, c.shift));
  }
  return merge(parts, cs.include_origin());
}

}  // namespace fds
