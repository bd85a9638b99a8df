#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fds/dyadic.hpp"
#include "fds/rational.hpp"

namespace fds {

/// A maximal stretch of consecutive levels sharing one child count.
struct Run {
  Level length = 0;
  int child_count = 1;  // 1 or 2

  friend bool operator==(const Run&, const Run&) = default;
};

/// Per-level child counts c_1..c_D of a homogeneous dyadic Moran set, stored
/// run-length encoded with the branching prefix sums S_m = #{j <= m : c_j = 2}
/// cached at run starts. Every level-m node has exactly 2^(S_m' - S_m)
/// descendants on level m'.
class BranchingSchedule {
 public:
  BranchingSchedule() = default;
  explicit BranchingSchedule(std::vector<Run> runs);

  static BranchingSchedule from_counts(std::span<const int> counts);
  static BranchingSchedule uniform(Level depth, int child_count);

  Level depth() const { return depth_; }
  std::span<const Run> runs() const { return runs_; }

  /// S_m, O(log runs).
  std::int64_t prefix_sum(Level m) const;
  /// c_j for 1 <= j <= depth.
  int child_count(Level j) const;
  /// Dense S_0..S_D.
  std::vector<std::int64_t> prefix_sums() const;

  friend bool operator==(const BranchingSchedule& a, const BranchingSchedule& b) {
    return a.runs_ == b.runs_;
  }

 private:
  std::vector<Run> runs_;
  std::vector<Level> run_start_;         // levels before the run
  std::vector<std::int64_t> run_sum_;    // S at the run start
  Level depth_ = 0;
};

struct LevelRange {
  Level lo = 0;
  Level hi = 0;
};

/// A maximising window and the node that realises it.
struct SpectrumPoint {
  double value = 0.0;
  Level m = 0;
  Level m_prime = 0;
  Index node = 0;
};

/// S_m' - S_m: log2 of the descendant count of any level-m node on level m'.
std::int64_t analytic_local_count(const BranchingSchedule& s, Level m, Level m_prime);

/// (S_m' - S_m) / (m' - m).
Rational analytic_alpha(const BranchingSchedule& s, Level m, Level m_prime);

/// max over m in range (clipped to m <= floor(theta * depth)) of analytic_alpha(m, ceil(m/theta)).
SpectrumPoint analytic_spectrum(const BranchingSchedule& s, const Rational& theta, LevelRange range);

/// max over m in range and m' in [ceil(m/theta), depth] of analytic_alpha(m, m').
SpectrumPoint analytic_upper(const BranchingSchedule& s, const Rational& theta, LevelRange range);

/// Leftmost rule: the left child is always kept, the right child iff c_j = 2.
DyadicTree materialize(const BranchingSchedule& s, std::size_t max_nodes = std::size_t{1} << 24);

/// One shifted component 2^-e * F + 2^-e, occupying [2^-e, 2^(1-e)].
struct Component {
  Level shift = 1;
  BranchingSchedule schedule;

  friend bool operator==(const Component&, const Component&) = default;
};

/// {0} (optional) union of shifted homogeneous components with strictly
/// increasing shifts >= 1. Its depth is min_i (e_i + D_i), the deepest level
/// at which every component is resolved.
class CompositeSet {
 public:
  CompositeSet() = default;
  CompositeSet(std::vector<Component> components, bool include_origin);

  std::span<const Component> components() const { return components_; }
  bool include_origin() const { return include_origin_; }
  Level depth() const { return depth_; }
  Level max_shift() const { return components_.empty() ? 0 : components_.back().shift; }

  friend bool operator==(const CompositeSet&, const CompositeSet&) = default;

 private:
  std::vector<Component> components_;
  bool include_origin_ = true;
  Level depth_ = 0;
};

/// log2(zero_term + sum_i 2^exponents_i), stable for large exponents; -inf when empty.
double log2_sum_pow2(bool zero_term, std::span<const std::int64_t> exponents);

/// log2 of the number of level-m intervals meeting the composite.
double composite_log2_level_count(const CompositeSet& cs, Level m);

/// The window exponent of the composite at (m, m'): the largest over the
/// component nodes present on level m and the node at the origin, whose
/// count sums every component with shift in (m, m'].
SpectrumPoint composite_alpha(const CompositeSet& cs, Level m, Level m_prime);

/// The Assouad-spectrum window maximum of the composite at theta.
SpectrumPoint composite_spectrum(const CompositeSet& cs, const Rational& theta, LevelRange range);

/// Materialises every component (truncated at the composite depth) and
/// merges them with the origin.
DyadicTree materialize(const CompositeSet& cs, std::size_t max_nodes = std::size_t{1} << 24);

}  // namespace fds
