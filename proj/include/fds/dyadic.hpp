#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fds {

/// Level index m of a dyadic scale 2^-m.
using Level = std::int64_t;

/// Position of a dyadic interval within its level. Unbounded: trees deeper
/// than 63 levels are routine (e.g. geometric sequences).
using Index = boost::multiprecision::cpp_int;

enum class NeighborMode { off, on };

/// The interval [index * 2^-level, (index + 1) * 2^-level].
struct DyadicInterval {
  Level level = 0;
  Index index = 0;

  DyadicInterval() = default;
  DyadicInterval(Level level, Index index);

  double width() const;
  double left() const;

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
  friend bool operator<(const DyadicInterval& a, const DyadicInterval& b) {
    return a.level != b.level ? a.level < b.level : a.index < b.index;
  }
};

std::string to_string(const DyadicInterval& v);

DyadicInterval parent(const DyadicInterval& v);
std::pair<DyadicInterval, DyadicInterval> children(const DyadicInterval& v);
/// Same-level intervals immediately left and right of v, omitting those outside [0, 2^level).
std::vector<DyadicInterval> neighbors(const DyadicInterval& v);

/// A scale pair (m, m') with m' > m >= 0, i.e. R = 2^-m and r = 2^-m'.
struct WindowQuery {
  Level m = 0;
  Level m_prime = 1;
  NeighborMode neighbors = NeighborMode::off;

  WindowQuery(Level m, Level m_prime, NeighborMode neighbors = NeighborMode::off);
};

/// Per-level sorted index sets describing the dyadic skeleton of a compact
/// subset of [0,1]. The constructor sorts and deduplicates but does not
/// enforce prefix closure; use validate() for that.
class DyadicTree {
 public:
  DyadicTree() = default;
  DyadicTree(Level depth, std::vector<std::vector<Index>> levels);

  static DyadicTree full(Level depth);
  static DyadicTree leftmost_path(Level depth);

  Level depth() const { return depth_; }
  bool empty() const { return levels_.empty() || levels_.front().empty(); }
  std::span<const Index> level(Level m) const;
  bool contains(const DyadicInterval& v) const;
  std::size_t node_count() const;

  friend bool operator==(const DyadicTree&, const DyadicTree&) = default;

 private:
  Level depth_ = 0;
  std::vector<std::vector<Index>> levels_;
};

struct Violation {
  enum class Kind { prefix_closure, dangling };
  Kind kind;
  DyadicInterval node;
};

std::string to_string(const Violation& v);

/// Every prefix-closure and dangling-interior-node violation in t.
std::vector<Violation> validate(const DyadicTree& t);

/// Number of level-m intervals meeting the set; a factor-2 surrogate for N(F, 2^-m).
std::size_t level_count(const DyadicTree& t, Level m);

/// Level-m' nodes descending from v (and from v's present neighbours when mode is on).
std::uint64_t local_count(const DyadicTree& t, const DyadicInterval& v, Level m_prime,
                          NeighborMode mode);

struct AlphaWitness {
  double alpha = 0.0;
  DyadicInterval node;
  std::uint64_t count = 0;
};

/// max over present level-m nodes v of log2(local_count(v, m')) / (m' - m).
/// Ties go to the smallest index.
AlphaWitness max_alpha(const DyadicTree& t, const WindowQuery& w);

/// The tree of 2^-e * F + 2^-e: level m index k becomes level m+e index 2^m + k.
DyadicTree embed(const DyadicTree& t, Level shift);

/// Per-level union. The output depth is the largest input depth; shallower
/// inputs continue below their depth along the leftmost descendant of each
/// leaf. With include_origin, index 0 is present on every level.
DyadicTree merge(std::span<const DyadicTree> trees, bool include_origin);

/// Drops every level below depth.
DyadicTree truncate(const DyadicTree& t, Level depth);

}  // namespace fds
