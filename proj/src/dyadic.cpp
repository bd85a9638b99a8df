#include "fds/dyadic.hpp"

#include <algorithm>
#include <cmath>

#include "fds/errors.hpp"

namespace fds {
namespace {

Index pow2(Level e) { return Index(1) << static_cast<unsigned>(e); }

void require_level(Level m) {
  if (m < 0) throw DomainError("negative level " + std::to_string(m));
}

std::size_t count_in_range(std::span<const Index> sorted, const Index& lo, const Index& hi) {
  auto first = std::lower_bound(sorted.begin(), sorted.end(), lo);
  auto last = std::lower_bound(first, sorted.end(), hi);
  return static_cast<std::size_t>(last - first);
}

}  // namespace

DyadicInterval::DyadicInterval(Level level_, Index index_) : level(level_), index(std::move(index_)) {
  require_level(level);
  if (index < 0 || index >= pow2(level)) {
    throw DomainError("index " + index.str() + " outside [0, 2^" + std::to_string(level) + ")");
  }
}

double DyadicInterval::width() const { return std::ldexp(1.0, static_cast<int>(-level)); }

double DyadicInterval::left() const {
  return std::ldexp(index.convert_to<double>(), static_cast<int>(-level));
}

std::string to_string(const DyadicInterval& v) {
  return "(" + std::to_string(v.level) + "," + v.index.str() + ")";
}

DyadicInterval parent(const DyadicInterval& v) {
  if (v.level == 0) throw DomainError("the root interval has no parent");
  return DyadicInterval(v.level - 1, v.index >> 1);
}

std::pair<DyadicInterval, DyadicInterval> children(const DyadicInterval& v) {
  Index left = v.index << 1;
  return {DyadicInterval(v.level + 1, left), DyadicInterval(v.level + 1, left + 1)};
}

std::vector<DyadicInterval> neighbors(const DyadicInterval& v) {
  std::vector<DyadicInterval> out;
  if (v.index > 0) out.emplace_back(v.level, v.index - 1);
  if (v.index + 1 < pow2(v.level)) out.emplace_back(v.level, v.index + 1);
  return out;
}

WindowQuery::WindowQuery(Level m_, Level m_prime_, NeighborMode neighbors_)
    : m(m_), m_prime(m_prime_), neighbors(neighbors_) {
  if (m < 0 || m_prime <= m) {
    throw DomainError("window needs m' > m >= 0, got (" + std::to_string(m) + ", " +
                      std::to_string(m_prime) + ")");
  }
}

DyadicTree::DyadicTree(Level depth, std::vector<std::vector<Index>> levels)
    : depth_(depth), levels_(std::move(levels)) {
  require_level(depth);
  if (levels_.size() > static_cast<std::size_t>(depth) + 1) {
    throw DomainError("tree has more levels than depth + 1");
  }
  levels_.resize(static_cast<std::size_t>(depth) + 1);
  for (std::size_t m = 0; m < levels_.size(); ++m) {
    auto& idx = levels_[m];
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    if (!idx.empty() && (idx.front() < 0 || idx.back() >= pow2(static_cast<Level>(m)))) {
      throw DomainError("index out of range on level " + std::to_string(m));
    }
  }
}

DyadicTree DyadicTree::full(Level depth) {
  require_level(depth);
  if (depth > 24) throw ResourceError("full tree deeper than 24 levels");
  std::vector<std::vector<Index>> levels(static_cast<std::size_t>(depth) + 1);
  for (Level m = 0; m <= depth; ++m) {
    auto& idx = levels[static_cast<std::size_t>(m)];
    idx.reserve(std::size_t{1} << m);
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << m); ++k) idx.emplace_back(k);
  }
  return DyadicTree(depth, std::move(levels));
}

DyadicTree DyadicTree::leftmost_path(Level depth) {
  require_level(depth);
  return DyadicTree(depth, std::vector<std::vector<Index>>(static_cast<std::size_t>(depth) + 1,
                                                           std::vector<Index>{Index(0)}));
}

std::span<const Index> DyadicTree::level(Level m) const {
  if (m < 0 || m > depth_ || levels_.empty()) {
    throw DomainError("level " + std::to_string(m) + " outside [0, " + std::to_string(depth_) + "]");
  }
  return levels_[static_cast<std::size_t>(m)];
}

bool DyadicTree::contains(const DyadicInterval& v) const {
  if (v.level < 0 || v.level > depth_ || levels_.empty()) return false;
  const auto& idx = levels_[static_cast<std::size_t>(v.level)];
  return std::binary_search(idx.begin(), idx.end(), v.index);
}

std::size_t DyadicTree::node_count() const {
  std::size_t n = 0;
  for (const auto& l : levels_) n += l.size();
  return n;
}

std::string to_string(const Violation& v) {
  return std::string(v.kind == Violation::Kind::prefix_closure ? "prefix-closure" : "dangling") +
         " at " + to_string(v.node);
}

std::vector<Violation> validate(const DyadicTree& t) {
  std::vector<Violation> out;
  for (Level m = 1; m <= t.depth(); ++m) {
    auto upper = t.level(m - 1);
    for (const Index& k : t.level(m)) {
      if (!std::binary_search(upper.begin(), upper.end(), Index(k >> 1))) {
        out.push_back({Violation::Kind::prefix_closure, DyadicInterval(m, k)});
      }
    }
  }
  for (Level m = 0; m < t.depth(); ++m) {
    auto lower = t.level(m + 1);
    for (const Index& k : t.level(m)) {
      Index first = k << 1;
      if (count_in_range(lower, first, first + 2) == 0) {
        out.push_back({Violation::Kind::dangling, DyadicInterval(m, k)});
      }
    }
  }
  return out;
}

std::size_t level_count(const DyadicTree& t, Level m) { return t.level(m).size(); }

std::uint64_t local_count(const DyadicTree& t, const DyadicInterval& v, Level m_prime,
                          NeighborMode mode) {
  if (!t.contains(v)) throw DomainError("interval " + to_string(v) + " is not in the tree");
  if (m_prime <= v.level || m_prime > t.depth()) {
    throw DomainError("fine level " + std::to_string(m_prime) + " outside (" + std::to_string(v.level) +
                      ", " + std::to_string(t.depth()) + "]");
  }
  auto fine = t.level(m_prime);
  const auto shift = static_cast<unsigned>(m_prime - v.level);
  auto descendants = [&](const Index& k) {
    return static_cast<std::uint64_t>(count_in_range(fine, k << shift, (k + 1) << shift));
  };
  std::uint64_t total = descendants(v.index);
  if (mode == NeighborMode::on) {
    for (const auto& n : neighbors(v)) {
      if (t.contains(n)) total += descendants(n.index);
    }
  }
  return total;
}

AlphaWitness max_alpha(const DyadicTree& t, const WindowQuery& w) {
  if (w.m_prime > t.depth()) throw DomainError("window reaches below the tree depth");
  auto coarse = t.level(w.m);
  if (coarse.empty()) throw DomainError("level " + std::to_string(w.m) + " is empty");
  AlphaWitness best;
  bool first = true;
  for (const Index& k : coarse) {
    DyadicInterval v(w.m, k);
    std::uint64_t c = local_count(t, v, w.m_prime, w.neighbors);
    if (first || c > best.count) {
      best.count = c;
      best.node = v;
      first = false;
    }
  }
  best.alpha = best.count == 0 ? 0.0 : std::log2(static_cast<double>(best.count)) /
                                           static_cast<double>(w.m_prime - w.m);
  return best;
}

DyadicTree embed(const DyadicTree& t, Level shift) {
  require_level(shift);
  const Level depth = t.depth() + shift;
  std::vector<std::vector<Index>> levels(static_cast<std::size_t>(depth) + 1);
  if (t.empty()) return DyadicTree(depth, std::move(levels));
  for (Level m = 0; m <= t.depth(); ++m) {
    auto& out = levels[static_cast<std::size_t>(m + shift)];
    const Index offset = pow2(m);
    for (const Index& k : t.level(m)) out.push_back(offset + k);
  }
  // Above the image everything collapses onto the ancestors of (shift, 1).
  for (Level m = 0; m < shift; ++m) levels[static_cast<std::size_t>(m)].push_back(Index(0));
  return DyadicTree(depth, std::move(levels));
}

DyadicTree merge(std::span<const DyadicTree> trees, bool include_origin) {
  Level depth = 0;
  for (const auto& t : trees) depth = std::max(depth, t.depth());
  std::vector<std::vector<Index>> levels(static_cast<std::size_t>(depth) + 1);
  for (const auto& t : trees) {
    if (t.empty()) continue;
    for (Level m = 0; m <= t.depth(); ++m) {
      auto src = t.level(m);
      auto& dst = levels[static_cast<std::size_t>(m)];
      dst.insert(dst.end(), src.begin(), src.end());
    }
    auto leaves = t.level(t.depth());
    for (Level m = t.depth() + 1; m <= depth; ++m) {
      const auto shift = static_cast<unsigned>(m - t.depth());
      auto& dst = levels[static_cast<std::size_t>(m)];
      for (const Index& k : leaves) dst.push_back(k << shift);
    }
  }
  if (include_origin) {
    for (auto& l : levels) l.push_back(Index(0));
  }
  return DyadicTree(depth, std::move(levels));
}

DyadicTree truncate(const DyadicTree& t, Level depth) {
  require_level(depth);
  if (depth > t.depth()) throw DomainError("cannot truncate below the tree depth");
  std::vector<std::vector<Index>> levels;
  levels.reserve(static_cast<std::size_t>(depth) + 1);
  for (Level m = 0; m <= depth; ++m) {
    auto l = t.level(m);
    levels.emplace_back(l.begin(), l.end());
  }
  return DyadicTree(depth, std::move(levels));
}

}  // namespace fds
