#include "window_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <tuple>

#include "fds/errors.hpp"
#include "fds/window_search.hpp"

namespace fds {

bool preferred(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  return std::tie(a.m, a.m_prime, a.node) < std::tie(b.m, b.m_prime, b.node);
}

namespace {

using Model = SpectrumEstimator::Model;

void keep_best(std::optional<Candidate>& best, Candidate c) {
  if (!best || preferred(c, *best)) best = std::move(c);
}

Candidate require(std::optional<Candidate> c, const Rational& theta) {
  if (!c) throw DomainError("no window fits the level range at theta = " + theta.str());
  return std::move(*c);
}

void require_window(Level depth, Level m, Level m_prime) {
  if (m < 0 || m_prime <= m || m_prime > depth) {
    throw DomainError("window (" + std::to_string(m) + ", " + std::to_string(m_prime) +
                      ") outside 0 <= m < m' <= " + std::to_string(depth));
  }
}

Candidate from_slope(const SlopeWindow& w, Index node) { return {w.value(), w.m, w.m_prime, std::move(node)}; }

// ---------------------------------------------------------------------------
// Materialized trees: every (m, m') maximum is tabulated once by pushing the
// level-m' counts up the tree, level by level.

class TreeModel final : public Model {
 public:
  TreeModel(const DyadicTree& tree, NeighborMode mode) : tree_(tree) {
    depth_ = tree.depth();
    if (tree.empty()) throw DomainError("cannot estimate dimensions of an empty tree");
    if (depth_ < 1) throw DomainError("tree depth must be at least 1");
    if (depth_ > kMaxTableDepth) {
      throw ResourceError("tree depth " + std::to_string(depth_) + " exceeds the window table limit " +
                          std::to_string(kMaxTableDepth));
    }
    const auto D = static_cast<std::size_t>(depth_);
    double work = 0.0;
    for (std::size_t m = 0; m <= D; ++m) work += static_cast<double>(tree.level(static_cast<Level>(m)).size()) * static_cast<double>(D - m + 1);
    if (work > 4e9) throw ResourceError("tree too large for the window table");

    log2_count_.resize(D + 1);
    for (std::size_t m = 0; m <= D; ++m) {
      log2_count_[m] = std::log2(static_cast<double>(tree.level(static_cast<Level>(m)).size()));
    }

    // parent positions and same-level adjacency
    std::vector<std::vector<std::uint32_t>> parent(D + 1);
    std::vector<std::vector<char>> left_adjacent(D + 1);
    for (std::size_t l = 0; l <= D; ++l) {
      auto here = tree.level(static_cast<Level>(l));
      auto& adj = left_adjacent[l];
      adj.assign(here.size(), 0);
      for (std::size_t i = 1; i < here.size(); ++i) adj[i] = here[i - 1] + 1 == here[i];
      if (l == 0) continue;
      auto above = tree.level(static_cast<Level>(l - 1));
      auto& par = parent[l];
      par.resize(here.size());
      std::size_t j = 0;
      for (std::size_t i = 0; i < here.size(); ++i) {
        Index p = here[i] >> 1;
        while (j < above.size() && above[j] < p) ++j;
        if (j == above.size() || above[j] != p) {
          throw DomainError("tree is not prefix-closed: " + to_string(DyadicInterval(static_cast<Level>(l), here[i])) +
                            " has no parent");
        }
        par[i] = static_cast<std::uint32_t>(j);
      }
    }

    table_.resize(D);
    for (std::size_t m = 0; m < D; ++m) table_[m].resize(D - m);
    std::vector<std::uint64_t> cur;
    std::vector<std::uint64_t> up;
    for (std::size_t mp = 1; mp <= D; ++mp) {
      cur.assign(tree.level(static_cast<Level>(mp)).size(), 1);
      for (std::size_t l = mp; l >= 1; --l) {
        const std::size_t m = l - 1;
        up.assign(tree.level(static_cast<Level>(m)).size(), 0);
        const auto& par = parent[l];
        for (std::size_t i = 0; i < cur.size(); ++i) up[par[i]] += cur[i];
        const auto& adj = left_adjacent[m];
        std::uint64_t best = 0;
        std::uint32_t best_pos = 0;
        for (std::size_t i = 0; i < up.size(); ++i) {
          std::uint64_t c = up[i];
          if (mode == NeighborMode::on) {
            if (adj[i]) c += up[i - 1];
            if (i + 1 < up.size() && adj[i + 1]) c += up[i + 1];
          }
          if (c > best) {
            best = c;
            best_pos = static_cast<std::uint32_t>(i);
          }
        }
        table_[m][mp - m - 1] = {best, best_pos};
        std::swap(cur, up);
      }
    }

    // Row-wise suffix argmax over m': theta-independent, makes upper() linear in the range.
    suffix_.resize(D);
    for (std::size_t m = 0; m < D; ++m) {
      auto& row = suffix_[m];
      row.resize(D - m);
      std::size_t best = D - m - 1;
      for (std::size_t k = D - m; k-- > 0;) {
        if (value_at(m, k) >= value_at(m, best)) best = k;
        row[k] = static_cast<std::uint32_t>(best);
      }
    }
  }

  Level depth() const override { return depth_; }
  double log2_level_count(Level m) const override {
    if (m < 0 || m > depth_) throw DomainError("level " + std::to_string(m) + " outside the tree");
    return log2_count_[static_cast<std::size_t>(m)];
  }

  Candidate window(Level m, Level m_prime) const override {
    require_window(depth_, m, m_prime);
    return candidate(static_cast<std::size_t>(m), static_cast<std::size_t>(m_prime - m - 1));
  }

  Candidate spectrum(const Rational& theta, Level lo, Level hi) const override {
    std::optional<Candidate> best;
    hi = std::min(hi, max_coarse_level(depth_, theta));
    for (Level m = std::max<Level>(lo, 1); m <= hi; ++m) keep_best(best, window(m, fine_level(m, theta)));
    return require(std::move(best), theta);
  }

  Candidate upper(const Rational& theta, Level lo, Level hi) const override {
    std::optional<Candidate> best;
    hi = std::min(hi, max_coarse_level(depth_, theta));
    for (Level m = std::max<Level>(lo, 1); m <= hi; ++m) {
      const auto row = static_cast<std::size_t>(m);
      const auto k = static_cast<std::size_t>(fine_level(m, theta) - m - 1);
      keep_best(best, candidate(row, suffix_[row][k]));
    }
    return require(std::move(best), theta);
  }

  std::vector<Candidate> upper_by_ratio(std::span<const Rational> grid, Level lo, Level hi) const override {
    // Every window in the coarse range, ordered by its ratio m/m'; a theta then
    // sees exactly the prefix of windows with m/m' <= theta.
    struct Entry {
      Level m;
      Level mp;
    };
    std::vector<Entry> windows;
    lo = std::max<Level>(lo, 1);
    hi = std::min(hi, depth_ - 1);
    for (Level m = lo; m <= hi; ++m) {
      for (Level mp = m + 1; mp <= depth_; ++mp) windows.push_back({m, mp});
    }
    std::sort(windows.begin(), windows.end(), [](const Entry& a, const Entry& b) {
      __int128 lhs = static_cast<__int128>(a.m) * b.mp;
      __int128 rhs = static_cast<__int128>(b.m) * a.mp;
      return lhs != rhs ? lhs < rhs : std::tie(a.m, a.mp) < std::tie(b.m, b.mp);
    });
    std::vector<std::size_t> prefix_best(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
      prefix_best[i] = i;
      if (i > 0 && !better_entry(windows[i], windows[prefix_best[i - 1]])) prefix_best[i] = prefix_best[i - 1];
    }
    std::vector<Candidate> out;
    out.reserve(grid.size());
    for (const Rational& theta : grid) {
      // first window with m/m' > theta
      auto it = std::partition_point(windows.begin(), windows.end(), [&](const Entry& e) {
        return static_cast<__int128>(e.m) * theta.den() <= static_cast<__int128>(theta.num()) * e.mp;
      });
      if (it == windows.begin()) throw DomainError("no window fits the level range at theta = " + theta.str());
      const Entry& e = windows[prefix_best[static_cast<std::size_t>(it - windows.begin()) - 1]];
      out.push_back(window(e.m, e.mp));
    }
    return out;
  }

 private:
  struct Cell {
    std::uint64_t count = 0;
    std::uint32_t pos = 0;
  };

  static double value_of(std::uint64_t count, std::size_t run) {
    return count <= 1 ? 0.0 : std::log2(static_cast<double>(count)) / static_cast<double>(run);
  }
  double value_at(std::size_t m, std::size_t k) const { return value_of(table_[m][k].count, k + 1); }

  Candidate candidate(std::size_t m, std::size_t k) const {
    const Cell& c = table_[m][k];
    return {value_of(c.count, k + 1), static_cast<Level>(m), static_cast<Level>(m + k + 1),
            tree_.level(static_cast<Level>(m))[c.pos]};
  }

  template <typename E>
  bool better_entry(const E& a, const E& b) const {
    auto ca = window(a.m, a.mp);
    auto cb = window(b.m, b.mp);
    return preferred(ca, cb);
  }

  DyadicTree tree_;
  Level depth_ = 0;
  std::vector<double> log2_count_;
  std::vector<std::vector<Cell>> table_;           // table_[m][m' - m - 1]
  std::vector<std::vector<std::uint32_t>> suffix_;  // suffix_[m][k]: argmax over k' >= k
};

// ---------------------------------------------------------------------------
// Homogeneous schedules: every node of a level is alike, so windows reduce to
// slopes of the prefix-sum profile. Witness nodes are the leftmost (index 0).

class ScheduleModel final : public Model {
 public:
  explicit ScheduleModel(const BranchingSchedule& s) : prefix_(s.prefix_sums()), depth_(s.depth()) {
    if (depth_ < 1) throw DomainError("schedule depth must be at least 1");
  }

  Level depth() const override { return depth_; }
  double log2_level_count(Level m) const override {
    if (m < 0 || m > depth_) throw DomainError("level " + std::to_string(m) + " outside the schedule");
    return static_cast<double>(prefix_[static_cast<std::size_t>(m)]);
  }

  Candidate window(Level m, Level m_prime) const override {
    require_window(depth_, m, m_prime);
    return from_slope({profile().at(m_prime) - profile().at(m), m, m_prime}, Index(0));
  }

  Candidate spectrum(const Rational& theta, Level lo, Level hi) const override {
    auto w = best_spectrum_window(profile(), theta, lo, hi);
    if (!w) throw DomainError("no window fits the level range at theta = " + theta.str());
    return from_slope(*w, Index(0));
  }

  Candidate upper(const Rational& theta, Level lo, Level hi) const override {
    auto w = best_upper_window(profile(), theta, lo, hi);
    if (!w) throw DomainError("no window fits the level range at theta = " + theta.str());
    return from_slope(*w, Index(0));
  }

  std::vector<Candidate> upper_by_ratio(std::span<const Rational> grid, Level lo, Level hi) const override {
    std::vector<Candidate> out;
    for (const Rational& theta : grid) {
      auto w = best_upper_window_by_fine(profile(), theta, lo, hi);
      if (!w) throw DomainError("no window fits the level range at theta = " + theta.str());
      out.push_back(from_slope(*w, Index(0)));
    }
    return out;
  }

 private:
  Profile profile() const { return {prefix_, 0, depth_}; }

  std::vector<std::int64_t> prefix_;
  Level depth_;
};

// ---------------------------------------------------------------------------
// Composites: windows at a component node are slopes of that component's
// profile; windows at the node containing the origin sum every component that
// starts inside the window. The latter only matter below the largest shift.

class CompositeModel final : public Model {
 public:
  explicit CompositeModel(const CompositeSet& cs) : cs_(cs) {
    if (cs.components().empty()) throw DomainError("composite has no components");
    depth_ = cs.depth();
    if (depth_ < 1) throw DomainError("composite depth must be at least 1");
    for (const Component& c : cs.components()) {
      pieces_.push_back({c.shift, c.schedule.prefix_sums()});
    }
  }

  Level depth() const override { return depth_; }
  double log2_level_count(Level m) const override { return composite_log2_level_count(cs_, m); }

  Candidate window(Level m, Level m_prime) const override {
    auto p = composite_alpha(cs_, m, m_prime);
    return {p.value, p.m, p.m_prime, p.node};
  }

  Candidate spectrum(const Rational& theta, Level lo, Level hi) const override {
    std::optional<Candidate> best;
    hi = std::min(hi, max_coarse_level(depth_, theta));
    for (Level m = std::max<Level>(lo, 1); m <= hi; ++m) keep_best(best, window(m, fine_level(m, theta)));
    return require(std::move(best), theta);
  }

  Candidate upper(const Rational& theta, Level lo, Level hi) const override {
    std::optional<Candidate> best;
    lo = std::max<Level>(lo, 1);
    for (const Piece& piece : pieces_) {
      if (auto w = best_upper_window(profile(piece), theta, lo, hi)) keep_best(best, component_candidate(*w, piece));
    }
    const Level top = std::min({hi, max_coarse_level(depth_, theta), cs_.max_shift() - 1});
    for (Level m = lo; m <= top; ++m) {
      for (Level mp = fine_level(m, theta); mp <= depth_; ++mp) keep_best(best, origin_candidate(m, mp));
    }
    add_flat_origin(best, theta, lo, hi);
    return require(std::move(best), theta);
  }

  std::vector<Candidate> upper_by_ratio(std::span<const Rational> grid, Level lo, Level hi) const override {
    std::vector<Candidate> out;
    lo = std::max<Level>(lo, 1);
    for (const Rational& theta : grid) {
      std::optional<Candidate> best;
      for (const Piece& piece : pieces_) {
        if (auto w = best_upper_window_by_fine(profile(piece), theta, lo, hi)) {
          keep_best(best, component_candidate(*w, piece));
        }
      }
      for (Level mp = fine_level(lo, theta); mp <= depth_; ++mp) {
        const Level top = std::min({hi, max_coarse_level(mp, theta), cs_.max_shift() - 1, mp - 1});
        for (Level m = lo; m <= top; ++m) keep_best(best, origin_candidate(m, mp));
      }
      add_flat_origin(best, theta, lo, hi);
      out.push_back(require(std::move(best), theta));
    }
    return out;
  }

 private:
  struct Piece {
    Level shift;
    std::vector<std::int64_t> prefix;
  };

  Profile profile(const Piece& p) const { return {p.prefix, p.shift, depth_}; }

  static Candidate component_candidate(const SlopeWindow& w, const Piece& p) {
    return from_slope(w, Index(1) << static_cast<unsigned>(w.m - p.shift));
  }

  bool origin_present(Level m) const { return cs_.include_origin() || cs_.max_shift() > m; }

  Candidate origin_candidate(Level m, Level mp) const {
    std::vector<std::int64_t> exponents;
    for (const Piece& p : pieces_) {
      if (p.shift > m && p.shift <= mp) exponents.push_back(p.prefix[static_cast<std::size_t>(mp - p.shift)]);
    }
    return {log2_sum_pow2(origin_present(mp), exponents) / static_cast<double>(mp - m), m, mp, Index(0)};
  }

  // At or beyond the largest shift the origin node holds only the origin:
  // value 0, and the first such window is the only one that can win a tie.
  void add_flat_origin(std::optional<Candidate>& best, const Rational& theta, Level lo, Level hi) const {
    if (!cs_.include_origin()) return;
    const Level m = std::max(lo, cs_.max_shift());
    if (m > std::min(hi, max_coarse_level(depth_, theta))) return;
    keep_best(best, {0.0, m, fine_level(m, theta), Index(0)});
  }

  CompositeSet cs_;
  std::vector<Piece> pieces_;
  Level depth_ = 0;
};

}  // namespace

std::unique_ptr<Model> make_window_model(const SetModel& set, NeighborMode neighbors) {
  struct Visitor {
    NeighborMode neighbors;
    std::unique_ptr<Model> operator()(const DyadicTree& t) const { return std::make_unique<TreeModel>(t, neighbors); }
    std::unique_ptr<Model> operator()(const BranchingSchedule& s) const { return std::make_unique<ScheduleModel>(s); }
    std::unique_ptr<Model> operator()(const CompositeSet& c) const { return std::make_unique<CompositeModel>(c); }
  };
  return std::visit(Visitor{neighbors}, set);
}

}  // namespace fds
