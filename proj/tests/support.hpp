#pragma once

// Brute-force oracles and random inputs shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fds/dyadic.hpp"
#include "fds/rational.hpp"
#include "fds/schedule.hpp"

namespace fds::testing {

inline BranchingSchedule random_schedule(std::mt19937_64& rng, Level depth) {
  // Mix of densities so that long quiet and long branching stretches both occur.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double p = u(rng);
  std::vector<int> counts;
  for (Level j = 0; j < depth; ++j) {
    if (u(rng) < 0.05) p = u(rng);
    counts.push_back(u(rng) < p ? 2 : 1);
  }
  return BranchingSchedule::from_counts(counts);
}

/// Random prefix-closed tree without dangling nodes.
inline DyadicTree random_tree(std::mt19937_64& rng, Level depth, double keep = 0.6) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<Index>> levels(static_cast<std::size_t>(depth) + 1);
  levels[0].push_back(Index(0));
  for (Level m = 1; m <= depth; ++m) {
    for (const Index& k : levels[static_cast<std::size_t>(m - 1)]) {
      bool left = u(rng) < keep;
      bool right = u(rng) < keep;
      if (!left && !right) (u(rng) < 0.5 ? left : right) = true;
      if (left) levels[static_cast<std::size_t>(m)].push_back(k << 1);
      if (right) levels[static_cast<std::size_t>(m)].push_back((k << 1) + 1);
    }
  }
  return DyadicTree(depth, std::move(levels));
}

/// Exact rational window value (S_m' - S_m)/(m' - m) compared by cross product.
struct Best {
  std::int64_t rise = -1;
  Level run = 1;
  void offer(std::int64_t r, Level n) {
    if (rise < 0 || static_cast<__int128>(r) * run > static_cast<__int128>(rise) * n) {
      rise = r;
      run = n;
    }
  }
  double value() const { return static_cast<double>(rise) / static_cast<double>(run); }
};

inline Best brute_spectrum(const std::vector<std::int64_t>& S, const Rational& theta, Level lo, Level hi) {
  Best b;
  const Level D = static_cast<Level>(S.size()) - 1;
  for (Level m = lo; m <= hi; ++m) {
    Level mp = fine_level(m, theta);
    if (mp > D) continue;
    b.offer(S[mp] - S[m], mp - m);
  }
  return b;
}

inline Best brute_upper(const std::vector<std::int64_t>& S, const Rational& theta, Level lo, Level hi) {
  Best b;
  const Level D = static_cast<Level>(S.size()) - 1;
  for (Level m = lo; m <= hi; ++m) {
    for (Level mp = std::max(fine_level(m, theta), m + 1); mp <= D; ++mp) b.offer(S[mp] - S[m], mp - m);
  }
  return b;
}

}  // namespace fds::testing
