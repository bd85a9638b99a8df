#include <doctest.h>

#include <random>

#include "fds/constructions.hpp"
#include "fds/errors.hpp"
#include "fds/schedule.hpp"
#include "fds/slope_hull.hpp"
#include "fds/window_search.hpp"
#include "support.hpp"

using namespace fds;

namespace {

BranchingSchedule counts(std::initializer_list<int> c) { return BranchingSchedule::from_counts(std::vector<int>(c)); }

BranchingSchedule two_phase(const char* s, const char* t, Level m0 = 4, int blocks = 3) {
  return two_phase_schedule(TwoPhaseParams(Rational::parse(s), Rational::parse(t), m0, blocks));
}

}  // namespace

TEST_CASE("runs are validated and merged") {
  BranchingSchedule s({{2, 1}, {3, 1}, {1, 2}});
  REQUIRE(s.runs().size() == 2);
  CHECK(s.runs()[0] == Run{5, 1});
  CHECK(s.depth() == 6);
  CHECK_THROWS_AS(BranchingSchedule({{2, 3}}), DomainError);
  CHECK_THROWS_AS(BranchingSchedule({{0, 1}}), DomainError);
  CHECK(BranchingSchedule::uniform(0, 2).depth() == 0);
}

TEST_CASE("prefix sums") {
  auto s = counts({2, 2, 1, 2});
  CHECK(s.prefix_sums() == std::vector<std::int64_t>{0, 1, 2, 2, 3});
  for (Level m = 0; m <= 4; ++m) CHECK(s.prefix_sum(m) == s.prefix_sums()[static_cast<std::size_t>(m)]);
  CHECK(s.child_count(3) == 1);
  CHECK(s.child_count(4) == 2);
  CHECK_THROWS_AS(s.prefix_sum(5), DomainError);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto r = testing::random_schedule(rng, 1 + static_cast<Level>(rng() % 300));
    auto dense = r.prefix_sums();
    CHECK(dense.front() == 0);
    CHECK(dense.back() <= r.depth());
    for (Level m = 0; m <= r.depth(); ++m) {
      CHECK(r.prefix_sum(m) == dense[static_cast<std::size_t>(m)]);
      if (m > 0) CHECK(dense[static_cast<std::size_t>(m)] - dense[static_cast<std::size_t>(m - 1)] >= 0);
    }
  }
}

TEST_CASE("analytic_local_count and analytic_alpha") {
  auto s = counts({2, 2, 1, 2});
  CHECK(analytic_local_count(s, 1, 4) == 2);
  CHECK(analytic_alpha(s, 1, 4) == Rational(2, 3));
  CHECK(analytic_local_count(BranchingSchedule::uniform(12, 1), 3, 9) == 0);
  CHECK(analytic_local_count(BranchingSchedule::uniform(12, 2), 0, 12) == 12);
  CHECK(analytic_alpha(BranchingSchedule::uniform(12, 2), 5, 7) == Rational(1));
  CHECK_THROWS_AS(analytic_local_count(s, 2, 2), DomainError);
  CHECK_THROWS_AS(analytic_local_count(s, 0, 5), DomainError);

  // the last active region of two-phase (0.4, 0.8): 65280 levels, quiet share 1/2
  auto tp = two_phase("0.4", "0.8");
  const Level start = 256 + 65280 / 2;
  const Level len = 65536 - start;
  CHECK(std::abs(analytic_alpha(tp, start, 65536).to_double() - 0.8) <= 1.0 / static_cast<double>(len));
}

TEST_CASE("analytic_spectrum") {
  CHECK(analytic_spectrum(BranchingSchedule::uniform(40, 2), Rational(1, 2), {1, 20}).value == 1.0);
  CHECK(analytic_spectrum(BranchingSchedule::uniform(40, 1), Rational(1, 2), {1, 20}).value == 0.0);

  auto s = two_phase("0.5", "1.0");
  auto p = analytic_spectrum(s, Rational(1, 4), {256, 65536});
  CHECK(std::abs(p.value - 2.0 / 3.0) <= 0.05);
  CHECK(fine_level(p.m, Rational(1, 4)) == p.m_prime);

  // range checks: clipped per theta, empty after clipping is an error
  CHECK_THROWS_AS(analytic_spectrum(s, Rational(1, 2), {0, 10}), DomainError);
  CHECK_THROWS_AS(analytic_spectrum(s, Rational(1, 2), {40000, 65536}), DomainError);
  CHECK_THROWS_AS(analytic_spectrum(s, Rational(1), {1, 10}), DomainError);
  CHECK_NOTHROW(analytic_spectrum(s, Rational(1, 2), {100, 65536}));
}

TEST_CASE("analytic_upper") {
  CHECK(analytic_upper(BranchingSchedule::uniform(40, 2), Rational(1, 2), {1, 20}).value == 1.0);

  auto s = two_phase("0.4", "0.8");
  auto p = analytic_upper(s, Rational(9, 10), {256, 65536});
  CHECK(std::abs(p.value - 0.8) <= 0.05);

  // exhaustive oracle at reduced depth
  auto small = two_phase("0.4", "0.8", 4, 2);
  auto S = small.prefix_sums();
  for (int k = 1; k <= 9; ++k) {
    Rational theta(k, 10);
    const Level hi = max_coarse_level(small.depth(), theta);
    auto up = analytic_upper(small, theta, {16, small.depth()});
    auto oracle = testing::brute_upper(S, theta, 16, hi);
    CHECK(up.value == oracle.value());
    CHECK(up.value >= analytic_spectrum(small, theta, {16, small.depth()}).value);
  }
}

TEST_CASE("materialize") {
  CHECK(materialize(BranchingSchedule::uniform(4, 2)) == DyadicTree::full(4));
  CHECK(materialize(BranchingSchedule::uniform(6, 1)) == DyadicTree::leftmost_path(6));
  auto t = materialize(counts({2, 1, 2}));
  std::vector<Index> expected{Index(0), Index(1), Index(4), Index(5)};
  CHECK(std::vector<Index>(t.level(3).begin(), t.level(3).end()) == expected);
  CHECK(validate(t).empty());
  CHECK_THROWS_AS(materialize(BranchingSchedule::uniform(30, 2)), ResourceError);
}

TEST_CASE("oracle equivalence: analytic counts equal materialized counts") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    auto s = testing::random_schedule(rng, 1 + static_cast<Level>(rng() % 14));
    auto t = materialize(s);
    for (Level m = 0; m < s.depth(); ++m) {
      for (Level mp = m + 1; mp <= s.depth(); ++mp) {
        const auto expected = std::uint64_t{1} << analytic_local_count(s, m, mp);
        for (const Index& k : t.level(m)) {
          CHECK(local_count(t, DyadicInterval(m, k), mp, NeighborMode::off) == expected);
        }
      }
    }
  }
}

TEST_CASE("slope hull matches brute force") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    SuffixSlopeHull hull;
    std::vector<SuffixSlopeHull::Point> pts;
    std::int64_t x = 1000;
    std::int64_t y = 0;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      x -= 1 + static_cast<std::int64_t>(rng() % 3);
      y -= static_cast<std::int64_t>(rng() % 4);
      pts.push_back({x, y});
      hull.push_front({x, y});
      SuffixSlopeHull::Point q{x - 1 - static_cast<std::int64_t>(rng() % 5), y - static_cast<std::int64_t>(rng() % 7)};
      auto got = hull.best_from(q);
      // brute: max slope, ties to smallest x
      auto best = pts.front();
      for (const auto& p : pts) {
        __int128 lhs = static_cast<__int128>(p.y - q.y) * (best.x - q.x);
        __int128 rhs = static_cast<__int128>(best.y - q.y) * (p.x - q.x);
        if (lhs > rhs || (lhs == rhs && p.x < best.x)) best = p;
      }
      CHECK(got.x == best.x);
      CHECK(got.y == best.y);
    }
  }
}

TEST_CASE("window search routes agree with exhaustive enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    auto s = testing::random_schedule(rng, 20 + static_cast<Level>(rng() % 400));
    auto S = s.prefix_sums();
    Profile p{S, 0, s.depth()};
    for (int k = 1; k <= 9; ++k) {
      Rational theta(k, 10);
      const Level lo = 1 + static_cast<Level>(rng() % 5);
      const Level top = max_coarse_level(s.depth(), theta);
      const Level hi = top;
      if (top < lo) continue;
      auto spec = best_spectrum_window(p, theta, lo, hi);
      auto up = best_upper_window(p, theta, lo, hi);
      auto dual = best_upper_window_by_fine(p, theta, lo, hi);
      REQUIRE(spec);
      REQUIRE(up);
      REQUIRE(dual);
      CHECK(spec->value() == testing::brute_spectrum(S, theta, lo, top).value());
      CHECK(up->value() == testing::brute_upper(S, theta, lo, top).value());
      CHECK(up->value() == dual->value());
      CHECK(up->m_prime >= fine_level(up->m, theta));
      CHECK(dual->m_prime >= fine_level(dual->m, theta));
      CHECK(up->rise == S[up->m_prime] - S[up->m]);
    }
  }
}

TEST_CASE("upper is monotone in theta and dominates the spectrum") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = testing::random_schedule(rng, 200 + static_cast<Level>(rng() % 2000));
    double previous = -1.0;
    for (int k = 1; k <= 19; ++k) {
      Rational theta(k, 20);
      auto up = analytic_upper(s, theta, {8, s.depth()});
      auto spec = analytic_spectrum(s, theta, {8, s.depth()});
      CHECK(up.value >= previous);
      CHECK(spec.value <= up.value);
      CHECK(up.value >= 0.0);
      CHECK(up.value <= 1.0);
      previous = up.value;
    }
  }
}

TEST_CASE("composite sets") {
  auto a = BranchingSchedule::uniform(10, 2);
  CHECK_THROWS_AS(CompositeSet({{2, a}, {2, a}}, true), DomainError);
  CHECK_THROWS_AS(CompositeSet({{0, a}}, true), DomainError);
  CompositeSet cs({{1, a}, {3, BranchingSchedule::uniform(4, 1)}}, true);
  CHECK(cs.depth() == 7);
  CHECK(cs.max_shift() == 3);
}

TEST_CASE("composite windows equal materialized composite windows") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<Component> comps;
    Level shift = 0;
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      shift += 1 + static_cast<Level>(rng() % 3);
      comps.push_back({shift, testing::random_schedule(rng, 6 + static_cast<Level>(rng() % 6))});
    }
    const bool origin = trial % 3 != 0;
    CompositeSet cs(comps, origin);
    auto t = materialize(cs);
    REQUIRE(t.depth() == cs.depth());
    REQUIRE(validate(t).empty());
    for (Level m = 0; m <= cs.depth(); ++m) {
      CHECK(composite_log2_level_count(cs, m) == doctest::Approx(std::log2(static_cast<double>(level_count(t, m)))));
    }
    for (Level m = 0; m < cs.depth(); ++m) {
      for (Level mp = m + 1; mp <= cs.depth(); ++mp) {
        auto got = composite_alpha(cs, m, mp);
        auto want = max_alpha(t, WindowQuery(m, mp));
        CHECK(got.value == doctest::Approx(want.alpha));
        CHECK(got.node == want.node.index);
      }
    }
  }
}

TEST_CASE("composite shift invariance") {
  std::mt19937_64 rng(23);
  auto s = testing::random_schedule(rng, 300);
  const Level e = 7;
  CompositeSet cs({{e, s}}, false);
  for (Level m = 0; m < s.depth(); m += 13) {
    for (Level mp = m + 1; mp <= s.depth(); mp += 7) {
      CHECK(composite_alpha(cs, m + e, mp + e).value == analytic_alpha(s, m, mp).to_double());
    }
  }
}

TEST_CASE("composite_spectrum") {
  auto s = two_phase("0.4", "0.8", 4, 2);
  CompositeSet single({{1, s}}, true);
  auto direct = analytic_spectrum(s, Rational(1, 2), {16, 256});
  // window (m, m') of the component is window (m+1, m'+1) of the composite
  auto shifted = composite_alpha(single, direct.m + 1, direct.m_prime + 1);
  CHECK(shifted.value == direct.value);

  CompositeSet flat({{2, BranchingSchedule::uniform(50, 1)}, {5, BranchingSchedule::uniform(50, 1)}}, true);
  for (int k = 2; k <= 9; ++k) CHECK(composite_spectrum(flat, Rational(k, 10), {6, flat.depth()}).value == 0.0);

  // concave union of the quadratic target at theta = 1/2
  auto target = sample_target(Polynomial::parse("0.4,0.4,-0.2"), 8);
  auto cu = concave_union(target, 4, 3, doubling_shifts(8));
  auto p = composite_spectrum(cu, Rational(1, 2), {256 + 256, cu.depth()});
  CHECK(std::abs(p.value - 0.55) <= 0.05);

  CHECK_THROWS_AS(composite_spectrum(CompositeSet({}, true), Rational(1, 2), {1, 1}), DomainError);
}
