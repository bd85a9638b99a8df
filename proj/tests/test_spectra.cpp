#include <doctest.h>

#include <random>

#include "fds/constructions.hpp"
#include "fds/errors.hpp"
#include "fds/spectra.hpp"
#include "support.hpp"

using namespace fds;

namespace {

std::vector<Rational> grid(int lo, int hi, int den) {
  std::vector<Rational> out;
  for (int k = lo; k <= hi; ++k) out.emplace_back(k, den);
  return out;
}

BranchingSchedule two_phase(const char* s, const char* t, Level m0 = 4, int blocks = 3) {
  return two_phase_schedule(TwoPhaseParams(Rational::parse(s), Rational::parse(t), m0, blocks));
}

}  // namespace

TEST_CASE("default ranges") {
  SetModel full = DyadicTree::full(16);
  CHECK(default_range(full).lo == 4);
  CHECK(default_range(full).hi == 16);
  CHECK(default_box_range(full).lo == 8);
  SetModel tiny = DyadicTree::full(1);
  CHECK(default_range(tiny).lo == 1);
  CHECK(default_epsilons() == std::vector{Rational(1, 10), Rational(1, 20), Rational(1, 50)});
}

TEST_CASE("full and path trees") {
  auto g = grid(1, 9, 10);
  auto full = estimate_spectrum(DyadicTree::full(10), g);
  for (double v : full.values) CHECK(v == 1.0);
  CHECK(full.values.size() == 9);
  auto path = estimate_upper(DyadicTree::leftmost_path(12), g);
  for (double v : path.values) CHECK(v == 0.0);
  CHECK(estimate_box(DyadicTree::full(10)).values == std::vector{1.0});
  CHECK(estimate_box(DyadicTree::leftmost_path(10)).values == std::vector{0.0});
}

TEST_CASE("two-phase spectra follow the closed form") {
  auto s = two_phase("0.4", "0.8");
  auto g = grid(1, 19, 20);
  auto est = estimate_spectrum(s, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double u = closed_form_u(0.4, 0.8, g[i].to_double());
    CHECK(std::abs(est.values[i] - u) <= 0.05);
  }
  auto up = estimate_upper(s, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(up.values[i] == doctest::Approx(est.values[i]).epsilon(0.05));
}

TEST_CASE("tree model agrees with max_alpha") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto t = testing::random_tree(rng, 4 + static_cast<Level>(rng() % 8));
    for (auto mode : {NeighborMode::off, NeighborMode::on}) {
      SpectrumEstimator est(t, {mode, 1});
      for (Level m = 0; m < t.depth(); ++m) {
        for (Level mp = m + 1; mp <= t.depth(); ++mp) {
          auto w = est.window(m, mp);
          auto want = max_alpha(t, WindowQuery(m, mp, mode));
          CHECK(w.value == doctest::Approx(want.alpha));
          CHECK(w.node == want.node.index);
        }
      }
    }
  }
}

TEST_CASE("tree estimates against exhaustive enumeration") {
  std::mt19937_64 rng(37);
  auto g = grid(3, 9, 10);
  for (int trial = 0; trial < 10; ++trial) {
    auto t = testing::random_tree(rng, 6 + static_cast<Level>(rng() % 6));
    SpectrumEstimator est(t);
    LevelRange r{1, t.depth()};
    auto spec = est.spectrum(g, r);
    auto up = est.upper(g, r);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Level top = max_coarse_level(t.depth(), g[i]);
      double bs = -1.0;
      double bu = -1.0;
      for (Level m = 1; m <= top; ++m) {
        bs = std::max(bs, max_alpha(t, WindowQuery(m, fine_level(m, g[i]))).alpha);
        for (Level mp = fine_level(m, g[i]); mp <= t.depth(); ++mp) {
          if (mp > m) bu = std::max(bu, max_alpha(t, WindowQuery(m, mp)).alpha);
        }
      }
      CHECK(spec.values[i] == doctest::Approx(bs));
      CHECK(up.values[i] == doctest::Approx(bu));
      CHECK(est.window(spec.witnesses[i].m, spec.witnesses[i].m_prime).value == spec.values[i]);
    }
  }
}

TEST_CASE("schedule model agrees with the analytic routines") {
  std::mt19937_64 rng(41);
  auto g = grid(1, 19, 20);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = testing::random_schedule(rng, 100 + static_cast<Level>(rng() % 3000));
    SpectrumEstimator est(s);
    LevelRange r{5, s.depth()};
    auto spec = est.spectrum(g, r);
    auto up = est.upper(g, r);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(spec.values[i] == analytic_spectrum(s, g[i], r).value);
      CHECK(up.values[i] == analytic_upper(s, g[i], r).value);
      const auto& w = up.witnesses[i];
      CHECK(analytic_alpha(s, w.m, w.m_prime).to_double() == up.values[i]);
    }
  }
}

TEST_CASE("upper equals the ratio enumeration exactly") {
  std::mt19937_64 rng(43);
  auto g = grid(1, 49, 50);
  for (int trial = 0; trial < 15; ++trial) {
    auto s = testing::random_schedule(rng, 50 + static_cast<Level>(rng() % 4000));
    SpectrumEstimator est(s);
    CHECK(est.upper(g).values == est.upper_by_ratio(g).values);
  }
  for (int trial = 0; trial < 5; ++trial) {
    auto t = testing::random_tree(rng, 6 + static_cast<Level>(rng() % 6));
    SpectrumEstimator est(t);
    auto coarse = grid(10, 49, 50);
    CHECK(est.upper(coarse).values == est.upper_by_ratio(coarse).values);
  }
}

TEST_CASE("composite model agrees with composite_spectrum") {
  auto target = sample_target(Polynomial::parse("0.4,0.4,-0.2"), 4);
  auto cs = concave_union(target, 4, 2, doubling_shifts(4));
  SpectrumEstimator est(cs);
  auto g = grid(1, 9, 10);
  LevelRange r{20, cs.depth()};
  auto spec = est.spectrum(g, r);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(spec.values[i] == composite_spectrum(cs, g[i], r).value);
  }
  CHECK(est.upper(g, r).values == est.upper_by_ratio(g, r).values);

  // against the materialized tree at small depth
  std::mt19937_64 rng(47);
  CompositeSet small({{1, testing::random_schedule(rng, 9)}, {3, testing::random_schedule(rng, 9)}}, true);
  SpectrumEstimator a(small);
  SpectrumEstimator b(materialize(small));
  LevelRange rr{1, small.depth()};
  CHECK(a.spectrum(g, rr).values == b.spectrum(g, rr).values);
  auto ua = a.upper(g, rr).values;
  auto ub = b.upper(g, rr).values;
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(ua[i] == doctest::Approx(ub[i]));
  CHECK(a.box().values[0] == doctest::Approx(b.box().values[0]));
}

TEST_CASE("shift invariance") {
  std::mt19937_64 rng(53);
  auto s = testing::random_schedule(rng, 400);
  const Level e = 9;
  SpectrumEstimator plain(s);
  SpectrumEstimator shifted(CompositeSet({{e, s}}, false));
  for (Level m = 1; m < 400; m += 17) {
    for (Level mp = m + 1; mp <= 400; mp += 11) {
      CHECK(plain.window(m, mp).value == shifted.window(m + e, mp + e).value);
    }
  }
}

TEST_CASE("worker count does not change results") {
  auto s = two_phase("0.2", "0.9");
  auto g = grid(1, 99, 100);
  auto one = estimate_upper(s, g, {}, {NeighborMode::off, 1});
  auto many = estimate_upper(s, g, {}, {NeighborMode::off, 7});
  CHECK(one.values == many.values);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(one.witnesses[i].m == many.witnesses[i].m);
    CHECK(one.witnesses[i].m_prime == many.witnesses[i].m_prime);
  }
}

TEST_CASE("range errors") {
  SetModel t = DyadicTree::full(10);
  auto g = std::vector{Rational(1, 10)};
  CHECK_THROWS_AS(estimate_spectrum(t, g, LevelRange{3, 10}), DomainError);
  CHECK_NOTHROW(estimate_spectrum(t, g));
  CHECK_THROWS_AS(estimate_spectrum(t, g, LevelRange{5, 4}), DomainError);
  CHECK_THROWS_AS(estimate_box(t, LevelRange{0, 4}), DomainError);
}

TEST_CASE("quasi-Assouad estimates") {
  auto s = two_phase("0.4", "0.8");
  auto q = estimate_quasi_assouad(s, default_epsilons());
  CHECK(q.upper.values.size() == 3);
  CHECK(q.headline == q.upper.values.back());
  CHECK(q.non_decreasing_as_epsilon_shrinks);
  CHECK(std::abs(q.headline - 0.8) <= 0.03);
  CHECK(q.trend.find("eps=1/50") != std::string::npos);
  auto spec = estimate_spectrum(s, std::vector{Rational(49, 50)});
  CHECK(std::abs(spec.values[0] - q.headline) <= 0.03);
}

TEST_CASE("verifiers") {
  auto s = two_phase("0.4", "0.8");
  SpectrumEstimator est(s);
  auto g = grid(1, 9, 10);
  CHECK(verify_main_theorem(est, g).passed());
  CHECK(verify_main_theorem(est, g).checks[0].worst == 0.0);
  CHECK(verify_bound(est, g, 0.05).passed());
  auto chain = verify_chain(est, g, 0.05);
  CHECK(chain.passed());
  CHECK(chain.checks.size() == 4);
  std::vector<int> ns{2, 3};
  auto roots = verify_nthroot(est, g, ns, 0.05);
  CHECK(roots.passed());
  REQUIRE(roots.checks.size() == 2);
  CHECK(roots.checks[0].name == "nthroot.n=2");

  // a tolerance that cannot hold produces witnesses
  SpectrumEstimator full(DyadicTree::full(12));
  auto tight = verify_bound(full, g, -0.5);
  CHECK_FALSE(tight.passed());
  CHECK_FALSE(tight.checks[0].witnesses.empty());
  CHECK(tight.checks[0].witnesses.size() <= 8);
}

TEST_CASE("nth_root") {
  CHECK(nth_root(Rational(1, 4), 2) == Rational(1, 2));
  CHECK(nth_root(Rational(1, 8), 3) == Rational(1, 2));
  auto r = nth_root(Rational(1, 2), 2);
  CHECK(std::abs(r.to_double() - std::sqrt(0.5)) < 1e-9);
  CHECK(Rational(1, 2) <= r);
  CHECK(r < Rational(1));
  CHECK(nth_root(Rational(999999, 1000000), 3) < Rational(1));
  CHECK_THROWS_AS(nth_root(Rational(1, 2), 0), DomainError);
}

TEST_CASE("grid and range parsing") {
  auto g = parse_theta_grid("0.1:0.9:0.1");
  REQUIRE(g.size() == 9);
  CHECK(g.front() == Rational(1, 10));
  CHECK(g.back() == Rational(9, 10));
  CHECK(parse_theta_grid("0.25,0.5") == std::vector{Rational(1, 4), Rational(1, 2)});
  CHECK_THROWS_AS(parse_theta_grid("0:0.5:0.1"), ParseError);
  CHECK_THROWS_AS(parse_theta_grid("0.5,1"), ParseError);
  CHECK_THROWS_AS(parse_theta_grid("0.1:0.5:0"), ParseError);
  CHECK_THROWS_AS(parse_theta_grid(""), ParseError);
  auto r = parse_level_range("3:17");
  CHECK(r.lo == 3);
  CHECK(r.hi == 17);
  CHECK_THROWS_AS(parse_level_range("3"), ParseError);
  CHECK_THROWS_AS(parse_level_range("a:b"), ParseError);
}
