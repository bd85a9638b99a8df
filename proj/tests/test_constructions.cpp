#include <doctest.h>

#include <set>

#include "fds/constructions.hpp"
#include "fds/errors.hpp"
#include "fds/window_search.hpp"
#include "support.hpp"

using namespace fds;

TEST_CASE("closed_form_u") {
  CHECK(closed_form_u(Rational(2, 5), Rational(4, 5), Rational(1, 2)) == Rational(4, 5));
  CHECK(closed_form_u(Rational(1, 5), Rational(9, 10), Rational(9, 10)) == Rational(9, 10));
  CHECK(closed_form_u(0.4, 0.8, 1e-9) == doctest::Approx(0.4));
  CHECK(closed_form_u(Rational(2, 5), Rational(4, 5), Rational(3, 10)) == Rational(4, 7));
  CHECK_THROWS_AS(closed_form_u(0.5, 0.5, 0.3), DomainError);
  CHECK_THROWS_AS(closed_form_u(0.2, 1.1, 0.3), DomainError);
  CHECK_THROWS_AS(closed_form_u(0.2, 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(closed_form_u(0.0, 0.5, 0.5), DomainError);
}

TEST_CASE("two-phase parameters") {
  CHECK_THROWS_AS(TwoPhaseParams(Rational(1, 2), Rational(1, 2), 4, 3), DomainError);
  CHECK_THROWS_AS(TwoPhaseParams(Rational(1, 2), Rational(3, 2), 4, 3), DomainError);
  CHECK_THROWS_AS(TwoPhaseParams(Rational(1, 4), Rational(1, 2), 1, 3), DomainError);
  CHECK_THROWS_AS(TwoPhaseParams(Rational(1, 4), Rational(1, 2), 4, 0), DomainError);
  TwoPhaseParams p(Rational(2, 5), Rational(4, 5), 4, 3);
  CHECK(p.quiet_fraction() == Rational(1, 2));
  CHECK(block_boundaries(p) == std::vector<Level>{4, 16, 256, 65536});
}

TEST_CASE("two_phase_schedule structure") {
  SUBCASE("s = 1/2, t = 1: active regions branch fully") {
    auto s = two_phase_schedule(TwoPhaseParams(Rational(1, 2), Rational(1), 4, 2));
    CHECK(s.depth() == 256);
    // block (16, 256]: 120 quiet levels then 120 branching levels
    CHECK(analytic_alpha(s, 136, 256) == Rational(1));
    CHECK(analytic_local_count(s, 16, 136) == 0);
    CHECK(analytic_local_count(s, 0, 4) == 0);
  }
  SUBCASE("Beatty counts over each active region") {
    TwoPhaseParams p(Rational(2, 5), Rational(4, 5), 4, 3);
    auto s = two_phase_schedule(p);
    CHECK(s.depth() == 65536);
    auto b = block_boundaries(p);
    for (std::size_t k = 1; k < b.size(); ++k) {
      const Level len = b[k] - b[k - 1];
      const Level quiet = len / 2;
      const Level active = len - quiet;
      CHECK(analytic_local_count(s, b[k - 1], b[k - 1] + quiet) == 0);
      const auto branching = analytic_local_count(s, b[k - 1] + quiet, b[k]);
      const auto beatty = (4 * active) / 5;
      CHECK(std::abs(branching - beatty) <= 1);
    }
  }
  SUBCASE("(0.2, 0.9): spectrum at 1/2 against an exhaustive maximisation") {
    auto s = two_phase_schedule(TwoPhaseParams(Rational(1, 5), Rational(9, 10), 4, 3));
    auto S = s.prefix_sums();
    auto oracle = testing::brute_spectrum(S, Rational(1, 2), 256, s.depth() / 2);
    auto p = analytic_spectrum(s, Rational(1, 2), {256, s.depth()});
    CHECK(p.value == oracle.value());
    CHECK(std::abs(p.value - 0.4) <= 0.05);
  }
  SUBCASE("depth budget") {
    CHECK_THROWS_AS(two_phase_schedule(TwoPhaseParams(Rational(1, 4), Rational(1, 2), 4, 4)), ResourceError);
    CHECK_THROWS_AS(two_phase_schedule(TwoPhaseParams(Rational(1, 4), Rational(1, 2), 4, 3), 1000), ResourceError);
    CHECK_NOTHROW(two_phase_schedule(TwoPhaseParams(Rational(1, 4), Rational(1, 2), 4, 3), 65536));
  }
  SUBCASE("long-run density approaches s") {
    auto s = two_phase_schedule(TwoPhaseParams(Rational(2, 5), Rational(4, 5), 4, 3));
    CHECK(std::abs(static_cast<double>(s.prefix_sum(s.depth())) / static_cast<double>(s.depth()) - 0.4) < 0.01);
  }
}

TEST_CASE("rational_enumeration") {
  CHECK(rational_enumeration(1) == std::vector{Rational(1, 2)});
  CHECK(rational_enumeration(3) == std::vector{Rational(1, 2), Rational(1, 3), Rational(2, 3)});
  auto many = rational_enumeration(200);
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (const Rational& q : many) {
    CHECK(Rational(0) < q);
    CHECK(q < Rational(1));
    CHECK(seen.insert({q.num(), q.den()}).second);
  }
  CHECK(many.size() == 200);
}

TEST_CASE("polynomials") {
  auto f = Polynomial::parse("0.4,0.4,-0.2");
  CHECK(f(Rational(1, 2)) == Rational(11, 20));
  CHECK(f(0.5) == doctest::Approx(0.55));
  CHECK_THROWS_AS(Polynomial::parse(""), ParseError);
  CHECK_THROWS_AS(Polynomial::parse("0.4,,1"), ParseError);
}

TEST_CASE("admissibility") {
  CHECK(check_admissible(Polynomial::parse("0.4,0.4,-0.2")).empty());
  CHECK_FALSE(check_admissible(Polynomial::parse("0.4,-0.1")).empty());      // decreasing
  CHECK_FALSE(check_admissible(Polynomial::parse("0.4,0,0.2")).empty());     // convex
  CHECK_FALSE(check_admissible(Polynomial::parse("0.2,0.5")).empty());       // exceeds f(0)(x+1)
  CHECK_FALSE(check_admissible(Polynomial::parse("0")).empty());             // f(0) = 0
  CHECK_FALSE(check_admissible(Polynomial::parse("0.9,0.5,-0.1")).empty());  // leaves [0,1]

  ConcaveTarget ok{{{Rational(1, 2), Rational(11, 20)}}, Rational(2, 5)};
  CHECK(ok.violations().empty());
  ConcaveTarget bad{{{Rational(1, 2), Rational(7, 10)}}, Rational(2, 5)};
  CHECK_FALSE(bad.violations().empty());
  ConcaveTarget repeated{{{Rational(1, 2), Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)}}, Rational(2, 5)};
  CHECK_FALSE(repeated.violations().empty());
}

TEST_CASE("concave_union") {
  SUBCASE("single sample") {
    ConcaveTarget t{{{Rational(1, 2), Rational(11, 20)}}, Rational(2, 5)};
    auto params = component_parameters(t);
    REQUIRE(params.size() == 1);
    CHECK(params[0].first == Rational(11, 40));
    CHECK(params[0].second == Rational(11, 20));
    auto cs = concave_union(t, 4, 2, doubling_shifts(1));
    CHECK(cs.components().size() == 1);
    CHECK(cs.include_origin());
    CHECK(cs.components()[0].shift == 2);
  }
  SUBCASE("four samples of the quadratic target") {
    auto t = sample_target(Polynomial::parse("0.4,0.4,-0.2"), 4);
    for (auto [s, tt] : component_parameters(t)) {
      CHECK(s < tt);
      CHECK(tt <= Rational(3, 5));
    }
  }
  SUBCASE("phase transition of each component sits at its sample") {
    auto t = sample_target(Polynomial::parse("0.4,0.4,-0.2"), 12);
    auto params = component_parameters(t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& [q, f] = t.samples[i];
      CHECK(params[i].first / (Rational(1) - q) == params[i].second);
      CHECK(finite_sup_oracle(params, q) == f);
    }
  }
  SUBCASE("errors") {
    auto t = sample_target(Polynomial::parse("0.4,0.4,-0.2"), 4);
    CHECK_THROWS_AS(concave_union(t, 4, 3, doubling_shifts(3)), DomainError);
    ConcaveTarget zero{{{Rational(1, 2), Rational(0)}}, Rational(2, 5)};
    CHECK_THROWS_AS(component_parameters(zero), DomainError);
  }
}

TEST_CASE("finite_sup_oracle") {
  std::vector<std::pair<double, double>> one{{0.4, 0.8}};
  CHECK(finite_sup_oracle(one, 0.3) == closed_form_u(0.4, 0.8, 0.3));
  CHECK_THROWS_AS(finite_sup_oracle(std::vector<std::pair<double, double>>{}, 0.3), DomainError);

  auto f = Polynomial::parse("0.4,0.4,-0.2");
  auto params = component_parameters(sample_target(f, 8));
  CHECK(finite_sup_oracle(params, Rational(1, 2)) == Rational(11, 20));

  // adding components never lowers the envelope, which never exceeds f
  auto all = component_parameters(sample_target(f, 30));
  for (int k = 1; k < 100; ++k) {
    Rational theta(k, 100);
    Rational previous(0);
    for (std::size_t n = 1; n <= all.size(); ++n) {
      std::vector<std::pair<Rational, Rational>> head(all.begin(), all.begin() + static_cast<long>(n));
      Rational v = finite_sup_oracle(head, theta);
      CHECK(previous <= v);
      CHECK(v <= f(theta));
      previous = v;
    }
  }
}

TEST_CASE("shift presets") {
  CHECK(doubling_shifts(4) == std::vector<Level>{2, 4, 8, 16});
  CHECK(linear_shifts(3, 5) == std::vector<Level>{5, 10, 15});
  CHECK_THROWS_AS(linear_shifts(3, 0), DomainError);
}

TEST_CASE("geometric_sequence_tree") {
  auto t = geometric_sequence_tree(3);
  std::vector<Index> expected{Index(0), Index(1), Index(2), Index(4)};
  CHECK(std::vector<Index>(t.level(3).begin(), t.level(3).end()) == expected);
  CHECK(validate(t).empty());
  auto big = geometric_sequence_tree(64);
  for (Level m = 1; m <= 64; ++m) CHECK(level_count(big, m) == static_cast<std::size_t>(m + 1));
  CHECK(validate(big).empty());
  CHECK_THROWS_AS(geometric_sequence_tree(1), DomainError);

  // localized counts grow logarithmically
  auto g = geometric_sequence_tree(60);
  for (Level m = 1; m <= 30; ++m) {
    CHECK(max_alpha(g, WindowQuery(m, 2 * m)).alpha <= std::log2(static_cast<double>(m + 2)) / static_cast<double>(m));
  }
}
