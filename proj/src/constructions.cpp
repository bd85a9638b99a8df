#include "fds/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace fds {
namespace {

std::int64_t floor_of(const Rational& x) {
  std::int64_t q = x.num() / x.den();
  if (x.num() % x.den() != 0 && x.num() < 0) --q;
  return q;
}

}  // namespace

TwoPhaseParams::TwoPhaseParams(Rational s_, Rational t_, Level m0_, int blocks_)
    : s(s_), t(t_), m0(m0_), blocks(blocks_) {
  if (!(Rational(0) < s && s < t && t <= Rational(1))) {
    throw DomainError("two-phase parameters need 0 < s < t <= 1, got s=" + s.str() + " t=" + t.str());
  }
  if (m0 < 2) throw DomainError("M0 must be at least 2");
  if (blocks < 1) throw DomainError("at least one block is required");
}

std::vector<Level> block_boundaries(const TwoPhaseParams& p) {
  std::vector<Level> out{p.m0};
  for (int k = 0; k < p.blocks; ++k) {
    Level prev = out.back();
    if (prev > (Level{1} << 31)) throw ResourceError("block boundary overflow");
    out.push_back(prev * prev);
  }
  return out;
}

BranchingSchedule two_phase_schedule(const TwoPhaseParams& p, Level max_depth) {
  auto bounds = block_boundaries(p);
  if (bounds.back() > max_depth) {
    throw ResourceError("two-phase depth " + std::to_string(bounds.back()) + " exceeds the maximum " +
                        std::to_string(max_depth));
  }
  const Rational q = p.quiet_fraction();
  std::vector<Run> runs{{p.m0, 1}};
  auto append = [&](int c, Level n) {
    if (n <= 0) return;
    if (runs.back().child_count == c) {
      runs.back().length += n;
    } else {
      runs.push_back({n, c});
    }
  };
  for (std::size_t k = 1; k < bounds.size(); ++k) {
    const Level length = bounds[k] - bounds[k - 1];
    const Level quiet = floor_of(q * Rational(length));
    append(1, quiet);
    std::int64_t previous = 0;
    for (Level a = 1; a <= length - quiet; ++a) {
      std::int64_t current = floor_of(p.t * Rational(a));
      append(current > previous ? 2 : 1, 1);
      previous = current;
    }
  }
  return BranchingSchedule(std::move(runs));
}

std::vector<Rational> rational_enumeration(std::size_t count) {
  std::vector<Rational> out;
  out.reserve(count);
  // Newman's recurrence walks the Calkin-Wilf tree breadth first: x -> 1 / (2 floor(x) - x + 1).
  Rational x(1);
  while (out.size() < count) {
    if (Rational(0) < x && x < Rational(1)) out.push_back(x);
    x = Rational(1) / (Rational(2 * floor_of(x)) - x + Rational(1));
  }
  return out;
}

Polynomial::Polynomial(std::vector<Rational> coefficients) : coefficients_(std::move(coefficients)) {
  if (coefficients_.empty()) throw DomainError("polynomial needs at least one coefficient");
}

Polynomial Polynomial::parse(std::string_view csv) {
  std::vector<Rational> coefficients;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto comma = csv.find(',', start);
    auto piece = csv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    coefficients.push_back(Rational::parse(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return Polynomial(std::move(coefficients));
}

Rational Polynomial::operator()(const Rational& x) const {
  Rational acc(0);
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * x + it->to_double();
  return acc;
}

std::vector<std::string> ConcaveTarget::violations() const {
  std::vector<std::string> out;
  if (!(Rational(0) < f0)) out.push_back("f(0) must be positive");
  auto points = samples;
  std::sort(points.begin(), points.end());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [q, f] = points[i];
    if (!(Rational(0) < q && q < Rational(1))) out.push_back("sample point " + q.str() + " outside (0,1)");
    if (!(Rational(0) < f && f <= Rational(1))) out.push_back("f(" + q.str() + ") outside (0,1]");
    if (f > f0 * (q + Rational(1))) out.push_back("f(" + q.str() + ") exceeds f(0)(q+1)");
    if (i > 0 && points[i - 1].first == q) out.push_back("repeated sample point " + q.str());
  }
  // Interpolant through (0, f0) and the samples: slopes must be >= 0 and non-increasing.
  points.insert(points.begin(), {Rational(0), f0});
  std::optional<Rational> last_slope;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first == points[i - 1].first) continue;
    Rational slope = (points[i].second - points[i - 1].second) / (points[i].first - points[i - 1].first);
    if (slope < Rational(0)) out.push_back("interpolant decreases before " + points[i].first.str());
    if (last_slope && slope > *last_slope) out.push_back("interpolant not concave at " + points[i - 1].first.str());
    last_slope = slope;
  }
  return out;
}

ConcaveTarget sample_target(const Polynomial& f, std::size_t count) {
  ConcaveTarget target;
  target.f0 = f(Rational(0));
  for (const Rational& q : rational_enumeration(count)) target.samples.emplace_back(q, f(q));
  return target;
}

std::vector<std::string> check_admissible(const Polynomial& f, int grid_points) {
  constexpr double slack = 1e-12;
  std::vector<std::string> out;
  auto fail = [&](const std::string& what, double x) {
    std::ostringstream os;
    os << what << " at x=" << x;
    out.push_back(os.str());
  };
  const double f0 = f(0.0);
  if (!(f0 > 0.0)) out.push_back("f(0) must be positive");
  const int n = std::max(grid_points, 3);
  double prev = f0;
  double prev_step = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = static_cast<double>(i) / (n - 1);
    double y = f(x);
    if (y < -slack || y > 1.0 + slack) fail("f outside [0,1]", x);
    if (y > f0 * (x + 1.0) + slack) fail("f exceeds f(0)(x+1)", x);
    if (i > 0) {
      double step = y - prev;
      if (step < -slack) fail("f decreasing", x);
      if (i > 1 && step > prev_step + slack) fail("f not concave", x);
      prev_step = step;
    }
    prev = y;
    if (out.size() > 8) break;
  }
  return out;
}

std::vector<std::pair<Rational, Rational>> component_parameters(const ConcaveTarget& target) {
  std::vector<std::pair<Rational, Rational>> out;
  out.reserve(target.samples.size());
  for (const auto& [q, f] : target.samples) {
    Rational s = f * (Rational(1) - q);
    if (!(Rational(0) < s && s < f && f <= Rational(1))) {
      throw DomainError("sample (" + q.str() + ", " + f.str() + ") gives s=" + s.str() + ", t=" + f.str() +
                        " outside 0 < s < t <= 1");
    }
    out.emplace_back(s, f);
  }
  return out;
}

CompositeSet concave_union(const ConcaveTarget& target, Level m0, int blocks, std::span<const Level> shifts) {
  if (auto bad = target.violations(); !bad.empty()) throw DomainError("inadmissible target: " + bad.front());
  if (shifts.size() < target.samples.size()) throw DomainError("fewer shifts than components");
  auto params = component_parameters(target);
  std::vector<Component> components;
  components.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    TwoPhaseParams p(params[i].first, params[i].second, m0, blocks);
    components.push_back({shifts[i], two_phase_schedule(p)});
  }
  return CompositeSet(std::move(components), true);
}

std::vector<Level> doubling_shifts(std::size_t count) {
  if (count > 40) throw ResourceError("doubling shifts beyond 2^40");
  std::vector<Level> out;
  for (std::size_t i = 1; i <= count; ++i) out.push_back(Level{1} << i);
  return out;
}

std::vector<Level> linear_shifts(std::size_t count, Level c) {
  if (c < 1) throw DomainError("linear shift step must be at least 1");
  std::vector<Level> out;
  for (std::size_t i = 1; i <= count; ++i) out.push_back(c * static_cast<Level>(i));
  return out;
}

DyadicTree geometric_sequence_tree(Level depth) {
  if (depth < 2) throw DomainError("geometric sequence tree needs depth >= 2");
  std::vector<std::vector<Index>> levels(static_cast<std::size_t>(depth) + 1);
  for (Level m = 0; m <= depth; ++m) {
    auto& idx = levels[static_cast<std::size_t>(m)];
    idx.reserve(static_cast<std::size_t>(m) + 1);
    idx.emplace_back(0);
    // 2^-k lies in the level-m interval with index 2^(m-k); points with k > m fall into index 0.
    for (Level k = m; k >= 1; --k) idx.push_back(Index(1) << static_cast<unsigned>(m - k));
  }
  return DyadicTree(depth, std::move(levels));
}

}  // namespace fds
