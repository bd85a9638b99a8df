#include "fds/window_search.hpp"

#include <algorithm>
#include <tuple>

#include "fds/slope_hull.hpp"

namespace fds {

bool better(const SlopeWindow& a, const SlopeWindow& b) {
  __int128 lhs = static_cast<__int128>(a.rise) * b.run();
  __int128 rhs = static_cast<__int128>(b.rise) * a.run();
  if (lhs != rhs) return lhs > rhs;
  return std::tie(a.m, a.m_prime) < std::tie(b.m, b.m_prime);
}

Level Profile::last() const {
  return std::min(offset + static_cast<Level>(prefix.size()) - 1, cap);
}

namespace {

struct CoarseSpan {
  Level lo;
  Level hi;
  bool empty() const { return hi < lo; }
};

CoarseSpan coarse_span(const Profile& p, const Rational& theta, Level lo, Level hi) {
  return {std::max({lo, p.first(), Level{1}}), std::min(hi, max_coarse_level(p.last(), theta))};
}

}  // namespace

std::optional<SlopeWindow> best_spectrum_window(const Profile& p, const Rational& theta, Level lo, Level hi) {
  std::optional<SlopeWindow> best;
  auto span = coarse_span(p, theta, lo, hi);
  for (Level m = span.lo; m <= span.hi; ++m) {
    Level mp = fine_level(m, theta);
    if (mp <= m) continue;
    SlopeWindow w{p.at(mp) - p.at(m), m, mp};
    if (!best || better(w, *best)) best = w;
  }
  return best;
}

std::optional<SlopeWindow> best_upper_window(const Profile& p, const Rational& theta, Level lo, Level hi) {
  std::optional<SlopeWindow> best;
  auto span = coarse_span(p, theta, lo, hi);
  if (span.empty()) return best;
  SuffixSlopeHull hull;
  Level next = p.last();
  for (Level m = span.hi; m >= span.lo; --m) {
    Level threshold = std::max(fine_level(m, theta), m + 1);
    for (; next >= threshold; --next) hull.push_front({next, p.at(next)});
    if (hull.empty()) continue;
    auto top = hull.best_from({m, p.at(m)});
    SlopeWindow w{top.y - p.at(m), m, top.x};
    if (!best || better(w, *best)) best = w;
  }
  return best;
}

std::optional<SlopeWindow> best_upper_window_by_fine(const Profile& p, const Rational& theta, Level lo,
                                                     Level hi) {
  std::optional<SlopeWindow> best;
  auto span = coarse_span(p, theta, lo, hi);
  if (span.empty()) return best;
  SuffixSlopeHull hull;  // reflected points (-m, -S_m)
  Level next = span.lo;
  for (Level mp = fine_level(span.lo, theta); mp <= p.last(); ++mp) {
    Level cmax = std::min({span.hi, max_coarse_level(mp, theta), mp - 1});
    for (; next <= cmax; ++next) hull.push_front({-next, -p.at(next)});
    if (hull.empty()) continue;
    auto top = hull.best_from({-mp, -p.at(mp)});
    SlopeWindow w{p.at(mp) + top.y, -top.x, mp};
    if (!best || better(w, *best)) best = w;
  }
  return best;
}

}  // namespace fds
