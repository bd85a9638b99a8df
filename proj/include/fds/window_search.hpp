#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "fds/dyadic.hpp"
#include "fds/rational.hpp"

namespace fds {

/// A window (m, m') on a branching profile together with its exponent
/// rise / (m' - m), rise = S_m' - S_m.
struct SlopeWindow {
  std::int64_t rise = 0;
  Level m = 0;
  Level m_prime = 0;

  Level run() const { return m_prime - m; }
  double value() const { return static_cast<double>(rise) / static_cast<double>(run()); }
};

/// Exact comparison by exponent, ties to the smaller (m, m').
bool better(const SlopeWindow& a, const SlopeWindow& b);

/// Prefix sums of one homogeneous piece placed at `offset`: level L of the
/// host maps to prefix[L - offset]. Windows must stay within
/// [offset, min(offset + prefix.size() - 1, cap)].
struct Profile {
  std::span<const std::int64_t> prefix;
  Level offset = 0;
  Level cap = 0;

  Level first() const { return offset; }
  Level last() const;
  std::int64_t at(Level level) const { return prefix[static_cast<std::size_t>(level - offset)]; }
};

/// max over coarse m in [lo, hi] of the window (m, ceil(m/theta)).
std::optional<SlopeWindow> best_spectrum_window(const Profile& p, const Rational& theta, Level lo, Level hi);

/// max over coarse m in [lo, hi] and m' >= ceil(m/theta). Sweeps coarse levels
/// right to left over a suffix hull of fine candidates.
std::optional<SlopeWindow> best_upper_window(const Profile& p, const Rational& theta, Level lo, Level hi);

/// The same window set as best_upper_window, enumerated by fine level m'
/// (coarse candidates m <= floor(theta m')) over a prefix hull. Independent
/// route used to check the upper/spectrum identity; ties are not normalised.
std::optional<SlopeWindow> best_upper_window_by_fine(const Profile& p, const Rational& theta, Level lo,
                                                     Level hi);

}  // namespace fds
