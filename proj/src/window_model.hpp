#pragma once

// Internal: one window structure per set representation. All estimators in
// spectra.cpp go through this interface, so a tree, a schedule and a
// composite answer the same four questions.

#include <memory>
#include <span>
#include <vector>

#include "fds/spectra.hpp"

namespace fds {

/// A window value with its witness. Ordering: larger value first, then the
/// smallest (m, m', node).
struct Candidate {
  double value = 0.0;
  Level m = 0;
  Level m_prime = 0;
  Index node = 0;
};

bool preferred(const Candidate& a, const Candidate& b);

class SpectrumEstimator::Model {
 public:
  virtual ~Model() = default;

  virtual Level depth() const = 0;
  /// log2 of the number of level-m intervals, m in [0, depth].
  virtual double log2_level_count(Level m) const = 0;
  /// Maximum over level-m nodes of the window exponent.
  virtual Candidate window(Level m, Level m_prime) const = 0;

  /// max over m in [lo, hi], m <= floor(theta D), of window(m, ceil(m/theta)).
  virtual Candidate spectrum(const Rational& theta, Level lo, Level hi) const = 0;
  /// max over m in [lo, hi] and m' in [ceil(m/theta), D].
  virtual Candidate upper(const Rational& theta, Level lo, Level hi) const = 0;
  /// The same maxima as upper(), one per grid point, computed by a
  /// different enumeration (by fine level or by ratio m/m').
  virtual std::vector<Candidate> upper_by_ratio(std::span<const Rational> grid, Level lo, Level hi) const = 0;
};

std::unique_ptr<SpectrumEstimator::Model> make_window_model(const SetModel& set, NeighborMode neighbors);

/// Largest tree depth the window table accepts.
inline constexpr Level kMaxTableDepth = 4096;

}  // namespace fds
