#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fds/dyadic.hpp"
#include "fds/rational.hpp"
#include "fds/schedule.hpp"

namespace fds {

/// Any set representation the estimators understand.
using SetModel = std::variant<DyadicTree, BranchingSchedule, CompositeSet>;

Level depth_of(const SetModel& set);

enum class EstimateMode { assouad_spectrum, upper_spectrum, box, quasi_assouad };

const char* to_string(EstimateMode mode);

struct Witness {
  Level m = 0;
  Level m_prime = 0;
  Index node = 0;
};

/// One estimate per grid point with the window (m, m') and node achieving it.
/// Box estimates have an empty grid, one value, and m_prime = 0.
struct SpectrumEstimate {
  EstimateMode mode = EstimateMode::assouad_spectrum;
  std::vector<Rational> theta_grid;
  std::vector<double> values;
  LevelRange m_range;
  std::vector<Witness> witnesses;
};

struct QuasiAssouadEstimate {
  std::vector<Rational> epsilons;  // as given
  SpectrumEstimate upper;          // upper spectrum at theta = 1 - epsilon, same order
  double headline = 0.0;           // value at the smallest epsilon
  Witness headline_witness;
  bool non_decreasing_as_epsilon_shrinks = true;
  std::string trend;
};

struct EstimatorOptions {
  NeighborMode neighbors = NeighborMode::off;
  unsigned workers = 1;
};

/// [max(1, floor(sqrt D)), D]; composites start at max shift + floor(sqrt D).
LevelRange default_range(const SetModel& set);
/// [max(1, floor(D/2)), D].
LevelRange default_box_range(const SetModel& set);

std::vector<Rational> default_epsilons();

/// Owns the precomputed window structure of one set; every method is const
/// and safe to call concurrently.
class SpectrumEstimator {
 public:
  explicit SpectrumEstimator(const SetModel& set, EstimatorOptions options = {});
  ~SpectrumEstimator();
  SpectrumEstimator(SpectrumEstimator&&) noexcept;
  SpectrumEstimator& operator=(SpectrumEstimator&&) noexcept;

  Level depth() const;
  const EstimatorOptions& options() const { return options_; }

  /// For each theta: max over m in range (clipped to m <= floor(theta D)) of alpha(m, ceil(m/theta)).
  SpectrumEstimate spectrum(std::span<const Rational> grid, std::optional<LevelRange> range = {}) const;
  /// For each theta: max over m in range and m' in [ceil(m/theta), D] of alpha(m, m').
  SpectrumEstimate upper(std::span<const Rational> grid, std::optional<LevelRange> range = {}) const;
  /// The upper spectrum recomputed as max over achievable ratios m/m' <= theta,
  /// by an enumeration independent of upper().
  SpectrumEstimate upper_by_ratio(std::span<const Rational> grid, std::optional<LevelRange> range = {}) const;
  /// max over m in range of log2 N(2^-m) / m.
  SpectrumEstimate box(std::optional<LevelRange> range = {}) const;
  QuasiAssouadEstimate quasi_assouad(std::span<const Rational> epsilons,
                                     std::optional<LevelRange> range = {}) const;

  /// The window exponent at (m, m'), maximised over nodes.
  SpectrumPoint window(Level m, Level m_prime) const;

  class Model;

 private:
  LevelRange coarse_range(std::optional<LevelRange> range) const;

  std::unique_ptr<Model> model_;
  EstimatorOptions options_;
  LevelRange default_range_;
  LevelRange default_box_range_;
};

SpectrumEstimate estimate_spectrum(const SetModel& set, std::span<const Rational> grid,
                                   std::optional<LevelRange> range = {}, EstimatorOptions options = {});
SpectrumEstimate estimate_upper(const SetModel& set, std::span<const Rational> grid,
                                std::optional<LevelRange> range = {}, EstimatorOptions options = {});
SpectrumEstimate estimate_box(const SetModel& set, std::optional<LevelRange> range = {},
                              EstimatorOptions options = {});
QuasiAssouadEstimate estimate_quasi_assouad(const SetModel& set, std::span<const Rational> epsilons,
                                            std::optional<LevelRange> range = {},
                                            EstimatorOptions options = {});

/// One checked relation. A failing outcome always carries at least one witness line.
struct CheckOutcome {
  std::string name;
  double worst = 0.0;  // largest violation margin seen (<= 0 means every case held with room)
  double tol = 0.0;
  bool passed = true;
  std::vector<std::string> witnesses;
};

struct VerificationReport {
  std::vector<CheckOutcome> checks;
  bool passed() const;
};

struct VerifyOptions {
  std::optional<LevelRange> m_range;
  std::optional<LevelRange> box_range;
  std::vector<Rational> epsilons = default_epsilons();
};

/// upper(theta) against the max over achievable ratios theta' <= theta; exact.
VerificationReport verify_main_theorem(const SpectrumEstimator& est, std::span<const Rational> grid,
                                       const VerifyOptions& opts = {});
/// spectrum(theta) <= box / (1 - theta) + tol.
VerificationReport verify_bound(const SpectrumEstimator& est, std::span<const Rational> grid, double tol,
                                const VerifyOptions& opts = {});
/// box <= spectrum + tol, spectrum <= upper (exact), upper <= quasi-Assouad + tol,
/// and upper non-decreasing along the grid (exact).
VerificationReport verify_chain(const SpectrumEstimator& est, std::span<const Rational> grid, double tol,
                                const VerifyOptions& opts = {});
/// spectrum(theta) <= spectrum(theta^(1/n)) + tol for each n.
VerificationReport verify_nthroot(const SpectrumEstimator& est, std::span<const Rational> grid,
                                  std::span<const int> n_values, double tol, const VerifyOptions& opts = {});

/// theta^(1/n), rationalised with denominator <= 10^6.
Rational nth_root(const Rational& theta, int n);

/// theta values a, a+c, ... <= b from an "a:b:c" spec; all strictly inside (0,1).
std::vector<Rational> parse_theta_grid(std::string_view spec);
LevelRange parse_level_range(std::string_view spec);

}  // namespace fds
