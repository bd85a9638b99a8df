#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fds/dyadic.hpp"
#include "fds/errors.hpp"
#include "fds/rational.hpp"
#include "fds/schedule.hpp"

namespace fds {

/// min{ s / (1 - theta), t } for 0 < s < t <= 1 and theta in (0,1).
/// Scalar is double or Rational; the Rational instantiation is exact.
template <typename Scalar>
Scalar closed_form_u(const Scalar& s, const Scalar& t, const Scalar& theta) {
  const Scalar zero(0);
  const Scalar one(1);
  if (!(zero < s && s < t && t <= one)) throw DomainError("closed form needs 0 < s < t <= 1");
  if (!(zero < theta && theta < one)) throw DomainError("theta must lie in (0,1)");
  Scalar rising = s / (one - theta);
  return rising < t ? rising : t;
}

/// max_i closed_form_u(s_i, t_i, theta): the finite truncation of sup_i u_i.
template <typename Scalar>
Scalar finite_sup_oracle(const std::vector<std::pair<Scalar, Scalar>>& params, const Scalar& theta) {
  if (params.empty()) throw DomainError("finite_sup_oracle needs at least one component");
  Scalar best = closed_form_u(params[0].first, params[0].second, theta);
  for (std::size_t i = 1; i < params.size(); ++i) {
    Scalar u = closed_form_u(params[i].first, params[i].second, theta);
    if (best < u) best = u;
  }
  return best;
}

struct TwoPhaseParams {
  Rational s;
  Rational t;
  Level m0 = 4;
  int blocks = 3;

  TwoPhaseParams(Rational s, Rational t, Level m0, int blocks);

  /// 1 - s/t: the quiet share of every block and the phase transition point.
  Rational quiet_fraction() const { return Rational(1) - s / t; }
};

/// Block boundaries M_0, M_1 = M_0^2, ..., M_K.
std::vector<Level> block_boundaries(const TwoPhaseParams& p);

/// Levels 1..M_0 carry c = 1. Block k covers (M_{k-1}, M_k] with length
/// L_k: its first floor(q L_k) levels are quiet (c = 1), the rest branch at
/// Beatty density t (c = 2 iff floor(t a) > floor(t (a-1)), a counted from 1
/// inside the active part).
BranchingSchedule two_phase_schedule(const TwoPhaseParams& p, Level max_depth = Level{1} << 22);

/// The first `count` rationals of (0,1) in Calkin-Wilf breadth-first order.
std::vector<Rational> rational_enumeration(std::size_t count);

/// Polynomial with constant-first coefficients.
class Polynomial {
 public:
  explicit Polynomial(std::vector<Rational> coefficients);
  static Polynomial parse(std::string_view csv);

  std::span<const Rational> coefficients() const { return coefficients_; }
  Rational operator()(const Rational& x) const;
  double operator()(double x) const;

 private:
  std::vector<Rational> coefficients_;
};

/// Finite samples of a spectrum target f at distinct points q_i, with f(0).
struct ConcaveTarget {
  std::vector<std::pair<Rational, Rational>> samples;  // (q_i, f(q_i))
  Rational f0;

  /// Checks the sample-level admissibility conditions; empty when admissible.
  std::vector<std::string> violations() const;
};

/// Samples f at the first `count` enumerated rationals.
ConcaveTarget sample_target(const Polynomial& f, std::size_t count);

/// Numeric check of the target hypotheses on [0,1]: f(0) > 0, concave,
/// non-decreasing, f <= f(0)(x + 1), range in [0,1]. Empty when admissible.
std::vector<std::string> check_admissible(const Polynomial& f, int grid_points = 2001);

/// Component i = two_phase_schedule(s_i = f_i (1 - q_i), t_i = f_i) at shift e_i, plus the origin.
CompositeSet concave_union(const ConcaveTarget& target, Level m0, int blocks, std::span<const Level> shifts);

/// (s_i, t_i) per sample.
std::vector<std::pair<Rational, Rational>> component_parameters(const ConcaveTarget& target);

/// e_i = 2^i (i from 1).
std::vector<Level> doubling_shifts(std::size_t count);
/// e_i = c * i (i from 1), c >= 1.
std::vector<Level> linear_shifts(std::size_t count, Level c);

/// {0} union {2^-k : 1 <= k <= depth}.
DyadicTree geometric_sequence_tree(Level depth);

}  // namespace fds
