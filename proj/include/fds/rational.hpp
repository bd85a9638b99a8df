#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace fds {

/// Exact rational with 64-bit numerator and positive denominator, always
/// stored in lowest terms. Arithmetic throws DomainError on overflow.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t value) : num_(value) {}  // NOLINT: implicit by design of scalar templates
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Parses "3", "-0.25", "1/3" exactly.
  static Rational parse(std::string_view text);

  /// Best approximation with denominator <= max_den (continued fractions).
  static Rational approximate(double value, std::int64_t max_den);

  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(-num_, den_); }

  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.to_double(); }

/// ceil(m / theta) for theta in (0,1]: the fine level paired with coarse level m.
std::int64_t fine_level(std::int64_t m, const Rational& theta);

/// floor(theta * level): the largest coarse m with fine_level(m, theta) <= level.
std::int64_t max_coarse_level(std::int64_t level, const Rational& theta);

}  // namespace fds
