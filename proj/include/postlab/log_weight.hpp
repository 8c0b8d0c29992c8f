#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

namespace postlab {

/// Natural logarithm of a nonnegative real. log(0) is a regular value
/// (negative infinity), not an error: step densities produce zero likelihood.
class LogWeight {
 public:
  constexpr LogWeight() = default;
  constexpr explicit LogWeight(double log_value) : value_(log_value) {}

  static constexpr LogWeight zero() { return LogWeight(); }
  static constexpr LogWeight one() { return LogWeight(0.0); }
  static LogWeight from_linear(double x);

  constexpr double log() const { return value_; }
  double linear() const;
  constexpr bool is_zero() const { return value_ == -std::numeric_limits<double>::infinity(); }

  friend constexpr LogWeight operator*(LogWeight a, LogWeight b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return LogWeight(a.value_ + b.value_);
  }
  friend constexpr LogWeight operator/(LogWeight a, LogWeight b) {
    if (b.is_zero()) throw std::domain_error("LogWeight: division by zero weight");
    if (a.is_zero()) return zero();
    return LogWeight(a.value_ - b.value_);
  }
  LogWeight& operator*=(LogWeight other) { return *this = *this * other; }

  friend constexpr auto operator<=>(LogWeight a, LogWeight b) { return a.value_ <=> b.value_; }
  friend constexpr bool operator==(LogWeight a, LogWeight b) { return a.value_ == b.value_; }

 private:
  double value_ = -std::numeric_limits<double>::infinity();
};

/// log(e^a + e^b).
LogWeight log_add(LogWeight a, LogWeight b);

/// log(e^a - e^b); requires a >= b.
LogWeight log_sub(LogWeight a, LogWeight b);

/// log Σ e^{t_i} with max subtraction. Empty input gives log(0).
LogWeight log_sum_exp(std::span<const LogWeight> terms);

/// ln[(m)_k / (m2)_k] where (m)_k = m(m-1)...(m-k+1).
/// Returns log(0) when k > m; throws std::domain_error when k > m2 or m > m2.
LogWeight log_falling_factorial_ratio(std::int64_t m, std::int64_t m2, std::int64_t k);

/// lgamma(a + 1) - lgamma(a - k + 1) = ln (a)_k, accurate for large a.
double log_falling_factorial(std::int64_t a, std::int64_t k);

/// Outward slack (log units) applied each time two brackets are combined.
inline constexpr double kBracketSlack = 1e-13;

/// Certified interval of log-weights.
struct BracketedValue {
  LogWeight lower;
  LogWeight upper;

  /// upper - lower in log units (0 when both are log(0)).
  double log_width() const;
  /// (upper - lower) / upper on the linear scale.
  double relative_width() const;
  LogWeight midpoint() const;
  bool contains(LogWeight x) const { return lower <= x && x <= upper; }

  static BracketedValue exact(LogWeight v) { return {v, v}; }
};

/// Widen a bracket outward by the per-combine slack.
BracketedValue widen(BracketedValue b, double slack = kBracketSlack);

BracketedValue bracket_add(BracketedValue a, BracketedValue b);
BracketedValue bracket_mul(BracketedValue a, BracketedValue b);

/// Interval on the linear scale, used for posterior masses in [0, 1].
struct MassBracket {
  double lower = 0.0;
  double upper = 0.0;

  double mid() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }

  static MassBracket exact(double v) { return {v, v}; }
};

MassBracket operator+(MassBracket a, MassBracket b);
MassBracket operator*(MassBracket a, MassBracket b);
MassBracket clamp_unit(MassBracket m);

/// Mass of A relative to A + B, given brackets on log A and log B.
/// Monotone in each argument, so the endpoints pair opposite bounds.
MassBracket share_of(BracketedValue a, BracketedValue b);

}  // namespace postlab
