#include "postlab/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace postlab {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_ccdf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

namespace {

// Acklam's coefficients.
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                         1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                         6.680131188771972e+01, -1.328068155288572e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                         -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                         3.754408661907416e+00};
constexpr double kLowBreak = 0.02425;

double acklam(double p) {
  if (p < kLowBreak) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
         (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

// p <= 0.5, so Φ(x) is evaluated where erfc has full relative precision.
double inv_lower(double p) {
  double x = acklam(p);
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inv_norm_cdf: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  // 1 - p is exact for p >= 0.5.
  return p < 0.5 ? inv_lower(p) : -inv_lower(1.0 - p);
}

InverseSquareTail inverse_square_tail(std::int64_t m) {
  if (m < 0) throw std::domain_error("inverse_square_tail: m must be nonnegative");
  double x = static_cast<double>(m) + 1.0;
  double head = 0.0;
  while (x < 20.0) {
    head += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  // Bernoulli series; the remainder has the sign of the first omitted term 7/(6x^15).
  const double series =
      r + 0.5 * r2 +
      r * r2 *
          (1.0 / 6.0 -
           r2 * (1.0 / 30.0 -
                 r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * (5.0 / 66.0 - r2 * 691.0 / 2730.0)))));
  const double omitted = 7.0 / 6.0 * r * std::pow(r2, 7);
  const double lo = head + series;
  const double hi = head + series + omitted;
  constexpr double eps = 8 * std::numeric_limits<double>::epsilon();
  return {lo * (1.0 - eps), hi * (1.0 + eps)};
}

InverseSquareTail inverse_cube_tail(std::int64_t m) {
  if (m < 0) throw std::domain_error("inverse_cube_tail: m must be nonnegative");
  double x = static_cast<double>(m) + 1.0;
  double head = 0.0;
  while (x < 20.0) {
    head += 1.0 / (x * x * x);
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  // Σ_{N >= x} N⁻³ = 1/(2x²) + 1/(2x³) + 1/(4x⁴) − 1/(12x⁶) + 1/(12x⁸) − 3/(20x¹⁰) + 5/(12x¹²) − …
  const double series =
      0.5 * r2 + 0.5 * r2 * r +
      r2 * r2 *
          (0.25 - r2 * (1.0 / 12.0 - r2 * (1.0 / 12.0 - r2 * (3.0 / 20.0 - r2 * 5.0 / 12.0))));
  const double omitted = 1.6454 * std::pow(r2, 7);
  constexpr double eps = 8 * std::numeric_limits<double>::epsilon();
  return {(head + series - omitted) * (1.0 - eps), (head + series) * (1.0 + eps)};
}

}  // namespace postlab
