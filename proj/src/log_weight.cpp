#include "postlab/log_weight.hpp"

#include <algorithm>
#include <cmath>

namespace postlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// lgamma(x) - [(x - 1/2) ln x - x + ln(2π)/2] for x >= 32; truncation error < 1e-17.
double stirling_correction(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12.0 -
              r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
}

// lgamma(a + 1) - lgamma(a - k + 1) - k ln(a + 1) + k, with z = a - k + 1 >= 32.
// Adding k ln(a + 1) - k back gives ln (a)_k; the split lets ratios cancel the
// large k ln(a + 1) terms analytically.
double falling_factorial_remainder(std::int64_t a, std::int64_t k) {
  const double y = static_cast<double>(a) + 1.0;
  const double z = static_cast<double>(a - k) + 1.0;
  const double kd = static_cast<double>(k);
  // (z - 1/2) ln(y / z) written as -(z - 1/2) ln(1 - k/y).
  return -(z - 0.5) * std::log1p(-kd / y) + stirling_correction(y) - stirling_correction(z);
}

bool use_direct_sum(std::int64_t m, std::int64_t k) { return k <= 64 || m - k + 1 < 32; }

// Neumaier-compensated sum of ln((m - j) / (m2 - j)) for j < k.
double direct_ratio_sum(std::int64_t m, std::int64_t m2, std::int64_t k) {
  double sum = 0.0;
  double comp = 0.0;
  for (std::int64_t j = 0; j < k; ++j) {
    const double term =
        std::log(static_cast<double>(m - j) / static_cast<double>(m2 - j));
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace

LogWeight LogWeight::from_linear(double x) {
  if (!(x >= 0.0)) throw std::domain_error("LogWeight::from_linear: negative or NaN input");
  return x == 0.0 ? zero() : LogWeight(std::log(x));
}

double LogWeight::linear() const { return is_zero() ? 0.0 : std::exp(value_); }

LogWeight log_add(LogWeight a, LogWeight b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const double hi = std::max(a.log(), b.log());
  const double lo = std::min(a.log(), b.log());
  return LogWeight(hi + std::log1p(std::exp(lo - hi)));
}

LogWeight log_sub(LogWeight a, LogWeight b) {
  if (b.is_zero()) return a;
  if (b > a) throw std::domain_error("log_sub: subtrahend exceeds minuend");
  if (a == b) return LogWeight::zero();
  return LogWeight(a.log() + std::log1p(-std::exp(b.log() - a.log())));
}

LogWeight log_sum_exp(std::span<const LogWeight> terms) {
  double hi = kNegInf;
  for (auto t : terms) hi = std::max(hi, t.log());
  if (hi == kNegInf) return LogWeight::zero();
  if (hi == std::numeric_limits<double>::infinity()) return LogWeight(hi);
  double acc = 0.0;
  for (auto t : terms) {
    if (!t.is_zero()) acc += std::exp(t.log() - hi);
  }
  return LogWeight(hi + std::log(acc));
}

double log_falling_factorial(std::int64_t a, std::int64_t k) {
  if (k < 0 || a < 0) throw std::domain_error("log_falling_factorial: negative argument");
  if (k > a) return kNegInf;
  if (k == 0) return 0.0;
  if (use_direct_sum(a, k)) {
    double s = 0.0;
    for (std::int64_t j = 0; j < k; ++j) s += std::log(static_cast<double>(a - j));
    return s;
  }
  const double kd = static_cast<double>(k);
  return falling_factorial_remainder(a, k) + kd * std::log(static_cast<double>(a) + 1.0) - kd;
}

LogWeight log_falling_factorial_ratio(std::int64_t m, std::int64_t m2, std::int64_t k) {
  if (m < 0 || k < 0) throw std::domain_error("log_falling_factorial_ratio: negative argument");
  if (m > m2) throw std::domain_error("log_falling_factorial_ratio: requires m <= m2");
  if (k > m2) throw std::domain_error("log_falling_factorial_ratio: requires k <= m2");
  if (k > m) return LogWeight::zero();
  if (k == 0) return LogWeight::one();
  if (use_direct_sum(m, k)) return LogWeight(direct_ratio_sum(m, m2, k));
  const double kd = static_cast<double>(k);
  const double lead = kd * std::log((static_cast<double>(m) + 1.0) / (static_cast<double>(m2) + 1.0));
  return LogWeight(falling_factorial_remainder(m, k) - falling_factorial_remainder(m2, k) + lead);
}

double BracketedValue::log_width() const {
  if (upper.is_zero()) return 0.0;
  if (lower.is_zero()) return std::numeric_limits<double>::infinity();
  return upper.log() - lower.log();
}

double BracketedValue::relative_width() const {
  if (upper.is_zero()) return 0.0;
  if (lower.is_zero()) return 1.0;
  return -std::expm1(lower.log() - upper.log());
}

LogWeight BracketedValue::midpoint() const {
  if (lower.is_zero()) return upper.is_zero() ? LogWeight::zero() : LogWeight(upper.log() - std::log(2.0));
  return LogWeight(lower.log() + std::log(0.5 * (1.0 + std::exp(upper.log() - lower.log()))));
}

BracketedValue widen(BracketedValue b, double slack) {
  if (!b.lower.is_zero()) b.lower = LogWeight(b.lower.log() - slack);
  if (!b.upper.is_zero()) b.upper = LogWeight(b.upper.log() + slack);
  return b;
}

BracketedValue bracket_add(BracketedValue a, BracketedValue b) {
  return widen({log_add(a.lower, b.lower), log_add(a.upper, b.upper)});
}

BracketedValue bracket_mul(BracketedValue a, BracketedValue b) {
  return widen({a.lower * b.lower, a.upper * b.upper});
}

MassBracket operator+(MassBracket a, MassBracket b) { return {a.lower + b.lower, a.upper + b.upper}; }

MassBracket operator*(MassBracket a, MassBracket b) {
  // Only used for nonnegative intervals.
  return {a.lower * b.lower, a.upper * b.upper};
}

MassBracket clamp_unit(MassBracket m) {
  m.lower = std::clamp(m.lower, 0.0, 1.0);
  m.upper = std::clamp(m.upper, 0.0, 1.0);
  return m;
}

namespace {

// 1 / (1 + e^t) without overflow.
double logistic_of_neg(double t) {
  if (t == std::numeric_limits<double>::infinity()) return 0.0;
  if (t == kNegInf) return 1.0;
  if (t > 0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

double share(LogWeight a, LogWeight b) {
  if (a.is_zero()) return 0.0;
  if (b.is_zero()) return 1.0;
  return logistic_of_neg(b.log() - a.log());
}

}  // namespace

MassBracket share_of(BracketedValue a, BracketedValue b) {
  MassBracket m{share(a.lower, b.upper), share(a.upper, b.lower)};
  m.lower *= (1.0 - kBracketSlack);
  m.upper = std::min(1.0, m.upper * (1.0 + kBracketSlack));
  return m;
}

}  // namespace postlab
