#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "postlab/log_weight.hpp"
#include "postlab/quadrature.hpp"
#include "postlab/random.hpp"
#include "postlab/special_functions.hpp"

using namespace postlab;

TEST_CASE("inverse normal cdf matches reference quantiles") {
  CHECK(inv_norm_cdf(0.975) == doctest::Approx(1.95996398454005).epsilon(1e-13));
  CHECK(inv_norm_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(inv_norm_cdf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-11));
  CHECK_THROWS_AS(inv_norm_cdf(0.0), std::domain_error);
  CHECK_THROWS_AS(inv_norm_cdf(1.0), std::domain_error);
}

TEST_CASE("inverse normal cdf round trips through the cdf") {
  for (double p = 1e-12; p < 1.0; p = p < 0.01 ? p * 10 : p + 0.01) {
    const double z = inv_norm_cdf(p);
    CHECK(std::abs(normal_cdf(z) - p) <= 1e-9 * std::max(p, 1e-3));
  }
  for (double z : {-8.0, -3.0, 0.3, 2.5, 7.0}) CHECK(normal_cdf(z) + normal_ccdf(z) == doctest::Approx(1.0));
}

TEST_CASE("log_sum_exp is stable far from zero") {
  std::vector<LogWeight> t{LogWeight(-1000.0), LogWeight(-1000.5)};
  CHECK(log_sum_exp(t).log() == doctest::Approx(-999.5259230158199).epsilon(1e-15));
  std::vector<LogWeight> big{LogWeight(800.0), LogWeight(800.0)};
  CHECK(log_sum_exp(big).log() == doctest::Approx(800.0 + std::log(2.0)));
  CHECK(log_sum_exp({}).is_zero());
  std::vector<LogWeight> with_zero{LogWeight::zero(), LogWeight(1.5)};
  CHECK(log_sum_exp(with_zero).log() == 1.5);
}

TEST_CASE("log weight arithmetic") {
  const auto a = LogWeight::from_linear(3.0);
  const auto b = LogWeight::from_linear(2.0);
  CHECK((a * b).linear() == doctest::Approx(6.0));
  CHECK((a / b).linear() == doctest::Approx(1.5));
  CHECK(log_add(a, b).linear() == doctest::Approx(5.0));
  CHECK(log_sub(a, b).linear() == doctest::Approx(1.0));
  CHECK((a * LogWeight::zero()).is_zero());
  CHECK_THROWS_AS(a / LogWeight::zero(), std::domain_error);
  CHECK(LogWeight::from_linear(0.0).is_zero());
}

TEST_CASE("falling factorial ratio") {
  CHECK(log_falling_factorial_ratio(100, 200, 3).log() ==
        doctest::Approx(-2.094631707173811).epsilon(1e-14));
  CHECK(log_falling_factorial_ratio(5, 10, 0).log() == 0.0);
  CHECK(log_falling_factorial_ratio(2, 10, 3).is_zero());
  CHECK_THROWS_AS(log_falling_factorial_ratio(5, 10, 11), std::domain_error);
  CHECK_THROWS_AS(log_falling_factorial_ratio(11, 10, 2), std::domain_error);
  // Large arguments stay accurate: (m)_k/(m2)_k with m = 2N² − k style inputs.
  const std::int64_t m = 2'000'000'000'000;
  const double direct = std::log1p(-1.0 / static_cast<double>(m));
  CHECK(log_falling_factorial_ratio(m - 1, m, 1).log() == doctest::Approx(direct).epsilon(1e-9));
  CHECK(log_falling_factorial(10, 3) == doctest::Approx(std::log(720.0)));
}

TEST_CASE("brackets combine outward") {
  const auto a = BracketedValue{LogWeight(1.0), LogWeight(1.1)};
  const auto b = BracketedValue{LogWeight(2.0), LogWeight(2.05)};
  const auto s = bracket_add(a, b);
  CHECK(s.lower.log() <= std::log(std::exp(1.0) + std::exp(2.0)));
  CHECK(s.upper.log() >= std::log(std::exp(1.1) + std::exp(2.05)));
  const auto p = bracket_mul(a, b);
  CHECK(p.lower.log() <= 3.0);
  CHECK(p.upper.log() >= 3.15);
  const auto m = share_of(a, b);
  CHECK(m.lower <= 1.0 / (1.0 + std::exp(2.05 - 1.0)));
  CHECK(m.upper >= 1.0 / (1.0 + std::exp(2.0 - 1.1)));
  CHECK(m.lower >= 0.0);
  CHECK(m.upper <= 1.0);
  const auto z = share_of(BracketedValue::exact(LogWeight::zero()), b);
  CHECK(z.lower == 0.0);
  CHECK(z.upper == 0.0);
  CHECK(clamp_unit(MassBracket{-0.1, 1.2}).lower == 0.0);
}

TEST_CASE("adaptive Simpson integrates smooth and kinked functions with honest bounds") {
  auto r = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(std::abs(r.value() - 2.0) <= std::max(r.abs_error_bound, 1e-12));
  CHECK(r.abs_error_bound <= 1e-9);
  const double kink = 0.3;
  std::vector<double> breaks{kink};
  auto k = adaptive_simpson([&](double x) { return std::abs(x - kink); }, 0.0, 1.0, {}, breaks);
  CHECK(k.value() == doctest::Approx(0.5 * (kink * kink + 0.49)).epsilon(1e-12));
}

TEST_CASE("integrate_log handles huge magnitudes") {
  // ∫₀¹ e^{5000 x} dx = (e^{5000} − 1)/5000
  auto r = integrate_log([](double x) { return 5000.0 * x; }, 0.0, 1.0, {}, std::vector<double>{0.99, 0.999});
  const double expected = 5000.0 - std::log(5000.0);
  CHECK(r.log_value().log() == doctest::Approx(expected).epsilon(1e-10));
  const auto br = r.log_bracket();
  CHECK(br.lower.log() <= expected + 1e-9);
  CHECK(br.upper.log() >= expected - 1e-9);
  auto zero = integrate_log([](double) { return -std::numeric_limits<double>::infinity(); }, 0.0, 1.0);
  CHECK(zero.log_value().is_zero());
}

TEST_CASE("inverse power tails bracket zeta remainders") {
  const double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
  double head = 0.0;
  for (int N = 1; N <= 10; ++N) head += 1.0 / (N * N);
  const auto t = inverse_square_tail(10);
  CHECK(t.lower <= zeta2 - head + 1e-15);
  CHECK(t.upper >= zeta2 - head - 1e-15);
  CHECK(t.upper - t.lower < 1e-15);
  const double zeta3 = 1.2020569031595942;
  double head3 = 0.0;
  for (int N = 1; N <= 3; ++N) head3 += 1.0 / (N * N * N);
  const auto c = inverse_cube_tail(3);
  CHECK(c.lower <= zeta3 - head3 + 1e-15);
  CHECK(c.upper >= zeta3 - head3 - 1e-15);
}

TEST_CASE("random streams are deterministic and independent") {
  RandomStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
  }
  CHECK(a.counter() == 100);
  RandomStream u(7, 0);
  double sum = 0.0;
  const auto xs = uniform_stream(u, 20000);
  for (double x : xs) {
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    sum += x;
  }
  CHECK(sum / xs.size() == doctest::Approx(0.5).epsilon(0.01));
  RandomStream r(3, 0);
  for (int i = 0; i < 1000; ++i) CHECK(r.next_below(7) < 7);
}
