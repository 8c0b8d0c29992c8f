#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "postlab/barron.hpp"
#include "postlab/densities.hpp"
#include "postlab/random.hpp"
#include "postlab/special_functions.hpp"

using namespace postlab;

namespace {

struct Sample {
  SufficientStats stats;
  OccupancyStats occ;
};

Sample build(const std::vector<double>& xs, std::int64_t levels) {
  Sample s;
  s.occ.ensure_levels(levels, s.stats);
  for (double x : xs) update_stats(s.stats, s.occ, x);
  s.occ.ensure_levels(levels, s.stats);
  return s;
}

// All C(2N², N²) members of F_N, by bitmask over the 2N² cells.
std::vector<StepDensity> enumerate_level(std::int64_t N) {
  const int cells = static_cast<int>(cell_count(N));
  std::vector<StepDensity> out;
  for (unsigned mask = 0; mask < (1u << cells); ++mask) {
    if (std::popcount(mask) != N * N) continue;
    std::vector<std::int64_t> sel;
    for (int j = 0; j < cells; ++j)
      if (mask & (1u << j)) sel.push_back(j);
    out.emplace_back(N, sel);
  }
  return out;
}

}  // namespace

TEST_CASE("prior normalizer and level weights") {
  CHECK(std::exp(BarronPriorConfig::log_z0()) == doctest::Approx(0.148495506775922).epsilon(1e-13));
  CHECK(BarronPriorConfig::step_level_weight(1) == doctest::Approx(6.0 / (std::numbers::pi * std::numbers::pi)));
  double head = 0.0;
  const std::int64_t M = 1000;
  for (std::int64_t N = 1; N <= M; ++N) head += BarronPriorConfig::step_level_weight(N);
  const auto tail = inverse_square_tail(M);
  const double c = 6.0 / (std::numbers::pi * std::numbers::pi);
  CHECK(head + c * tail.lower <= 1.0 + 1e-12);
  CHECK(head + c * tail.upper >= 1.0 - 1e-12);
  CHECK_THROWS(BarronPriorConfig{1.5}.validate());
}

TEST_CASE("step term oracle") {
  const auto t = log_step_term(2, 3, 3, true);
  CHECK(t.log() == doctest::Approx(-2.443610451526059).epsilon(1e-13));
  CHECK(t.linear() == doctest::Approx(0.08684672883628952).epsilon(1e-13));
  CHECK(log_step_term(1, 2, 2, true).is_zero());
  CHECK_THROWS_AS(log_step_term(2, 4, 3, true), std::domain_error);
}

TEST_CASE("merge_limit bounds the level at which two points can share a cell") {
  CHECK(merge_limit(0.3) == 1);
  CHECK(merge_limit(0.1) == 2);
  CHECK(merge_limit(1e-6) == 707);
  CHECK(merge_limit(0.0) == std::numeric_limits<std::int64_t>::max());
}

TEST_CASE("incremental occupancy matches recomputation") {
  RandomStream rs(5, 0);
  auto xs = uniform_stream(rs, 400);
  xs.push_back(xs[10]);  // a duplicate
  xs.push_back(std::nextafter(xs[20], 1.0));
  Sample s = build(xs, 64);
  const auto fresh = OccupancyStats::recompute(s.stats, 64);
  for (std::int64_t N = 1; N <= 64; ++N) {
    CHECK(s.occ.occupied(N) == fresh.occupied(N));
    std::vector<std::int64_t> cells;
    for (double x : s.stats.sorted_points()) cells.push_back(cell_index(x, N));
    std::sort(cells.begin(), cells.end());
    const auto k = std::unique(cells.begin(), cells.end()) - cells.begin();
    CHECK(s.occ.occupied(N) == k);
  }
  CHECK(s.stats.distinct_count() == 401);
  CHECK(s.occ.distinct_level() == fresh.distinct_level());
}

TEST_CASE("truncation policy") {
  TruncationPolicy p;
  CHECK(p.resolve(0, 1) == 1);
  CHECK(p.resolve(10, 3) == 40);
  CHECK(p.resolve(10, 500) == 500);
  TruncationPolicy fixed{7};
  CHECK(fixed.resolve(100, 3) == 7);
  TruncationPolicy capped{0, 4.0, 100};
  CHECK_THROWS_AS(capped.resolve(1000, 3), NumericError);
}

TEST_CASE("step marginal equals brute force over levels one and two") {
  std::vector<StepDensity> family[3];
  family[1] = enumerate_level(1);
  family[2] = enumerate_level(2);
  REQUIRE(family[1].size() + family[2].size() == 72);

  RandomStream rs(2024, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rs.next_below(4);
    const auto xs = uniform_stream(rs, n);
    Sample s = build(xs, 2);
    std::vector<LogWeight> terms;
    for (std::int64_t N = 1; N <= 2; ++N) {
      const double per = BarronPriorConfig::step_level_weight(N) / static_cast<double>(family[N].size());
      for (const auto& f : family[N]) {
        double lik = 1.0;
        for (double x : xs) lik *= step_pdf(f, x);
        terms.push_back(LogWeight::from_linear(per * lik));
      }
    }
    const auto brute = log_sum_exp(terms);
    const auto fast = step_partial_sum(s.occ, n, true, 1, 2);
    if (brute.is_zero()) {
      CHECK(fast.is_zero());
    } else {
      CHECK(std::abs(fast.log() - brute.log()) <= 1e-10);
    }
  }
}

TEST_CASE("prior mass of data-consistent step densities at n = 1 is one half") {
  Sample s = build({0.37}, 8);
  const auto m = step_marginal(s.occ, 1, false, 8);
  const double lo = m.lower.linear();
  const double hi = m.upper.linear();
  CHECK(lo <= 0.5);
  CHECK(hi >= 0.5);
  CHECK(hi - lo < 1e-12);
  // With the likelihood the step component predicts the uniform exactly.
  const auto w = step_marginal(s.occ, 1, true, 8);
  CHECK(w.lower.linear() <= 1.0 + 1e-15);
  CHECK(w.upper.linear() >= 1.0 - 1e-15);
}

TEST_CASE("step marginal rejects truncation below the distinct level") {
  Sample s = build({0.1, 0.1000001}, 4);
  CHECK_THROWS_AS(step_marginal(s.occ, 2, true, 4), std::domain_error);
}

TEST_CASE("gauss marginal") {
  Sample one = build({0.5}, 1);
  const auto q = gauss_marginal(one.stats);
  CHECK(q.value() == doctest::Approx(0.486198146770611).epsilon(1e-10));
  Sample none = build({}, 1);
  CHECK(gauss_marginal(none.stats).value() == 1.0);
}

TEST_CASE("theta posterior and KL support") {
  const auto ball = ThetaPosterior::prior_kl_ball_mass(0.1);
  CHECK(std::abs(ball.mid() - 2.5793645537109742e-6) < 1e-15);
  CHECK(ball.lower > 0.0);
  const auto all = ThetaPosterior::prior_kl_ball_mass(1.0);
  CHECK(all.mid() == doctest::Approx(1.0));

  RandomStream rs(9, 0);
  const auto xs = sample_gauss_exp(GaussExpDensity(0.5), rs, 2000);
  Sample s = build(xs, 1);
  ThetaPosterior post(s.stats);
  const auto m = post.interval_mass(0.4, 0.6);
  CHECK(m.lower > 0.9);
  CHECK(m.upper <= 1.0);
  const auto whole = post.interval_mass(0.0, 1.0);
  CHECK(whole.mid() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("posterior split is complementary") {
  RandomStream rs(1, 0);
  BarronEngine engine;
  engine.add(uniform_stream(rs, 200));
  const auto split = engine.split();
  CHECK(split.mass_step.lower + split.mass_f0.upper == doctest::Approx(1.0));
  CHECK(split.mass_step.upper + split.mass_f0.lower == doctest::Approx(1.0));
  CHECK(split.mass_step.width() < 1e-9);
  CHECK(engine.truncation_level() == 800);
}

TEST_CASE("level posterior sums to one and the prior mean of 1/N is 6 zeta(3)/pi^2") {
  CHECK(prior_mean_inverse_level() == doctest::Approx(6.0 * 1.2020569031595942 / (std::numbers::pi * std::numbers::pi)));
  RandomStream rs(4, 0);
  Sample s = build(uniform_stream(rs, 30), 120);
  const auto lp = posterior_over_N(s.occ, 30, 120);
  double lo = lp.tail.lower, hi = lp.tail.upper;
  for (const auto& w : lp.weights) {
    lo += w.lower;
    hi += w.upper;
  }
  CHECK(lo <= 1.0 + 1e-9);
  CHECK(hi >= 1.0 - 1e-9);
  Sample empty = build({}, 50);
  const auto prior = posterior_over_N(empty.occ, 0, 50);
  CHECK(prior.mean_inverse_level.mid() == doctest::Approx(prior_mean_inverse_level()).epsilon(1e-6));
}

TEST_CASE("Hellinger ball mass includes the whole step component below the step distance") {
  RandomStream rs(6, 0);
  BarronEngine engine;
  engine.add(uniform_stream(rs, 100));
  const auto split = engine.split();
  const auto h = hellinger_ball_mass(engine.stats(), engine.occupancy(), engine.prior(),
                                     engine.truncation_level(), 0.5);
  CHECK(h.upper >= split.mass_step.lower);
  const auto none = hellinger_ball_mass(engine.stats(), engine.occupancy(), engine.prior(),
                                        engine.truncation_level(), 1.5);
  CHECK(none.upper == 0.0);
}

TEST_CASE("prior predictive of the step component is uniform") {
  Sample s = build({}, 16);
  for (double x : {0.001, 0.25, 0.5, 0.77, 0.999}) {
    const auto d = step_predictive_density(s.stats, s.occ, 16, x);
    CHECK(d.lower <= 1.0 + 1e-9);
    CHECK(d.upper >= 1.0 - 1e-9);
  }
}
