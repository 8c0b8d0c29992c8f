#include "postlab/barron.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "postlab/special_functions.hpp"

namespace postlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
const double kLogLevelNorm = std::log(6.0 / (std::numbers::pi * std::numbers::pi));

inline std::int64_t fast_cell(double x, std::int64_t N) {
  return static_cast<std::int64_t>(x * static_cast<double>(2 * N * N));
}

}  // namespace

// ---------------------------------------------------------------------------
// Prior

void BarronPriorConfig::validate() const {
  if (!(continuous_weight >= 0.0 && continuous_weight <= 1.0))
    throw std::domain_error("BarronPriorConfig: continuous_weight must lie in [0, 1]");
}

double BarronPriorConfig::step_level_weight(std::int64_t N) {
  return std::exp(log_step_level_weight(N));
}

double BarronPriorConfig::log_step_level_weight(std::int64_t N) {
  if (N < 1) throw std::domain_error("step level must be positive");
  return kLogLevelNorm - 2.0 * std::log(static_cast<double>(N));
}

double BarronPriorConfig::log_z0() {
  static const double value = [] {
    QuadratureOptions opts;
    opts.rel_tol = 1e-13;
    const auto r = integrate_log(
        [](double u) { return u <= 0.0 ? kNegInf : -1.0 / (u * u) + std::log(2.0 * u); }, 0.0,
        1.0, opts);
    return r.log_value().log();
  }();
  return value;
}

double BarronPriorConfig::theta_prior_log_density(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("theta must lie in [0, 1]");
  if (theta == 0.0) return kNegInf;
  return -1.0 / theta - log_z0();
}

// ---------------------------------------------------------------------------
// Occupancy

std::int64_t merge_limit(double gap) {
  constexpr double margin = 0x1.0p-52;
  const double g = gap - margin;
  if (!(g > 0.0)) return std::numeric_limits<std::int64_t>::max();
  const double v = 1.0 / (2.0 * g);
  if (v > 4e18) return std::numeric_limits<std::int64_t>::max();
  auto N = static_cast<std::int64_t>(std::floor(std::sqrt(v)));
  auto fits = [g](std::int64_t k) {
    const double kd = static_cast<double>(k);
    return 2.0 * kd * kd * g <= 1.0;
  };
  while (fits(N + 1)) ++N;
  while (N > 0 && !fits(N)) --N;
  return N;
}

std::int64_t OccupancyStats::occupied(std::int64_t N) const {
  if (N < 1) throw std::domain_error("occupied: level must be positive");
  if (N >= distinct_level_) return distinct_points_;
  if (N > levels_)
    throw std::domain_error("occupied: level " + std::to_string(N) + " is not maintained");
  return distinct_points_ - merges_[static_cast<std::size_t>(N)];
}

void OccupancyStats::apply_pair(double lo, double hi, std::int64_t sign) {
  const std::int64_t upto = std::min(merge_limit(hi - lo), levels_);
  for (std::int64_t N = 1; N <= upto; ++N) {
    if (fast_cell(lo, N) == fast_cell(hi, N)) merges_[static_cast<std::size_t>(N)] += sign;
  }
}

void OccupancyStats::refresh_distinct_level(double min_gap) {
  if (distinct_points_ <= 1) {
    distinct_level_ = 1;
    return;
  }
  const std::int64_t limit = merge_limit(min_gap);
  distinct_level_ =
      limit == std::numeric_limits<std::int64_t>::max() ? limit : std::max<std::int64_t>(1, limit + 1);
}

OccupancyStats OccupancyStats::recompute(const SufficientStats& stats, std::int64_t levels) {
  OccupancyStats occ;
  occ.levels_ = std::max<std::int64_t>(levels, 0);
  occ.merges_.assign(static_cast<std::size_t>(occ.levels_) + 1, 0);
  occ.distinct_points_ = static_cast<std::int64_t>(stats.distinct_count());
  const auto& pts = stats.sorted_points();
  bool have_prev = false;
  double prev = 0.0;
  for (double x : pts) {
    if (have_prev && x == prev) continue;
    if (have_prev) occ.apply_pair(prev, x, +1);
    prev = x;
    have_prev = true;
  }
  occ.refresh_distinct_level(stats.min_gap());
  return occ;
}

void OccupancyStats::ensure_levels(std::int64_t L, const SufficientStats& stats) {
  if (L <= levels_) return;
  *this = recompute(stats, std::max(L, 2 * levels_));
}

void update_stats(SufficientStats& stats, OccupancyStats& occ, double x_new) {
  if (!(x_new > 0.0 && x_new < 1.0)) throw std::domain_error("update_stats: x must lie in (0, 1)");
  const double z = inv_norm_cdf(x_new);
  // Neumaier summation keeps S_n reproducible to the last bits over long runs.
  const double t = stats.sum_probit_ + z;
  if (std::abs(stats.sum_probit_) >= std::abs(z)) {
    stats.comp_ += (stats.sum_probit_ - t) + z;
  } else {
    stats.comp_ += (z - t) + stats.sum_probit_;
  }
  stats.sum_probit_ = t;
  ++stats.n_;
  // Fold the compensation in once per update so sum_probit() is the corrected value.
  const double corrected = stats.sum_probit_ + stats.comp_;
  stats.comp_ -= corrected - stats.sum_probit_;
  stats.sum_probit_ = corrected;

  auto& pts = stats.points_;
  const bool duplicate = pts.count(x_new) > 0;
  pts.insert(x_new);
  if (duplicate) return;

  ++stats.distinct_;
  ++occ.distinct_points_;
  const auto lo = pts.lower_bound(x_new);
  const auto hi = pts.upper_bound(x_new);
  const bool has_prev = lo != pts.begin();
  const bool has_next = hi != pts.end();
  const double prev = has_prev ? *std::prev(lo) : 0.0;
  const double next = has_next ? *hi : 0.0;
  if (has_prev && has_next) occ.apply_pair(prev, next, -1);
  if (has_prev) {
    occ.apply_pair(prev, x_new, +1);
    stats.min_gap_ = std::min(stats.min_gap_, x_new - prev);
  }
  if (has_next) {
    occ.apply_pair(x_new, next, +1);
    stats.min_gap_ = std::min(stats.min_gap_, next - x_new);
  }
  occ.refresh_distinct_level(stats.min_gap_);
}

std::int64_t TruncationPolicy::resolve(std::size_t n, std::int64_t distinct_level) const {
  std::int64_t M = fixed_level;
  if (M <= 0) {
    const double scaled = std::ceil(levels_per_n * static_cast<double>(n));
    M = std::max<std::int64_t>({distinct_level, static_cast<std::int64_t>(scaled), 1});
  }
  if (M > max_level)
    throw NumericError("truncation level " + std::to_string(M) + " exceeds the cap " +
                       std::to_string(max_level) + " (near-duplicate sample points)");
  return M;
}

// ---------------------------------------------------------------------------
// Step component

LogWeight log_step_term(std::int64_t N, std::int64_t k, std::size_t n, bool with_likelihood) {
  if (N < 1) throw std::domain_error("log_step_term: level must be positive");
  if (k < 0 || k > static_cast<std::int64_t>(n))
    throw std::domain_error("log_step_term: occupancy k must satisfy 0 <= k <= n");
  const std::int64_t half = N * N;
  if (k > 2 * half) throw std::domain_error("log_step_term: occupancy exceeds cell count");
  const LogWeight ratio = log_falling_factorial_ratio(half, 2 * half, k);
  if (ratio.is_zero()) return LogWeight::zero();
  const double lik = with_likelihood ? static_cast<double>(n) * std::numbers::ln2 : 0.0;
  return LogWeight(BarronPriorConfig::log_step_level_weight(N) + lik + ratio.log());
}

LogWeight step_partial_sum(const OccupancyStats& occ, std::size_t n, bool with_likelihood,
                           std::int64_t lo, std::int64_t hi) {
  if (lo < 1 || hi < lo) throw std::domain_error("step_partial_sum: invalid level range");
  std::vector<LogWeight> terms;
  terms.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t N = lo; N <= hi; ++N) {
    terms.push_back(log_step_term(N, occ.occupied(N), n, with_likelihood));
  }
  return log_sum_exp(terms);
}

namespace {

void check_truncation(const OccupancyStats& occ, std::int64_t M) {
  if (M < occ.distinct_level())
    throw std::domain_error("step_marginal: truncation level " + std::to_string(M) +
                            " is below N_distinct = " + std::to_string(occ.distinct_level()));
  if (M > occ.maintained_levels() && occ.distinct_level() > occ.maintained_levels() + 1)
    throw std::domain_error("step_marginal: truncation level exceeds maintained levels");
}

double head_slack(std::int64_t M) { return 4.0 * kEps * static_cast<double>(M) + kBracketSlack; }

}  // namespace

BracketedValue step_tail(const OccupancyStats& occ, std::size_t n, bool with_likelihood,
                         std::int64_t M) {
  check_truncation(occ, M);
  // For N > M ≥ N_distinct every distinct point occupies its own cell, so each
  // term is (6/π²N²)·2ⁿ·r(N) with r(N) = (N²)_k/(2N²)_k. Each factor
  // (N² − j)/(2N² − j) increases with N, so r(M + 1) ≤ r(N) ≤ 2^{−k}.
  const std::int64_t k = occ.distinct_points();
  const std::int64_t Mp = M + 1;
  const auto psi = inverse_square_tail(M);
  const double lik = with_likelihood ? static_cast<double>(n) * std::numbers::ln2 : 0.0;
  const LogWeight r_first = log_falling_factorial_ratio(Mp * Mp, 2 * Mp * Mp, k);
  BracketedValue tail;
  tail.lower = r_first.is_zero() ? LogWeight::zero()
                                 : LogWeight(kLogLevelNorm + std::log(psi.lower) + lik + r_first.log());
  tail.upper = LogWeight(kLogLevelNorm + std::log(psi.upper) + lik -
                         static_cast<double>(k) * std::numbers::ln2);
  return widen(tail);
}

BracketedValue step_marginal(const OccupancyStats& occ, std::size_t n, bool with_likelihood,
                             std::int64_t M) {
  check_truncation(occ, M);
  const LogWeight head = step_partial_sum(occ, n, with_likelihood, 1, M);
  const BracketedValue head_b = widen(BracketedValue::exact(head), head_slack(M));
  return bracket_add(head_b, step_tail(occ, n, with_likelihood, M));
}

// ---------------------------------------------------------------------------
// Continuous component

namespace {

// d/du of −1/u² − n u² + √2 S u + ln(2u); strictly decreasing in u.
double log_integrand_slope(double u, double n, double s) {
  return 2.0 / (u * u * u) - 2.0 * n * u + std::numbers::sqrt2 * s + 1.0 / u;
}

double find_peak(double n, double s) {
  if (log_integrand_slope(1.0, n, s) >= 0.0) return 1.0;
  double lo = 1e-6;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (log_integrand_slope(mid, n, s) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> peak_breakpoints(double peak, double width, double lo, double hi) {
  std::vector<double> b{peak};
  for (double k : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    b.push_back(peak - k * width);
    b.push_back(peak + k * width);
  }
  std::erase_if(b, [&](double x) { return !(x > lo && x < hi); });
  return b;
}

}  // namespace

ThetaPosterior::ThetaPosterior(std::size_t n, double sum_probit, double tol)
    : n_(n), sum_probit_(sum_probit), tol_(tol) {
  const double nd = static_cast<double>(n);
  peak_u_ = find_peak(nd, sum_probit);
  const double u = peak_u_;
  width_u_ = 1.0 / std::sqrt(6.0 / (u * u * u * u) + 2.0 * nd + 1.0 / (u * u));
}

double ThetaPosterior::log_integrand_u(double u) const {
  if (u <= 0.0) return kNegInf;
  const double nd = static_cast<double>(n_);
  return -1.0 / (u * u) - nd * u * u + std::numbers::sqrt2 * sum_probit_ * u + std::log(2.0 * u);
}

double ThetaPosterior::log_density(double theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("theta must lie in [0, 1]");
  if (theta == 0.0) return kNegInf;
  const double nd = static_cast<double>(n_);
  return -1.0 / theta - nd * theta + std::sqrt(2.0 * theta) * sum_probit_;
}

BracketedValue ThetaPosterior::integral_u(double lo, double hi) const {
  if (!(hi > lo)) return BracketedValue::exact(LogWeight::zero());
  QuadratureOptions opts;
  opts.rel_tol = tol_;
  const auto breaks = peak_breakpoints(peak_u_, width_u_, lo, hi);
  const auto r = integrate_log([this](double u) { return log_integrand_u(u); }, lo, hi, opts, breaks);
  return r.log_bracket();
}

MassBracket ThetaPosterior::u_set_mass(std::span<const UInterval> set) const {
  std::vector<UInterval> inside;
  for (auto iv : set) {
    const double lo = std::clamp(iv.lo, 0.0, 1.0);
    const double hi = std::clamp(iv.hi, 0.0, 1.0);
    if (hi > lo) inside.push_back({lo, hi});
  }
  std::sort(inside.begin(), inside.end(), [](auto a, auto b) { return a.lo < b.lo; });
  if (inside.empty()) return {0.0, 0.0};
  std::vector<UInterval> outside;
  double cursor = 0.0;
  for (auto iv : inside) {
    if (iv.lo < cursor) throw std::domain_error("u_set_mass: intervals overlap");
    if (iv.lo > cursor) outside.push_back({cursor, iv.lo});
    cursor = iv.hi;
  }
  if (cursor < 1.0) outside.push_back({cursor, 1.0});
  if (outside.empty()) return {1.0, 1.0};

  auto total = [this](const std::vector<UInterval>& pieces) {
    BracketedValue acc = BracketedValue::exact(LogWeight::zero());
    for (auto iv : pieces) acc = bracket_add(acc, integral_u(iv.lo, iv.hi));
    return acc;
  };
  return share_of(total(inside), total(outside));
}

BracketedValue ThetaPosterior::log_u_set_integral(std::span<const UInterval> set) const {
  BracketedValue acc = BracketedValue::exact(LogWeight::zero());
  for (auto iv : set) {
    const double lo = std::clamp(iv.lo, 0.0, 1.0);
    const double hi = std::clamp(iv.hi, 0.0, 1.0);
    if (hi > lo) acc = bracket_add(acc, integral_u(lo, hi));
  }
  return acc;
}

BracketedValue ThetaPosterior::prior_log_u_set_mass(std::span<const UInterval> set, double tol) {
  const BracketedValue raw = ThetaPosterior(0, 0.0, tol).log_u_set_integral(set);
  const auto z0 = BracketedValue::exact(LogWeight(-BarronPriorConfig::log_z0()));
  return widen(bracket_mul(raw, z0));
}

MassBracket ThetaPosterior::interval_mass(double theta_lo, double theta_hi) const {
  if (!(theta_lo >= 0.0 && theta_hi <= 1.0 && theta_lo <= theta_hi))
    throw std::domain_error("interval_mass: requires 0 <= lo <= hi <= 1");
  const UInterval iv{std::sqrt(theta_lo), std::sqrt(theta_hi)};
  return u_set_mass({&iv, 1});
}

MassBracket ThetaPosterior::prior_u_set_mass(std::span<const UInterval> set, double tol) {
  return ThetaPosterior(0, 0.0, tol).u_set_mass(set);
}

MassBracket ThetaPosterior::prior_kl_ball_mass(double delta, double tol) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::domain_error("prior_kl_ball_mass: delta must lie in (0, 1]");
  const UInterval iv{0.0, std::sqrt(delta)};
  return prior_u_set_mass({&iv, 1}, tol);
}

QuadratureResult gauss_marginal(const SufficientStats& stats, double tol) {
  if (stats.n() == 0) return {1.0, 0.0, 0, 0.0};
  const ThetaPosterior post(stats, tol);
  QuadratureOptions opts;
  opts.rel_tol = tol;
  const auto breaks = peak_breakpoints(post.peak_u(), 1.0 / std::sqrt(2.0 * stats.n() + 6.0 /
                                           std::pow(post.peak_u(), 4)), 0.0, 1.0);
  const double nd = static_cast<double>(stats.n());
  const double s = stats.sum_probit();
  auto r = integrate_log(
      [nd, s](double u) {
        if (u <= 0.0) return kNegInf;
        return -1.0 / (u * u) - nd * u * u + std::numbers::sqrt2 * s * u + std::log(2.0 * u);
      },
      0.0, 1.0, opts, breaks);
  r.log_scale -= BarronPriorConfig::log_z0();
  return r;
}

// ---------------------------------------------------------------------------
// Posterior summaries

PosteriorSplit posterior_split(const SufficientStats& stats, const OccupancyStats& occ,
                               const BarronPriorConfig& cfg, std::int64_t M, double tol) {
  cfg.validate();
  const BracketedValue gauss = gauss_marginal(stats, tol).log_bracket();
  const BracketedValue step = step_marginal(occ, stats.n(), true, M);
  const auto w = BracketedValue::exact(LogWeight::from_linear(cfg.continuous_weight));
  const auto w_step = BracketedValue::exact(LogWeight::from_linear(1.0 - cfg.continuous_weight));
  PosteriorSplit out;
  out.log_f0_part = bracket_mul(w, gauss);
  out.log_step_part = bracket_mul(w_step, step);
  if (out.log_f0_part.upper.is_zero() && out.log_step_part.upper.is_zero())
    throw NumericError("posterior_split: both components have zero marginal likelihood");
  out.mass_step = share_of(out.log_step_part, out.log_f0_part);
  out.mass_f0 = {1.0 - out.mass_step.upper, 1.0 - out.mass_step.lower};
  out.log_evidence = bracket_add(out.log_f0_part, out.log_step_part);
  return out;
}

double prior_mean_inverse_level() {
  constexpr double zeta3 = 1.2020569031595942;
  return 6.0 * zeta3 / (std::numbers::pi * std::numbers::pi);
}

LevelPosterior posterior_over_N(const OccupancyStats& occ, std::size_t n, std::int64_t M) {
  const BracketedValue total = step_marginal(occ, n, true, M);
  if (total.upper.is_zero()) throw NumericError("posterior_over_N: step marginal is zero");
  LevelPosterior out;
  out.weights.reserve(static_cast<std::size_t>(M));
  std::vector<LogWeight> inv_terms;
  inv_terms.reserve(static_cast<std::size_t>(M));
  auto ratio = [](LogWeight num, LogWeight den) {
    return num.is_zero() ? 0.0 : std::min(1.0, std::exp(num.log() - den.log()));
  };
  for (std::int64_t N = 1; N <= M; ++N) {
    const LogWeight t = log_step_term(N, occ.occupied(N), n, true);
    out.weights.push_back({ratio(t, total.upper) * (1 - 1e-12), ratio(t, total.lower) * (1 + 1e-12)});
    inv_terms.push_back(t.is_zero() ? t : LogWeight(t.log() - std::log(static_cast<double>(N))));
  }
  const BracketedValue tail = step_tail(occ, n, true, M);
  out.tail = {ratio(tail.lower, total.upper), ratio(tail.upper, total.lower)};

  // Σ_{N>M} term_N / N, bracketed like the tail with Σ N⁻³ in place of Σ N⁻².
  const std::int64_t k = occ.distinct_points();
  const std::int64_t Mp = M + 1;
  const auto cube = inverse_cube_tail(M);
  const double lik = static_cast<double>(n) * std::numbers::ln2;
  const LogWeight r_first = log_falling_factorial_ratio(Mp * Mp, 2 * Mp * Mp, k);
  BracketedValue inv_tail;
  inv_tail.lower = r_first.is_zero() ? LogWeight::zero()
                                     : LogWeight(kLogLevelNorm + std::log(cube.lower) + lik + r_first.log());
  inv_tail.upper = LogWeight(kLogLevelNorm + std::log(cube.upper) + lik -
                             static_cast<double>(k) * std::numbers::ln2);
  const auto head = widen(BracketedValue::exact(log_sum_exp(inv_terms)), head_slack(M));
  const auto num = bracket_add(head, widen(inv_tail));
  out.mean_inverse_level = {ratio(num.lower, total.upper), ratio(num.upper, total.lower)};
  return out;
}

MassBracket hellinger_ball_mass(const SufficientStats& stats, const OccupancyStats& occ,
                                const BarronPriorConfig& cfg, std::int64_t M, double eps,
                                double tol) {
  if (!(eps > 0.0)) throw std::domain_error("hellinger_ball_mass: eps must be positive");
  if (eps >= std::numbers::sqrt2) return {0.0, 0.0};
  const PosteriorSplit split = posterior_split(stats, occ, cfg, M, tol);
  const double step_distance = std::sqrt(2.0 - std::numbers::sqrt2);
  const MassBracket step_part = eps < step_distance ? split.mass_step : MassBracket{0.0, 0.0};
  // d_h(f₀, f_θ)² = 2 − 2e^{−θ/4} exceeds ε² iff θ > −4 ln(1 − ε²/2).
  const double threshold = -4.0 * std::log1p(-0.5 * eps * eps);
  MassBracket f0_part{0.0, 0.0};
  if (threshold < 1.0) {
    const ThetaPosterior post(stats, tol);
    f0_part = split.mass_f0 * post.interval_mass(threshold, 1.0);
  }
  return clamp_unit(step_part + f0_part);
}

// ---------------------------------------------------------------------------
// Predictive density of the step component

namespace {

struct PredictiveTable {
  std::vector<double> log_terms;  // log term_N, N = 1..M
  std::vector<std::int64_t> occupancy;
  double log_max = kNegInf;
  BracketedValue tail;
  std::int64_t M = 0;
  std::int64_t k_tail = 0;
};

PredictiveTable build_predictive(const SufficientStats& stats, const OccupancyStats& occ,
                                 std::int64_t M) {
  PredictiveTable t;
  t.M = M;
  t.tail = step_tail(occ, stats.n(), true, M);
  t.k_tail = occ.distinct_points();
  t.log_terms.resize(static_cast<std::size_t>(M));
  t.occupancy.resize(static_cast<std::size_t>(M));
  for (std::int64_t N = 1; N <= M; ++N) {
    const std::int64_t k = occ.occupied(N);
    const LogWeight term = log_step_term(N, k, stats.n(), true);
    t.log_terms[static_cast<std::size_t>(N - 1)] = term.log();
    t.occupancy[static_cast<std::size_t>(N - 1)] = k;
    t.log_max = std::max(t.log_max, term.log());
  }
  t.log_max = std::max(t.log_max, t.tail.upper.log());
  return t;
}

MassBracket predictive_at(const PredictiveTable& t, const SufficientStats& stats, double x) {
  const auto& pts = stats.sorted_points();
  const auto it = pts.lower_bound(x);
  const bool has_next = it != pts.end();
  const bool has_prev = it != pts.begin();
  const double next = has_next ? *it : 0.0;
  const double prev = has_prev ? *std::prev(it) : 0.0;

  double a = 0.0;  // Σ term_N · v_N, scaled by e^{−log_max}
  double b = 0.0;  // Σ term_N
  for (std::int64_t N = 1; N <= t.M; ++N) {
    const double lt = t.log_terms[static_cast<std::size_t>(N - 1)];
    if (lt == kNegInf) continue;
    const double w = std::exp(lt - t.log_max);
    const std::int64_t cell = fast_cell(x, N);
    const bool occupied =
        (has_next && fast_cell(next, N) == cell) || (has_prev && fast_cell(prev, N) == cell);
    const double half = static_cast<double>(N) * static_cast<double>(N);
    const double k = static_cast<double>(t.occupancy[static_cast<std::size_t>(N - 1)]);
    const double v = occupied ? 2.0 : 2.0 * (half - k) / (2.0 * half - k);
    a += w * v;
    b += w;
  }
  // Tail levels: an unoccupied cell gives 2(N² − k)/(2N² − k), increasing in N
  // toward 1; an occupied one gives 2. Beyond merge_limit(d) the cell of x
  // cannot contain a data point.
  const double Mp = static_cast<double>(t.M + 1);
  const double kt = static_cast<double>(t.k_tail);
  const double v_min = kt > Mp * Mp ? 0.0 : 2.0 * (Mp * Mp - kt) / (2.0 * Mp * Mp - kt);
  double nearest = std::numeric_limits<double>::infinity();
  if (has_next) nearest = std::min(nearest, next - x);
  if (has_prev) nearest = std::min(nearest, x - prev);
  const bool tail_can_hit = nearest == 0.0 || merge_limit(nearest) > t.M;
  const double v_max = tail_can_hit ? 2.0 : 1.0;
  const double tl = t.tail.lower.is_zero() ? 0.0 : std::exp(t.tail.lower.log() - t.log_max);
  const double tu = std::exp(t.tail.upper.log() - t.log_max);

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double tail : {tl, tu}) {
    for (double v : {v_min, v_max}) {
      const double p = (a + tail * v) / (b + tail);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
  }
  const double slack = 1e-12 + 4.0 * kEps * static_cast<double>(t.M);
  return {lo * (1.0 - slack), hi * (1.0 + slack)};
}

}  // namespace

MassBracket step_predictive_density(const SufficientStats& stats, const OccupancyStats& occ,
                                    std::int64_t M, double x_next) {
  if (!(x_next >= 0.0 && x_next < 1.0))
    throw std::domain_error("step_predictive_density: x must lie in [0, 1)");
  const auto table = build_predictive(stats, occ, M);
  return predictive_at(table, stats, x_next);
}

double step_predictive_ks(const SufficientStats& stats, const OccupancyStats& occ, std::int64_t M,
                          std::size_t grid) {
  if (grid == 0) throw std::domain_error("step_predictive_ks: grid must be nonempty");
  const auto table = build_predictive(stats, occ, M);
  const double h = 1.0 / static_cast<double>(grid);
  double cdf = 0.0;
  double ks = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    const double x = (static_cast<double>(j) + 0.5) * h;
    cdf += predictive_at(table, stats, x).mid() * h;
    ks = std::max(ks, std::abs(cdf - static_cast<double>(j + 1) * h));
  }
  return ks;
}

// ---------------------------------------------------------------------------
// Engine

BarronEngine::BarronEngine(BarronPriorConfig cfg, TruncationPolicy trunc, TruthLogPdf truth)
    : cfg_(cfg), trunc_(trunc), truth_(std::move(truth)) {
  cfg_.validate();
}

void BarronEngine::add(double x) {
  update_stats(stats_, occ_, x);
  if (truth_) truth_loglik_ += truth_(x);
  const double scaled = std::ceil(trunc_.levels_per_n * static_cast<double>(stats_.n()));
  std::int64_t wanted = trunc_.fixed_level > 0
                            ? trunc_.fixed_level
                            : std::max<std::int64_t>({occ_.distinct_level(),
                                                      static_cast<std::int64_t>(scaled), 1});
  if (wanted <= trunc_.max_level) occ_.ensure_levels(wanted, stats_);
}

void BarronEngine::add(std::span<const double> xs) {
  for (double x : xs) add(x);
}

std::int64_t BarronEngine::truncation_level() const {
  return trunc_.resolve(stats_.n(), occ_.distinct_level());
}

PosteriorSplit BarronEngine::split(double tol) const {
  return posterior_split(stats_, occ_, cfg_, truncation_level(), tol);
}

}  // namespace postlab
