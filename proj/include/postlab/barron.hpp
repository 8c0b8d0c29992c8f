#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include "postlab/errors.hpp"
#include "postlab/log_weight.hpp"
#include "postlab/quadrature.hpp"

namespace postlab {

/// Prior Π = w·Π₀ + (1 − w)·Π_△. Π₀(dθ) ∝ e^{−1/θ} on [0, 1]; Π_△ gives level N
/// weight 6/(π²N²) and spreads it uniformly over the C(2N², N²) members of F_N.
struct BarronPriorConfig {
  double continuous_weight = 0.5;

  void validate() const;

  static double step_level_weight(std::int64_t N);
  static double log_step_level_weight(std::int64_t N);
  /// ln Z₀ with Z₀ = ∫₀¹ e^{−1/θ} dθ = E₂(1) ≈ 0.148496, computed once by quadrature.
  static double log_z0();
  /// Normalized log prior density of θ under Π₀.
  static double theta_prior_log_density(double theta);
};

class OccupancyStats;

/// Running sufficient statistics of the sample.
class SufficientStats {
 public:
  std::size_t n() const { return n_; }
  /// S_n = Σ Φ⁻¹(x_i).
  double sum_probit() const { return sum_probit_; }
  /// W_n = S_n / n (0 for the empty sample).
  double mean_probit() const { return n_ == 0 ? 0.0 : sum_probit_ / static_cast<double>(n_); }
  const std::multiset<double>& sorted_points() const { return points_; }
  /// Number of distinct values.
  std::size_t distinct_count() const { return distinct_; }
  /// Smallest positive gap between consecutive distinct points (+inf if fewer than two).
  double min_gap() const { return min_gap_; }

 private:
  friend void update_stats(SufficientStats&, OccupancyStats&, double);
  std::size_t n_ = 0;
  double sum_probit_ = 0.0;
  double comp_ = 0.0;
  std::multiset<double> points_;
  std::size_t distinct_ = 0;
  double min_gap_ = std::numeric_limits<double>::infinity();
};

/// Largest level N at which two points a gap g apart can share a cell of P_N,
/// allowing for rounding in floor(2N²x). INT64_MAX when g is at rounding level.
std::int64_t merge_limit(double gap);

/// k_N, the number of occupied cells of P_N, for the maintained levels N ≤ L.
/// Stored as merges[N], the number of adjacent distinct pairs sharing a cell,
/// so that k_N = distinct_count − merges[N]. For N ≥ distinct_level() every
/// distinct point has its own cell.
class OccupancyStats {
 public:
  std::int64_t maintained_levels() const { return levels_; }
  /// N_distinct: smallest N with cell width below min_gap (after rounding margin).
  std::int64_t distinct_level() const { return distinct_level_; }
  std::int64_t distinct_points() const { return distinct_points_; }
  /// k_N. Valid for N ≤ maintained_levels() or N ≥ distinct_level().
  std::int64_t occupied(std::int64_t N) const;

  /// Extend the maintained range to at least L levels (rebuilds from the sample).
  void ensure_levels(std::int64_t L, const SufficientStats& stats);

  /// Full recomputation from the sorted sample; used for audits.
  static OccupancyStats recompute(const SufficientStats& stats, std::int64_t levels);

 private:
  friend void update_stats(SufficientStats&, OccupancyStats&, double);
  void apply_pair(double lo, double hi, std::int64_t sign);
  void refresh_distinct_level(double min_gap);

  std::int64_t levels_ = 0;
  std::int64_t distinct_points_ = 0;
  std::int64_t distinct_level_ = 1;
  std::vector<std::int64_t> merges_{0};
};

/// Adds x ∈ (0, 1) to the sample; O(log n + min(L, gap^{-1/2})) per insertion.
void update_stats(SufficientStats& stats, OccupancyStats& occ, double x_new);

/// How far the explicit sum over levels N runs before the analytic tail.
struct TruncationPolicy {
  /// Explicit level M; 0 selects max(N_distinct, ceil(levels_per_n·n), 1).
  std::int64_t fixed_level = 0;
  double levels_per_n = 4.0;
  std::int64_t max_level = std::int64_t{1} << 24;

  std::int64_t resolve(std::size_t n, std::int64_t distinct_level) const;
};

/// ln[(6/π²N²)·(2ⁿ if with_likelihood)·C(2N² − k, N² − k)/C(2N², N²)].
/// log(0) when k > N². Throws std::domain_error when k > n or k > 2N².
LogWeight log_step_term(std::int64_t N, std::int64_t k, std::size_t n, bool with_likelihood);

/// Σ_{N=lo}^{hi} log_step_term(N, k_N, n, flag); all levels must be maintained.
LogWeight step_partial_sum(const OccupancyStats& occ, std::size_t n, bool with_likelihood,
                           std::int64_t lo, std::int64_t hi);

/// Σ_N over all levels: exact head to level M plus a certified tail bracket.
/// Without likelihood this is the prior mass (within Π_△) of the data-consistent
/// step densities; with likelihood it is ∫_{F_△} Π f(x_i) dΠ_△.
/// Throws std::domain_error if M < N_distinct or M exceeds the maintained range.
BracketedValue step_marginal(const OccupancyStats& occ, std::size_t n, bool with_likelihood,
                             std::int64_t M);

/// Tail part alone, Σ_{N>M}, as a bracket.
BracketedValue step_tail(const OccupancyStats& occ, std::size_t n, bool with_likelihood,
                         std::int64_t M);

/// ∫_{F₀} Π f_θ(x_i) Π₀(dθ) as a log-space quadrature result, computed after θ = u²
/// with subdivision seeded at the interior maximizer.
QuadratureResult gauss_marginal(const SufficientStats& stats, double tol = 1e-10);

/// Disjoint subinterval of u = √θ ∈ [0, 1].
struct UInterval {
  double lo;
  double hi;
};

/// Posterior of θ restricted to F₀: density ∝ e^{−1/θ − nθ + √(2θ)S_n}.
class ThetaPosterior {
 public:
  ThetaPosterior(std::size_t n, double sum_probit, double tol = 1e-10);
  explicit ThetaPosterior(const SufficientStats& stats, double tol = 1e-10)
      : ThetaPosterior(stats.n(), stats.sum_probit(), tol) {}

  /// Unnormalized log density in θ (prior kernel times likelihood).
  double log_density(double theta) const;
  /// Maximizer in u = √θ of the u-space integrand.
  double peak_u() const { return peak_u_; }

  /// Posterior mass of θ ∈ [lo, hi] ⊂ [0, 1].
  MassBracket interval_mass(double theta_lo, double theta_hi) const;
  /// Posterior mass of a union of disjoint, sorted u-intervals.
  MassBracket u_set_mass(std::span<const UInterval> set) const;
  /// ln ∫ over a union of disjoint u-intervals of the unnormalized u-space integrand.
  BracketedValue log_u_set_integral(std::span<const UInterval> set) const;
  /// Prior Π₀ mass of a union of u-intervals.
  static MassBracket prior_u_set_mass(std::span<const UInterval> set, double tol = 1e-10);
  /// Same, in log space, for masses far below the double range.
  static BracketedValue prior_log_u_set_mass(std::span<const UInterval> set, double tol = 1e-10);
  /// Π₀({θ < δ}) for δ ∈ (0, 1]; positive for every δ > 0, which witnesses the KL
  /// support of f₀ since KL(f₀, f_θ) = θ.
  static MassBracket prior_kl_ball_mass(double delta, double tol = 1e-10);

 private:
  double log_integrand_u(double u) const;
  BracketedValue integral_u(double lo, double hi) const;

  std::size_t n_;
  double sum_probit_;
  double tol_;
  double peak_u_;
  double width_u_;
};

/// Posterior masses of the two components. The step mass and the F₀ mass are
/// complementary at matched endpoints: f0.lower = 1 − step.upper and vice versa.
struct PosteriorSplit {
  MassBracket mass_f0;
  MassBracket mass_step;
  /// ln of w·∫_{F₀} Π f dΠ₀ and (1 − w)·∫_{F_△} Π f dΠ_△.
  BracketedValue log_f0_part;
  BracketedValue log_step_part;
  /// ln ∫ Π f(x_i) Π(df), the evidence before dividing by the truth.
  BracketedValue log_evidence;
};

PosteriorSplit posterior_split(const SufficientStats& stats, const OccupancyStats& occ,
                               const BarronPriorConfig& cfg, std::int64_t M, double tol = 1e-10);

/// Posterior over levels N within F_△.
struct LevelPosterior {
  /// weights[N − 1] for N = 1..M.
  std::vector<MassBracket> weights;
  MassBracket tail;
  /// E[1/N | data, F_△].
  MassBracket mean_inverse_level;
};

LevelPosterior posterior_over_N(const OccupancyStats& occ, std::size_t n, std::int64_t M);

/// E[1/N] under the prior level weights: 6ζ(3)/π².
double prior_mean_inverse_level();

/// Posterior mass of {f : d_h(f, f₀) > ε}. F_△ counts entirely when ε < √(2 − √2);
/// F₀ contributes θ > −4 ln(1 − ε²/2). ε ≥ √2 gives 0.
MassBracket hellinger_ball_mass(const SufficientStats& stats, const OccupancyStats& occ,
                                const BarronPriorConfig& cfg, std::int64_t M, double eps,
                                double tol = 1e-10);

/// Posterior predictive density of the step component at x_next ∈ [0, 1):
/// Σ_N w_N · 2·P(cell of x_next selected | level N, data).
MassBracket step_predictive_density(const SufficientStats& stats, const OccupancyStats& occ,
                                    std::int64_t M, double x_next);

/// Kolmogorov distance between the step predictive CDF and the uniform CDF,
/// from midpoint densities on a regular grid.
double step_predictive_ks(const SufficientStats& stats, const OccupancyStats& occ,
                          std::int64_t M, std::size_t grid = 1024);

using TruthLogPdf = std::function<double(double)>;

/// Incremental engine state: sample statistics, occupancy and the running
/// truth log-likelihood Σ ln f⋆(x_i). Single writer; const queries may run
/// concurrently between updates.
class BarronEngine {
 public:
  explicit BarronEngine(BarronPriorConfig cfg = {}, TruncationPolicy trunc = {},
                        TruthLogPdf truth = {});

  void add(double x);
  void add(std::span<const double> xs);

  std::size_t n() const { return stats_.n(); }
  const SufficientStats& stats() const { return stats_; }
  const OccupancyStats& occupancy() const { return occ_; }
  const BarronPriorConfig& prior() const { return cfg_; }
  const TruncationPolicy& truncation() const { return trunc_; }
  std::int64_t truncation_level() const;
  /// Σ ln f⋆(x_i); zero for a uniform truth.
  double truth_loglik() const { return truth_loglik_; }

  PosteriorSplit split(double tol = 1e-10) const;

 private:
  BarronPriorConfig cfg_;
  TruncationPolicy trunc_;
  TruthLogPdf truth_;
  SufficientStats stats_;
  OccupancyStats occ_;
  double truth_loglik_ = 0.0;
};

}  // namespace postlab
