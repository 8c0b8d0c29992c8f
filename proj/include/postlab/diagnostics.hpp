#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "postlab/barron.hpp"

namespace postlab {

/// Band of per-observation log likelihood ratios, α ≤ n⁻¹ ln R_n ≤ β.
struct BandSpec {
  double alpha;
  double beta;

  void validate() const;
  /// "alpha:beta" with %.6g formatting; used inside column names.
  std::string key() const;
};

/// Which statistics a trajectory evaluates, and their query parameters.
struct DiagnosticConfig {
  double gamma = 0.6931471805599453;
  std::vector<BandSpec> bands{{0.6, 0.75}, {0.2, 0.4}};
  /// Bands for the prior exponent; the degenerate band [ln2, ln2] is the B_n set.
  std::vector<BandSpec> exponent_bands{{0.6931471805599453, 0.6931471805599453}};
  double beta = 0.6931471805599453;
  std::vector<double> hellinger_eps{0.5};
  double tau = 0.1;
  bool predictive_ks = false;
  bool level_summary = false;
  double tol = 1e-10;

  void validate() const;
};

/// Per-observation log likelihood ratio of a data-consistent step density,
/// ln2 − n⁻¹ Σ ln f⋆(x_i).
double step_level_rate(const BarronEngine& engine);

/// Posterior mass of the exact-level set {R_n = e^{γn}}. Only data-consistent
/// step densities can sit on a level set with positive mass, so the result is
/// mass_step when γ equals their realized rate and 0 otherwise. n = 0 gives the
/// prior step weight.
MassBracket gamma_stat(const BarronEngine& engine, const PosteriorSplit& split, double gamma);

/// The u = √θ set where α ≤ −u² + √2·W·u − shift ≤ β, as at most two intervals in [0, 1].
std::vector<UInterval> band_u_set(double W, double shift, const BandSpec& band);

/// The u-set where −u² + √2·W·u − shift > β.
std::vector<UInterval> exceed_u_set(double W, double shift, double beta);

MassBracket band_posterior_mass(const BarronEngine& engine, const PosteriorSplit& split,
                                const BandSpec& band, double tol = 1e-10);

/// −n⁻¹ ln Π(band set) under the prior, as [lower, upper]. +inf when the set has
/// zero prior mass. Requires n ≥ 1.
struct ExponentBracket {
  double lower;
  double upper;
  double mid() const { return 0.5 * (lower + upper); }
};
ExponentBracket band_prior_exponent(const BarronEngine& engine, const BandSpec& band,
                                    double tol = 1e-10);

/// Π({R_n > e^{βn}} | x).
MassBracket beta_bound_mass(const BarronEngine& engine, const PosteriorSplit& split, double beta,
                            double tol = 1e-10);

/// True when {R_n > e^{βn}} is empty, decided from sup_loglik_f0 and the step rate.
bool beta_bound_empty(const BarronEngine& engine, double beta);

/// n · max over u ∈ [0, 1] of −u² + √2·W·u.
double sup_loglik_f0(double W, std::size_t n);

/// ln of the evidence ratio ∫ R_n dΠ, lower end of the bracket.
double log_evidence_ratio_lower(const BarronEngine& engine, const PosteriorSplit& split);

/// Every statistic of the configuration at the engine's current sample size.
struct DiagnosticRecord {
  std::size_t n = 0;
  std::int64_t truncation = 0;
  double W_n = 0.0;
  double truth_loglik = 0.0;
  MassBracket mass_step;
  MassBracket mass_f0;
  MassBracket gamma_stat;
  double gamma_level = 0.0;
  std::vector<MassBracket> band_masses;
  std::vector<ExponentBracket> band_prior_exponents;
  MassBracket beta_bound_mass;
  bool beta_bound_empty = true;
  double sup_loglik = 0.0;
  std::vector<MassBracket> hellinger_masses;
  double log_evidence_lower = 0.0;
  bool evidence_flag = false;
  std::optional<double> predictive_ks;
  std::optional<MassBracket> mean_inverse_level;
};

DiagnosticRecord evaluate_diagnostics(const BarronEngine& engine, const DiagnosticConfig& cfg);

/// Column names, in order, of the rows produced by flatten().
std::vector<std::string> diagnostic_columns(const DiagnosticConfig& cfg);
std::vector<double> flatten(const DiagnosticRecord& rec, const DiagnosticConfig& cfg);

/// A trajectory as a numeric table, one row per grid point.
struct Trajectory {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of a column; std::nullopt when absent.
  std::optional<std::size_t> find(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
  /// Lower end for a bracketed statistic ("name.lower"), else the plain column.
  std::vector<double> lower_series(const std::string& statistic) const;
  std::vector<double> upper_series(const std::string& statistic) const;
};

struct Excursions {
  std::size_t count = 0;
  /// Row indices where the lower bracket end exceeds δ.
  std::vector<std::size_t> rows;
};

/// Grid points where the named statistic's lower bound exceeds delta, counted
/// only from rows with n ≥ n_min. Throws std::invalid_argument for unknown names.
Excursions excursion_count(const Trajectory& t, const std::string& statistic, double delta,
                           double n_min = 0.0);

struct AccumulationScan {
  std::vector<std::size_t> rows;
  std::optional<std::size_t> last;
  std::size_t count() const { return rows.size(); }
};

/// Rows where the bracket midpoint of an exponent column lies within tol of γ.
AccumulationScan accumulation_scan(const Trajectory& t, const std::string& statistic,
                                   double gamma, double tol);

}  // namespace postlab
