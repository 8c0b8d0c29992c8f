#pragma once

#include <span>
#include <string>
#include <vector>

#include "postlab/log_weight.hpp"

namespace postlab {

enum class CosinePriorKind { exponential, half_cauchy, truncated_uniform };

/// Prior on θ ≥ 0 for the cosine family. `param` is the rate λ, the scale s or
/// Θ_max depending on the kind.
struct CosinePriorConfig {
  CosinePriorKind kind = CosinePriorKind::exponential;
  double param = 1.0;
  /// Target for (certified tail contribution) / (integral over [0, Θ_cap]).
  double tail_fraction = 1e-6;
  /// Largest Θ_cap tried before the tail bound is reported as dominating.
  double cap_limit = 1e5;

  void validate() const;
  double log_density(double theta) const;
  /// Π(θ > T) in closed form.
  double tail_mass(double T) const;
  /// ln Π(θ > T), finite well past the range where tail_mass underflows.
  double log_tail_mass(double T) const;
  /// Right end of the support (Θ_max or +inf).
  double support_end() const;

  /// "exponential:1", "half-cauchy:2", "uniform:10".
  std::string to_string() const;
  static CosinePriorConfig parse(const std::string& text);
};

/// Σ ln(1 + cos θx_i) − n·ln c(θ); log(0) if some 1 + cos θx_i vanishes.
LogWeight cosine_loglik(double theta, std::span<const double> data);

/// θ-interval [lo, hi]; hi may be +inf.
struct ThetaRange {
  double lo;
  double hi;
};

/// {θ ≥ 0 : d_h(f_θ, f₀) > ε} as sorted disjoint ranges, from the closed-form
/// affinity. Crossings are located on a 0.02 grid and refined by bisection; past
/// the point where the O(1/θ) envelope of the affinity settles the answer the
/// last range is extended to +inf (or dropped). If the scan reaches scan_limit
/// first, membership beyond decided_up_to is unknown.
struct HellingerRegion {
  std::vector<ThetaRange> ranges;
  double decided_up_to;
};
HellingerRegion cosine_hellinger_region(double eps, double scan_limit = 1e4);

/// Posterior of θ given data from [0, 1]. The integral over [0, Θ_cap] is split
/// into panels at the period boundaries kπ/max(x_i) and cached; the rest is
/// bracketed by Π(θ > Θ_cap)·sup L with sup L ≤ (2/c_min)ⁿ.
class CosinePosterior {
 public:
  CosinePosterior(CosinePriorConfig prior, std::span<const double> data, double tol = 1e-9);

  std::size_t n() const { return data_.size(); }
  double cap() const { return cap_; }
  /// True when Θ_cap hit cap_limit without meeting tail_fraction.
  bool tail_dominates() const { return tail_dominates_; }
  /// ln ∫ Π f_θ(x_i) Π(dθ).
  BracketedValue log_evidence() const;

  MassBracket mass(std::span<const ThetaRange> region) const { return mass_impl(region, false); }
  MassBracket mass(ThetaRange region) const { return mass(std::span<const ThetaRange>(&region, 1)); }
  MassBracket hellinger_mass(double eps) const;
  /// Posterior predictive density E[f_θ(x) | data].
  MassBracket predictive_density(double x) const;

 private:
  struct Panel {
    double lo;
    double hi;
    BracketedValue value;
  };

  double log_integrand(double theta) const;
  BracketedValue integrate(double lo, double hi) const;
  BracketedValue integrate_weighted(double lo, double hi, double x) const;
  void extend_panels(double to);
  BracketedValue panels_over(std::span<const ThetaRange> set) const;
  MassBracket mass_impl(std::span<const ThetaRange> region, bool tail_unknown) const;
  BracketedValue tail_bound(bool region_owns_tail) const;
  double log_tail_upper(double T) const;

  CosinePriorConfig prior_;
  std::vector<double> data_;
  double tol_;
  double period_;
  double ref_log_ = 0.0;
  double cap_ = 0.0;
  bool tail_dominates_ = false;
  std::vector<Panel> panels_;
  BracketedValue head_;
};

MassBracket cosine_posterior_mass(const CosinePriorConfig& prior, std::span<const double> data,
                                  ThetaRange region, double tol = 1e-9);
MassBracket cosine_hellinger_mass(const CosinePriorConfig& prior, std::span<const double> data,
                                  double eps, double tol = 1e-9);

}  // namespace postlab
