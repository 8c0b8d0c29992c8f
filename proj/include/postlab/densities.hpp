#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "postlab/log_weight.hpp"
#include "postlab/random.hpp"

namespace postlab {

/// f_θ(x) = exp{−θ + √(2θ)·Φ⁻¹(x)} on (0, 1), θ ∈ [0, 1]. θ = 0 is the uniform density.
class GaussExpDensity {
 public:
  explicit GaussExpDensity(double theta);
  double theta() const { return theta_; }
  /// √(2θ): the mean of Φ⁻¹(X) under f_θ.
  double shift() const { return shift_; }

 private:
  double theta_;
  double shift_;
};

/// Cell j of the partition P_N is [j/(2N²), (j+1)/(2N²)).
std::int64_t cell_count(std::int64_t N);

/// floor(2N²·x) for x in [0, 1). Throws std::domain_error outside.
std::int64_t cell_index(double x, std::int64_t N);

/// A member of F_N: value 2 on exactly N² selected cells of P_N and 0 elsewhere.
class StepDensity {
 public:
  /// Validates |selected| = N², indices in range, no duplicates; stores them sorted.
  StepDensity(std::int64_t N, std::vector<std::int64_t> selected);

  std::int64_t level() const { return N_; }
  const std::vector<std::int64_t>& selected() const { return selected_; }
  bool is_selected(std::int64_t cell) const;

 private:
  std::int64_t N_;
  std::vector<std::int64_t> selected_;
};

/// f_θ(x) = (1 + cos θx) / c(θ) on [0, 1] with c(θ) = 1 + sin(θ)/θ.
class CosineDensity {
 public:
  explicit CosineDensity(double theta);
  double theta() const { return theta_; }

 private:
  double theta_;
};

using Density = std::variant<GaussExpDensity, StepDensity, CosineDensity>;

/// −θ + √(2θ)·Φ⁻¹(x). Endpoints are rejected (Φ⁻¹ diverges there).
LogWeight gauss_exp_logpdf(const GaussExpDensity& d, double x);

/// Same density evaluated at x = Φ(z), without the round trip through x.
double gauss_exp_logpdf_probit(const GaussExpDensity& d, double z);

double step_pdf(const StepDensity& d, double x);

/// c(θ) = 1 + sin(θ)/θ, with a Taylor series below θ = 1e-6.
double cosine_normalizer(double theta);

LogWeight cosine_logpdf(const CosineDensity& d, double x);

/// KL(f_θ1, f_θ2) = (θ2 − θ1) + √(2θ1)(√(2θ1) − √(2θ2)).
double kl_gauss_exp(double theta1, double theta2);

/// Hellinger affinity ∫√(f_θ1 f_θ2) = exp{−(√θ1 − √θ2)²/4}.
double hellinger_affinity_gauss_exp(double theta1, double theta2);

double hellinger_gauss_exp(double theta1, double theta2);

/// √(2 − √2) for every member of F_△: the affinity with the uniform is √2/2.
double hellinger_step_uniform(const StepDensity& d);

/// Closed-form affinity ∫√(f_θ · 1) for the cosine family:
/// ∫₀¹ √2|cos(θx/2)| dx / √c(θ).
double cosine_uniform_affinity(double theta);

/// d_h(f, g) by quadrature in the probit variable z (x = Φ(z)), split at the
/// discontinuities and kinks of either density. Absolute accuracy ~1e-9.
double hellinger_numeric(const Density& f, const Density& g, double tol = 1e-11);

/// density(x) for any family member; x in (0, 1).
double density_pdf(const Density& d, double x);

/// X = Φ(√(2θ) + Z), Z standard normal.
std::vector<double> sample_gauss_exp(const GaussExpDensity& d, RandomStream& rs, std::size_t n);

/// A uniformly chosen selected cell, then a uniform point inside it.
std::vector<double> sample_step(const StepDensity& d, RandomStream& rs, std::size_t n);

}  // namespace postlab
