#pragma once

#include <cstdint>

namespace postlab {

/// Standard normal CDF via erfc (accurate in both tails).
double normal_cdf(double z);

/// Upper tail 1 - Φ(z).
double normal_ccdf(double z);

/// Φ⁻¹(p) for p in (0, 1): Acklam's rational approximation followed by one
/// Halley step against the erfc-based CDF. Max abs error below 1e-9 on
/// [1e-12, 1 - 1e-12]. Throws std::domain_error outside (0, 1).
double inv_norm_cdf(double p);

/// Lower and upper bounds on Σ_{N > m} N⁻² = ψ₁(m + 1).
struct InverseSquareTail {
  double lower;
  double upper;
};

/// Enveloping asymptotic series for the trigamma function, shifted by the
/// recurrence until the argument is at least 20. Width is at rounding level.
InverseSquareTail inverse_square_tail(std::int64_t m);

/// Σ_{N > m} N⁻³ by the Euler–Maclaurin series (enveloping for N⁻³), shifted
/// to arguments of at least 20.
InverseSquareTail inverse_cube_tail(std::int64_t m);

}  // namespace postlab
