#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>

#include "postlab/errors.hpp"
#include "postlab/log_weight.hpp"

namespace postlab {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  /// Absolute floor on the error target (in the scaled frame of log integrands).
  double abs_tol = 0.0;
  int max_depth = 48;
  std::size_t max_evaluations = 4'000'000;
};

/// Integral estimate and its error bound, both scaled by e^{log_scale}.
/// Plain integrands have log_scale = 0.
struct QuadratureResult {
  double estimate = 0.0;
  double abs_error_bound = 0.0;
  std::size_t evaluations = 0;
  double log_scale = 0.0;

  double value() const;
  LogWeight log_value() const;
  /// [estimate - bound, estimate + bound] in log space, lower clamped at log(0).
  BracketedValue log_bracket() const;
};

/// Thrown when the subdivision budget runs out; carries the best bracket so far.
class QuadratureError : public NumericError {
 public:
  QuadratureError(const std::string& what, QuadratureResult best)
      : NumericError(what), best_(best) {}
  const QuadratureResult& best() const { return best_; }

 private:
  QuadratureResult best_;
};

/// Adaptive Simpson with interval bisection. Leaves are accepted when
/// |S₂ − S₁| ≤ 15·target·(width / (b − a)); the reported bound is the sum of
/// |S₂ − S₁| / 15 over leaves, and the loop tightens the target until
/// bound ≤ max(rel_tol·|estimate|, abs_tol). Breakpoints seed the initial
/// subdivision.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& options = {},
                                  std::span<const double> breakpoints = {});

/// Integrates e^{log_f} over [a, b]. The integrand is shifted by its largest
/// sampled log value (breakpoints are always sampled), so magnitudes like
/// e^{±10⁴} are handled. log_f may return -inf.
QuadratureResult integrate_log(const std::function<double(double)>& log_f, double a, double b,
                               const QuadratureOptions& options = {},
                               std::span<const double> breakpoints = {});

}  // namespace postlab
