#include "postlab/densities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "postlab/quadrature.hpp"
#include "postlab/special_functions.hpp"

namespace postlab {

GaussExpDensity::GaussExpDensity(double theta) : theta_(theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::domain_error("GaussExpDensity: theta must lie in [0, 1]");
  shift_ = std::sqrt(2.0 * theta);
}

std::int64_t cell_count(std::int64_t N) {
  if (N < 1) throw std::domain_error("partition level N must be positive");
  return 2 * N * N;
}

std::int64_t cell_index(double x, std::int64_t N) {
  if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("cell_index: x must lie in [0, 1)");
  const std::int64_t cells = cell_count(N);
  const auto j = static_cast<std::int64_t>(std::floor(x * static_cast<double>(cells)));
  return std::min(j, cells - 1);
}

StepDensity::StepDensity(std::int64_t N, std::vector<std::int64_t> selected)
    : N_(N), selected_(std::move(selected)) {
  const std::int64_t cells = cell_count(N);
  if (static_cast<std::int64_t>(selected_.size()) != N * N)
    throw std::domain_error("StepDensity: exactly N^2 cells must be selected (N=" +
                            std::to_string(N) + ")");
  std::sort(selected_.begin(), selected_.end());
  if (std::adjacent_find(selected_.begin(), selected_.end()) != selected_.end())
    throw std::domain_error("StepDensity: duplicate cell index");
  if (selected_.front() < 0 || selected_.back() >= cells)
    throw std::domain_error("StepDensity: cell index out of range");
}

bool StepDensity::is_selected(std::int64_t cell) const {
  return std::binary_search(selected_.begin(), selected_.end(), cell);
}

CosineDensity::CosineDensity(double theta) : theta_(theta) {
  if (!(theta >= 0.0)) throw std::domain_error("CosineDensity: theta must be nonnegative");
}

LogWeight gauss_exp_logpdf(const GaussExpDensity& d, double x) {
  if (!(x > 0.0 && x < 1.0)) throw std::domain_error("gauss_exp_logpdf: x must lie in (0, 1)");
  if (d.theta() == 0.0) return LogWeight::one();
  return LogWeight(-d.theta() + d.shift() * inv_norm_cdf(x));
}

double gauss_exp_logpdf_probit(const GaussExpDensity& d, double z) {
  return -d.theta() + d.shift() * z;
}

double step_pdf(const StepDensity& d, double x) {
  if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("step_pdf: x must lie in [0, 1)");
  return d.is_selected(cell_index(x, d.level())) ? 2.0 : 0.0;
}

double cosine_normalizer(double theta) {
  if (theta < 0.0) throw std::domain_error("cosine_normalizer: theta must be nonnegative");
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    return 2.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0;
  }
  return 1.0 + std::sin(theta) / theta;
}

LogWeight cosine_logpdf(const CosineDensity& d, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("cosine_logpdf: x must lie in [0, 1]");
  const double v = 1.0 + std::cos(d.theta() * x);
  if (v <= 0.0) return LogWeight::zero();
  return LogWeight(std::log(v) - std::log(cosine_normalizer(d.theta())));
}

namespace {

void check_theta(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("theta must lie in [0, 1]");
}

}  // namespace

double kl_gauss_exp(double theta1, double theta2) {
  check_theta(theta1);
  check_theta(theta2);
  const double s1 = std::sqrt(2.0 * theta1);
  const double s2 = std::sqrt(2.0 * theta2);
  // (θ2 − θ1) + s1(s1 − s2) = (s1 − s2)²/2; the squared form is nonnegative by construction.
  const double d = s1 - s2;
  return 0.5 * d * d;
}

double hellinger_affinity_gauss_exp(double theta1, double theta2) {
  check_theta(theta1);
  check_theta(theta2);
  const double d = std::sqrt(theta1) - std::sqrt(theta2);
  return std::exp(-0.25 * d * d);
}

double hellinger_gauss_exp(double theta1, double theta2) {
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * hellinger_affinity_gauss_exp(theta1, theta2)));
}

double hellinger_step_uniform(const StepDensity&) {
  return std::sqrt(2.0 - std::numbers::sqrt2);
}

double cosine_uniform_affinity(double theta) {
  if (theta < 0.0) throw std::domain_error("cosine_uniform_affinity: theta must be nonnegative");
  if (theta == 0.0) return 1.0;
  // ∫₀^T |cos t| dt with T = θ/2.
  const double T = 0.5 * theta;
  const double periods = std::floor(T / std::numbers::pi);
  const double r = T - periods * std::numbers::pi;
  const double partial = r <= 0.5 * std::numbers::pi ? std::sin(r) : 2.0 - std::sin(r);
  const double integral = 2.0 * periods + partial;
  return std::numbers::sqrt2 * integral / T / std::sqrt(cosine_normalizer(theta));
}

double density_pdf(const Density& d, double x) {
  return std::visit(
      [x](const auto& dens) -> double {
        using T = std::decay_t<decltype(dens)>;
        if constexpr (std::is_same_v<T, GaussExpDensity>) {
          return gauss_exp_logpdf(dens, x).linear();
        } else if constexpr (std::is_same_v<T, StepDensity>) {
          return step_pdf(dens, x);
        } else {
          return cosine_logpdf(dens, x).linear();
        }
      },
      d);
}

namespace {

constexpr double kProbitRange = 9.0;

// √density at x = Φ(z).
double sqrt_density_probit(const Density& d, double z) {
  return std::visit(
      [z](const auto& dens) -> double {
        using T = std::decay_t<decltype(dens)>;
        if constexpr (std::is_same_v<T, GaussExpDensity>) {
          return std::exp(0.5 * gauss_exp_logpdf_probit(dens, z));
        } else {
          double x = z <= 0.0 ? normal_cdf(z) : 1.0 - normal_ccdf(z);
          x = std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
          if constexpr (std::is_same_v<T, StepDensity>) {
            return std::sqrt(step_pdf(dens, x));
          } else {
            return std::sqrt(cosine_logpdf(dens, x).linear());
          }
        }
      },
      d);
}

void append_breakpoints(const Density& d, std::vector<double>& out) {
  if (const auto* s = std::get_if<StepDensity>(&d)) {
    const std::int64_t cells = cell_count(s->level());
    for (std::int64_t j = 1; j < cells; ++j) {
      if (s->is_selected(j) != s->is_selected(j - 1)) {
        out.push_back(inv_norm_cdf(static_cast<double>(j) / static_cast<double>(cells)));
      }
    }
  } else if (const auto* c = std::get_if<CosineDensity>(&d)) {
    // √(1 + cos θx) has kinks at θx = (2m + 1)π.
    const double theta = c->theta();
    for (double t = std::numbers::pi; t < theta; t += 2.0 * std::numbers::pi) {
      const double x = t / theta;
      if (x > 0.0 && x < 1.0) out.push_back(inv_norm_cdf(x));
    }
  }
}

}  // namespace

double hellinger_numeric(const Density& f, const Density& g, double tol) {
  std::vector<double> breaks{0.0};
  append_breakpoints(f, breaks);
  append_breakpoints(g, breaks);
  const std::function<double(double)> integrand = [&](double z) {
    const double diff = sqrt_density_probit(f, z) - sqrt_density_probit(g, z);
    return diff * diff * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  };
  QuadratureOptions opts;
  opts.rel_tol = tol;
  opts.abs_tol = tol;
  const auto r = adaptive_simpson(integrand, -kProbitRange, kProbitRange, opts, breaks);
  return std::sqrt(std::max(0.0, r.estimate));
}

std::vector<double> sample_gauss_exp(const GaussExpDensity& d, RandomStream& rs, std::size_t n) {
  std::vector<double> out(n);
  for (auto& x : out) {
    const double z = d.shift() + rs.next_normal();
    x = z <= 0.0 ? normal_cdf(z) : 1.0 - normal_ccdf(z);
    // Keep the sample strictly inside (0, 1).
    x = std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
  }
  return out;
}

std::vector<double> sample_step(const StepDensity& d, RandomStream& rs, std::size_t n) {
  std::vector<double> out(n);
  const auto& cells = d.selected();
  const double width = 1.0 / static_cast<double>(cell_count(d.level()));
  for (auto& x : out) {
    const std::int64_t cell = cells[rs.next_below(cells.size())];
    x = (static_cast<double>(cell) + rs.next_uniform()) * width;
    while (cell_index(x, d.level()) > cell) x = std::nextafter(x, 0.0);
    while (cell_index(x, d.level()) < cell) x = std::nextafter(x, 1.0);
  }
  return out;
}

}  // namespace postlab
