#include "postlab/cosine.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "postlab/densities.hpp"
#include "postlab/errors.hpp"
#include "postlab/quadrature.hpp"

namespace postlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// min over θ > 0 of 1 + sin(θ)/θ is 0.78277 (at θ ≈ 4.4934); rounded down.
constexpr double kNormalizerFloor = 0.7827;

double normalizer_floor_beyond(double T) { return std::max(kNormalizerFloor, 1.0 - 1.0 / T); }

// Σ ln(1 + cos θx_i), taking one log per block of 16 factors.
double log_cos_product(double theta, std::span<const double> data) {
  double total = 0.0;
  std::size_t i = 0;
  while (i < data.size()) {
    const std::size_t end = std::min(data.size(), i + 16);
    double prod = 1.0;
    for (std::size_t j = i; j < end; ++j) prod *= 1.0 + std::cos(theta * data[j]);
    if (prod > 1e-280) {
      total += std::log(prod);
    } else {
      for (std::size_t j = i; j < end; ++j) {
        const double v = 1.0 + std::cos(theta * data[j]);
        if (v <= 0.0) return kNegInf;
        total += std::log(v);
      }
    }
    i = end;
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// Prior

void CosinePriorConfig::validate() const {
  if (!(param > 0.0 && std::isfinite(param)))
    throw std::domain_error("cosine prior parameter must be positive and finite");
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
    throw std::domain_error("tail_fraction must lie in (0, 1)");
  if (!(cap_limit > 1.0)) throw std::domain_error("cap_limit must exceed 1");
}

double CosinePriorConfig::log_density(double theta) const {
  if (theta < 0.0) return kNegInf;
  switch (kind) {
    case CosinePriorKind::exponential:
      return std::log(param) - param * theta;
    case CosinePriorKind::half_cauchy: {
      const double r = theta / param;
      return std::log(2.0 / (std::numbers::pi * param)) - std::log1p(r * r);
    }
    case CosinePriorKind::truncated_uniform:
      return theta <= param ? -std::log(param) : kNegInf;
  }
  return kNegInf;
}

double CosinePriorConfig::tail_mass(double T) const {
  if (T <= 0.0) return 1.0;
  switch (kind) {
    case CosinePriorKind::exponential:
      return std::exp(-param * T);
    case CosinePriorKind::half_cauchy:
      // 1 − (2/π)·atan(T/s) = (2/π)·atan(s/T).
      return 2.0 / std::numbers::pi * std::atan(param / T);
    case CosinePriorKind::truncated_uniform:
      return T >= param ? 0.0 : 1.0 - T / param;
  }
  return 0.0;
}

double CosinePriorConfig::log_tail_mass(double T) const {
  if (T <= 0.0) return 0.0;
  switch (kind) {
    case CosinePriorKind::exponential:
      return -param * T;
    case CosinePriorKind::half_cauchy:
      return std::log(2.0 / std::numbers::pi * std::atan(param / T));
    case CosinePriorKind::truncated_uniform:
      return T >= param ? kNegInf : std::log1p(-T / param);
  }
  return kNegInf;
}

double CosinePriorConfig::support_end() const {
  return kind == CosinePriorKind::truncated_uniform ? param : kInf;
}

std::string CosinePriorConfig::to_string() const {
  const char* name = kind == CosinePriorKind::exponential   ? "exponential"
                     : kind == CosinePriorKind::half_cauchy ? "half-cauchy"
                                                            : "uniform";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s:%.17g", name, param);
  return buf;
}

CosinePriorConfig CosinePriorConfig::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("cosine prior must look like kind:param, got '" + text + "'");
  const std::string name = text.substr(0, colon);
  CosinePriorConfig cfg;
  if (name == "exponential") {
    cfg.kind = CosinePriorKind::exponential;
  } else if (name == "half-cauchy") {
    cfg.kind = CosinePriorKind::half_cauchy;
  } else if (name == "uniform") {
    cfg.kind = CosinePriorKind::truncated_uniform;
  } else {
    throw std::invalid_argument("unknown cosine prior kind '" + name + "'");
  }
  std::size_t used = 0;
  const std::string num = text.substr(colon + 1);
  try {
    cfg.param = std::stod(num, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != num.size())
    throw std::invalid_argument("bad cosine prior parameter '" + num + "'");
  cfg.validate();
  return cfg;
}

LogWeight cosine_loglik(double theta, std::span<const double> data) {
  if (!(theta >= 0.0)) throw std::domain_error("cosine_loglik: theta must be nonnegative");
  if (data.empty()) return LogWeight::one();
  const double lp = log_cos_product(theta, data);
  if (lp == kNegInf) return LogWeight::zero();
  return LogWeight(lp - static_cast<double>(data.size()) * std::log(cosine_normalizer(theta)));
}

// ---------------------------------------------------------------------------
// Hellinger region

HellingerRegion cosine_hellinger_region(double eps, double scan_limit) {
  if (!(eps > 0.0)) throw std::domain_error("cosine_hellinger_region: eps must be positive");
  HellingerRegion region{{}, kInf};
  auto& out = region.ranges;
  if (eps >= std::numbers::sqrt2) return region;
  // d_h > ε  ⇔  affinity < a.
  const double a = 1.0 - 0.5 * eps * eps;
  auto inside = [a](double t) { return cosine_uniform_affinity(t) < a; };
  auto refine = [&inside](double lo, double hi) {
    const bool lo_in = inside(lo);
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (inside(mid) == lo_in ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  // |affinity − √2·(2/π)/√c| ≤ √2·0.44/(θ√c) and c ∈ [1 − 1/θ, 1 + 1/θ].
  auto upper_env = [](double t) {
    return std::numbers::sqrt2 * (2.0 / std::numbers::pi + 0.44 / t) / std::sqrt(1.0 - 1.0 / t);
  };
  auto lower_env = [](double t) {
    return std::numbers::sqrt2 * (2.0 / std::numbers::pi - 0.44 / t) / std::sqrt(1.0 + 1.0 / t);
  };

  constexpr double h = 0.02;
  bool in = false;  // affinity at θ = 0 is 1
  double start = 0.0;
  double t = 0.0;
  while (true) {
    const double next = t + h;
    if (next > scan_limit) break;
    const bool next_in = inside(next);
    if (next_in != in) {
      const double cross = refine(t, next);
      if (next_in) {
        start = cross;
      } else {
        out.push_back({start, cross});
      }
      in = next_in;
    }
    t = next;
    if (t > 4.0 && upper_env(t) < a) {
      out.push_back({in ? start : t, kInf});
      return region;
    }
    if (t > 4.0 && lower_env(t) >= a) {
      if (in) throw NumericError("cosine_hellinger_region: envelope contradicts scan");
      return region;
    }
  }
  if (in) out.push_back({start, t});
  region.decided_up_to = t;
  return region;
}

// ---------------------------------------------------------------------------
// Posterior

CosinePosterior::CosinePosterior(CosinePriorConfig prior, std::span<const double> data, double tol)
    : prior_(prior), data_(data.begin(), data.end()), tol_(tol) {
  prior_.validate();
  double xmax = 0.0;
  for (double x : data_) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("cosine posterior: data must lie in [0, 1]");
    xmax = std::max(xmax, x);
  }
  period_ = std::numbers::pi / std::max(xmax, 0.05);

  const double end = prior_.support_end();
  double cap = std::min(end, std::max(16.0, 4.0 * period_));
  ref_log_ = kNegInf;
  for (int i = 0; i <= 256; ++i) ref_log_ = std::max(ref_log_, log_integrand(cap * i / 256.0));
  extend_panels(cap);

  const double target = std::log(prior_.tail_fraction);
  auto satisfied = [&](double T) {
    if (T >= end) return true;
    return !head_.lower.is_zero() && log_tail_upper(T) - head_.lower.log() <= target;
  };
  const double last = std::min(end, prior_.cap_limit);
  if (!satisfied(cap) && !head_.lower.is_zero() && log_tail_upper(last) - head_.lower.log() > target) {
    tail_dominates_ = true;
    spdlog::warn("cosine posterior: tail bound dominates (prior {}, n = {}); brackets are wide",
                 prior_.to_string(), data_.size());
    return;
  }
  while (!satisfied(cap_)) {
    if (cap_ >= last) {
      tail_dominates_ = true;
      spdlog::warn("cosine posterior: cap limit {} reached before the tail bound settled", last);
      return;
    }
    extend_panels(std::min(2.0 * cap_, last));
  }
}

double CosinePosterior::log_integrand(double theta) const {
  const double lp = prior_.log_density(theta);
  if (lp == kNegInf) return kNegInf;
  return lp + cosine_loglik(theta, data_).log();
}

double CosinePosterior::log_tail_upper(double T) const {
  const double lt = prior_.log_tail_mass(T);
  if (lt == kNegInf) return kNegInf;
  const double nd = static_cast<double>(data_.size());
  return lt + nd * (std::numbers::ln2 - std::log(normalizer_floor_beyond(T)));
}

BracketedValue CosinePosterior::integrate(double lo, double hi) const {
  if (!(hi > lo)) return BracketedValue::exact(LogWeight::zero());
  double local = kNegInf;
  for (int i = 0; i <= 8; ++i) local = std::max(local, log_integrand(lo + (hi - lo) * i / 8.0));
  if (local == kNegInf) return BracketedValue::exact(LogWeight::zero());
  QuadratureOptions opts;
  opts.rel_tol = tol_;
  opts.abs_tol = tol_ * 1e-3 * (hi - lo) * std::exp(std::min(700.0, ref_log_ - local));
  auto r = adaptive_simpson([&](double t) { return std::exp(log_integrand(t) - local); }, lo, hi, opts);
  r.log_scale = local;
  return r.log_bracket();
}

BracketedValue CosinePosterior::integrate_weighted(double lo, double hi, double x) const {
  if (!(hi > lo)) return BracketedValue::exact(LogWeight::zero());
  auto logf = [&](double t) {
    const double base = log_integrand(t);
    if (base == kNegInf) return kNegInf;
    const LogWeight pdf = cosine_logpdf(CosineDensity(t), x);
    return pdf.is_zero() ? kNegInf : base + pdf.log();
  };
  double local = kNegInf;
  for (int i = 0; i <= 8; ++i) local = std::max(local, logf(lo + (hi - lo) * i / 8.0));
  if (local == kNegInf) return BracketedValue::exact(LogWeight::zero());
  QuadratureOptions opts;
  opts.rel_tol = tol_;
  opts.abs_tol = tol_ * 1e-3 * (hi - lo) * std::exp(std::min(700.0, ref_log_ - local));
  auto r = adaptive_simpson([&](double t) { return std::exp(logf(t) - local); }, lo, hi, opts);
  r.log_scale = local;
  return r.log_bracket();
}

void CosinePosterior::extend_panels(double to) {
  double lo = cap_;
  while (lo < to) {
    const double k = std::floor(lo / period_ + 1e-9) + 1.0;
    const double hi = std::min(to, k * period_);
    panels_.push_back({lo, hi, integrate(lo, hi)});
    lo = hi;
  }
  cap_ = to;
  std::vector<LogWeight> lows;
  std::vector<LogWeight> highs;
  lows.reserve(panels_.size());
  highs.reserve(panels_.size());
  for (const auto& p : panels_) {
    lows.push_back(p.value.lower);
    highs.push_back(p.value.upper);
  }
  head_ = widen({log_sum_exp(lows), log_sum_exp(highs)});
}

BracketedValue CosinePosterior::panels_over(std::span<const ThetaRange> set) const {
  std::vector<LogWeight> lows;
  std::vector<LogWeight> highs;
  for (const auto& r : set) {
    const double a = std::max(r.lo, 0.0);
    const double b = std::min(r.hi, cap_);
    if (!(b > a)) continue;
    auto it = std::upper_bound(panels_.begin(), panels_.end(), a,
                               [](double v, const Panel& p) { return v < p.hi; });
    for (; it != panels_.end() && it->lo < b; ++it) {
      const double lo = std::max(a, it->lo);
      const double hi = std::min(b, it->hi);
      const BracketedValue v = (lo == it->lo && hi == it->hi) ? it->value : integrate(lo, hi);
      lows.push_back(v.lower);
      highs.push_back(v.upper);
    }
  }
  return widen({log_sum_exp(lows), log_sum_exp(highs)});
}

BracketedValue CosinePosterior::tail_bound(bool region_owns_tail) const {
  if (cap_ >= prior_.support_end()) return BracketedValue::exact(LogWeight::zero());
  const LogWeight upper(log_tail_upper(cap_));
  LogWeight lower = LogWeight::zero();
  if (data_.empty() && region_owns_tail) lower = LogWeight(prior_.log_tail_mass(cap_));
  return widen({lower, upper});
}

BracketedValue CosinePosterior::log_evidence() const { return bracket_add(head_, tail_bound(true)); }

MassBracket CosinePosterior::mass_impl(std::span<const ThetaRange> region, bool tail_unknown) const {
  std::vector<ThetaRange> set;
  for (auto r : region) {
    if (r.hi < r.lo) throw std::domain_error("cosine posterior mass: range with hi < lo");
    const double lo = std::max(r.lo, 0.0);
    if (r.hi > lo) set.push_back({lo, r.hi});
  }
  std::sort(set.begin(), set.end(), [](auto x, auto y) { return x.lo < y.lo; });
  std::vector<ThetaRange> comp;
  double cursor = 0.0;
  for (auto r : set) {
    if (r.lo < cursor) throw std::domain_error("cosine posterior mass: ranges overlap");
    if (r.lo > cursor) comp.push_back({cursor, r.lo});
    cursor = r.hi;
  }
  if (cursor < kInf) comp.push_back({cursor, kInf});

  const double end = std::min(prior_.support_end(), kInf);
  auto owns_tail = [&](const std::vector<ThetaRange>& s) {
    return std::any_of(s.begin(), s.end(),
                       [&](ThetaRange r) { return r.lo <= cap_ && r.hi >= end; });
  };
  const bool region_owns = !tail_unknown && owns_tail(set);
  const bool comp_owns = !tail_unknown && owns_tail(comp);
  const BracketedValue full_tail = tail_bound(true);
  const BracketedValue shared_tail = tail_bound(false);
  const BracketedValue zero = BracketedValue::exact(LogWeight::zero());
  auto tail_for = [&](bool owns, bool other_owns) {
    if (owns) return full_tail;
    if (other_owns) return zero;
    return shared_tail;
  };
  const BracketedValue a = bracket_add(panels_over(set), tail_for(region_owns, comp_owns));
  const BracketedValue b = bracket_add(panels_over(comp), tail_for(comp_owns, region_owns));
  if (a.upper.is_zero() && b.upper.is_zero())
    throw NumericError("cosine posterior: zero evidence (every θ has zero likelihood)");
  return share_of(a, b);
}

MassBracket CosinePosterior::hellinger_mass(double eps) const {
  if (!(eps > 0.0)) throw std::domain_error("cosine hellinger mass: eps must be positive");
  if (eps >= std::numbers::sqrt2) return {0.0, 0.0};
  const auto region = cosine_hellinger_region(eps, std::max(cap_, 100.0) + 0.05);
  // Past decided_up_to (which is at least cap_) only the shared tail bound remains.
  return mass_impl(region.ranges, region.decided_up_to < kInf);
}

MassBracket CosinePosterior::predictive_density(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("predictive density: x must lie in [0, 1]");
  std::vector<LogWeight> lows;
  std::vector<LogWeight> highs;
  for (const auto& p : panels_) {
    const auto v = integrate_weighted(p.lo, p.hi, x);
    lows.push_back(v.lower);
    highs.push_back(v.upper);
  }
  BracketedValue num = widen({log_sum_exp(lows), log_sum_exp(highs)});
  if (cap_ < prior_.support_end()) {
    const double pdf_max = 2.0 / normalizer_floor_beyond(cap_);
    num = bracket_add(num, widen({LogWeight::zero(), LogWeight(log_tail_upper(cap_) + std::log(pdf_max))}));
  }
  const BracketedValue den = log_evidence();
  if (den.lower.is_zero()) throw NumericError("predictive density: zero evidence");
  auto ratio = [](LogWeight p, LogWeight q) { return p.is_zero() ? 0.0 : std::exp(p.log() - q.log()); };
  return {ratio(num.lower, den.upper), ratio(num.upper, den.lower)};
}

MassBracket cosine_posterior_mass(const CosinePriorConfig& prior, std::span<const double> data,
                                  ThetaRange region, double tol) {
  return CosinePosterior(prior, data, tol).mass(region);
}

MassBracket cosine_hellinger_mass(const CosinePriorConfig& prior, std::span<const double> data,
                                  double eps, double tol) {
  return CosinePosterior(prior, data, tol).hellinger_mass(eps);
}

}  // namespace postlab
