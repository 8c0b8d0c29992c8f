#include "postlab/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace postlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool same_level(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

void require_sample(const BarronEngine& engine, const char* what) {
  if (engine.n() == 0) throw std::domain_error(std::string(what) + ": requires n >= 1");
}

// {u ∈ ℝ : −u² + √2·W·u ≥ level} as [lo, hi], or nothing when the parabola stays below.
std::optional<UInterval> superlevel(double W, double level) {
  const double disc = 2.0 * W * W - 4.0 * level;
  if (!(disc >= 0.0)) return std::nullopt;
  const double root = std::sqrt(disc);
  const double centre = std::numbers::sqrt2 * W;
  return UInterval{0.5 * (centre - root), 0.5 * (centre + root)};
}

void push_clipped(std::vector<UInterval>& out, double lo, double hi) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 1.0);
  if (hi > lo) out.push_back({lo, hi});
}

MassBracket scale(MassBracket m, bool keep) { return keep ? m : MassBracket{0.0, 0.0}; }

}  // namespace

void BandSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= beta && std::isfinite(beta)))
    throw std::domain_error("band requires 0 < alpha <= beta < inf, got " + key());
}

std::string BandSpec::key() const { return fmt_param(alpha) + ":" + fmt_param(beta); }

void DiagnosticConfig::validate() const {
  for (const auto& b : bands) b.validate();
  for (const auto& b : exponent_bands) b.validate();
  if (!(beta >= 0.0)) throw std::domain_error("beta must be nonnegative");
  for (double e : hellinger_eps) {
    if (!(e > 0.0 && e < std::numbers::sqrt2))
      throw std::domain_error("hellinger eps must lie in (0, sqrt 2)");
  }
  if (!(tau > 0.0)) throw std::domain_error("tau must be positive");
  if (!(tol > 0.0 && tol < 1e-2)) throw std::domain_error("tol must lie in (0, 1e-2)");
}

double step_level_rate(const BarronEngine& engine) {
  if (engine.n() == 0) return std::numbers::ln2;
  return std::numbers::ln2 - engine.truth_loglik() / static_cast<double>(engine.n());
}

MassBracket gamma_stat(const BarronEngine& engine, const PosteriorSplit& split, double gamma) {
  if (engine.n() == 0) {
    const double w = 1.0 - engine.prior().continuous_weight;
    return {w, w};
  }
  return scale(split.mass_step, same_level(gamma, step_level_rate(engine)));
}

std::vector<UInterval> band_u_set(double W, double shift, const BandSpec& band) {
  std::vector<UInterval> out;
  const auto outer = superlevel(W, band.alpha + shift);
  if (!outer) return out;
  const auto inner = superlevel(W, band.beta + shift);
  if (!inner || inner->hi <= inner->lo) {
    push_clipped(out, outer->lo, outer->hi);
  } else {
    push_clipped(out, outer->lo, inner->lo);
    push_clipped(out, inner->hi, outer->hi);
  }
  return out;
}

std::vector<UInterval> exceed_u_set(double W, double shift, double beta) {
  std::vector<UInterval> out;
  if (const auto iv = superlevel(W, beta + shift)) push_clipped(out, iv->lo, iv->hi);
  return out;
}

MassBracket band_posterior_mass(const BarronEngine& engine, const PosteriorSplit& split,
                                const BandSpec& band, double tol) {
  band.validate();
  require_sample(engine, "band_posterior_mass");
  const double rate = step_level_rate(engine);
  const MassBracket step = scale(split.mass_step, band.alpha <= rate && rate <= band.beta);
  const double shift = engine.truth_loglik() / static_cast<double>(engine.n());
  const auto set = band_u_set(engine.stats().mean_probit(), shift, band);
  MassBracket f0{0.0, 0.0};
  if (!set.empty()) f0 = split.mass_f0 * ThetaPosterior(engine.stats(), tol).u_set_mass(set);
  return clamp_unit(step + f0);
}

ExponentBracket band_prior_exponent(const BarronEngine& engine, const BandSpec& band, double tol) {
  band.validate();
  require_sample(engine, "band_prior_exponent");
  const std::size_t n = engine.n();
  const double w = engine.prior().continuous_weight;
  const double rate = step_level_rate(engine);

  BracketedValue mass = BracketedValue::exact(LogWeight::zero());
  if (band.alpha <= rate && rate <= band.beta && w < 1.0) {
    const auto step = step_marginal(engine.occupancy(), n, false, engine.truncation_level());
    mass = bracket_mul(BracketedValue::exact(LogWeight::from_linear(1.0 - w)), step);
  }
  const double shift = engine.truth_loglik() / static_cast<double>(n);
  const auto set = band_u_set(engine.stats().mean_probit(), shift, band);
  if (!set.empty() && w > 0.0) {
    const auto f0 = ThetaPosterior::prior_log_u_set_mass(set, tol);
    mass = bracket_add(mass, bracket_mul(BracketedValue::exact(LogWeight::from_linear(w)), f0));
  }
  const double nd = static_cast<double>(n);
  return {-mass.upper.log() / nd, mass.lower.is_zero() ? kInf : -mass.lower.log() / nd};
}

MassBracket beta_bound_mass(const BarronEngine& engine, const PosteriorSplit& split, double beta,
                            double tol) {
  if (!(beta >= 0.0)) throw std::domain_error("beta_bound_mass: beta must be nonnegative");
  if (engine.n() == 0) return {0.0, 0.0};
  const MassBracket step = scale(split.mass_step, step_level_rate(engine) > beta);
  const double shift = engine.truth_loglik() / static_cast<double>(engine.n());
  const auto set = exceed_u_set(engine.stats().mean_probit(), shift, beta);
  MassBracket f0{0.0, 0.0};
  if (!set.empty()) f0 = split.mass_f0 * ThetaPosterior(engine.stats(), tol).u_set_mass(set);
  return clamp_unit(step + f0);
}

bool beta_bound_empty(const BarronEngine& engine, double beta) {
  if (engine.n() == 0) return true;
  const double nd = static_cast<double>(engine.n());
  const double shift = engine.truth_loglik() / nd;
  const double f0_rate = sup_loglik_f0(engine.stats().mean_probit(), engine.n()) / nd - shift;
  return !(step_level_rate(engine) > beta) && !(f0_rate > beta);
}

double sup_loglik_f0(double W, std::size_t n) {
  const double nd = static_cast<double>(n);
  if (W <= 0.0) return 0.0;
  if (W <= std::numbers::sqrt2) return 0.5 * nd * W * W;
  return nd * (std::numbers::sqrt2 * W - 1.0);
}

double log_evidence_ratio_lower(const BarronEngine& engine, const PosteriorSplit& split) {
  return split.log_evidence.lower.log() - engine.truth_loglik();
}

DiagnosticRecord evaluate_diagnostics(const BarronEngine& engine, const DiagnosticConfig& cfg) {
  DiagnosticRecord rec;
  rec.n = engine.n();
  rec.truncation = engine.truncation_level();
  rec.W_n = engine.stats().mean_probit();
  rec.truth_loglik = engine.truth_loglik();
  const PosteriorSplit split = engine.split(cfg.tol);
  rec.mass_step = split.mass_step;
  rec.mass_f0 = split.mass_f0;
  rec.gamma_stat = gamma_stat(engine, split, cfg.gamma);
  rec.gamma_level = step_level_rate(engine);
  for (const auto& band : cfg.bands) rec.band_masses.push_back(band_posterior_mass(engine, split, band, cfg.tol));
  for (const auto& band : cfg.exponent_bands)
    rec.band_prior_exponents.push_back(band_prior_exponent(engine, band, cfg.tol));
  rec.beta_bound_mass = beta_bound_mass(engine, split, cfg.beta, cfg.tol);
  rec.beta_bound_empty = beta_bound_empty(engine, cfg.beta);
  rec.sup_loglik = sup_loglik_f0(rec.W_n, rec.n);
  for (double eps : cfg.hellinger_eps) {
    rec.hellinger_masses.push_back(hellinger_ball_mass(engine.stats(), engine.occupancy(),
                                                       engine.prior(), rec.truncation, eps, cfg.tol));
  }
  rec.log_evidence_lower = log_evidence_ratio_lower(engine, split);
  rec.evidence_flag = rec.log_evidence_lower >= -cfg.tau * static_cast<double>(rec.n);
  if (cfg.predictive_ks)
    rec.predictive_ks = step_predictive_ks(engine.stats(), engine.occupancy(), rec.truncation);
  if (cfg.level_summary)
    rec.mean_inverse_level = posterior_over_N(engine.occupancy(), rec.n, rec.truncation).mean_inverse_level;
  return rec;
}

std::vector<std::string> diagnostic_columns(const DiagnosticConfig& cfg) {
  std::vector<std::string> cols{"n", "M", "W_n", "truth_loglik"};
  auto bracket = [&cols](const std::string& name) {
    cols.push_back(name + ".lower");
    cols.push_back(name + ".upper");
  };
  bracket("mass_step");
  bracket("mass_f0");
  bracket("gamma_stat");
  cols.push_back("gamma_level");
  for (const auto& b : cfg.bands) bracket("band_mass:" + b.key());
  for (const auto& b : cfg.exponent_bands) bracket("band_prior_exponent:" + b.key());
  bracket("beta_bound_mass:" + fmt_param(cfg.beta));
  cols.push_back("beta_bound_empty:" + fmt_param(cfg.beta));
  cols.push_back("sup_loglik");
  for (double e : cfg.hellinger_eps) bracket("hellinger_mass:" + fmt_param(e));
  cols.push_back("log_evidence_ratio.lower");
  cols.push_back("evidence_flag:" + fmt_param(cfg.tau));
  if (cfg.predictive_ks) cols.push_back("predictive_ks");
  if (cfg.level_summary) bracket("mean_inverse_level");
  return cols;
}

std::vector<double> flatten(const DiagnosticRecord& rec, const DiagnosticConfig& cfg) {
  std::vector<double> row{static_cast<double>(rec.n), static_cast<double>(rec.truncation), rec.W_n,
                          rec.truth_loglik};
  auto bracket = [&row](MassBracket m) {
    row.push_back(m.lower);
    row.push_back(m.upper);
  };
  bracket(rec.mass_step);
  bracket(rec.mass_f0);
  bracket(rec.gamma_stat);
  row.push_back(rec.gamma_level);
  for (const auto& m : rec.band_masses) bracket(m);
  for (const auto& e : rec.band_prior_exponents) {
    row.push_back(e.lower);
    row.push_back(e.upper);
  }
  bracket(rec.beta_bound_mass);
  row.push_back(rec.beta_bound_empty ? 1.0 : 0.0);
  row.push_back(rec.sup_loglik);
  for (const auto& m : rec.hellinger_masses) bracket(m);
  row.push_back(rec.log_evidence_lower);
  row.push_back(rec.evidence_flag ? 1.0 : 0.0);
  if (cfg.predictive_ks) row.push_back(rec.predictive_ks.value_or(std::nan("")));
  if (cfg.level_summary) bracket(rec.mean_inverse_level.value_or(MassBracket{std::nan(""), std::nan("")}));
  return row;
}

std::optional<std::size_t> Trajectory::find(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<double> Trajectory::series(const std::string& name) const {
  const auto idx = find(name);
  if (!idx) throw std::invalid_argument("unknown column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(*idx));
  return out;
}

std::vector<double> Trajectory::lower_series(const std::string& statistic) const {
  if (find(statistic + ".lower")) return series(statistic + ".lower");
  if (find(statistic)) return series(statistic);
  throw std::invalid_argument("unknown statistic '" + statistic + "'");
}

std::vector<double> Trajectory::upper_series(const std::string& statistic) const {
  if (find(statistic + ".upper")) return series(statistic + ".upper");
  if (find(statistic)) return series(statistic);
  throw std::invalid_argument("unknown statistic '" + statistic + "'");
}

Excursions excursion_count(const Trajectory& t, const std::string& statistic, double delta,
                           double n_min) {
  if (t.rows.empty()) throw std::invalid_argument("excursion_count: empty trajectory");
  const auto values = t.lower_series(statistic);
  const auto ns = t.find("n") ? t.series("n") : std::vector<double>(values.size(), kInf);
  Excursions ex;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (ns[i] >= n_min && values[i] > delta) ex.rows.push_back(i);
  }
  ex.count = ex.rows.size();
  return ex;
}

AccumulationScan accumulation_scan(const Trajectory& t, const std::string& statistic, double gamma,
                                   double tol) {
  const auto lo = t.lower_series(statistic);
  const auto hi = t.upper_series(statistic);
  AccumulationScan scan;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const double mid = 0.5 * (lo[i] + hi[i]);
    if (std::isfinite(mid) && std::abs(mid - gamma) <= tol) scan.rows.push_back(i);
  }
  if (!scan.rows.empty()) scan.last = scan.rows.back();
  return scan;
}

}  // namespace postlab
