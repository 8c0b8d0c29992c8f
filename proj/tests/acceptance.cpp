// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "postlab/barron.hpp"
#include "postlab/cosine.hpp"
#include "postlab/densities.hpp"
#include "postlab/diagnostics.hpp"
#include "postlab/harness.hpp"
#include "postlab/quadrature.hpp"
#include "postlab/special_functions.hpp"

using namespace postlab;
namespace fs = std::filesystem;

namespace {

constexpr double kLn2 = std::numbers::ln2;
const std::string kBeta = "beta_bound_mass:0.693147";

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    out.pass = false;
    out.detail += "; over time budget";
  }
  if (!out.pass) ++g_failures;
  std::printf("%s criterion %d (%s): %s [%.2fs]\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
              out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<StepDensity> enumerate_level(std::int64_t N) {
  const int cells = static_cast<int>(cell_count(N));
  std::vector<StepDensity> out;
  for (unsigned mask = 0; mask < (1u << cells); ++mask) {
    if (std::popcount(mask) != N * N) continue;
    std::vector<std::int64_t> sel;
    for (int j = 0; j < cells; ++j)
      if (mask & (1u << j)) sel.push_back(j);
    out.emplace_back(N, sel);
  }
  return out;
}

double kl_numeric(double a, double b) {
  const GaussExpDensity fa(a), fb(b);
  const double mu = fa.shift();
  // Under f_a the probit Z = Φ⁻¹(X) is normal(√(2a), 1).
  auto integrand = [&](double z) {
    const double w = std::exp(-0.5 * (z - mu) * (z - mu)) / std::sqrt(2.0 * std::numbers::pi);
    return w * (gauss_exp_logpdf_probit(fa, z) - gauss_exp_logpdf_probit(fb, z));
  };
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-13;
  return adaptive_simpson(integrand, mu - 14.0, mu + 14.0, opt, std::vector<double>{mu}).value();
}

// Run records shared between criteria 5 and 7.
std::vector<TrajectoryRecord> g_uniform_runs;
std::vector<TrajectoryRecord> g_gauss_runs;
std::vector<TrajectoryRecord> g_signature_runs;

RunConfig base_config(const std::string& truth, std::size_t n_max, std::vector<std::uint64_t> seeds) {
  RunConfig cfg;
  cfg.truth = TruthSpec::parse(truth);
  cfg.n_max = n_max;
  cfg.seeds = std::move(seeds);
  return cfg;
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  report(1, "closed forms vs quadrature", 10.0, [] {
    double worst_kl = 0.0, worst_h = 0.0, worst_step = 0.0;
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        const double a = i / 9.0, b = j / 9.0;
        worst_kl = std::max(worst_kl, std::abs(kl_numeric(a, b) - kl_gauss_exp(a, b)));
        worst_h = std::max(worst_h, std::abs(hellinger_numeric(GaussExpDensity(a), GaussExpDensity(b)) -
                                             hellinger_gauss_exp(a, b)));
      }
    }
    const double target = std::sqrt(2.0 - std::sqrt(2.0));
    std::vector<StepDensity> steps = enumerate_level(1);
    for (auto& d : enumerate_level(2)) steps.push_back(std::move(d));
    RandomStream rs(77, 0);
    for (std::int64_t N = 3; N <= 6; ++N) {
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<std::int64_t> cells(static_cast<std::size_t>(cell_count(N)));
        std::iota(cells.begin(), cells.end(), 0);
        for (std::size_t k = cells.size() - 1; k > 0; --k) std::swap(cells[k], cells[rs.next_below(k + 1)]);
        cells.resize(static_cast<std::size_t>(N * N));
        steps.emplace_back(N, cells);
      }
    }
    for (const auto& s : steps) {
      worst_step = std::max(worst_step, std::abs(hellinger_step_uniform(s) - target));
      worst_step = std::max(worst_step, std::abs(hellinger_numeric(s, GaussExpDensity(0.0)) - target));
    }
    const bool ok = worst_kl <= 1e-6 && worst_h <= 1e-6 && worst_step <= 1e-9 &&
                    std::abs(target - 0.765367) < 5e-7;
    return Outcome{ok, "max |KL err| " + fmt("%.2e", worst_kl) + ", max |d_h err| " + fmt("%.2e", worst_h) +
                           ", step d_h err " + fmt("%.2e", worst_step) + " over " +
                           std::to_string(steps.size()) + " step densities"};
  });

  report(2, "enumeration oracle", 5.0, [] {
    std::vector<StepDensity> fam[3] = {{}, enumerate_level(1), enumerate_level(2)};
    if (fam[1].size() + fam[2].size() != 72) return Outcome{false, "family size is not 72"};
    RandomStream rs(31337, 0);
    double worst = 0.0;
    bool zero_mismatch = false;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + rs.next_below(4);
      const auto xs = uniform_stream(rs, n);
      SufficientStats stats;
      OccupancyStats occ;
      for (double x : xs) update_stats(stats, occ, x);
      occ.ensure_levels(2, stats);
      std::vector<LogWeight> terms;
      for (std::int64_t N = 1; N <= 2; ++N) {
        const double per = BarronPriorConfig::step_level_weight(N) / static_cast<double>(fam[N].size());
        for (const auto& f : fam[N]) {
          double lik = 1.0;
          for (double x : xs) lik *= step_pdf(f, x);
          terms.push_back(LogWeight::from_linear(per * lik));
        }
      }
      const auto brute = log_sum_exp(terms);
      const auto fast = step_partial_sum(occ, n, true, 1, 2);
      if (brute.is_zero() || fast.is_zero()) {
        zero_mismatch |= brute.is_zero() != fast.is_zero();
      } else {
        worst = std::max(worst, std::abs(brute.log() - fast.log()));
      }
    }
    return Outcome{worst <= 1e-10 && !zero_mismatch, "max |log difference| " + fmt("%.2e", worst)};
  });

  report(3, "analytic prior identities", 1.0, [] {
    const BarronPriorConfig prior;
    BarronEngine engine(prior);
    engine.add(0.4321);
    const std::int64_t M = engine.truncation_level();
    const auto m = step_marginal(engine.occupancy(), 1, false, M);
    const double w = 1.0 - prior.continuous_weight;
    const double lo = w * m.lower.linear(), hi = w * m.upper.linear();
    const bool b1 = lo <= 0.25 && 0.25 <= hi && hi - lo < 1e-12;

    const auto e = band_prior_exponent(engine, BandSpec{kLn2, kLn2});
    const bool ln4 = std::abs(e.mid() - std::log(4.0)) < 1e-9 && e.lower <= std::log(4.0) + 1e-12 &&
                     e.upper >= std::log(4.0) - 1e-12;

    double head = 0.0;
    const std::int64_t L = 4096;
    for (std::int64_t N = L; N >= 1; --N) head += BarronPriorConfig::step_level_weight(N);
    const auto tail = inverse_square_tail(L);
    const double c = 6.0 / (std::numbers::pi * std::numbers::pi);
    const double sum_lo = head + c * tail.lower, sum_hi = head + c * tail.upper;
    const bool tele = sum_lo <= 1.0 + 1e-12 && sum_hi >= 1.0 - 1e-12 && sum_hi - sum_lo < 1e-12;
    return Outcome{b1 && ln4 && tele, "Pi(B_1) in [" + fmt("%.15f", lo) + ", " + fmt("%.15f", hi) +
                                          "], exponent " + fmt("%.9f", e.mid()) + ", weight sum in [" +
                                          fmt("%.15f", sum_lo) + ", " + fmt("%.15f", sum_hi) + "]"};
  });

  report(4, "prior exponent signature at n = 500", 120.0, [] {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto cfg = base_config("uniform", 500, {seed});
      RandomStream rs(seed, 0);
      const auto xs = cfg.truth.draw(rs, 500);
      BarronEngine engine;
      engine.add(std::span(xs).first(50));
      const double at50 = band_prior_exponent(engine, BandSpec{kLn2, kLn2}).mid();
      engine.add(std::span(xs).subspan(50));
      const double at500 = band_prior_exponent(engine, BandSpec{kLn2, kLn2}).mid();
      const bool seed_ok = std::abs(at500 - kLn2) <= 0.05 && std::abs(at500 - kLn2) < std::abs(at50 - kLn2);
      ok &= seed_ok;
      detail += "seed " + std::to_string(seed) + ": " + fmt("%+.4f", at50 - kLn2) + " -> " +
                fmt("%+.4f", at500 - kLn2) + "; ";
      g_signature_runs.push_back(run_trajectory(cfg, seed));
    }
    return Outcome{ok, detail + "(deviation from ln2 at n=50 -> n=500)"};
  });

  report(5, "Hellinger inconsistency witness", 600.0, [] {
    const auto cfg = base_config("uniform", 2000, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    g_uniform_runs = run_replications(cfg, 8).trajectories;
    int good = 0;
    for (const auto& rec : g_uniform_runs) {
      const auto& t = rec.table;
      const auto g = t.lower_series("gamma_stat");
      const auto hl = t.lower_series("hellinger_mass:0.5"), hu = t.upper_series("hellinger_mass:0.5");
      const auto sl = t.lower_series("mass_step"), su = t.upper_series("mass_step");
      bool crossed = false, agree = true;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.99)) continue;
        crossed = true;
        const double gap = std::max({hl[i] - su[i], sl[i] - hu[i], 0.0});
        agree &= gap <= 1e-3;
      }
      good += crossed && agree;
    }
    return Outcome{good >= 8, std::to_string(good) + "/10 seeds reach gamma_stat > 0.99 with matching Hellinger mass"};
  });

  report(6, "consistency at a continuous truth", 120.0, [] {
    bool ok = true;
    double worst_step = 0.0, worst_interval = 1.0;
    const auto cfg = base_config("gauss:0.5", 500, {1, 2, 3, 4, 5});
    g_gauss_runs = run_replications(cfg, 5).trajectories;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RandomStream rs(seed, 0);
      const auto xs = cfg.truth.draw(rs, 500);
      BarronEngine engine(cfg.barron_prior, cfg.truncation, [&](double x) { return cfg.truth.log_pdf(x); });
      engine.add(xs);
      const auto split = engine.split();
      const auto interval = ThetaPosterior(engine.stats()).interval_mass(0.4, 0.6);
      worst_step = std::max(worst_step, split.mass_step.upper);
      worst_interval = std::min(worst_interval, interval.lower);
      ok &= split.mass_step.upper <= 0.01 && interval.lower >= 0.5;
    }
    return Outcome{ok, "max mass_step " + fmt("%.3e", worst_step) + ", min F0 mass of [0.4, 0.6] " +
                           fmt("%.4f", worst_interval)};
  });

  report(7, "beta-boundedness", 0.0, [] {
    std::size_t points = 0, nonzero = 0, equiv_breaks = 0, literal_breaks = 0;
    std::string first_nonzero, per_run;
    auto scan = [&](const std::vector<TrajectoryRecord>& runs, const char* label) {
      const std::size_t nz0 = nonzero, lit0 = literal_breaks;
      for (const auto& rec : runs) {
        const auto& t = rec.table;
        const auto n = t.series("n");
        const auto upper = t.upper_series(kBeta);
        const auto empty = t.series("beta_bound_empty:0.693147");
        const auto sup = t.series("sup_loglik");
        for (std::size_t i = 0; i < n.size(); ++i) {
          ++points;
          const bool zero = upper[i] == 0.0;
          if (!zero) {
            ++nonzero;
            if (first_nonzero.empty())
              first_nonzero = std::string(label) + " seed " + std::to_string(rec.seed) + " n=" +
                              std::to_string(static_cast<long>(n[i]));
          }
          equiv_breaks += zero != (empty[i] == 1.0);
          literal_breaks += zero != (sup[i] / n[i] <= kLn2);
        }
      }
      per_run += std::string(label) + ": " + std::to_string(nonzero - nz0) + " nonzero, " +
                 std::to_string(literal_breaks - lit0) + " literal mismatches; ";
    };
    scan(g_signature_runs, "uniform n500");
    scan(g_uniform_runs, "uniform n2000");
    scan(g_gauss_runs, "gauss:0.5");
    const bool ok = nonzero == 0 && equiv_breaks == 0 && literal_breaks == 0;
    std::string detail = std::to_string(nonzero) + "/" + std::to_string(points) +
                         " grid points with nonzero mass" +
                         (first_nonzero.empty() ? "" : " (first: " + first_nonzero + ")") +
                         "; mass = 0 <=> empty set: " + std::to_string(equiv_breaks) +
                         " mismatches; mass = 0 <=> sup_loglik/n <= ln2: " + std::to_string(literal_breaks) +
                         " mismatches [" + per_run + "]";
    return Outcome{ok, detail};
  });

  report(8, "band-scan shape", 0.0, [] {
    auto cfg = base_config("uniform", 2000, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const auto cells = scan_bands(cfg, {0.2, 0.6}, {0.4, 0.75}, {0.5}, 8);
    double high = -1.0, low = -1.0;
    for (const auto& c : cells) {
      if (c.alpha == 0.6 && c.beta == 0.75) high = c.frequency;
      if (c.alpha == 0.2 && c.beta == 0.4) low = c.frequency;
    }
    return Outcome{high > low && low >= 0.0, "frequency (0.6, 0.75) = " + fmt("%.2f", high) +
                                                 ", (0.2, 0.4) = " + fmt("%.2f", low)};
  });

  report(9, "cosine model and uniform prior predictive", 300.0, [] {
    bool ok = true;
    std::string detail;
    const CosinePriorConfig prior = CosinePriorConfig::parse("exponential:1");
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      RandomStream rs(seed, 0);
      const auto xs = uniform_stream(rs, 1000);
      const auto at10 = cosine_hellinger_mass(prior, std::span(xs).first(10), 0.3);
      const auto at1000 = cosine_hellinger_mass(prior, xs, 0.3);
      ok &= at1000.upper <= at10.lower;
      detail += "seed " + std::to_string(seed) + ": " + fmt("%.3e", at10.mid()) + " -> " +
                fmt("%.3e", at1000.mid()) + "; ";
    }
    BarronEngine empty;
    const std::int64_t M = empty.truncation_level();
    double worst = 0.0;
    for (int i = 0; i < 1024; ++i) {
      const auto d = step_predictive_density(empty.stats(), empty.occupancy(), M, (i + 0.5) / 1024.0);
      worst = std::max({worst, std::abs(d.lower - 1.0), std::abs(d.upper - 1.0)});
    }
    ok &= worst <= 1e-9;
    return Outcome{ok, detail + "step prior predictive max |f - 1| = " + fmt("%.2e", worst)};
  });

  report(10, "determinism and replay", 0.0, [] {
    const fs::path dir = fs::temp_directory_path() / "postlab_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string bin = POSTLAB_BIN;
    const std::string common = " --truth gauss:0.2 --n-max 300 --seeds 1..8 --level-summary ";
    const int r1 = shell("cd '" + dir.string() + "' && '" + bin + "' replicate" + common + "--jobs 1 --out-dir j1");
    const int r8 = shell("cd '" + dir.string() + "' && '" + bin + "' replicate" + common + "--jobs 8 --out-dir j8");
    if (r1 != 0 || r8 != 0) return Outcome{false, "replicate exited with " + std::to_string(r1) + "/" + std::to_string(r8)};
    int same = 0, replayed = 0;
    for (int s = 1; s <= 8; ++s) {
      const std::string stem = "seed_" + std::to_string(s);
      const auto a = slurp(dir / "j1" / (stem + ".csv"));
      same += !a.empty() && a == slurp(dir / "j8" / (stem + ".csv"));
      const int rc = shell("cd '" + dir.string() + "' && '" + bin + "' traj --config j1/" + stem +
                           ".json --out replay_" + stem);
      replayed += rc == 0 && slurp(dir / ("replay_" + stem + ".csv")) == a;
    }
    return Outcome{same == 8 && replayed == 8, std::to_string(same) + "/8 identical across --jobs 1/8, " +
                                                   std::to_string(replayed) + "/8 identical on sidecar replay"};
  });

  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
