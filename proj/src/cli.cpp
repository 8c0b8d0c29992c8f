#include "postlab/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "postlab/errors.hpp"
#include "postlab/harness.hpp"
#include "postlab/svg_plot.hpp"

namespace postlab {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("postlab");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("POSTERIOR_LAB_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honour it when asked for explicitly.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

struct RunFlags {
  std::string config_path;
  std::optional<std::string> model;
  std::optional<std::string> truth;
  std::optional<std::string> cosine_prior;
  std::optional<std::size_t> n_max;
  std::optional<double> grid_ratio;
  std::optional<double> prior_weight;
  std::optional<double> levels_per_n;
  std::optional<std::int64_t> truncation;
  std::optional<double> gamma;
  std::optional<double> beta;
  std::optional<double> tau;
  std::optional<double> tol;
  std::vector<std::string> bands;
  std::vector<std::string> exponent_bands;
  std::vector<double> eps;
  std::vector<double> cosine_eps;
  bool predictive_ks = false;
  bool level_summary = false;
};

void add_run_flags(CLI::App* sub, RunFlags& f) {
  sub->add_option("--config", f.config_path, "JSON config or trajectory sidecar; flags override it")
      ->check(CLI::ExistingFile);
  sub->add_option("--model", f.model, "Model: barron or cosine")->check(CLI::IsMember({"barron", "cosine"}));
  sub->add_option("--truth", f.truth, "uniform | gauss:THETA | step:N:i,j,... | file:PATH");
  sub->add_option("--n-max", f.n_max, "Largest sample size");
  sub->add_option("--grid-ratio", f.grid_ratio, "Geometric ratio of the evaluation grid (> 1)");
  sub->add_option("--prior-weight", f.prior_weight, "Weight of the continuous component (barron)");
  sub->add_option("--cosine-prior", f.cosine_prior, "exponential:RATE | half-cauchy:SCALE | uniform:MAX");
  sub->add_option("--levels-per-n", f.levels_per_n, "Truncation level M = max(N_distinct, ceil(c n))");
  sub->add_option("--truncation", f.truncation, "Fixed truncation level M (0 = adaptive)");
  sub->add_option("--gamma", f.gamma, "Level of the gamma statistic");
  sub->add_option("--band", f.bands, "Posterior band ALPHA:BETA (repeatable; replaces the defaults)");
  sub->add_option("--exponent-band", f.exponent_bands, "Prior-exponent band ALPHA:BETA (repeatable)");
  sub->add_option("--beta", f.beta, "Threshold of the beta-bound mass");
  sub->add_option("--eps", f.eps, "Hellinger radius for the barron model (repeatable)");
  sub->add_option("--cosine-eps", f.cosine_eps, "Hellinger radius for the cosine model (repeatable)");
  sub->add_option("--tau", f.tau, "Evidence flag threshold");
  sub->add_option("--tol", f.tol, "Relative quadrature tolerance");
  sub->add_flag("--predictive-ks", f.predictive_ks, "Add the step predictive Kolmogorov distance");
  sub->add_flag("--level-summary", f.level_summary, "Add the posterior mean of 1/N");
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("cannot parse " + what + " '" + s + "'");
  return v;
}

BandSpec parse_band(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("band must look like ALPHA:BETA, got '" + s + "'");
  BandSpec b{parse_number(s.substr(0, colon), "alpha"), parse_number(s.substr(colon + 1), "beta")};
  try {
    b.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  return b;
}

RunConfig build_config(const RunFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) cfg = RunConfig::from_json(read_json(f.config_path));
  try {
    if (f.model) cfg.model = *f.model == "cosine" ? ModelKind::cosine : ModelKind::barron;
    if (f.truth) cfg.truth = TruthSpec::parse(*f.truth);
    if (f.n_max) cfg.n_max = *f.n_max;
    if (f.grid_ratio) cfg.grid_ratio = *f.grid_ratio;
    if (f.prior_weight) cfg.barron_prior.continuous_weight = *f.prior_weight;
    if (f.cosine_prior) {
      const auto parsed = CosinePriorConfig::parse(*f.cosine_prior);
      cfg.cosine_prior.kind = parsed.kind;
      cfg.cosine_prior.param = parsed.param;
    }
    if (f.levels_per_n) cfg.truncation.levels_per_n = *f.levels_per_n;
    if (f.truncation) cfg.truncation.fixed_level = *f.truncation;
    if (f.gamma) cfg.diagnostics.gamma = *f.gamma;
    if (f.beta) cfg.diagnostics.beta = *f.beta;
    if (f.tau) cfg.diagnostics.tau = *f.tau;
    if (f.tol) cfg.diagnostics.tol = *f.tol;
    if (!f.bands.empty()) {
      cfg.diagnostics.bands.clear();
      for (const auto& b : f.bands) cfg.diagnostics.bands.push_back(parse_band(b));
    }
    if (!f.exponent_bands.empty()) {
      cfg.diagnostics.exponent_bands.clear();
      for (const auto& b : f.exponent_bands) cfg.diagnostics.exponent_bands.push_back(parse_band(b));
    }
    if (!f.eps.empty()) cfg.diagnostics.hellinger_eps = f.eps;
    if (!f.cosine_eps.empty()) cfg.cosine.hellinger_eps = f.cosine_eps;
    if (f.predictive_ks) cfg.diagnostics.predictive_ks = true;
    if (f.level_summary) cfg.diagnostics.level_summary = true;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const std::string tok = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto dots = tok.find("..");
    try {
      if (dots != std::string::npos) {
        const auto lo = std::stoull(tok.substr(0, dots));
        const auto hi = std::stoull(tok.substr(dots + 2));
        if (hi < lo || hi - lo > 1'000'000) throw ConfigError("bad seed range '" + tok + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      } else {
        std::size_t used = 0;
        out.push_back(std::stoull(tok, &used));
        if (used != tok.size()) throw ConfigError("bad seed '" + tok + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse seeds '" + spec + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> parse_grid(const std::string& spec, const std::string& what) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? std::string::npos : spec.find(':', a + 1);
  if (b == std::string::npos) {
    return {parse_number(spec, what)};
  }
  const double lo = parse_number(spec.substr(0, a), what);
  const double hi = parse_number(spec.substr(a + 1, b - a - 1), what);
  const double step = parse_number(spec.substr(b + 1), what);
  if (!(step > 0.0) || hi < lo) throw ConfigError(what + " grid must be lo:hi:step with step > 0");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 10000) throw ConfigError(what + " grid is too large");
  for (std::size_t i = 0; i < count; ++i) {
    // Snap away the accumulated binary error so grid values print as typed.
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", lo + step * static_cast<double>(i));
    out.push_back(std::strtod(buf, nullptr));
  }
  return out;
}

int exit_for(const TrajectoryRecord& rec) { return rec.errors.empty() ? kExitOk : kExitNumeric; }

void write_pair(const TrajectoryRecord& rec, const fs::path& prefix) {
  write_trajectory_csv(rec, fs::path(prefix.string() + ".csv"));
  write_json(rec.sidecar(), fs::path(prefix.string() + ".json"));
}

fs::path normalized(const fs::path& p) { return fs::weakly_canonical(fs::absolute(p)); }

}  // namespace

int run_cli(int argc, char** argv) {
  setup_logging();
  CLI::App app{"postlab: exact posterior laboratory for density-estimation consistency"};
  app.require_subcommand(1);

  RunFlags traj_flags;
  std::optional<std::uint64_t> traj_seed;
  std::string traj_out;
  auto* traj = app.add_subcommand("traj", "Run one trajectory and write CSV plus JSON sidecar");
  add_run_flags(traj, traj_flags);
  traj->add_option("--seed", traj_seed, "Seed of the data stream");
  traj->add_option("--out", traj_out, "Output prefix (default traj_seed<SEED>)");

  RunFlags rep_flags;
  std::string rep_seeds;
  unsigned rep_jobs = 1;
  std::string rep_dir = "replicates";
  std::string rep_summary;
  std::vector<std::string> rep_excursions;
  std::optional<double> rep_nmin;
  auto* rep = app.add_subcommand("replicate", "Run one trajectory per seed and summarize");
  add_run_flags(rep, rep_flags);
  rep->add_option("--seeds", rep_seeds, "Seeds, e.g. 1..20 or 1,4,9");
  rep->add_option("--jobs", rep_jobs, "Worker threads")->check(CLI::PositiveNumber);
  rep->add_option("--out-dir", rep_dir, "Directory for seed_<k>.csv/.json");
  rep->add_option("--summary", rep_summary, "Summary path (default <out-dir>/summary.json)");
  rep->add_option("--excursion", rep_excursions, "STATISTIC:DELTA summarized as a frequency (repeatable)");
  rep->add_option("--n-min", rep_nmin, "Only count excursions at n >= this value");

  RunFlags scan_flags;
  std::string scan_seeds;
  unsigned scan_jobs = 1;
  std::string alpha_grid;
  std::string beta_grid;
  std::string delta_grid = "0.5";
  std::optional<double> scan_nmin;
  std::string scan_out = "scan.csv";
  auto* scan = app.add_subcommand("scan", "Excursion frequencies of band masses over a band grid");
  add_run_flags(scan, scan_flags);
  scan->add_option("--seeds", scan_seeds, "Seeds, e.g. 1..20");
  scan->add_option("--jobs", scan_jobs, "Worker threads")->check(CLI::PositiveNumber);
  scan->add_option("--alpha-grid", alpha_grid, "lo:hi:step or a single value")->required();
  scan->add_option("--beta-grid", beta_grid, "lo:hi:step or a single value")->required();
  scan->add_option("--delta-grid", delta_grid, "lo:hi:step or a single value");
  scan->add_option("--n-min", scan_nmin, "Only count excursions at n >= this value");
  scan->add_option("--out", scan_out, "Output CSV");

  PlotSpec plot_spec;
  std::vector<std::string> plot_inputs;
  std::string plot_out = "plot.svg";
  auto* plot = app.add_subcommand("plot", "Render trajectory columns as an SVG line chart");
  plot->add_option("--input", plot_inputs, "Trajectory CSV (repeatable)")->required();
  plot->add_option("--y", plot_spec.columns, "Column or bracketed statistic (repeatable)")->required();
  plot->add_option("--x", plot_spec.x_column, "x column");
  plot->add_flag("--log-x", plot_spec.log_x, "Logarithmic x axis");
  plot->add_flag("--log-y", plot_spec.log_y, "Logarithmic y axis");
  plot->add_option("--refline", plot_spec.reflines, "Horizontal reference line (repeatable)");
  plot->add_option("--title", plot_spec.title, "Chart title");
  plot->add_option("--out", plot_out, "Output SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*traj) {
      RunConfig cfg = build_config(traj_flags);
      const std::uint64_t seed = traj_seed ? *traj_seed : cfg.seeds.front();
      cfg.seeds = {seed};
      cfg.validate();
      const auto rec = run_trajectory(cfg, seed);
      const fs::path prefix = traj_out.empty() ? fs::path("traj_seed" + std::to_string(seed)) : fs::path(traj_out);
      write_pair(rec, prefix);
      spdlog::info("wrote {}.csv and {}.json", prefix.string(), prefix.string());
      return exit_for(rec);
    }
    if (*rep) {
      RunConfig cfg = build_config(rep_flags);
      if (!rep_seeds.empty()) cfg.seeds = parse_seeds(rep_seeds);
      if (!rep_excursions.empty()) {
        cfg.excursions.clear();
        for (const auto& e : rep_excursions) {
          const auto colon = e.rfind(':');
          if (colon == std::string::npos) throw ConfigError("excursion must look like STATISTIC:DELTA");
          cfg.excursions.emplace_back(e.substr(0, colon), parse_number(e.substr(colon + 1), "delta"));
        }
      }
      if (rep_nmin) cfg.excursion_n_min = *rep_nmin;
      cfg.validate();
      const fs::path dir(rep_dir);
      const fs::path summary_path = rep_summary.empty() ? dir / "summary.json" : fs::path(rep_summary);
      std::set<fs::path> outputs{normalized(summary_path)};
      for (auto seed : cfg.seeds) {
        for (const char* ext : {".csv", ".json"}) {
          const auto p = normalized(dir / ("seed_" + std::to_string(seed) + ext));
          if (!outputs.insert(p).second) throw ConfigError("output path collision at " + p.string());
        }
      }
      fs::create_directories(dir);
      const auto res = run_replications(cfg, rep_jobs);
      for (const auto& rec : res.trajectories) write_pair(rec, dir / ("seed_" + std::to_string(rec.seed)));
      if (summary_path.has_parent_path()) fs::create_directories(summary_path.parent_path());
      write_json(res.summary, summary_path);
      bool numeric_trouble = !res.failures.empty();
      for (const auto& rec : res.trajectories) numeric_trouble |= !rec.errors.empty();
      return numeric_trouble ? kExitNumeric : kExitOk;
    }
    if (*scan) {
      RunConfig cfg = build_config(scan_flags);
      if (!scan_seeds.empty()) cfg.seeds = parse_seeds(scan_seeds);
      if (scan_nmin) cfg.excursion_n_min = *scan_nmin;
      cfg.validate();
      const auto cells = scan_bands(cfg, parse_grid(alpha_grid, "alpha"), parse_grid(beta_grid, "beta"),
                                    parse_grid(delta_grid, "delta"), scan_jobs);
      std::ofstream out(scan_out, std::ios::binary);
      if (!out) throw ConfigError("cannot write " + scan_out);
      out << "alpha,beta,delta,frequency\n";
      for (const auto& c : cells) {
        out << format_value(c.alpha) << "," << format_value(c.beta) << "," << format_value(c.delta) << ","
            << format_value(c.frequency) << "\n";
      }
      return kExitOk;
    }
    if (*plot) {
      for (const auto& p : plot_inputs) plot_spec.inputs.emplace_back(p);
      plot_spec.output = plot_out;
      const auto series = load_series(plot_spec);
      std::ofstream out(plot_spec.output, std::ios::binary);
      if (!out) throw ConfigError("cannot write " + plot_spec.output.string());
      out << render_svg(series, plot_spec);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}

}  // namespace postlab
