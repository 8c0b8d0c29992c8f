#include "postlab/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "postlab/densities.hpp"

namespace postlab {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("cannot parse " + what + " '" + text + "'");
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("cannot parse " + what + " '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

json bands_to_json(const std::vector<BandSpec>& bands) {
  json arr = json::array();
  for (const auto& b : bands) arr.push_back({b.alpha, b.beta});
  return arr;
}

std::vector<BandSpec> bands_from_json(const json& arr) {
  std::vector<BandSpec> out;
  for (const auto& b : arr) {
    if (!b.is_array() || b.size() != 2) throw ConfigError("a band must be a pair [alpha, beta]");
    out.push_back({b[0].get<double>(), b[1].get<double>()});
  }
  return out;
}

std::string param_key(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Truth

TruthSpec TruthSpec::parse(const std::string& text) {
  TruthSpec t;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "uniform" && colon == std::string::npos) {
    t.kind = Kind::uniform;
  } else if (head == "gauss") {
    t.kind = Kind::gauss_exp;
    t.theta = parse_double(rest, "gauss theta");
  } else if (head == "step") {
    t.kind = Kind::step;
    const auto colon2 = rest.find(':');
    if (colon2 == std::string::npos) throw ConfigError("step truth must look like step:N:i,j,...");
    t.level = parse_int(rest.substr(0, colon2), "step level");
    for (const auto& tok : split(rest.substr(colon2 + 1), ','))
      t.selected.push_back(parse_int(trim(tok), "step cell index"));
  } else if (head == "file") {
    t.kind = Kind::file;
    t.path = rest;
  } else {
    throw ConfigError("unknown truth '" + text + "' (expected uniform, gauss:θ, step:N:idx, file:PATH)");
  }
  t.validate();
  return t;
}

std::string TruthSpec::to_string() const {
  switch (kind) {
    case Kind::uniform:
      return "uniform";
    case Kind::gauss_exp: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "gauss:%.17g", theta);
      return buf;
    }
    case Kind::step: {
      std::string s = "step:" + std::to_string(level) + ":";
      for (std::size_t i = 0; i < selected.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(selected[i]);
      }
      return s;
    }
    case Kind::file:
      return "file:" + path;
  }
  return {};
}

void TruthSpec::validate() const {
  try {
    if (kind == Kind::gauss_exp) GaussExpDensity{theta};
    if (kind == Kind::step) StepDensity(level, selected);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid truth: ") + e.what());
  }
  if (kind == Kind::file && path.empty()) throw ConfigError("file truth needs a path");
}

double TruthSpec::log_pdf(double x) const {
  switch (kind) {
    case Kind::uniform:
    case Kind::file:
      return 0.0;
    case Kind::gauss_exp:
      return gauss_exp_logpdf(GaussExpDensity(theta), x).log();
    case Kind::step: {
      const double v = step_pdf(StepDensity(level, selected), x);
      return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    }
  }
  return 0.0;
}

std::vector<double> TruthSpec::draw(RandomStream& rs, std::size_t n) const {
  switch (kind) {
    case Kind::uniform:
      return uniform_stream(rs, n);
    case Kind::gauss_exp:
      return sample_gauss_exp(GaussExpDensity(theta), rs, n);
    case Kind::step:
      return sample_step(StepDensity(level, selected), rs, n);
    case Kind::file: {
      auto data = ingest_dataset(path);
      if (data.size() < n)
        throw ConfigError("dataset " + path + " has " + std::to_string(data.size()) +
                          " rows but n_max is " + std::to_string(n));
      data.resize(n);
      return data;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Config

void RunConfig::validate() const {
  truth.validate();
  if (n_max < 1) throw ConfigError("n_max must be at least 1");
  if (!(grid_ratio > 1.0) || !std::isfinite(grid_ratio)) throw ConfigError("grid_ratio must exceed 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("seeds must be distinct");
  if (!(truncation.levels_per_n > 0.0) || truncation.max_level < 1 || truncation.fixed_level < 0)
    throw ConfigError("invalid truncation policy");
  if (!(excursion_n_min >= 0.0)) throw ConfigError("excursion_n_min must be nonnegative");
  try {
    barron_prior.validate();
    cosine_prior.validate();
    diagnostics.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  for (double e : cosine.hellinger_eps) {
    if (!(e > 0.0 && e < std::numbers::sqrt2)) throw ConfigError("cosine eps must lie in (0, sqrt 2)");
  }
  for (double t : cosine.region_thresholds) {
    if (!(t >= 0.0)) throw ConfigError("region thresholds must be nonnegative");
  }
}

json RunConfig::to_json() const {
  json ex = json::array();
  for (const auto& [stat, delta] : excursions) ex.push_back({{"statistic", stat}, {"delta", delta}});
  return {
      {"truth", truth.to_string()},
      {"model", model == ModelKind::barron ? "barron" : "cosine"},
      {"barron", {{"continuous_weight", barron_prior.continuous_weight}}},
      {"cosine_prior",
       {{"prior", cosine_prior.to_string()},
        {"tail_fraction", cosine_prior.tail_fraction},
        {"cap_limit", cosine_prior.cap_limit}}},
      {"n_max", n_max},
      {"grid_ratio", grid_ratio},
      {"truncation",
       {{"fixed_level", truncation.fixed_level},
        {"levels_per_n", truncation.levels_per_n},
        {"max_level", truncation.max_level}}},
      {"seeds", seeds},
      {"diagnostics",
       {{"gamma", diagnostics.gamma},
        {"bands", bands_to_json(diagnostics.bands)},
        {"exponent_bands", bands_to_json(diagnostics.exponent_bands)},
        {"beta", diagnostics.beta},
        {"hellinger_eps", diagnostics.hellinger_eps},
        {"tau", diagnostics.tau},
        {"predictive_ks", diagnostics.predictive_ks},
        {"level_summary", diagnostics.level_summary},
        {"tol", diagnostics.tol}}},
      {"cosine",
       {{"hellinger_eps", cosine.hellinger_eps}, {"region_thresholds", cosine.region_thresholds}}},
      {"excursions", ex},
      {"excursion_n_min", excursion_n_min},
  };
}

RunConfig RunConfig::from_json(const json& input) {
  const json& j = input.contains("config") ? input.at("config") : input;
  RunConfig c;
  try {
    static const std::set<std::string> known{"truth",       "model",      "barron",   "cosine_prior",
                                             "n_max",       "grid_ratio", "truncation", "seeds",
                                             "diagnostics", "cosine",     "excursions", "excursion_n_min"};
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    if (j.contains("truth")) c.truth = TruthSpec::parse(j.at("truth").get<std::string>());
    if (j.contains("model")) {
      const auto m = j.at("model").get<std::string>();
      if (m == "barron") {
        c.model = ModelKind::barron;
      } else if (m == "cosine") {
        c.model = ModelKind::cosine;
      } else {
        throw ConfigError("unknown model '" + m + "'");
      }
    }
    if (j.contains("barron"))
      c.barron_prior.continuous_weight = j.at("barron").value("continuous_weight", 0.5);
    if (j.contains("cosine_prior")) {
      const auto& cp = j.at("cosine_prior");
      c.cosine_prior = CosinePriorConfig::parse(cp.value("prior", std::string("exponential:1")));
      c.cosine_prior.tail_fraction = cp.value("tail_fraction", c.cosine_prior.tail_fraction);
      c.cosine_prior.cap_limit = cp.value("cap_limit", c.cosine_prior.cap_limit);
    }
    c.n_max = j.value("n_max", c.n_max);
    c.grid_ratio = j.value("grid_ratio", c.grid_ratio);
    if (j.contains("truncation")) {
      const auto& t = j.at("truncation");
      c.truncation.fixed_level = t.value("fixed_level", c.truncation.fixed_level);
      c.truncation.levels_per_n = t.value("levels_per_n", c.truncation.levels_per_n);
      c.truncation.max_level = t.value("max_level", c.truncation.max_level);
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (input.contains("config") && input.contains("seed"))
      c.seeds = {input.at("seed").get<std::uint64_t>()};
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      auto& g = c.diagnostics;
      g.gamma = d.value("gamma", g.gamma);
      if (d.contains("bands")) g.bands = bands_from_json(d.at("bands"));
      if (d.contains("exponent_bands")) g.exponent_bands = bands_from_json(d.at("exponent_bands"));
      g.beta = d.value("beta", g.beta);
      if (d.contains("hellinger_eps")) g.hellinger_eps = d.at("hellinger_eps").get<std::vector<double>>();
      g.tau = d.value("tau", g.tau);
      g.predictive_ks = d.value("predictive_ks", g.predictive_ks);
      g.level_summary = d.value("level_summary", g.level_summary);
      g.tol = d.value("tol", g.tol);
    }
    if (j.contains("cosine")) {
      const auto& cd = j.at("cosine");
      if (cd.contains("hellinger_eps"))
        c.cosine.hellinger_eps = cd.at("hellinger_eps").get<std::vector<double>>();
      if (cd.contains("region_thresholds"))
        c.cosine.region_thresholds = cd.at("region_thresholds").get<std::vector<double>>();
    }
    if (j.contains("excursions")) {
      c.excursions.clear();
      for (const auto& e : j.at("excursions"))
        c.excursions.emplace_back(e.at("statistic").get<std::string>(), e.at("delta").get<double>());
    }
    c.excursion_n_min = j.value("excursion_n_min", c.excursion_n_min);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string canonical = cfg.to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::size_t> evaluation_grid(std::size_t n_max, double ratio) {
  if (n_max < 1 || !(ratio > 1.0)) throw ConfigError("evaluation grid needs n_max >= 1 and ratio > 1");
  std::vector<std::size_t> grid;
  for (std::size_t n = 1; n <= std::min<std::size_t>(10, n_max); ++n) grid.push_back(n);
  double x = 10.0;
  while (true) {
    x *= ratio;
    const auto n = static_cast<std::size_t>(std::ceil(x - 1e-9));
    if (n >= n_max) break;
    if (n > grid.back()) grid.push_back(n);
  }
  if (grid.back() != n_max) grid.push_back(n_max);
  return grid;
}

// ---------------------------------------------------------------------------
// Trajectories

json TrajectoryRecord::sidecar() const {
  json errs = json::array();
  for (const auto& e : errors) errs.push_back({{"n", e.n}, {"message", e.message}});
  return {{"config", config.to_json()}, {"seed", seed},
          {"grid", grid},              {"columns", table.columns},
          {"version", kVersion},       {"config_hash", config_hash(config)},
          {"errors", errs}};
}

namespace {

std::vector<std::string> cosine_columns(const RunConfig& cfg) {
  std::vector<std::string> cols{"n", "cap", "log_evidence.lower", "log_evidence.upper"};
  for (double e : cfg.cosine.hellinger_eps) {
    cols.push_back("hellinger_mass:" + param_key(e) + ".lower");
    cols.push_back("hellinger_mass:" + param_key(e) + ".upper");
  }
  for (double t : cfg.cosine.region_thresholds) {
    cols.push_back("region_mass:" + param_key(t) + ".lower");
    cols.push_back("region_mass:" + param_key(t) + ".upper");
  }
  cols.push_back("tail_dominates");
  return cols;
}

std::vector<double> cosine_row(const RunConfig& cfg, std::span<const double> data) {
  const CosinePosterior post(cfg.cosine_prior, data, 1e-9);
  const auto ev = post.log_evidence();
  std::vector<double> row{static_cast<double>(data.size()), post.cap(), ev.lower.log(), ev.upper.log()};
  for (double e : cfg.cosine.hellinger_eps) {
    const auto m = post.hellinger_mass(e);
    row.push_back(m.lower);
    row.push_back(m.upper);
  }
  for (double t : cfg.cosine.region_thresholds) {
    const auto m = post.mass(ThetaRange{t, std::numeric_limits<double>::infinity()});
    row.push_back(m.lower);
    row.push_back(m.upper);
  }
  row.push_back(post.tail_dominates() ? 1.0 : 0.0);
  return row;
}

}  // namespace

TrajectoryRecord run_trajectory(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  TrajectoryRecord rec;
  rec.config = cfg;
  rec.seed = seed;
  rec.grid = evaluation_grid(cfg.n_max, cfg.grid_ratio);
  rec.table.columns =
      cfg.model == ModelKind::barron ? diagnostic_columns(cfg.diagnostics) : cosine_columns(cfg);
  rec.table.columns.push_back("status");
  const std::size_t width = rec.table.columns.size();

  RandomStream rs(seed, 0);
  const std::vector<double> data = cfg.truth.draw(rs, cfg.n_max);

  auto failed_row = [&](std::size_t n, const std::exception& e) {
    spdlog::warn("seed {} n {}: {}", seed, n, e.what());
    rec.errors.push_back({n, e.what()});
    std::vector<double> row(width, kNaN);
    row[0] = static_cast<double>(n);
    row.back() = 1.0;
    rec.table.rows.push_back(std::move(row));
  };

  if (cfg.model == ModelKind::barron) {
    const TruthSpec truth = cfg.truth;
    TruthLogPdf truth_fn;
    if (truth.kind != TruthSpec::Kind::uniform && truth.kind != TruthSpec::Kind::file)
      truth_fn = [truth](double x) { return truth.log_pdf(x); };
    BarronEngine engine(cfg.barron_prior, cfg.truncation, truth_fn);
    std::size_t fed = 0;
    for (std::size_t n : rec.grid) {
      try {
        while (fed < n) engine.add(data[fed++]);
        auto row = flatten(evaluate_diagnostics(engine, cfg.diagnostics), cfg.diagnostics);
        row.push_back(0.0);
        rec.table.rows.push_back(std::move(row));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        while (fed < n) engine.add(data[fed++]);
        failed_row(n, e);
      }
      spdlog::debug("seed {} n {} done", seed, n);
    }
  } else {
    for (std::size_t n : rec.grid) {
      try {
        auto row = cosine_row(cfg, std::span<const double>(data.data(), n));
        row.push_back(0.0);
        rec.table.rows.push_back(std::move(row));
      } catch (const std::exception& e) {
        failed_row(n, e);
      }
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Replications

double excursion_frequency(const std::vector<TrajectoryRecord>& runs, const std::string& statistic,
                           double delta, double n_min) {
  if (runs.empty()) return kNaN;
  std::size_t hits = 0;
  for (const auto& r : runs) {
    if (excursion_count(r.table, statistic, delta, n_min).count > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(runs.size());
}

json summarize(const RunConfig& cfg, const std::vector<TrajectoryRecord>& runs) {
  json out;
  out["version"] = kVersion;
  out["config_hash"] = config_hash(cfg);
  std::vector<std::uint64_t> seeds;
  for (const auto& r : runs) seeds.push_back(r.seed);
  std::sort(seeds.begin(), seeds.end());
  out["seeds"] = seeds;
  if (runs.empty()) {
    out["statistics"] = json::object();
    out["excursions"] = json::array();
    return out;
  }
  const auto& first = runs.front();
  out["grid"] = first.grid;
  json stats = json::object();
  for (std::size_t c = 0; c < first.table.columns.size(); ++c) {
    const auto& name = first.table.columns[c];
    if (name == "n") continue;
    std::vector<double> mins, medians, maxs;
    for (std::size_t row = 0; row < first.table.rows.size(); ++row) {
      std::vector<double> vals;
      for (const auto& r : runs) {
        const double v = r.table.rows.at(row).at(c);
        if (!std::isnan(v)) vals.push_back(v);
      }
      if (vals.empty()) {
        mins.push_back(kNaN);
        medians.push_back(kNaN);
        maxs.push_back(kNaN);
        continue;
      }
      std::sort(vals.begin(), vals.end());
      const std::size_t k = vals.size();
      mins.push_back(vals.front());
      maxs.push_back(vals.back());
      medians.push_back(k % 2 ? vals[k / 2] : 0.5 * (vals[k / 2 - 1] + vals[k / 2]));
    }
    stats[name] = {{"min", mins}, {"median", medians}, {"max", maxs}};
  }
  out["statistics"] = stats;
  json ex = json::array();
  for (const auto& [stat, delta] : cfg.excursions) {
    json entry{{"statistic", stat}, {"delta", delta}, {"n_min", cfg.excursion_n_min}};
    try {
      entry["frequency"] = excursion_frequency(runs, stat, delta, cfg.excursion_n_min);
    } catch (const std::invalid_argument& e) {
      entry["frequency"] = nullptr;
      entry["error"] = e.what();
    }
    ex.push_back(entry);
  }
  out["excursions"] = ex;
  return out;
}

ReplicationResult run_replications(const RunConfig& cfg, unsigned jobs) {
  cfg.validate();
  std::vector<std::uint64_t> seeds = cfg.seeds;
  std::sort(seeds.begin(), seeds.end());
  std::vector<std::optional<TrajectoryRecord>> slots(seeds.size());
  std::vector<std::string> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        slots[i] = run_trajectory(cfg, seeds[i]);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size())));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::exception_ptr> thrown(count);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < count; ++t) {
      pool.emplace_back([&, t] {
        try {
          worker();
        } catch (...) {
          thrown[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : thrown) {
      if (e) std::rethrow_exception(e);
    }
  }
  ReplicationResult res;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (slots[i]) {
      res.trajectories.push_back(std::move(*slots[i]));
    } else {
      res.failures.emplace_back(seeds[i], errors[i]);
    }
  }
  res.summary = summarize(cfg, res.trajectories);
  json fails = json::array();
  for (const auto& [seed, msg] : res.failures) fails.push_back({{"seed", seed}, {"message", msg}});
  res.summary["failures"] = fails;
  return res;
}

std::vector<ScanCell> scan_bands(RunConfig cfg, const std::vector<double>& alphas,
                                 const std::vector<double>& betas, const std::vector<double>& deltas,
                                 unsigned jobs) {
  if (cfg.model != ModelKind::barron) throw ConfigError("scan requires the barron model");
  std::vector<BandSpec> bands;
  for (double a : alphas) {
    for (double b : betas) {
      if (a > 0.0 && a <= b) bands.push_back({a, b});
    }
  }
  if (bands.empty()) throw ConfigError("band grid is empty after dropping cells with alpha > beta");
  if (deltas.empty()) throw ConfigError("delta grid is empty");
  cfg.diagnostics.bands = bands;
  const auto res = run_replications(cfg, jobs);
  std::vector<ScanCell> cells;
  for (const auto& b : bands) {
    for (double d : deltas) {
      cells.push_back({b.alpha, b.beta, d,
                       excursion_frequency(res.trajectories, "band_mass:" + b.key(), d,
                                           cfg.excursion_n_min)});
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// I/O

std::vector<double> ingest_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t row = 0;
  bool seen_value_or_header = false;
  while (std::getline(in, line)) {
    ++row;
    const std::string cell = trim(line);
    if (cell.empty()) continue;
    if (!seen_value_or_header) {
      seen_value_or_header = true;
      if (cell == "x") continue;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
      throw ConfigError(path.string() + ": row " + std::to_string(row) + ": cannot parse '" + cell + "'");
    if (!(v > 0.0 && v < 1.0))
      throw ConfigError(path.string() + ": row " + std::to_string(row) + ": value " + cell +
                        " outside (0, 1)");
    out.push_back(v);
  }
  if (out.empty()) spdlog::warn("dataset {} is empty", path.string());
  spdlog::info("read {} values from {}", out.size(), path.string());
  return out;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(const TrajectoryRecord& rec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t i = 0; i < rec.table.columns.size(); ++i) out << (i ? "," : "") << rec.table.columns[i];
  out << "\n";
  for (const auto& row : rec.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_value(row[i]);
    out << "\n";
  }
  if (!out) throw ConfigError("failed writing " + path.string());
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  Trajectory t;
  std::string line;
  if (!std::getline(in, line)) return t;
  for (const auto& c : split(trim(line), ',')) t.columns.push_back(trim(c));
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != t.columns.size())
      throw ConfigError(path.string() + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " fields, expected " +
                        std::to_string(t.columns.size()));
    std::vector<double> vals;
    for (const auto& c : cells) {
      const std::string s = trim(c);
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size())
        throw ConfigError(path.string() + ": row " + std::to_string(row) + ": bad number '" + s + "'");
      vals.push_back(v);
    }
    t.rows.push_back(std::move(vals));
  }
  return t;
}

}  // namespace postlab
