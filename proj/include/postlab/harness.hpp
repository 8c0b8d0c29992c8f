#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "postlab/barron.hpp"
#include "postlab/cosine.hpp"
#include "postlab/diagnostics.hpp"
#include "postlab/random.hpp"

namespace postlab {

inline constexpr const char* kVersion = "0.3.0";

/// Invalid configuration or input (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Where the data come from. External datasets are scored against the uniform.
struct TruthSpec {
  enum class Kind { uniform, gauss_exp, step, file };
  Kind kind = Kind::uniform;
  double theta = 0.0;
  std::int64_t level = 1;
  std::vector<std::int64_t> selected;
  std::string path;

  /// "uniform", "gauss:0.5", "step:2:0,1,4,5", "file:data.csv".
  static TruthSpec parse(const std::string& text);
  std::string to_string() const;
  void validate() const;

  /// ln f⋆(x).
  double log_pdf(double x) const;
  /// n draws (or the first n rows of the file).
  std::vector<double> draw(RandomStream& rs, std::size_t n) const;
};

enum class ModelKind { barron, cosine };

struct CosineDiagnostics {
  std::vector<double> hellinger_eps{0.3};
  /// Regions θ > T reported as region_mass:T.
  std::vector<double> region_thresholds{5.0};
};

struct RunConfig {
  TruthSpec truth;
  ModelKind model = ModelKind::barron;
  BarronPriorConfig barron_prior;
  CosinePriorConfig cosine_prior;
  std::size_t n_max = 100;
  double grid_ratio = 1.15;
  TruncationPolicy truncation;
  std::vector<std::uint64_t> seeds{1};
  DiagnosticConfig diagnostics;
  CosineDiagnostics cosine;
  /// Excursion thresholds summarized across replications: (statistic, δ).
  std::vector<std::pair<std::string, double>> excursions{{"gamma_stat", 0.9}};
  double excursion_n_min = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
  /// Accepts a plain config or a trajectory sidecar (whose "config" is used).
  static RunConfig from_json(const nlohmann::json& j);
};

/// FNV-1a 64 over the canonical (sorted-key, compact) JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Geometric evaluation grid: 1..min(10, n_max), then ceil of successive
/// multiples by ratio, and always n_max.
std::vector<std::size_t> evaluation_grid(std::size_t n_max, double ratio);

struct GridError {
  std::size_t n;
  std::string message;
};

struct TrajectoryRecord {
  RunConfig config;
  std::uint64_t seed = 0;
  std::vector<std::size_t> grid;
  Trajectory table;
  std::vector<GridError> errors;

  nlohmann::json sidecar() const;
};

/// Streams data for (cfg, seed) from RandomStream(seed, 0) and evaluates the
/// configured diagnostics on the grid. A failing grid point becomes a row of
/// NaN with status 1; the run continues.
TrajectoryRecord run_trajectory(const RunConfig& cfg, std::uint64_t seed);

struct ReplicationResult {
  std::vector<TrajectoryRecord> trajectories;  // ordered by seed
  nlohmann::json summary;
  /// Seeds whose run threw before producing a trajectory.
  std::vector<std::pair<std::uint64_t, std::string>> failures;
};

/// One trajectory per seed on `jobs` worker threads. Output is independent of
/// jobs and of the order of cfg.seeds.
ReplicationResult run_replications(const RunConfig& cfg, unsigned jobs);

/// Per-n min/median/max of every column plus excursion frequencies.
nlohmann::json summarize(const RunConfig& cfg, const std::vector<TrajectoryRecord>& runs);

/// Fraction of runs whose statistic has at least one excursion above delta.
double excursion_frequency(const std::vector<TrajectoryRecord>& runs, const std::string& statistic,
                           double delta, double n_min);

struct ScanCell {
  double alpha;
  double beta;
  double delta;
  double frequency;
};

/// Excursion frequency of band_mass for every α ≤ β pair and every δ.
std::vector<ScanCell> scan_bands(RunConfig cfg, const std::vector<double>& alphas,
                                 const std::vector<double>& betas,
                                 const std::vector<double>& deltas, unsigned jobs);

/// One value per row in (0, 1); optional header "x". Errors name the 1-based line.
std::vector<double> ingest_dataset(const std::filesystem::path& path);

/// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_value(double v);

void write_trajectory_csv(const TrajectoryRecord& rec, const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace postlab
