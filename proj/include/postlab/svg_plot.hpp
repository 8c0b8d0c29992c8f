#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace postlab {

struct PlotSpec {
  std::vector<std::filesystem::path> inputs;
  /// Plain columns, or bracketed statistics whose .lower/.upper columns become a shaded band.
  std::vector<std::string> columns;
  std::string x_column = "n";
  bool log_x = false;
  bool log_y = false;
  std::vector<double> reflines;
  std::string title;
  std::filesystem::path output;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::optional<std::vector<double>> lower;
  std::optional<std::vector<double>> upper;
};

/// Reads every (input, column) pair. Throws ConfigError naming a missing column,
/// or when an input has no rows.
std::vector<PlotSeries> load_series(const PlotSpec& spec);

/// Self-contained SVG: axes with ticks, one polyline per series, one polygon per
/// bracket band, one line per reference value, and a legend.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec);

}  // namespace postlab
