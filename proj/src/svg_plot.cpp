#include "postlab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "postlab/harness.hpp"

namespace postlab {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 190.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo;
  double hi;
  bool log;
  double pixel_lo;
  double pixel_hi;

  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double map(double v) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                         : (v - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double d = std::floor(std::log10(lo)); d <= std::ceil(std::log10(hi)); d += 1.0) {
        const double v = std::pow(10.0, d);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) out.push_back(v);
      }
      if (out.empty()) out = {lo, hi};
    } else {
      for (int i = 0; i <= 5; ++i) out.push_back(lo + (hi - lo) * i / 5.0);
    }
    return out;
  }
};

Axis make_axis(std::vector<double> values, bool log, double p0, double p1) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) {
    lo = log ? 0.1 : 0.0;
    hi = 1.0;
  }
  if (hi == lo) {
    if (log) {
      lo /= 2.0;
      hi *= 2.0;
    } else {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  return {lo, hi, log, p0, p1};
}

}  // namespace

std::vector<PlotSeries> load_series(const PlotSpec& spec) {
  if (spec.inputs.empty()) throw ConfigError("plot needs at least one input");
  if (spec.columns.empty()) throw ConfigError("plot needs at least one column");
  std::vector<PlotSeries> out;
  for (const auto& path : spec.inputs) {
    const Trajectory t = read_trajectory_csv(path);
    if (t.rows.empty()) throw ConfigError("trajectory " + path.string() + " has no rows");
    if (!t.find(spec.x_column))
      throw ConfigError("missing column '" + spec.x_column + "' in " + path.string());
    const auto xs = t.series(spec.x_column);
    for (const auto& col : spec.columns) {
      PlotSeries s;
      s.label = spec.inputs.size() > 1 ? path.stem().string() + ": " + col : col;
      s.x = xs;
      if (t.find(col)) {
        s.y = t.series(col);
      } else if (t.find(col + ".lower") && t.find(col + ".upper")) {
        s.lower = t.series(col + ".lower");
        s.upper = t.series(col + ".upper");
        for (std::size_t i = 0; i < xs.size(); ++i) s.y.push_back(0.5 * ((*s.lower)[i] + (*s.upper)[i]));
      } else {
        throw ConfigError("missing column '" + col + "' in " + path.string());
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
  std::vector<double> xs;
  std::vector<double> ys(spec.reflines.begin(), spec.reflines.end());
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
    if (s.lower) ys.insert(ys.end(), s.lower->begin(), s.lower->end());
    if (s.upper) ys.insert(ys.end(), s.upper->begin(), s.upper->end());
  }
  const Axis ax = make_axis(xs, spec.log_x, kLeft, kWidth - kRight);
  const Axis ay = make_axis(ys, spec.log_y, kHeight - kBottom, kTop);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    svg << "<text x=\"" << num(kWidth / 2 - kRight / 2 + kLeft / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(spec.title) << "</text>\n";
  }

  // Axes and ticks.
  svg << "<g class=\"axes\" stroke=\"#333\" fill=\"none\">\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(kWidth - kRight)
      << "\" y2=\"" << num(kHeight - kBottom) << "\"/>\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(kHeight - kBottom) << "\"/>\n";
  svg << "</g>\n<g class=\"ticks\">\n";
  for (double t : ax.ticks()) {
    const double px = ax.map(t);
    svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(px) << "\" y2=\""
        << num(kHeight - kBottom + 5) << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << num(px) << "\" y=\"" << num(kHeight - kBottom + 18) << "\" text-anchor=\"middle\">"
        << label_num(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double py = ay.map(t);
    svg << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kLeft) << "\" y2=\""
        << num(py) << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << label_num(t)
        << "</text>\n";
  }
  svg << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 10)
      << "\" text-anchor=\"middle\">" << escape(spec.x_column) << "</text>\n";
  svg << "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    if (s.lower && s.upper) {
      std::string pts;
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (ax.usable(s.x[k]) && ay.usable((*s.upper)[k]))
          pts += num(ax.map(s.x[k])) + "," + num(ay.map((*s.upper)[k])) + " ";
      }
      for (std::size_t k = s.x.size(); k-- > 0;) {
        if (ax.usable(s.x[k]) && ay.usable((*s.lower)[k]))
          pts += num(ax.map(s.x[k])) + "," + num(ay.map((*s.lower)[k])) + " ";
      }
      if (!pts.empty()) pts.pop_back();
      svg << "<polygon class=\"band\" points=\"" << pts << "\" fill=\"" << color
          << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (ax.usable(s.x[k]) && ay.usable(s.y[k])) pts += num(ax.map(s.x[k])) + "," + num(ay.map(s.y[k])) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    svg << "<polyline class=\"series\" points=\"" << pts << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
  }

  for (double r : spec.reflines) {
    if (!ay.usable(r)) continue;
    const double py = ay.map(r);
    svg << "<line class=\"refline\" x1=\"" << num(kLeft) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kWidth - kRight)
        << "\" y2=\"" << num(py) << "\" stroke=\"#555\" stroke-dasharray=\"6,4\"/>\n";
    svg << "<text x=\"" << num(kWidth - kRight + 4) << "\" y=\"" << num(py + 4) << "\">y = " << label_num(r)
        << "</text>\n";
  }

  svg << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(i);
    const double x = kWidth - kRight + 12;
    svg << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 8) << "\" width=\"14\" height=\"4\" fill=\""
        << kPalette[i % std::size(kPalette)] << "\"/>\n";
    svg << "<text x=\"" << num(x + 20) << "\" y=\"" << num(y - 2) << "\">" << escape(series[i].label) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace postlab
