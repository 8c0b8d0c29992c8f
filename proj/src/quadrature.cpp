#include "postlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace postlab {

double QuadratureResult::value() const { return estimate * std::exp(log_scale); }

LogWeight QuadratureResult::log_value() const {
  if (estimate <= 0.0) return LogWeight::zero();
  return LogWeight(std::log(estimate) + log_scale);
}

BracketedValue QuadratureResult::log_bracket() const {
  const double lo = estimate - abs_error_bound;
  const double hi = estimate + abs_error_bound;
  BracketedValue b;
  b.lower = lo > 0.0 ? LogWeight(std::log(lo) + log_scale) : LogWeight::zero();
  b.upper = hi > 0.0 ? LogWeight(std::log(hi) + log_scale) : LogWeight::zero();
  return widen(b);
}

namespace {

struct Panel {
  double a, b;
  double fa, fm, fb;
  double whole;
  int depth;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

std::vector<double> segment_edges(double a, double b, std::span<const double> breakpoints) {
  std::vector<double> edges{a, b};
  for (double x : breakpoints) {
    if (x > a && x < b) edges.push_back(x);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

class SimpsonPass {
 public:
  SimpsonPass(const std::function<double(double)>& f, std::size_t max_evals, int max_depth)
      : f_(f), max_evals_(max_evals), max_depth_(max_depth) {}

  double eval(double x) {
    ++evals_;
    const double y = f_(x);
    if (std::isnan(y)) throw std::domain_error("adaptive_simpson: integrand returned NaN");
    return y;
  }

  std::vector<Panel> initial_panels(const std::vector<double>& edges, int per_segment) {
    std::vector<Panel> panels;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
      const double lo = edges[s];
      const double hi = edges[s + 1];
      double prev_x = lo;
      double prev_f = eval(lo);
      for (int i = 1; i <= per_segment; ++i) {
        const double x = i == per_segment ? hi : lo + (hi - lo) * i / per_segment;
        const double fx = eval(x);
        const double m = 0.5 * (prev_x + x);
        const double fm = eval(m);
        panels.push_back({prev_x, x, prev_f, fm, fx, simpson(prev_x, x, prev_f, fm, fx), 0});
        prev_x = x;
        prev_f = fx;
      }
    }
    return panels;
  }

  // Returns false when the depth or evaluation budget stopped refinement.
  bool run(std::vector<Panel> stack, double target, double length) {
    sum_ = 0.0;
    comp_ = 0.0;
    err_ = 0.0;
    bool converged = true;
    while (!stack.empty()) {
      Panel p = stack.back();
      stack.pop_back();
      if (evals_ >= max_evals_) {
        add(p.whole);
        err_ += std::abs(p.whole);
        converged = false;
        continue;
      }
      const double m = 0.5 * (p.a + p.b);
      const double lm = 0.5 * (p.a + m);
      const double rm = 0.5 * (m + p.b);
      const double flm = eval(lm);
      const double frm = eval(rm);
      const double left = simpson(p.a, m, p.fa, flm, p.fm);
      const double right = simpson(m, p.b, p.fm, frm, p.fb);
      const double diff = left + right - p.whole;
      const bool ok = std::abs(diff) <= 15.0 * target * (p.b - p.a) / length;
      if (ok || p.depth >= max_depth_ || m <= p.a || m >= p.b) {
        if (!ok) converged = false;
        add(left + right + diff / 15.0);
        err_ += std::abs(diff) / 15.0;
      } else {
        stack.push_back({p.a, m, p.fa, flm, p.fm, left, p.depth + 1});
        stack.push_back({m, p.b, p.fm, frm, p.fb, right, p.depth + 1});
      }
    }
    return converged;
  }

  double estimate() const { return sum_ + comp_; }
  double error() const { return err_; }
  std::size_t evaluations() const { return evals_; }

 private:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  const std::function<double(double)>& f_;
  std::size_t max_evals_;
  int max_depth_;
  std::size_t evals_ = 0;
  double sum_ = 0.0;
  double comp_ = 0.0;
  double err_ = 0.0;
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& options,
                                  std::span<const double> breakpoints) {
  if (!(a < b)) throw std::domain_error("adaptive_simpson: requires a < b");
  if (!(options.rel_tol > 0.0) && !(options.abs_tol > 0.0))
    throw std::domain_error("adaptive_simpson: a positive tolerance is required");
  const auto edges = segment_edges(a, b, breakpoints);
  SimpsonPass pass(f, options.max_evaluations, options.max_depth);
  const auto panels = pass.initial_panels(edges, 4);
  double coarse = 0.0;
  for (const auto& p : panels) coarse += p.whole;

  const double length = b - a;
  double target = std::max(options.rel_tol * std::abs(coarse), options.abs_tol);
  QuadratureResult result;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const bool converged = pass.run(panels, target, length);
    result.estimate = pass.estimate();
    result.abs_error_bound = pass.error();
    result.evaluations = pass.evaluations();
    const double goal = std::max(options.rel_tol * std::abs(result.estimate), options.abs_tol);
    if (result.abs_error_bound <= goal) return result;
    if (!converged) break;
    target = std::min(target, goal) * 0.25;
  }
  throw QuadratureError("adaptive_simpson: subdivision budget exhausted before reaching tolerance",
                        result);
}

QuadratureResult integrate_log(const std::function<double(double)>& log_f, double a, double b,
                               const QuadratureOptions& options,
                               std::span<const double> breakpoints) {
  if (!(a < b)) throw std::domain_error("integrate_log: requires a < b");
  constexpr int kSamples = 256;
  double shift = -std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
  auto probe = [&](double x) {
    ++evals;
    const double v = log_f(x);
    if (std::isnan(v)) throw std::domain_error("integrate_log: integrand returned NaN");
    if (v > shift) shift = v;
  };
  for (int i = 0; i <= kSamples; ++i) probe(a + (b - a) * i / kSamples);
  for (double x : breakpoints) {
    if (x >= a && x <= b) probe(x);
  }
  if (shift == -std::numeric_limits<double>::infinity()) {
    return {0.0, 0.0, evals, 0.0};
  }
  if (!std::isfinite(shift)) throw std::domain_error("integrate_log: integrand is +inf");
  const std::function<double(double)> scaled = [&](double x) {
    const double v = log_f(x);
    return v == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(v - shift);
  };
  try {
    QuadratureResult r = adaptive_simpson(scaled, a, b, options, breakpoints);
    r.evaluations += evals;
    r.log_scale = shift;
    return r;
  } catch (const QuadratureError& e) {
    QuadratureResult best = e.best();
    best.log_scale = shift;
    throw QuadratureError(e.what(), best);
  }
}

}  // namespace postlab
