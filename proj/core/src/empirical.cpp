#include "gausschain/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gausschain/normal.hpp"

namespace gausschain {

namespace {

void check_path(const std::vector<double>& path) {
  if (path.empty()) {
    throw std::invalid_argument("empirical: path must be non-empty");
  }
  for (double x : path) {
    if (std::isnan(x)) {
      throw std::invalid_argument("empirical: path contains NaN");
    }
  }
}

void check_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("empirical: scale must be positive and finite");
  }
}

}  // namespace

IndicatorFunction make_indicator(double alpha, double s) {
  check_scale(s);
  if (std::isnan(alpha)) {
    throw std::invalid_argument("indicator: threshold must not be NaN");
  }
  return IndicatorFunction{alpha, s};
}

double indicator_value(const IndicatorFunction& f, double t) {
  const double center = normal_cdf(f.threshold / f.scale);
  return (t <= f.threshold ? 1.0 : 0.0) - center;
}

double indicator_position(const IndicatorFunction& f) {
  return normal_cdf(f.threshold / f.scale);
}

double empirical_process(const std::vector<double>& path, const IndicatorFunction& f) {
  check_path(path);
  const double center = normal_cdf(f.threshold / f.scale);
  std::size_t hits = 0;
  for (double x : path) hits += (x <= f.threshold) ? 1 : 0;
  return double(hits) / double(path.size()) - center;
}

double sup_deviation(const std::vector<double>& path, double s) {
  check_path(path);
  check_scale(s);
  std::vector<double> sorted = path;
  std::sort(sorted.begin(), sorted.end());
  const double n = double(sorted.size());
  // The supremum is attained at an order statistic, approaching it from
  // above (jump included) or below (jump excluded).
  double sup = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double position = normal_cdf(sorted[i] / s);
    const double above = double(i + 1) / n - position;
    const double below = position - double(i) / n;
    if (above > sup) sup = above;
    if (below > sup) sup = below;
  }
  return sup;
}

double indicator_l2_distance(const IndicatorFunction& f, const IndicatorFunction& g) {
  if (f.scale != g.scale) {
    throw std::invalid_argument("indicator_l2_distance: scales differ");
  }
  const double gap = std::fabs(indicator_position(g) - indicator_position(f));
  return std::sqrt(gap * (1.0 - gap));
}

double discretized_process(const std::vector<double>& path,
                           const std::vector<double>& grid, double alpha) {
  check_path(path);
  if (grid.size() < 2 ||
      grid.front() != -std::numeric_limits<double>::infinity() ||
      grid.back() != std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument(
        "discretized_process: grid must run from -inf to +inf");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i - 1] < grid[i])) {
      throw std::invalid_argument("discretized_process: grid must be strictly increasing");
    }
  }
  if (std::isnan(alpha)) {
    throw std::invalid_argument("discretized_process: alpha must not be NaN");
  }
  // Right endpoint of the half-open cell [grid[j], grid[j+1]) holding alpha.
  const auto it = std::upper_bound(grid.begin(), grid.end(), alpha);
  const double right = (it == grid.end()) ? grid.back() : *it;
  std::size_t hits = 0;
  for (double x : path) hits += (x <= right) ? 1 : 0;
  return double(hits) / double(path.size());
}

}  // namespace gausschain
