#include "gausschain/chaining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "gausschain/empirical.hpp"
#include "gausschain/errors.hpp"
#include "gausschain/normal.hpp"

namespace gausschain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Positions at level k live on the dyadic grid {i / 2^k}. The L2 distance
// between indicators at positions p and q is sqrt(d(1-d)) with d = |p - q|,
// symmetric about d = 1/2, so distances compare by the gap folded into
// [0, 1/2]. Interior grid points farther than the bracketing pair fold to a
// gap of at least 2^-k, which never beats the nearest candidate's <= 2^-k-1,
// so three candidates suffice: the zero function (either infinite endpoint,
// folded gap min(x, 1-x)) and the bracketing interior points.
std::int64_t project_position(int level, double position) {
  if (level == 0) return 0;
  const std::int64_t cells = std::int64_t(1) << level;
  const double zero_gap = std::min(position, 1.0 - position);

  std::int64_t best = 0;
  double best_gap = zero_gap;
  const auto lower = std::int64_t(std::floor(position * double(cells)));
  for (std::int64_t i = std::max<std::int64_t>(lower, 1);
       i <= std::min(lower + 1, cells - 1); ++i) {
    const double gap = std::fabs(position - double(i) / double(cells));
    if (gap < best_gap) {
      best = i;
      best_gap = gap;
    }
  }
  return best;
}

// Distinct pairs (level k+1 projection, level k projection) over all
// positions. Projections are piecewise constant with breakpoints on the
// half-grid of level k+1, so sweeping one midpoint per cell of width
// 2^-(k+2) is exhaustive; at a breakpoint the tie rule picks the smaller
// threshold, which matches the cell on its left.
std::int64_t enumerate_pair_count(int level, int depth) {
  const int fine = (level < depth) ? level + 1 : level;
  const int sweep = fine + 2;
  const std::int64_t cells = std::int64_t(1) << sweep;
  std::set<std::pair<std::int64_t, std::int64_t>> pairs;
  for (std::int64_t j = 0; j < cells; ++j) {
    const double x = (double(j) + 0.5) / double(cells);
    pairs.emplace(project_position(fine, x), project_position(level, x));
  }
  return std::int64_t(pairs.size());
}

std::int64_t closed_form_pair_count(int level, int depth) {
  if (level == depth) return std::int64_t(1) << depth;
  if (level == 0) return 2;
  return 3 * (std::int64_t(1) << level);
}

void check_weights(const QuantileNet& net, const std::vector<double>& weights) {
  if (weights.size() != std::size_t(net.depth) + 1) {
    throw std::invalid_argument("chaining: need one weight per net level");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      throw std::invalid_argument("chaining: weights must be positive and finite");
    }
    if (k > 0 && weights[k] < weights[k - 1]) {
      throw std::invalid_argument("chaining: weights must be non-decreasing");
    }
  }
}

double objective(const ChainingConstants& c) { return c.c1 * std::sqrt(c.c2); }

}  // namespace

int resolution_depth(double delta) {
  if (!(delta > 0.0) || !(delta < 0.5)) {
    throw std::invalid_argument("resolution_depth: delta must lie in (0, 1/2)");
  }
  int exponent = 0;
  const double mantissa = std::frexp(delta, &exponent);
  return (mantissa == 0.5) ? 1 - exponent : -exponent;
}

QuantileNet make_quantile_net(int depth, double s) {
  if (depth < 1 || depth > kMaxNetDepth) {
    throw std::invalid_argument("quantile net: depth must lie in [1, 30]");
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("quantile net: scale must be positive and finite");
  }
  QuantileNet net;
  net.depth = depth;
  net.scale = s;
  net.level_sizes.resize(std::size_t(depth) + 1);
  net.level_accuracies.resize(std::size_t(depth) + 1);
  net.level_pair_counts.resize(std::size_t(depth) + 1);
  // Enumeration sweeps 2^(k+3) projections; past level 20 the verified
  // closed form takes over.
  constexpr int kEnumerationCap = 20;
  for (int k = 0; k <= depth; ++k) {
    net.level_sizes[k] = (k == 0) ? 1 : (std::int64_t(1) << k) + 1;
    const double half_cell = std::ldexp(1.0, -(k + 1));
    net.level_accuracies[k] = std::sqrt(half_cell * (1.0 - half_cell));
    net.level_pair_counts[k] = (k <= kEnumerationCap)
                                   ? enumerate_pair_count(k, depth)
                                   : closed_form_pair_count(k, depth);
  }
  return net;
}

double net_threshold(const QuantileNet& net, int level, std::int64_t index) {
  if (level < 0 || level > net.depth) {
    throw std::invalid_argument("net_threshold: level out of range");
  }
  if (index < 0 || index >= net.level_sizes[level]) {
    throw std::invalid_argument("net_threshold: index out of range");
  }
  if (level == 0 || index == 0) return -kInf;
  const std::int64_t cells = std::int64_t(1) << level;
  if (index == cells) return kInf;
  return net.scale * normal_quantile(double(index) / double(cells));
}

std::int64_t net_projection(const QuantileNet& net, int level, double position) {
  if (level < 0 || level > net.depth) {
    throw std::invalid_argument("net_projection: level out of range");
  }
  if (!(position >= 0.0 && position <= 1.0)) {
    throw std::invalid_argument("net_projection: position must lie in [0, 1]");
  }
  return project_position(level, position);
}

IndicatorFunction net_projection_function(const QuantileNet& net, int level,
                                          const IndicatorFunction& f) {
  if (f.scale != net.scale) {
    throw std::invalid_argument("net_projection: indicator scale differs from net");
  }
  const std::int64_t index = net_projection(net, level, indicator_position(f));
  return IndicatorFunction{net_threshold(net, level, index), net.scale};
}

std::vector<double> default_weights(int depth) {
  if (depth < 0) {
    throw std::invalid_argument("default_weights: depth must be non-negative");
  }
  std::vector<double> q(std::size_t(depth) + 1);
  for (int k = 0; k <= depth; ++k) {
    q[k] = (k % 2 == 0) ? std::ldexp(1.0, k / 2)
                        : std::ldexp(std::sqrt(2.0), (k - 1) / 2);
  }
  return q;
}

ChainingConstants chaining_constants(const QuantileNet& net,
                                     const std::vector<double>& weights) {
  check_weights(net, weights);
  ChainingConstants c;
  for (int k = 0; k <= net.depth; ++k) {
    c.c1 += net.level_accuracies[k] * weights[k];
    c.c2 += double(net.level_pair_counts[k]) / (weights[k] * weights[k]);
  }
  c.c1 *= 2.0;
  return c;
}

WeightOptimization optimize_weights(const QuantileNet& net, int max_iterations) {
  if (max_iterations < 1) {
    throw std::invalid_argument("optimize_weights: iteration cap must be positive");
  }
  const std::size_t levels = std::size_t(net.depth) + 1;
  WeightOptimization result;
  result.weights = default_weights(net.depth);

  // The objective c1(q) sqrt(c2(q)) is scale-invariant, so q_0 is pinned at 1
  // and the rest move one at a time. With the other coordinates held fixed,
  // (A + 2 a_k q) sqrt(B + N_k / q^2) has the unique minimizer
  // q = (N_k A / (2 a_k B))^(1/3), clipped to keep the sequence
  // non-decreasing.
  for (double& q : result.weights) q /= result.weights[0];

  auto coordinate_target = [&](std::size_t k) {
    double rest_c1 = 0.0;
    double rest_c2 = 0.0;
    for (std::size_t j = 0; j < levels; ++j) {
      if (j == k) continue;
      rest_c1 += 2.0 * net.level_accuracies[j] * result.weights[j];
      rest_c2 += double(net.level_pair_counts[j]) /
                 (result.weights[j] * result.weights[j]);
    }
    const double raw = std::cbrt(double(net.level_pair_counts[k]) * rest_c1 /
                                 (2.0 * net.level_accuracies[k] * rest_c2));
    const double lo = result.weights[k - 1];
    const double hi = (k + 1 < levels) ? result.weights[k + 1]
                                       : std::numeric_limits<double>::infinity();
    return std::clamp(raw, lo, hi);
  };

  int iteration = 0;
  bool stationary = false;
  for (; iteration < max_iterations && !stationary; ++iteration) {
    double max_move = 0.0;
    for (std::size_t k = 1; k < levels; ++k) {
      const double target = coordinate_target(k);
      max_move = std::max(max_move,
                          std::fabs(target - result.weights[k]) / result.weights[k]);
      result.weights[k] = target;
    }
    stationary = max_move < 1e-12;
  }

  // First-order stationarity: no single clipped coordinate move improves.
  double residual = 0.0;
  for (std::size_t k = 1; k < levels; ++k) {
    residual = std::max(residual, std::fabs(coordinate_target(k) -
                                            result.weights[k]) /
                                      result.weights[k]);
  }
  result.iterations = iteration;
  result.converged = residual < 1e-8;

  result.constants = chaining_constants(net, result.weights);
  result.objective = objective(result.constants);
  const ChainingConstants at_default =
      chaining_constants(net, default_weights(net.depth));
  if (objective(at_default) < result.objective) {
    result.weights = default_weights(net.depth);
    result.constants = at_default;
    result.objective = objective(at_default);
  }
  return result;
}

double tail_bound(const ChainingConstants& constants, double delta, double n,
                  double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("tail_bound: lambda must be positive");
  }
  if (!(n >= 1.0) || !(delta >= 0.0)) {
    throw std::invalid_argument("tail_bound: need n >= 1 and delta >= 0");
  }
  const double raw = constants.c1 * constants.c1 * constants.c2 * delta /
                     (lambda * lambda * n * n);
  return std::min(1.0, raw);
}

double size_bound(const ChainingConstants& constants, double delta, double n) {
  if (!(n >= 1.0) || !(delta >= 0.0)) {
    throw std::invalid_argument("size_bound: need n >= 1 and delta >= 0");
  }
  return 2.0 * constants.c1 * std::sqrt(constants.c2) * std::sqrt(delta) / n;
}

SizeBoundAudit size_bound_audit(const ChainingConstants& constants, double delta,
                                double n) {
  SizeBoundAudit audit;
  audit.bound = size_bound(constants, delta, n);
  if (delta == 0.0) return audit;
  audit.u_star = constants.c1 * std::sqrt(constants.c2) * std::sqrt(delta) / n;
  audit.at_u_star = audit.u_star + constants.c1 * constants.c1 * constants.c2 *
                                       delta / (audit.u_star * n * n);
  return audit;
}

RefinedBound refined_size_bound(double delta_mass, double n, double delta,
                                const std::vector<double>& weights) {
  if (!(delta > 0.0) || !(delta < 0.5)) {
    throw std::invalid_argument("refined_size_bound: resolution must lie in (0, 1/2)");
  }
  RefinedBound refined;
  refined.depth = resolution_depth(delta);
  if (refined.depth > kMaxNetDepth) {
    throw ResourceError("refined_size_bound: resolution finer than depth-30 nets");
  }
  const QuantileNet net = make_quantile_net(refined.depth);
  refined.constants = chaining_constants(
      net, weights.empty() ? default_weights(refined.depth) : weights);
  refined.additive = 4.0 * delta;
  refined.value = size_bound(refined.constants, delta_mass, n) + refined.additive;
  return refined;
}

OptimizedRate optimized_rate(double delta_mass, double n, double p,
                             bool optimized_weights) {
  if (!(delta_mass >= 0.0) || !(n >= 1.0)) {
    throw std::invalid_argument("optimized_rate: need delta >= 0 and n >= 1");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("optimized_rate: polynomial order must be >= 1");
  }
  const double a = std::sqrt(delta_mass) / n;
  if (!(a > 0.0) || !(a < 1.0)) {
    throw std::invalid_argument(
        "optimized_rate: sqrt(delta)/n must lie in (0, 1) for a decay regime");
  }

  // g(x) = a x^(3/2) + e^-x has strictly increasing derivative
  // 1.5 a sqrt(x) - e^-x, so the minimizer is the derivative's unique root.
  const auto slope = [a](double x) {
    return 1.5 * a * std::sqrt(x) - std::exp(-x);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (slope(hi) < 0.0) hi *= 2.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }

  OptimizedRate rate;
  rate.x_star = 0.5 * (lo + hi);
  rate.delta_star = std::min(std::exp(-rate.x_star),
                             std::nextafter(0.5, 0.0));
  const int depth = resolution_depth(rate.delta_star);
  std::vector<double> weights;
  if (optimized_weights && depth <= kMaxNetDepth) {
    weights = optimize_weights(make_quantile_net(depth)).weights;
  }
  rate.refined_value = refined_size_bound(delta_mass, n, rate.delta_star, weights).value;
  rate.exponent = 2.0 * p / (2.0 * p + 3.0);
  rate.envelope_constant = rate_envelope_constant(p);
  rate.envelope_value = rate.envelope_constant * std::pow(a, rate.exponent);
  return rate;
}

double rate_envelope_constant(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("rate_envelope_constant: order must be >= 1");
  }
  // Dominate e^-x by c(p) x^-p with the sharp c(p) = (p/e)^p, then minimize
  // a x^(3/2) + c(p) x^-p exactly; both terms scale as a^(2p/(2p+3)).
  const double c = std::pow(p / std::exp(1.0), p);
  const double inv = 3.0 / (2.0 * p + 3.0);
  const double term1 = std::pow(2.0 * p * c / 3.0, inv);
  const double term2 = std::pow(c, inv) * std::pow(2.0 * p / 3.0, inv - 1.0);
  return term1 + term2;
}

std::string net_report_json(const QuantileNet& net,
                            const std::vector<double>& weights) {
  check_weights(net, weights);
  const ChainingConstants constants = chaining_constants(net, weights);
  nlohmann::ordered_json report;
  report["depth"] = net.depth;
  report["scale"] = net.scale;
  report["c1"] = constants.c1;
  report["c2"] = constants.c2;
  report["levels"] = nlohmann::ordered_json::array();
  for (int k = 0; k <= net.depth; ++k) {
    nlohmann::ordered_json level;
    level["level"] = k;
    level["size"] = net.level_sizes[k];
    level["accuracy"] = net.level_accuracies[k];
    level["pair_count"] = net.level_pair_counts[k];
    level["weight"] = weights[k];
    if (net.depth <= 16) {
      auto thresholds = nlohmann::ordered_json::array();
      for (std::int64_t i = 0; i < net.level_sizes[k]; ++i) {
        const double t = net_threshold(net, k, i);
        if (std::isinf(t)) {
          thresholds.push_back(t < 0 ? "-inf" : "+inf");
        } else {
          thresholds.push_back(t);
        }
      }
      level["thresholds"] = std::move(thresholds);
    }
    report["levels"].push_back(std::move(level));
  }
  if (net.depth > 16) report["thresholds_omitted"] = true;
  return report.dump(2);
}

}  // namespace gausschain
