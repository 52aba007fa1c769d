#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gausschain {

// Dyadic quantile net at depth m: level-k thresholds sit at normal quantiles
// of the grid {i / 2^k}. Thresholds are evaluated lazily; only the per-level
// summaries are stored, so deep nets stay cheap.
struct QuantileNet {
  int depth = 0;
  double scale = 1.0;
  std::vector<std::int64_t> level_sizes;     // J_k: finite thresholds at level k
  std::vector<double> level_accuracies;      // a_k: worst-case projection distance
  std::vector<std::int64_t> level_pair_counts;  // N_k: links between levels k-1 and k
};

inline constexpr int kMaxNetDepth = 30;

QuantileNet make_quantile_net(int depth, double s = 1.0);

// i-th finite threshold at level k, i in [0, J_k). Level 0 holds the median
// only; level k >= 1 holds the quantiles at j / 2^k for j = 1 .. 2^k - 1 plus
// the two infinite endpoints, which both project to the zero function and are
// represented by -inf (index 0) and +inf (index J_k - 1).
double net_threshold(const QuantileNet& net, int level, std::int64_t index);

// Index of the level-k net function nearest in L2(gamma_s) to the indicator
// with this quantile position, breaking ties toward the smaller threshold.
// Positions landing on an infinite endpoint report index 0: both endpoints
// are the zero function, and -inf is the smaller threshold.
std::int64_t net_projection(const QuantileNet& net, int level, double position);

struct IndicatorFunction;

IndicatorFunction net_projection_function(const QuantileNet& net, int level,
                                          const IndicatorFunction& f);

struct ChainingConstants {
  double c1 = 0.0;  // 2 * sum a_k q_k
  double c2 = 0.0;  // sum N_k / q_k^2
};

std::vector<double> default_weights(int depth);

ChainingConstants chaining_constants(const QuantileNet& net,
                                     const std::vector<double>& weights);

struct WeightOptimization {
  std::vector<double> weights;
  ChainingConstants constants;
  double objective = 0.0;  // c1 * sqrt(c2), the quantity the bounds depend on
  bool converged = true;
  int iterations = 0;
};

// Minimizes c1(q) * sqrt(c2(q)) over positive weights by cyclic coordinate
// descent. The objective is scale-invariant in q, so the first weight is
// pinned to 1. Never returns a weighting worse than the dyadic default.
WeightOptimization optimize_weights(const QuantileNet& net, int max_iterations = 200);

// P(|sup| > lambda) bound: min(1, c1^2 c2 Delta / (lambda^2 n^2)).
double tail_bound(const ChainingConstants& constants, double delta, double n,
                  double lambda);

// E sup bound: 2 c1 sqrt(c2) sqrt(Delta) / n, the minimum over u > 0 of
// u + c1^2 c2 Delta / (u n^2).
double size_bound(const ChainingConstants& constants, double delta, double n);

struct SizeBoundAudit {
  double u_star = 0.0;      // optimal split point
  double at_u_star = 0.0;   // objective at u_star; equals the closed form
  double bound = 0.0;
};

SizeBoundAudit size_bound_audit(const ChainingConstants& constants, double delta,
                                double n);

struct RefinedBound {
  double value = 0.0;
  int depth = 0;          // net depth chosen from delta
  ChainingConstants constants;
  double additive = 0.0;  // the 4 * delta term
};

// Net depth matched to a resolution delta in (0, 1/2): the m with
// 2^-(m+1) < delta <= 2^-m.
int resolution_depth(double delta);

// Truncated-net bound: pick the depth whose cell width matches the
// resolution delta (2^-(m+1) < delta <= 2^-m), evaluate the size bound there
// and pay 4*delta for the tail of the chain. Requires delta in (0, 1/2).
RefinedBound refined_size_bound(double delta_mass, double n, double delta,
                                const std::vector<double>& weights = {});

struct OptimizedRate {
  double x_star = 0.0;        // argmin of a x^{3/2} + e^{-x}
  double delta_star = 0.0;    // e^{-x_star}, clamped below 1/2
  double refined_value = 0.0; // refined bound evaluated at delta_star
  double exponent = 0.0;      // 2p / (2p + 3)
  double envelope_constant = 0.0;
  double envelope_value = 0.0;  // envelope_constant * a^exponent
};

// Balances the polynomial and exponential parts of the refined bound.
// a = sqrt(delta_mass) / n must lie in (0, 1); p >= 1 sets the power used to
// dominate the exponential tail, giving the exponent 2p / (2p + 3).
OptimizedRate optimized_rate(double delta_mass, double n, double p,
                             bool optimized_weights = false);

double rate_envelope_constant(double p);

// JSON description of the net and its constants. Thresholds are materialized
// only for depth <= 16; beyond that the object carries a thresholds_omitted
// flag instead.
std::string net_report_json(const QuantileNet& net, const std::vector<double>& weights);

}  // namespace gausschain
