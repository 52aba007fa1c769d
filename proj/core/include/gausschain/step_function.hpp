#pragma once

#include <vector>

#include "gausschain/hermite.hpp"

namespace gausschain {

// Piecewise-constant function on the real line, described in probability
// space: breakpoints are quantile levels of the N(0, s^2) marginal, so every
// integral against that density is a finite sum and exact.
struct StepFunction {
  std::vector<double> phi_breaks;  // strictly increasing, inside (0, 1)
  std::vector<double> values;      // one per piece, size phi_breaks.size() + 1
  std::vector<double> t_breaks;    // s * quantile(phi_breaks[j]), cached
  double scale = 1.0;
};

// Validates shape and monotonicity, caches the t-space thresholds.
[[nodiscard]] StepFunction make_step_function(std::vector<double> phi_breaks,
                                              std::vector<double> values, double s);

[[nodiscard]] double step_value(const StepFunction& f, double t);

// Exact mean, squared norm and L2 distance under the N(0, s^2) density.
[[nodiscard]] double step_mean_gamma(const StepFunction& f);
[[nodiscard]] double step_squared_norm_gamma(const StepFunction& f);
[[nodiscard]] double step_l2_distance(const StepFunction& f, const StepFunction& g);

// Copy with the exact mean removed.
[[nodiscard]] StepFunction step_centered(const StepFunction& f);

// Exact basis coefficients of a step function: piecewise integrals of
// H_k(t/s) against the density have closed form through
// integral_{-inf}^{x} H_k(u) phi(u) du = -phi(x) H_{k-1}(x) / sqrt(k).
[[nodiscard]] HermiteCoefficients project_step(const StepFunction& f,
                                               unsigned max_degree);

}  // namespace gausschain
