#pragma once

#include <vector>

namespace gausschain {

// Centered threshold indicator f(t) = 1{t <= alpha} - Phi(alpha/s) for the
// N(0, s^2) marginal. alpha may be -inf or +inf; both give the zero function.
struct IndicatorFunction {
  double threshold = 0.0;
  double scale = 1.0;
};

// Validates s > 0 and alpha not NaN.
[[nodiscard]] IndicatorFunction make_indicator(double alpha, double s);

[[nodiscard]] double indicator_value(const IndicatorFunction& f, double t);

// Phi(alpha/s), the indicator's position on the probability axis.
[[nodiscard]] double indicator_position(const IndicatorFunction& f);

// (1/n) sum_k f(x_k); always in [-1, 1].
[[nodiscard]] double empirical_process(const std::vector<double>& path,
                                       const IndicatorFunction& f);

// sup over alpha of |(1/n) sum_k 1{x_k <= alpha} - Phi(alpha/s)|, evaluated
// exactly from the order statistics.
[[nodiscard]] double sup_deviation(const std::vector<double>& path, double s);

// ||f_alpha - f_beta|| in L2 of the marginal: sqrt(p - p^2) with
// p = |Phi(beta/s) - Phi(alpha/s)|.
[[nodiscard]] double indicator_l2_distance(const IndicatorFunction& f,
                                           const IndicatorFunction& g);

// Raw empirical CDF snapped to a threshold grid: the value at the right
// endpoint of the grid cell containing alpha. The grid must be strictly
// increasing and cover the whole line (-inf first, +inf last).
[[nodiscard]] double discretized_process(const std::vector<double>& path,
                                         const std::vector<double>& grid,
                                         double alpha);

}  // namespace gausschain
