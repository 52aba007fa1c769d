#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace gausschain {

// Degrees above this are outside the supported range; the recurrence itself
// stays stable but downstream quadrature orders become impractical.
inline constexpr unsigned kMaxHermiteDegree = 200;

// Normalized probabilists' Hermite polynomial H_k(t), orthonormal under the
// standard normal weight. Three-term recurrence
//   H_{k+1}(t) = (t*H_k(t) - sqrt(k)*H_{k-1}(t)) / sqrt(k+1),
// H_0 = 1, H_1 = t. Throws on k > kMaxHermiteDegree or non-finite t.
[[nodiscard]] double hermite_value(unsigned k, double t);

// All values H_0(t)..H_max_degree(t) in one recurrence pass.
[[nodiscard]] std::vector<double> hermite_values(unsigned max_degree, double t);

// Partial sum sum_{k<=max_degree} H_k(t) * lambda^k / sqrt(k!), the
// truncation of exp(lambda*t - lambda^2/2).
[[nodiscard]] double generating_function_partial(double lambda, double t,
                                                 unsigned max_degree);

// Gauss-Hermite rule expressed against the standard normal density:
// sum_i weights[i] * f(nodes[i]) approximates E[f(Z)], weights sum to 1,
// exact for polynomials of degree <= 2*order - 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t order() const noexcept { return nodes.size(); }
};

// Nodes/weights via the Golub-Welsch eigenproblem for the probabilists'
// recurrence. order must lie in [1, 2048].
[[nodiscard]] QuadratureRule gauss_hermite_rule(std::size_t order);

// Rule of at least `order`, never below the default resolution of 128.
[[nodiscard]] QuadratureRule default_rule_for(std::size_t order);

// integral of H_k(t/s) H_l(t/s) against the N(0, s^2) density, evaluated by
// quadrature. Requires rule.order() >= k + l + 1.
[[nodiscard]] double inner_product_gamma(unsigned k, unsigned l, double s,
                                         const QuadratureRule& rule);

// E[H_k(U) H_l(V)] for standard bivariate normal (U, V) with correlation rho:
// closed form delta_{kl} * rho^k. |rho| <= 1.
[[nodiscard]] double cross_moment(unsigned k, unsigned l, double rho);

// Same moment by tensor quadrature over (U, W), V = rho*U + sqrt(1-rho^2)*W.
[[nodiscard]] double cross_moment_quadrature(unsigned k, unsigned l, double rho,
                                             const QuadratureRule& rule);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

// Same moment by plain Monte Carlo with the given draw count and seed.
[[nodiscard]] MomentEstimate cross_moment_mc(unsigned k, unsigned l, double rho,
                                             std::size_t draws, std::uint64_t seed);

// Coefficients c_0..c_K of f against the orthonormal basis {H_k(t/s)}.
struct HermiteCoefficients {
  std::vector<double> values;
  double scale = 1.0;

  [[nodiscard]] double squared_norm() const noexcept;
};

// c_k = integral of f(t) H_k(t/s) against the N(0, s^2) density, by
// quadrature. Throws NumericalError when f is non-finite at a node (the
// message names the node), and when the coefficient energy exceeds the
// quadrature estimate of ||f||^2 beyond tolerance (Bessel violation).
[[nodiscard]] HermiteCoefficients project(const std::function<double(double)>& f,
                                          unsigned max_degree, double s,
                                          const QuadratureRule& rule);

// Series evaluation sum_k c_k H_k(t/s).
[[nodiscard]] double hermite_series_value(const HermiteCoefficients& c, double t);

}  // namespace gausschain
