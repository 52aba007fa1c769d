#include "gausschain/hermite.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gausschain/errors.hpp"
#include "gausschain/rng.hpp"

namespace gausschain {

namespace {

void check_degree(unsigned k) {
  if (k > kMaxHermiteDegree) {
    std::ostringstream msg;
    msg << "hermite degree " << k << " exceeds supported cap " << kMaxHermiteDegree;
    throw std::invalid_argument(msg.str());
  }
}

void check_finite_arg(double t) {
  if (!std::isfinite(t)) {
    throw std::invalid_argument("hermite argument must be finite");
  }
}

}  // namespace

double hermite_value(unsigned k, double t) {
  check_degree(k);
  check_finite_arg(t);
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (unsigned j = 1; j < k; ++j) {
    const double next = (t * cur - std::sqrt(double(j)) * prev) / std::sqrt(double(j + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> hermite_values(unsigned max_degree, double t) {
  check_degree(max_degree);
  check_finite_arg(t);
  std::vector<double> out(max_degree + 1);
  out[0] = 1.0;
  if (max_degree == 0) return out;
  out[1] = t;
  for (unsigned j = 1; j < max_degree; ++j) {
    out[j + 1] = (t * out[j] - std::sqrt(double(j)) * out[j - 1]) / std::sqrt(double(j + 1));
  }
  return out;
}

double generating_function_partial(double lambda, double t, unsigned max_degree) {
  check_finite_arg(lambda);
  const std::vector<double> h = hermite_values(max_degree, t);
  // term_k = lambda^k / sqrt(k!), advanced multiplicatively.
  double term = 1.0;
  double sum = h[0];
  for (unsigned k = 1; k <= max_degree; ++k) {
    term *= lambda / std::sqrt(double(k));
    sum += h[k] * term;
  }
  return sum;
}

namespace {

// One pass of the orthonormal recurrence in extended precision. Returns
// p_order(x); *below gets p_{order-1}(x), *sum the Christoffel sum
// sum_{k<order} p_k(x)^2. Extended precision matters: p_k blows up like
// exp(x^2/4) near the extreme nodes, and the sum must survive that.
long double hermite_scan_long(long double x, std::size_t order, long double* below,
                              long double* sum) {
  long double prev = 0.0L;
  long double cur = 1.0L;
  long double energy = 1.0L;
  for (std::size_t k = 0; k < order; ++k) {
    const long double next =
        (x * cur - sqrtl((long double)k) * prev) / sqrtl((long double)(k + 1));
    prev = cur;
    cur = next;
    if (k + 1 < order) energy += cur * cur;
  }
  if (below != nullptr) *below = prev;
  if (sum != nullptr) *sum = energy;
  return cur;
}

}  // namespace

QuadratureRule gauss_hermite_rule(std::size_t order) {
  if (order < 1 || order > 2048) {
    throw std::invalid_argument("gauss_hermite_rule: order must lie in [1, 2048]");
  }
  // Jacobi matrix of the probabilists' recurrence: zero diagonal,
  // off-diagonal sqrt(k). Eigenvalues seed the nodes. Weights do NOT come
  // from eigenvector components: squared first components lose all relative
  // accuracy in the tails (absolute eigensolver error ~1e-15 swamps true
  // weights ~1e-49 at order 64), which corrupts integrals of high-degree
  // polynomials. Newton-refine each node and use the Christoffel identity
  // w = 1 / sum_{k<order} H_k(x)^2 instead.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(long(order), long(order));
  for (std::size_t k = 1; k < order; ++k) {
    const double off = std::sqrt(double(k));
    jacobi(long(k), long(k - 1)) = off;
    jacobi(long(k - 1), long(k)) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("gauss_hermite_rule: eigen decomposition failed");
  }
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (std::size_t i = 0; i < order; ++i) {
    long double x = (long double)solver.eigenvalues()(long(i));
    for (int step = 0; step < 2; ++step) {
      long double p_below = 0.0L;
      const long double p_top = hermite_scan_long(x, order, &p_below, nullptr);
      // H'_order = sqrt(order) * H_{order-1}; never zero at a root.
      const long double slope = sqrtl((long double)order) * p_below;
      if (slope != 0.0L) x -= p_top / slope;
    }
    long double energy = 1.0L;
    hermite_scan_long(x, order, nullptr, &energy);
    rule.nodes[i] = double(x);
    rule.weights[i] = double(1.0L / energy);
  }
  // The rule is symmetric by construction; fold out the residual asymmetry
  // so parity identities hold to the last bit.
  for (std::size_t i = 0, j = order - 1; i < j; ++i, --j) {
    const double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -node;
    rule.nodes[j] = node;
    const double weight = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = weight;
    rule.weights[j] = weight;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  double mass = 0.0;
  for (double w : rule.weights) mass += w;
  for (double& w : rule.weights) w /= mass;
  return rule;
}

QuadratureRule default_rule_for(std::size_t order) {
  return gauss_hermite_rule(order < 128 ? 128 : order);
}

namespace {

void check_rule_order(const QuadratureRule& rule, unsigned k, unsigned l) {
  if (rule.order() < std::size_t(k) + std::size_t(l) + 1) {
    std::ostringstream msg;
    msg << "quadrature order " << rule.order() << " too small for degrees (" << k
        << ", " << l << "); need at least " << (k + l + 1);
    throw std::invalid_argument(msg.str());
  }
}

void check_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("scale s must be positive and finite");
  }
}

}  // namespace

double inner_product_gamma(unsigned k, unsigned l, double s, const QuadratureRule& rule) {
  check_degree(k);
  check_degree(l);
  check_scale(s);
  check_rule_order(rule, k, l);
  const unsigned top = k > l ? k : l;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.order(); ++i) {
    const double t = s * rule.nodes[i];
    const std::vector<double> h = hermite_values(top, t / s);
    sum += rule.weights[i] * h[k] * h[l];
  }
  return sum;
}

double cross_moment(unsigned k, unsigned l, double rho) {
  check_degree(k);
  check_degree(l);
  if (!std::isfinite(rho) || std::fabs(rho) > 1.0) {
    throw std::invalid_argument("cross_moment: |rho| must not exceed 1");
  }
  if (k != l) return 0.0;
  if (k == 0) return 1.0;
  return std::pow(rho, double(k));
}

double cross_moment_quadrature(unsigned k, unsigned l, double rho,
                               const QuadratureRule& rule) {
  check_degree(k);
  check_degree(l);
  if (!std::isfinite(rho) || std::fabs(rho) > 1.0) {
    throw std::invalid_argument("cross_moment_quadrature: |rho| must not exceed 1");
  }
  check_rule_order(rule, k, l);
  const double mix = std::sqrt(1.0 - rho * rho);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.order(); ++i) {
    const double u = rule.nodes[i];
    const double hk = hermite_value(k, u);
    double inner = 0.0;
    for (std::size_t j = 0; j < rule.order(); ++j) {
      const double v = rho * u + mix * rule.nodes[j];
      inner += rule.weights[j] * hermite_value(l, v);
    }
    sum += rule.weights[i] * hk * inner;
  }
  return sum;
}

MomentEstimate cross_moment_mc(unsigned k, unsigned l, double rho,
                               std::size_t draws, std::uint64_t seed) {
  check_degree(k);
  check_degree(l);
  if (!std::isfinite(rho) || std::fabs(rho) > 1.0) {
    throw std::invalid_argument("cross_moment_mc: |rho| must not exceed 1");
  }
  if (draws < 2) {
    throw std::invalid_argument("cross_moment_mc: need at least 2 draws");
  }
  const double mix = std::sqrt(1.0 - rho * rho);
  RandomStream stream(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double u = stream.next_normal();
    const double v = rho * u + mix * stream.next_normal();
    const double prod = hermite_value(k, u) * hermite_value(l, v);
    sum += prod;
    sum_sq += prod * prod;
  }
  MomentEstimate est;
  est.draws = draws;
  est.mean = sum / double(draws);
  const double var = (sum_sq - double(draws) * est.mean * est.mean) / double(draws - 1);
  est.std_error = std::sqrt((var > 0.0 ? var : 0.0) / double(draws));
  return est;
}

double HermiteCoefficients::squared_norm() const noexcept {
  double sum = 0.0;
  for (double c : values) sum += c * c;
  return sum;
}

HermiteCoefficients project(const std::function<double(double)>& f,
                            unsigned max_degree, double s,
                            const QuadratureRule& rule) {
  check_degree(max_degree);
  check_scale(s);
  if (rule.order() < std::size_t(max_degree) + 1) {
    throw std::invalid_argument("project: rule order must exceed max_degree");
  }
  HermiteCoefficients coeffs;
  coeffs.scale = s;
  coeffs.values.assign(max_degree + 1, 0.0);
  double f_energy = 0.0;
  for (std::size_t i = 0; i < rule.order(); ++i) {
    const double u = rule.nodes[i];
    const double fv = f(s * u);
    if (!std::isfinite(fv)) {
      std::ostringstream msg;
      msg << "project: integrand non-finite at node " << i << " (t = " << s * u << ")";
      throw NumericalError(msg.str());
    }
    f_energy += rule.weights[i] * fv * fv;
    const std::vector<double> h = hermite_values(max_degree, u);
    for (unsigned k = 0; k <= max_degree; ++k) {
      coeffs.values[k] += rule.weights[i] * fv * h[k];
    }
  }
  // Bessel: coefficient energy cannot exceed ||f||^2; allow quadrature slack.
  const double energy = coeffs.squared_norm();
  const double slack = 1e-6 * (f_energy > 1.0 ? f_energy : 1.0);
  if (energy > f_energy + slack) {
    std::ostringstream msg;
    msg << "project: coefficient energy " << energy << " exceeds quadrature ||f||^2 "
        << f_energy << "; rule order " << rule.order() << " under-resolves f";
    throw NumericalError(msg.str());
  }
  return coeffs;
}

double hermite_series_value(const HermiteCoefficients& c, double t) {
  if (c.values.empty()) return 0.0;
  const unsigned top = unsigned(c.values.size() - 1);
  const std::vector<double> h = hermite_values(top, t / c.scale);
  double sum = 0.0;
  for (unsigned k = 0; k <= top; ++k) sum += c.values[k] * h[k];
  return sum;
}

}  // namespace gausschain
