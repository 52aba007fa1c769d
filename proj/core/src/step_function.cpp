#include "gausschain/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gausschain/normal.hpp"

namespace gausschain {

StepFunction make_step_function(std::vector<double> phi_breaks,
                                std::vector<double> values, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("step function: scale must be positive");
  }
  if (values.size() != phi_breaks.size() + 1) {
    throw std::invalid_argument("step function: need one value per piece");
  }
  double prev = 0.0;
  for (double p : phi_breaks) {
    if (!(p > prev) || !(p < 1.0)) {
      throw std::invalid_argument(
          "step function: breakpoints must be strictly increasing inside (0, 1)");
    }
    prev = p;
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("step function: values must be finite");
    }
  }
  StepFunction f;
  f.scale = s;
  f.t_breaks.reserve(phi_breaks.size());
  for (double p : phi_breaks) f.t_breaks.push_back(s * normal_quantile(p));
  f.phi_breaks = std::move(phi_breaks);
  f.values = std::move(values);
  return f;
}

double step_value(const StepFunction& f, double t) {
  // Piece j covers (t_{j-1}, t_j]; lower_bound puts boundary points in the
  // piece below, matching the closed upper end.
  const auto it = std::lower_bound(f.t_breaks.begin(), f.t_breaks.end(), t);
  return f.values[std::size_t(it - f.t_breaks.begin())];
}

double step_mean_gamma(const StepFunction& f) {
  double mean = 0.0;
  double lo = 0.0;
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    const double hi = (j < f.phi_breaks.size()) ? f.phi_breaks[j] : 1.0;
    mean += f.values[j] * (hi - lo);
    lo = hi;
  }
  return mean;
}

double step_squared_norm_gamma(const StepFunction& f) {
  double sum = 0.0;
  double lo = 0.0;
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    const double hi = (j < f.phi_breaks.size()) ? f.phi_breaks[j] : 1.0;
    sum += f.values[j] * f.values[j] * (hi - lo);
    lo = hi;
  }
  return sum;
}

double step_l2_distance(const StepFunction& f, const StepFunction& g) {
  if (f.scale != g.scale) {
    throw std::invalid_argument("step_l2_distance: scales differ");
  }
  // Walk the merged breakpoint grid; the difference is constant per cell.
  double sum = 0.0;
  double lo = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (true) {
    const double next_f = (i < f.phi_breaks.size()) ? f.phi_breaks[i] : 1.0;
    const double next_g = (j < g.phi_breaks.size()) ? g.phi_breaks[j] : 1.0;
    const double hi = std::min(next_f, next_g);
    const double diff = f.values[i] - g.values[j];
    sum += diff * diff * (hi - lo);
    if (hi >= 1.0) break;
    if (next_f == hi) ++i;
    if (next_g == hi) ++j;
    lo = hi;
  }
  return std::sqrt(sum);
}

StepFunction step_centered(const StepFunction& f) {
  StepFunction out = f;
  const double mean = step_mean_gamma(f);
  for (double& v : out.values) v -= mean;
  return out;
}

HermiteCoefficients project_step(const StepFunction& f, unsigned max_degree) {
  if (max_degree > kMaxHermiteDegree) {
    throw std::invalid_argument("project_step: degree exceeds supported cap");
  }
  // Antiderivative values T_k(u) = -phi(u) H_{k-1}(u) / sqrt(k) at each
  // breakpoint (T_0 = Phi); both vanish at -inf, T_0 -> 1 at +inf.
  const std::size_t breaks = f.phi_breaks.size();
  std::vector<std::vector<double>> anti(breaks);
  for (std::size_t j = 0; j < breaks; ++j) {
    const double u = f.t_breaks[j] / f.scale;
    const std::vector<double> h =
        hermite_values(max_degree > 0 ? max_degree - 1 : 0, u);
    anti[j].resize(max_degree + 1);
    anti[j][0] = f.phi_breaks[j];
    const double density = normal_pdf(u);
    for (unsigned k = 1; k <= max_degree; ++k) {
      anti[j][k] = -density * h[k - 1] / std::sqrt(double(k));
    }
  }
  HermiteCoefficients coeffs;
  coeffs.scale = f.scale;
  coeffs.values.assign(max_degree + 1, 0.0);
  for (unsigned k = 0; k <= max_degree; ++k) {
    const double at_top = (k == 0) ? 1.0 : 0.0;
    double lo = 0.0;
    for (std::size_t j = 0; j < f.values.size(); ++j) {
      const double hi = (j < breaks) ? anti[j][k] : at_top;
      coeffs.values[k] += f.values[j] * (hi - lo);
      lo = hi;
    }
  }
  return coeffs;
}

}  // namespace gausschain
