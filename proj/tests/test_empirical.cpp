#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gausschain/empirical.hpp"
#include "gausschain/normal.hpp"
#include "gausschain/rng.hpp"
#include "gausschain/step_function.hpp"

using namespace gausschain;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename E, typename F>
std::string error_text(F&& body) {
  try {
    body();
  } catch (const E& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

// Midpoint composite Simpson for the scaled normal density; independent of
// normal_cdf so the centering checks do not assume the erfc path is right.
double simpson_density_mass(double a, double b, double s, int panels) {
  const double h = (b - a) / double(panels);
  auto density = [s](double t) { return normal_pdf(t / s) / s; };
  double sum = density(a) + density(b);
  for (int i = 1; i < panels; ++i) {
    sum += density(a + h * double(i)) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

// Grid-scan lower bound for the supremum deviation, walking the sorted path
// and the probability grid together.
double brute_sup(const std::vector<double>& path, double s, std::size_t grid_points) {
  std::vector<double> sorted = path;
  std::sort(sorted.begin(), sorted.end());
  const double n = double(sorted.size());
  double best = 0.0;
  std::size_t idx = 0;
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double u = (double(j) + 0.5) / double(grid_points);
    const double alpha = s * normal_quantile(u);
    while (idx < sorted.size() && sorted[idx] <= alpha) ++idx;
    const double dev = std::fabs(double(idx) / n - normal_cdf(alpha / s));
    if (dev > best) best = dev;
  }
  return best;
}

}  // namespace

TEST_CASE("indicator construction and values") {
  const IndicatorFunction f = make_indicator(0.0, 1.0);
  CHECK(f.threshold == 0.0);
  CHECK(f.scale == 1.0);

  // the jump at the threshold is included on the left
  CHECK(indicator_value(f, -0.5) == 0.5);
  CHECK(indicator_value(f, 0.0) == 0.5);
  CHECK(indicator_value(f, 0.25) == -0.5);
  const double at_jump = indicator_value(f, 0.0);
  const double past_jump = indicator_value(f, std::nextafter(0.0, 1.0));
  CHECK(at_jump - past_jump == 1.0);

  // infinite thresholds give the zero function away from the endpoints
  const IndicatorFunction bottom = make_indicator(-kInf, 1.0);
  const IndicatorFunction top = make_indicator(kInf, 1.0);
  for (double t : {-1e300, -2.0, 0.0, 3.5, 1e300}) {
    CHECK(indicator_value(bottom, t) == 0.0);
    CHECK(indicator_value(top, t) == 0.0);
  }

  // the centering constant follows the marginal scale
  const IndicatorFunction wide = make_indicator(1.5, 3.0);
  CHECK(indicator_value(wide, 2.0) == doctest::Approx(-normal_cdf(0.5)).epsilon(1e-15));

  CHECK(contains(error_text<std::invalid_argument>([] { (void)make_indicator(0.0, 0.0); }),
                 "scale must be positive"));
  CHECK(contains(error_text<std::invalid_argument>([] { (void)make_indicator(0.0, -1.0); }),
                 "scale must be positive"));
  CHECK(contains(error_text<std::invalid_argument>([] { (void)make_indicator(0.0, kInf); }),
                 "scale must be positive"));
  CHECK(contains(error_text<std::invalid_argument>([] { (void)make_indicator(kNaN, 1.0); }),
                 "threshold must not be NaN"));
}

TEST_CASE("indicator position") {
  CHECK(indicator_position(make_indicator(0.0, 1.0)) == 0.5);
  CHECK(indicator_position(make_indicator(-kInf, 1.0)) == 0.0);
  CHECK(indicator_position(make_indicator(kInf, 1.0)) == 1.0);

  const double phi_one = indicator_position(make_indicator(1.0, 1.0));
  CHECK(phi_one == doctest::Approx(0.8413447460685429486).epsilon(5e-16));

  // only the ratio threshold / scale matters
  CHECK(indicator_position(make_indicator(1.5, 3.0)) ==
        indicator_position(make_indicator(0.5, 1.0)));
}

TEST_CASE("empirical process") {
  CHECK(empirical_process({0.0}, make_indicator(kInf, 1.0)) == 0.0);
  CHECK(empirical_process({-1.0, 1.0}, make_indicator(0.0, 1.0)) == 0.0);

  // all points below the threshold: exactly 1 - Phi(1)
  const double tail = empirical_process({-1.0, 1.0}, make_indicator(1.0, 1.0));
  CHECK(tail == 1.0 - normal_cdf(1.0));
  CHECK(tail == doctest::Approx(0.15865525393145705).epsilon(1e-14));

  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)empirical_process({}, make_indicator(0.0, 1.0)); }),
                 "non-empty"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)empirical_process({1.0, kNaN}, make_indicator(0.0, 1.0)); }),
                 "contains NaN"));

  // stays inside [-1, 1] and matches the pointwise average
  RandomStream stream(4242u);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + std::size_t(stream.next_u64() % 32);
    std::vector<double> path(n);
    for (double& x : path) x = stream.next_normal();
    const double alpha = 6.0 * stream.next_uniform() - 3.0;
    const IndicatorFunction f = make_indicator(alpha, 1.0);
    const double value = empirical_process(path, f);
    CHECK(value >= -1.0);
    CHECK(value <= 1.0);
    double mean = 0.0;
    for (double x : path) mean += indicator_value(f, x);
    mean /= double(n);
    CHECK(std::fabs(value - mean) < 1e-12);
  }
}

TEST_CASE("sup deviation") {
  CHECK(sup_deviation({0.0}, 1.0) == 0.5);

  const double two_point = sup_deviation({-1.0, 1.0}, 1.0);
  CHECK(two_point == std::max(0.5 - normal_cdf(-1.0), normal_cdf(1.0) - 0.5));
  CHECK(two_point == doctest::Approx(0.34134474606854294).epsilon(1e-14));

  CHECK(contains(error_text<std::invalid_argument>([] { (void)sup_deviation({}, 1.0); }),
                 "non-empty"));
  CHECK(contains(error_text<std::invalid_argument>([] { (void)sup_deviation({0.0}, 0.0); }),
                 "scale must be positive"));
  CHECK(contains(error_text<std::invalid_argument>([] { (void)sup_deviation({kNaN}, 1.0); }),
                 "contains NaN"));

  // a dense probability grid can neither beat the exact supremum nor fall
  // far short of it
  RandomStream stream(5150u);
  const double scales[] = {0.5, 1.0, 3.0};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + std::size_t(stream.next_u64() % 64);
    const double s = scales[stream.next_u64() % 3];
    std::vector<double> path(n);
    for (double& x : path) x = s * stream.next_normal();
    const double exact = sup_deviation(path, s);
    const double brute = brute_sup(path, s, 100000);
    CHECK(exact >= 0.0);
    CHECK(exact <= 1.0);
    CHECK(brute <= exact + 1e-12);
    CHECK(exact - brute <= 2e-5);
  }
}

TEST_CASE("indicator l2 distance") {
  const IndicatorFunction lo = make_indicator(normal_quantile(0.3), 1.0);
  const IndicatorFunction hi = make_indicator(normal_quantile(0.7), 1.0);
  const double dist = indicator_l2_distance(lo, hi);
  CHECK(dist == doctest::Approx(0.48989794855663565).epsilon(1e-14));
  CHECK(dist == indicator_l2_distance(hi, lo));

  CHECK(indicator_l2_distance(lo, lo) == 0.0);

  // positions 0 and 1: the gap saturates and the variance term vanishes
  const IndicatorFunction bottom = make_indicator(-kInf, 1.0);
  const IndicatorFunction top = make_indicator(kInf, 1.0);
  CHECK(indicator_l2_distance(bottom, top) == 0.0);
  CHECK(indicator_l2_distance(bottom, make_indicator(0.0, 1.0)) == 0.5);

  CHECK(contains(error_text<std::invalid_argument>([&] {
                   (void)indicator_l2_distance(lo, make_indicator(0.0, 2.0));
                 }),
                 "scales differ"));
}

TEST_CASE("discretized process") {
  const std::vector<double> grid = {-kInf, normal_quantile(0.25), 0.0,
                                    normal_quantile(0.75), kInf};
  const std::vector<double> path = {0.5};

  CHECK(discretized_process(path, grid, 0.3) == 1.0);
  CHECK(discretized_process(path, grid, -1.0) == 0.0);
  // cells are closed on the left: a threshold at a grid point snaps upward
  CHECK(discretized_process(path, grid, 0.0) == 1.0);
  CHECK(discretized_process(path, grid, -1e-9) == 0.0);
  CHECK(discretized_process(path, grid, kInf) == 1.0);
  CHECK(discretized_process(path, grid, -kInf) == 0.0);
  CHECK(discretized_process({-1.0}, grid, -kInf) == 1.0);

  // monotone in the threshold and equal to the raw counts at the snapped
  // cell endpoint
  RandomStream stream(31337u);
  std::vector<double> long_path(32);
  for (double& x : long_path) x = stream.next_normal();
  std::vector<double> alphas(50);
  for (double& a : alphas) a = 8.0 * stream.next_uniform() - 4.0;
  std::sort(alphas.begin(), alphas.end());
  double prev = 0.0;
  for (double a : alphas) {
    const double value = discretized_process(long_path, grid, a);
    CHECK(value >= prev);
    prev = value;
    const auto it = std::upper_bound(grid.begin(), grid.end(), a);
    const double right = (it == grid.end()) ? grid.back() : *it;
    std::size_t hits = 0;
    for (double x : long_path) hits += (x <= right) ? 1 : 0;
    CHECK(value == double(hits) / double(long_path.size()));
  }

  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)discretized_process({0.0}, {0.0, kInf}, 0.0); }),
                 "from -inf to +inf"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)discretized_process({0.0}, {-kInf, 0.0}, 0.0); }),
                 "from -inf to +inf"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)discretized_process({0.0}, {-kInf}, 0.0); }),
                 "from -inf to +inf"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] {
                       (void)discretized_process({0.0}, {-kInf, 1.0, 1.0, kInf}, 0.0);
                     }),
                 "strictly increasing"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [&] { (void)discretized_process({0.0}, grid, kNaN); }),
                 "alpha must not be NaN"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [&] { (void)discretized_process({}, grid, 0.0); }),
                 "non-empty"));
}

TEST_CASE("discretization sandwich") {
  // Quantile grid at multiples of 1/16; snapping moves a threshold's
  // position up by at most 1/16, so shifting the query down or up by the
  // full spacing brackets the raw counts.
  const double spacing = 1.0 / 16.0;
  std::vector<double> grid = {-kInf};
  for (int i = 1; i < 16; ++i) grid.push_back(normal_quantile(double(i) * spacing));
  grid.push_back(kInf);

  RandomStream stream(987u);
  std::vector<double> path(64);
  for (double& x : path) x = stream.next_normal();
  const double n = double(path.size());

  for (int trial = 0; trial < 100; ++trial) {
    const double pos = 2.0 * spacing + (1.0 - 4.0 * spacing) * stream.next_uniform();
    const double alpha = normal_quantile(pos);
    std::size_t hits = 0;
    for (double x : path) hits += (x <= alpha) ? 1 : 0;
    const double raw = double(hits) / n;
    const double below = discretized_process(path, grid, normal_quantile(pos - spacing));
    const double above = discretized_process(path, grid, normal_quantile(pos + spacing));
    CHECK(below <= raw + 1e-12);
    CHECK(raw <= above + 1e-12);
  }
}

TEST_CASE("centering against independent quadrature") {
  // The centering constant must equal the density mass below the threshold;
  // checking the mean of f against Simpson masses catches a bad cdf without
  // assuming one.
  for (double alpha : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
    for (double s : {0.5, 1.0, 3.0}) {
      const IndicatorFunction f = make_indicator(alpha, s);
      const double c = indicator_position(f);
      const double left = simpson_density_mass(-12.0 * s, alpha, s, 20000);
      const double total = simpson_density_mass(-12.0 * s, 12.0 * s, s, 40000);
      const double mean = (1.0 - c) * left - c * (total - left);
      CHECK(std::fabs(mean) < 1e-12);
    }
  }
}

TEST_CASE("step functions") {
  const StepFunction median = make_step_function({0.5}, {1.0, 0.0}, 1.0);
  CHECK(median.t_breaks.size() == 1);
  CHECK(median.t_breaks[0] == 0.0);

  // pieces are closed on the right
  CHECK(step_value(median, -1.0) == 1.0);
  CHECK(step_value(median, 0.0) == 1.0);
  CHECK(step_value(median, std::nextafter(0.0, 1.0)) == 0.0);
  CHECK(step_value(median, 5.0) == 0.0);

  CHECK(step_mean_gamma(median) == 0.5);
  CHECK(step_squared_norm_gamma(median) == 0.5);

  const StepFunction three = make_step_function({0.25, 0.75}, {1.0, 2.0, 3.0}, 1.0);
  CHECK(step_mean_gamma(three) == 2.0);
  CHECK(step_squared_norm_gamma(three) == 4.5);

  const StepFunction centered = step_centered(three);
  CHECK(step_mean_gamma(centered) == 0.0);
  CHECK(centered.values[0] == -1.0);
  CHECK(centered.values[2] == 1.0);

  // piecewise-exact distance agrees with the indicator formula
  const StepFunction lo_step = make_step_function({0.3}, {0.7, -0.3}, 1.0);
  const StepFunction hi_step = make_step_function({0.7}, {0.3, -0.7}, 1.0);
  const double step_dist = step_l2_distance(lo_step, hi_step);
  const double ind_dist = indicator_l2_distance(make_indicator(normal_quantile(0.3), 1.0),
                                                make_indicator(normal_quantile(0.7), 1.0));
  CHECK(step_dist == doctest::Approx(ind_dist).epsilon(1e-14));
  CHECK(step_dist == doctest::Approx(0.48989794855663565).epsilon(1e-14));
  CHECK(step_l2_distance(lo_step, lo_step) == 0.0);
  CHECK(step_l2_distance(hi_step, lo_step) == step_dist);

  // the centered indicator and its step form agree pointwise
  const double alpha = normal_quantile(0.3);
  const IndicatorFunction ind = make_indicator(alpha, 1.0);
  RandomStream stream(606u);
  for (int i = 0; i < 200; ++i) {
    const double t = 8.0 * stream.next_uniform() - 4.0;
    CHECK(std::fabs(step_value(lo_step, t) - indicator_value(ind, t)) < 1e-12);
  }

  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)make_step_function({0.5}, {1.0, 0.0}, 0.0); }),
                 "scale must be positive"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)make_step_function({0.5}, {1.0}, 1.0); }),
                 "one value per piece"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)make_step_function({0.5, 0.5}, {1.0, 2.0, 3.0}, 1.0); }),
                 "strictly increasing inside (0, 1)"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)make_step_function({0.0}, {1.0, 2.0}, 1.0); }),
                 "strictly increasing inside (0, 1)"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)make_step_function({1.0}, {1.0, 2.0}, 1.0); }),
                 "strictly increasing inside (0, 1)"));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)make_step_function({0.5}, {1.0, kInf}, 1.0); }),
                 "values must be finite"));
  CHECK(contains(error_text<std::invalid_argument>([&] {
                   (void)step_l2_distance(lo_step, make_step_function({0.3}, {0.7, -0.3}, 2.0));
                 }),
                 "scales differ"));
}
