#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <gausschain/errors.hpp>
#include <gausschain/hermite.hpp>
#include <gausschain/normal.hpp>
#include <gausschain/rng.hpp>
#include <gausschain/step_function.hpp>

using namespace gausschain;

namespace {

template <class E, class Fn>
std::string error_text(Fn&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  } catch (...) {
  }
  return {};
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

// Expanded monomial forms of the first seven orthonormal polynomials.
double symbolic(unsigned k, double t) {
  const double t2 = t * t;
  switch (k) {
    case 0: return 1.0;
    case 1: return t;
    case 2: return (t2 - 1.0) / std::sqrt(2.0);
    case 3: return (t2 * t - 3.0 * t) / std::sqrt(6.0);
    case 4: return (t2 * t2 - 6.0 * t2 + 3.0) / std::sqrt(24.0);
    case 5: return (t2 * t2 * t - 10.0 * t2 * t + 15.0 * t) / std::sqrt(120.0);
    default:
      return (t2 * t2 * t2 - 15.0 * t2 * t2 + 45.0 * t2 - 15.0) /
             std::sqrt(720.0);
  }
}

double double_factorial_odd(int d) {
  // (d - 1)!! for even d
  double out = 1.0;
  for (int j = d - 1; j >= 1; j -= 2) out *= double(j);
  return out;
}

// Composite Simpson on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b,
               int panels) {
  const double h = (b - a) / double(2 * panels);
  double sum = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) {
    sum += f(a + double(i) * h) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("pointwise values") {
  CHECK(hermite_value(0, 3.7) == 1.0);
  CHECK(hermite_value(1, -2.25) == -2.25);
  CHECK(hermite_value(2, 1.0) == 0.0);
  CHECK(hermite_value(3, 2.0) ==
        doctest::Approx(0.81649658092772603).epsilon(1e-13));

  RandomStream stream(42u);
  for (int trial = 0; trial < 100; ++trial) {
    const double t = 10.0 * (stream.next_uniform() - 0.5);
    const std::vector<double> values = hermite_values(6, t);
    REQUIRE(values.size() == 7);
    for (unsigned k = 0; k <= 6; ++k) {
      const double reference = symbolic(k, t);
      const double slack = 1e-10 * std::max(1.0, std::fabs(reference));
      CHECK(std::fabs(values[k] - reference) <= slack);
      // single-degree evaluation runs the same recurrence
      CHECK(hermite_value(k, t) == values[k]);
    }
  }

  CHECK(std::isfinite(hermite_value(200, 1.3)));
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)hermite_value(201, 0.0); }),
                 "cap 200"));
  CHECK_THROWS_AS((void)hermite_values(201, 0.0), std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)hermite_value(3, nan), std::invalid_argument);
  CHECK_THROWS_AS(
      (void)hermite_value(3, std::numeric_limits<double>::infinity()),
      std::invalid_argument);
}

TEST_CASE("generating function") {
  // lambda = 0 keeps only the k = 0 term, with 0^0 = 1
  CHECK(generating_function_partial(0.0, 3.7, 25) == 1.0);
  CHECK(generating_function_partial(0.0, -1.0, 0) == 1.0);

  CHECK(generating_function_partial(0.5, 1.0, 30) ==
        doctest::Approx(std::exp(0.375)).epsilon(1e-10));

  // a zero-term truncation is H_0 alone; the tail it drops is exp(-1/2) - ...
  CHECK(generating_function_partial(1.0, 0.0, 0) == 1.0);
  CHECK(std::fabs(generating_function_partial(1.0, 0.0, 0) - std::exp(-0.5)) ==
        doctest::Approx(0.39346934028736658).epsilon(1e-12));

  for (double lambda : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const double target = std::exp(lambda * t - 0.5 * lambda * lambda);
      CHECK(std::fabs(generating_function_partial(lambda, t, 40) - target) <
            1e-9);
    }
  }
  // a wider pair needs more terms but still converges well before 60
  CHECK(generating_function_partial(2.0, 2.5, 60) ==
        doctest::Approx(std::exp(3.0)).epsilon(1e-8));

  CHECK_THROWS_AS((void)generating_function_partial(1.0, 0.0, 250),
                  std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)generating_function_partial(nan, 0.0, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)generating_function_partial(1.0, nan, 5),
                  std::invalid_argument);
}

TEST_CASE("quadrature rule") {
  const QuadratureRule point = gauss_hermite_rule(1);
  REQUIRE(point.order() == 1);
  CHECK(point.nodes[0] == 0.0);
  CHECK(point.weights[0] == 1.0);

  const QuadratureRule pair = gauss_hermite_rule(2);
  CHECK(pair.nodes[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(pair.nodes[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pair.weights[0] == doctest::Approx(0.5).epsilon(1e-14));

  for (std::size_t order : {3, 8, 64, 129, 256}) {
    const QuadratureRule rule = gauss_hermite_rule(order);
    REQUIRE(rule.order() == order);
    double mass = 0.0;
    for (std::size_t i = 0; i < order; ++i) {
      CHECK(rule.weights[i] > 0.0);
      mass += rule.weights[i];
      if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
      // exact reflection symmetry
      CHECK(rule.nodes[i] == -rule.nodes[order - 1 - i]);
      CHECK(rule.weights[i] == rule.weights[order - 1 - i]);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-13));
  }

  // far past order 256 the extreme weights drop below double range and
  // underflow to an honest zero; the mass still normalizes
  const QuadratureRule huge = gauss_hermite_rule(512);
  CHECK(huge.weights[0] == 0.0);
  CHECK(huge.weights[256] > 0.0);
  double huge_mass = 0.0;
  for (double w : huge.weights) {
    CHECK(w >= 0.0);
    huge_mass += w;
  }
  CHECK(huge_mass == doctest::Approx(1.0).epsilon(1e-13));

  // gaussian moments through degree 2*order - 1
  const QuadratureRule rule8 = gauss_hermite_rule(8);
  for (int d = 0; d <= 15; ++d) {
    double moment = 0.0;
    for (std::size_t i = 0; i < rule8.order(); ++i) {
      moment += rule8.weights[i] * std::pow(rule8.nodes[i], double(d));
    }
    if (d % 2 == 1) {
      // the symmetric terms reach ~1e5 before canceling, so the residual
      // is rounding noise, not exact zero
      CHECK(std::fabs(moment) < 1e-10);
    } else {
      CHECK(moment ==
            doctest::Approx(double_factorial_odd(d)).epsilon(1e-10));
    }
  }

  // extreme weights at order 64 are genuinely tiny, not eigenvector noise
  const QuadratureRule rule64 = gauss_hermite_rule(64);
  CHECK(rule64.weights[0] > 0.0);
  CHECK(rule64.weights[0] < 1e-45);

  CHECK(default_rule_for(10).order() == 128);
  CHECK(default_rule_for(177).order() == 177);
  CHECK_THROWS_AS((void)default_rule_for(3000), std::invalid_argument);
  CHECK_THROWS_AS((void)gauss_hermite_rule(0), std::invalid_argument);
  CHECK_THROWS_AS((void)gauss_hermite_rule(2049), std::invalid_argument);
}

TEST_CASE("inner products") {
  const QuadratureRule rule = default_rule_for(41);
  for (double s : {0.5, 1.0, 3.0}) {
    for (unsigned k = 0; k <= 20; ++k) {
      for (unsigned l = k; l <= 20; ++l) {
        const double expected = (k == l) ? 1.0 : 0.0;
        CHECK(std::fabs(inner_product_gamma(k, l, s, rule) - expected) < 1e-8);
      }
    }
  }

  CHECK(contains(error_text<std::invalid_argument>([&] {
                   (void)inner_product_gamma(10, 10, 1.0, gauss_hermite_rule(20));
                 }),
                 "need at least 21"));
  CHECK_THROWS_AS((void)inner_product_gamma(2, 2, 0.0, rule),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)inner_product_gamma(2, 2, -1.0, rule),
                  std::invalid_argument);
}

TEST_CASE("cross moments") {
  CHECK(cross_moment(2, 2, 0.5) == 0.25);
  CHECK(cross_moment(1, 3, 0.9) == 0.0);
  CHECK(cross_moment(4, 4, 1.0) == 1.0);
  CHECK(cross_moment(3, 3, -0.5) == -0.125);
  CHECK(cross_moment(2, 2, 0.0) == 0.0);
  // rho^0 = 1 even at rho = 0
  CHECK(cross_moment(0, 0, 0.0) == 1.0);
  CHECK_THROWS_AS((void)cross_moment(2, 2, 1.5), std::invalid_argument);
  CHECK_THROWS_AS((void)cross_moment(201, 0, 0.5), std::invalid_argument);

  const QuadratureRule rule = default_rule_for(11);
  for (unsigned k = 0; k <= 4; ++k) {
    for (unsigned l = 0; l <= 4; ++l) {
      for (double rho : {-0.9, -0.3, 0.0, 0.4, 0.9, 1.0}) {
        CHECK(std::fabs(cross_moment_quadrature(k, l, rho, rule) -
                        cross_moment(k, l, rho)) < 1e-6);
      }
    }
  }
  CHECK_THROWS_AS((void)cross_moment_quadrature(2, 2, -1.01, rule),
                  std::invalid_argument);

  const MomentEstimate direct = cross_moment_mc(2, 2, 0.5, 100000, 777u);
  CHECK(direct.draws == 100000);
  CHECK(direct.std_error > 0.0);
  CHECK(std::fabs(direct.mean - 0.25) <= 4.0 * direct.std_error);
  const MomentEstimate null = cross_moment_mc(1, 2, 0.3, 100000, 778u);
  CHECK(std::fabs(null.mean) <= 4.0 * null.std_error);
  // same seed, same estimate
  const MomentEstimate again = cross_moment_mc(2, 2, 0.5, 100000, 777u);
  CHECK(again.mean == direct.mean);
  CHECK(contains(error_text<std::invalid_argument>(
                     [] { (void)cross_moment_mc(2, 2, 0.5, 1, 7u); }),
                 "at least 2 draws"));
  CHECK_THROWS_AS((void)cross_moment_mc(2, 2, 2.0, 100, 7u),
                  std::invalid_argument);
}

TEST_CASE("projection") {
  const QuadratureRule rule = default_rule_for(1);

  const HermiteCoefficients linear =
      project([](double t) { return t; }, 3, 1.0, rule);
  REQUIRE(linear.values.size() == 4);
  CHECK(linear.scale == 1.0);
  CHECK(linear.values[1] == doctest::Approx(1.0).epsilon(1e-12));
  for (unsigned k : {0u, 2u, 3u}) CHECK(std::fabs(linear.values[k]) < 1e-12);

  const HermiteCoefficients constant =
      project([](double) { return 1.0; }, 2, 1.0, rule);
  CHECK(constant.values[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::fabs(constant.values[1]) < 1e-13);

  const HermiteCoefficients square =
      project([](double t) { return t * t; }, 4, 1.0, rule);
  CHECK(square.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(square.values[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  for (unsigned k : {1u, 3u, 4u}) CHECK(std::fabs(square.values[k]) < 1e-12);
  CHECK(square.squared_norm() == doctest::Approx(3.0).epsilon(1e-10));

  // the basis carries the scale: against H_k(t/2), f(t) = t has c_1 = 2
  const HermiteCoefficients wide =
      project([](double t) { return t; }, 3, 2.0, rule);
  CHECK(wide.scale == 2.0);
  CHECK(wide.values[1] == doctest::Approx(2.0).epsilon(1e-12));

  // round trip through the series
  auto poly = [](double t) { return 1.0 + 2.0 * t + 3.0 * t * t; };
  const HermiteCoefficients coeffs = project(poly, 6, 1.0, rule);
  for (double x : {-2.0, -0.3, 0.0, 1.7}) {
    CHECK(hermite_series_value(coeffs, x) ==
          doctest::Approx(poly(x)).epsilon(1e-9));
  }
  CHECK(hermite_series_value(HermiteCoefficients{}, 1.0) == 0.0);

  CHECK(contains(error_text<NumericalError>([&] {
                   (void)project([](double t) { return std::sqrt(t); }, 4, 1.0,
                                 rule);
                 }),
                 "node"));
  CHECK_THROWS_AS(
      (void)project([](double t) { return t; }, 10, 1.0, gauss_hermite_rule(10)),
      std::invalid_argument);
  CHECK_THROWS_AS((void)project([](double t) { return t; }, 4, 0.0, rule),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)project([](double t) { return t; }, 250, 1.0, rule),
                  std::invalid_argument);
}

TEST_CASE("step projections") {
  const StepFunction median = make_step_function({0.5}, {1.0, 0.0}, 1.0);
  const HermiteCoefficients c = project_step(median, 12);
  REQUIRE(c.values.size() == 13);
  CHECK(c.scale == 1.0);
  CHECK(c.values[0] == 0.5);
  CHECK(c.values[1] == doctest::Approx(-0.3989422804014327).epsilon(1e-15));
  CHECK(c.values[2] == 0.0);

  // Bessel partial sums climb toward, never past, the exact squared norm
  CHECK(step_squared_norm_gamma(median) == 0.5);
  double energy = 0.0;
  for (double value : c.values) {
    energy += value * value;
    CHECK(energy <= 0.5 + 1e-15);
  }
  CHECK(energy == doctest::Approx(0.46311859540650097).epsilon(1e-12));

  // independent Simpson oracle on a two-break step, panels split at the
  // discontinuities so each integrand piece is smooth
  const StepFunction step =
      make_step_function({0.3, 0.7}, {0.2, -1.0, 0.5}, 1.5);
  const HermiteCoefficients sc = project_step(step, 8);
  const double u0 = normal_quantile(0.3);
  const double u1 = normal_quantile(0.7);
  for (unsigned k = 0; k <= 8; ++k) {
    auto integrand = [&](double u) {
      return hermite_value(k, u) * normal_pdf(u);
    };
    const double oracle = 0.2 * simpson(integrand, -9.0, u0, 2000) +
                          -1.0 * simpson(integrand, u0, u1, 2000) +
                          0.5 * simpson(integrand, u1, 9.0, 2000);
    CHECK(std::fabs(sc.values[k] - oracle) < 1e-6);
  }

  CHECK_THROWS_AS((void)project_step(median, 201), std::invalid_argument);
}
