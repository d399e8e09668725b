#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "susy/scalar_fn.hpp"

using namespace susy;

namespace {

// Fourth-order central difference.
double fd(const ScalarFn& f, double t, int order, double step) {
  auto d = [&](double x) { return f.derivative(x, order - 1); };
  return (-d(t + 2 * step) + 8 * d(t + step) - 8 * d(t - step) + d(t - 2 * step)) / (12 * step);
}

void check_derivatives(const ScalarFn& f, double lo, double hi, int orders) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(lo, hi);
  for (int i = 0; i < 40; ++i) {
    const double t = U(rng);
    for (int k = 1; k <= orders; ++k) {
      const double exact = f.derivative(t, k);
      const double approx = fd(f, t, k, 1e-3);
      CHECK(std::abs(exact - approx) <= 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

}  // namespace

TEST_CASE("analytic derivatives match finite differences") {
  check_derivatives(fns::exp_quadratic(-1.0, 0.5, 0.2), -2.0, 2.0, 4);
  check_derivatives(fns::cosine(0.5, 0.3), -5.0, 5.0, 4);
  check_derivatives(fns::tanh_polynomial({0.0, -0.25, 0.5}), -3.0, 3.0, 4);
  check_derivatives(fns::bump(1.0), -0.9, 0.9, 3);
  check_derivatives(fns::polynomial({1.0, -2.0, 0.5, 0.25}), -2.0, 2.0, 3);
  check_derivatives(fns::product(fns::cosine(), fns::exp_quadratic(0.0, 1.0)), -1.0, 1.0, 3);
}

TEST_CASE("bump") {
  const auto f = fns::bump(2.0);
  CHECK(f(0.0) == 1.0);
  CHECK(f(2.0) == 0.0);
  CHECK(f(-2.5) == 0.0);
  CHECK(f(0.7) == f(-0.7));
  CHECK(f(1.0) == doctest::Approx(std::exp(1.0 - 1.0 / 0.75)).epsilon(1e-14));
  REQUIRE(f.support());
  CHECK(f.support()->lo == -2.0);
  CHECK_THROWS_AS(f.derivative(0.1, 4), std::out_of_range);
}

TEST_CASE("polynomial helpers") {
  const std::vector<double> p{1.0, 2.0, 3.0};
  CHECK(poly::eval(p, 2.0) == 17.0);
  CHECK(poly::derivative(p) == std::vector<double>{2.0, 6.0});
  CHECK(poly::power(std::vector<double>{1.0, 1.0}, 3) == std::vector<double>{1.0, 3.0, 3.0, 1.0});
  CHECK(poly::power(p, 0) == std::vector<double>{1.0});
}
