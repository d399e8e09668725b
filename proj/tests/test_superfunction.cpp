#include <doctest.h>

#include <cmath>
#include <random>

#include "susy/quadrature.hpp"
#include "susy/superfunction.hpp"

using namespace susy;

namespace {

constexpr GrassmannElement::Mask kT = 0b01, kB = 0b10, kTB = 0b11;

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i <= n; ++i) g.push_back(lo + (hi - lo) * i / n);
  return g;
}

ScalarFn random_poly(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  return fns::polynomial({U(rng), U(rng), U(rng), U(rng), U(rng)});
}

SuperFunction random_super(std::mt19937_64& rng) {
  return SuperFunction::from_components(random_poly(rng), random_poly(rng), random_poly(rng),
                                        random_poly(rng));
}

double max_abs_on(const SuperFunction& F, const std::vector<double>& ts) {
  double m = 0.0;
  for (double t : ts) m = std::max(m, F(t).max_abs());
  return m;
}

}  // namespace

TEST_CASE("lift") {
  const auto F = lift_supersymmetric(fns::identity());
  CHECK(F(0.7) == GrassmannElement(0.7) + GrassmannElement::from_mask(kTB, 2.0));
  CHECK(lift_supersymmetric(fns::constant(1.0))(0.3) == GrassmannElement(1.0));
  const auto E = lift_supersymmetric(fns::exp_quadratic(0.0, 1.0));
  CHECK(E(0.5).scalar_part() == doctest::Approx(std::exp(0.5)));
  CHECK(E(0.5).coefficient(kTB) == doctest::Approx(2.0 * std::exp(0.5)));
}

TEST_CASE("compose") {
  std::mt19937_64 rng(5);
  const auto F = random_super(rng);
  for (double t : {-0.4, 0.0, 1.1}) CHECK(compose(fns::identity(), F)(t) == F(t));

  const auto G = SuperFunction::from_components(fns::identity(), fns::constant(0.0), fns::constant(0.0),
                                                fns::constant(1.0));
  const auto sq = compose(fns::polynomial({0.0, 0.0, 1.0}), G);
  CHECK(sq(1.5) == GrassmannElement(2.25) + GrassmannElement::from_mask(kTB, 3.0));

  const auto N = SuperFunction::constant(GrassmannElement::from_mask(kTB, 1.0));
  CHECK(compose(fns::exp_quadratic(0.0, 1.0), N)(0.2) ==
        GrassmannElement(1.0) + GrassmannElement::from_mask(kTB, 1.0));

  // (F_t theta + F_b thetabar)^2 = 0 for real components, so only H'(F0) F_tb survives.
  const auto H = fns::cosine();
  const auto C = compose(H, F);
  for (double t : {-0.3, 0.8}) {
    const auto v = F(t);
    const double f0 = v.scalar_part();
    CHECK(C(t).coefficient(kTB) == doctest::Approx(-std::sin(f0) * v.coefficient(kTB)).epsilon(1e-13));
    CHECK(C(t).coefficient(kT) == doctest::Approx(-std::sin(f0) * v.coefficient(kT)));
  }
}

TEST_CASE("compose keeps the square of a mixed nilpotent") {
  // (theta + thetabar rho)^2 = 2 theta thetabar rho
  const auto n = GrassmannElement::generator(kTheta) +
                 GrassmannElement::monomial({kThetaBar, kRho});
  const auto sq = compose(fns::polynomial({0.0, 0.0, 1.0}), SuperFunction::constant(n, 3));
  CHECK(sq(0.0) == GrassmannElement::monomial({kTheta, kThetaBar, kRho}, 2.0));
}

TEST_CASE("compose and lift commute") {
  const auto f = fns::cosine(0.7, 0.2);
  const auto H = fns::exp_quadratic(0.0, 1.0);
  const auto lhs = compose(H, lift_supersymmetric(f));
  for (double t : {-1.0, 0.0, 0.6}) {
    const double hf = std::exp(f(t));
    CHECK(lhs(t).scalar_part() == doctest::Approx(hf).epsilon(1e-14));
    CHECK(lhs(t).coefficient(kTB) == doctest::Approx(2.0 * hf * f.derivative(t)).epsilon(1e-14));
    CHECK(lhs(t).coefficient(kT) == 0.0);
  }
}

TEST_CASE("Q and Qbar on simple functions") {
  const auto t = SuperFunction::from_components(fns::identity(), fns::constant(0.0), fns::constant(0.0),
                                                fns::constant(0.0));
  CHECK(apply_Q(t)(0.4) == GrassmannElement::from_mask(kT, 2.0));
  CHECK(apply_Qbar(t)(0.4) == GrassmannElement::from_mask(kB, 2.0));
  const auto thetabar = SuperFunction::constant(GrassmannElement::from_mask(kB, 1.0));
  CHECK(apply_Q(thetabar)(0.0) == GrassmannElement(1.0));

  const auto L = lift_supersymmetric(fns::exp_quadratic(0.0, 1.0));
  for (double s : {-1.0, 0.0, 2.0}) {
    CHECK(apply_Q(L)(s).max_abs() < 1e-12);
    CHECK(apply_Qbar(L)(s).max_abs() < 1e-12);
  }
  const auto lin = lift_supersymmetric(fns::identity());
  CHECK(apply_Q(lin)(0.3).is_zero());
  CHECK(apply_Qbar(lin)(0.3).is_zero());
}

TEST_CASE("nilpotency and anticommutator of the generators") {
  std::mt19937_64 rng(11);
  const auto ts = grid(-1.0, 1.0, 9);
  for (int i = 0; i < 25; ++i) {
    const auto F = random_super(rng);
    CHECK(max_abs_on(apply_Q(apply_Q(F)), ts) < 1e-10);
    CHECK(max_abs_on(apply_Qbar(apply_Qbar(F)), ts) < 1e-10);
    const auto a = apply_Q(apply_Qbar(F));
    const auto b = apply_Qbar(apply_Q(F));
    double worst = 0.0;
    for (double t : ts) worst = std::max(worst, (a(t) + b(t)).max_abs());
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("classification of supersymmetric functions") {
  std::mt19937_64 rng(21);
  const auto ts = grid(-0.9, 0.9, 13);
  CHECK(is_supersymmetric(lift_supersymmetric(fns::bump(1.0)), ts, 1e-12));
  CHECK_FALSE(is_supersymmetric(SuperFunction::constant(GrassmannElement::from_mask(kT, 1.0)), ts, 1e-12));
  const auto f = fns::cosine();
  const auto half = SuperFunction::from_components(f, fns::constant(0.0), fns::constant(0.0),
                                                   f.derivative_fn());
  CHECK_FALSE(is_supersymmetric(half, ts, 1e-8));

  for (int i = 0; i < 40; ++i) {
    const bool susy = i % 2 == 0;
    const auto p = random_poly(rng);
    const auto F = susy ? lift_supersymmetric(p) : random_super(rng);
    const bool annihilated = max_abs_on(apply_Q(F), ts) < 1e-10 && max_abs_on(apply_Qbar(F), ts) < 1e-10;
    CHECK(annihilated == is_supersymmetric(F, ts, 1e-10));
    CHECK(annihilated == susy);
  }
}

TEST_CASE("tau transform") {
  std::mt19937_64 rng(31);
  const auto L = lift_supersymmetric(fns::cosine(0.4));
  const auto F = random_super(rng);
  for (double t : {-0.5, 0.25}) {
    CHECK((tau_transform(L, 0.7, -1.3)(t) - L(t)).max_abs() < 1e-12);
    CHECK(tau_transform(F, 0.0, 0.0)(t) == F(t));
  }

  // tau(ab) tau(cb) = tau((a + c) b)
  const double b = 0.6, bb = -0.9, a = 0.35, c = -1.2;
  const auto lhs = tau_transform(tau_transform(F, c * b, c * bb), a * b, a * bb);
  const auto rhs = tau_transform(F, (a + c) * b, (a + c) * bb);
  for (double t : {-0.7, 0.1, 0.9}) CHECK((lhs(t) - rhs(t)).max_abs() < 1e-12);

  // Generator: (tau(ab) F - F) / a = rho (b Qbar + bbar Q) F, exactly linear in a.
  const auto rho = GrassmannElement::generator(kRho);
  const auto X = apply_Qbar(F);
  const auto Y = apply_Q(F);
  for (double t : {-0.2, 0.4}) {
    const auto diff = (tau_transform(F, a * b, a * bb)(t) - F(t)) * (1.0 / a);
    const auto gen = rho * (X(t) * b + Y(t) * bb);
    CHECK((diff - gen).max_abs() < 1e-12);
  }
}

TEST_CASE("reduction formula") {
  const auto e = lift_supersymmetric(fns::exp_quadratic(0.0, 1.0));
  const auto r = reduce_integral(e, e, 0.0, 1e-11);
  CHECK(r.rhs == doctest::Approx(-2.0));
  CHECK(std::abs(r.lhs - r.rhs) < 1e-9);

  const auto zero = lift_supersymmetric(fns::constant(0.0));
  const auto z = reduce_integral(e, zero, 0.0, 1e-11);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);

  const double K = 1.0;
  const auto gb = lift_supersymmetric(fns::exp_quadratic(-1.0, 2.0 * K + 1.0, -K * K));
  const auto q = reduce_integral(gb, gb, K, 1e-11);
  CHECK(q.rhs == doctest::Approx(-2.0 * std::exp(2.0 * K)).epsilon(1e-14));
  CHECK(std::abs(q.lhs - q.rhs) < 1e-8);

  // Compact support: the lower limit comes from the support.
  const auto bump = lift_supersymmetric(fns::bump(1.0));
  const auto bq = reduce_integral(bump, e, 0.5, 1e-11);
  CHECK(bq.lower_limit == -1.0);
  CHECK(std::abs(bq.lhs - bq.rhs) < 1e-8);
}

TEST_CASE("reduction errors") {
  const auto e = lift_supersymmetric(fns::exp_quadratic(0.0, 1.0));
  const auto broken = SuperFunction::from_components(fns::exp_quadratic(0.0, 1.0), fns::constant(0.0),
                                                     fns::constant(0.0), fns::exp_quadratic(0.0, 1.0));
  CHECK_THROWS_AS(reduce_integral(e, broken, 0.0, 1e-10), SupersymmetryError);
  const auto grow = lift_supersymmetric(fns::exp_quadratic(0.0, -1.0));
  CHECK_THROWS_AS(reduce_integral(grow, grow, 0.0, 1e-10), QuadratureError);
}
