#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "susy/superwick.hpp"

using namespace susy;

namespace {

// Test-side covariance, written out from the two-point table.
double G(double m, double t) { return t > 0 ? std::exp(-m * m * t) : (t < 0 ? 0.0 : 0.5); }
double C(double m, double t, double s) { return std::exp(-m * m * std::abs(t - s)) / (2 * m * m); }

double brute_isserlis(const std::vector<double>& items, double m) {
  if (items.empty()) return 1.0;
  if (items.size() % 2) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 1; j < items.size(); ++j) {
    std::vector<double> rest;
    for (std::size_t i = 1; i < items.size(); ++i)
      if (i != j) rest.push_back(items[i]);
    acc += C(m, items[0], items[j]) * brute_isserlis(rest, m);
  }
  return acc;
}

// One superfield factor Phi(t, theta_p, thetabar_p); p < 0 is a plain phi(t).
struct Item {
  double t;
  int p;
};

GrassmannElement theta(int p) {
  return p < 0 ? GrassmannElement() : GrassmannElement::generator(theta_of_pair(p));
}
GrassmannElement thetabar(int p) {
  return p < 0 ? GrassmannElement() : GrassmannElement::generator(thetabar_of_pair(p));
}

// <Phi_a Phi_b> = C + G(ta - tb)(theta_b - theta_a) thetabar_b - G(tb - ta)(theta_b - theta_a) thetabar_a
GrassmannElement pair_cov(double m, const Item& a, const Item& b) {
  const auto d = theta(b.p) - theta(a.p);
  return GrassmannElement(C(m, a.t, b.t)) + (d * thetabar(b.p)) * G(m, a.t - b.t) -
         (d * thetabar(a.p)) * G(m, b.t - a.t);
}

GrassmannElement super_hafnian(const std::vector<Item>& items, double m) {
  if (items.empty()) return GrassmannElement(1.0);
  if (items.size() % 2) return {};
  GrassmannElement acc;
  for (std::size_t j = 1; j < items.size(); ++j) {
    std::vector<Item> rest;
    for (std::size_t i = 1; i < items.size(); ++i)
      if (i != j) rest.push_back(items[i]);
    acc += pair_cov(m, items[0], items[j]) * super_hafnian(rest, m);
  }
  return acc;
}

// Expands every P_i(Phi_i)^n_i into monomials and sums super-Hafnians.
GrassmannElement hafnian_expectation(double m, const std::vector<SuperInsertion>& ins,
                                     const std::vector<PrefactorFactor>& pre) {
  std::vector<Item> base;
  for (const auto& f : pre)
    for (int k = 0; k < f.exponent; ++k) base.push_back({f.time, -1});
  GrassmannElement total;
  std::function<void(std::size_t, double, std::vector<Item>)> rec = [&](std::size_t i, double coef,
                                                                         std::vector<Item> items) {
    if (i == ins.size()) {
      total += super_hafnian(items, m) * coef;
      return;
    }
    const auto P = ins[i].poly.empty() ? std::vector<double>{0.0, 1.0} : ins[i].poly;
    const auto q = poly::power(P, ins[i].power);
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (q[k] == 0.0) continue;
      auto next = items;
      for (std::size_t c = 0; c < k; ++c) next.push_back({ins[i].time, ins[i].pair_index});
      rec(i + 1, coef * q[k], next);
    }
  };
  rec(0, 1.0, base);
  return total;
}

double leibniz_det(const std::vector<std::vector<double>>& A) {
  const std::size_t n = A.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double det = 0.0;
  do {
    int inv = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) inv += perm[i] > perm[j];
    double p = inv % 2 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= A[i][perm[i]];
    det += p;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return det;
}

}  // namespace

TEST_CASE("kernel and covariances") {
  const CovarianceSpec one(1.0);
  CHECK(kernel_G(one, 1.0) == doctest::Approx(0.36787944117144233));
  CHECK(kernel_G(one, -1.0) == 0.0);
  CHECK(kernel_G(one, 0.0) == 0.5);
  CHECK(phi_cov(one, 0.3, 0.3) == 0.5);
  CHECK(phi_cov(one, 0.0, 1.0) == doctest::Approx(0.18393972058572117));
  CHECK(phi_cov(CovarianceSpec(2.0), 1.0, 1.0) == 0.125);
  CHECK_THROWS_AS(CovarianceSpec(0.0), std::invalid_argument);

  CHECK(field_cov(one, {FieldKind::psibar, 0.0}, {FieldKind::psi, 0.0}) == 0.5);
  CHECK(field_cov(one, {FieldKind::psi, 0.0}, {FieldKind::psibar, 0.0}) == -0.5);
  CHECK(field_cov(one, {FieldKind::phi, 0.0}, {FieldKind::omega, 0.0}) == 0.5);
  CHECK(field_cov(one, {FieldKind::omega, 0.0}, {FieldKind::omega, 1.0}) == 0.0);
  CHECK(field_cov(one, {FieldKind::psi, 0.0}, {FieldKind::phi, 0.0}) == 0.0);
}

TEST_CASE("super covariance") {
  const CovarianceSpec one(1.0);
  const auto sc = super_cov(one, 1.0, 0.0);
  const GeneratorId th{0}, thb{1}, thp{2}, thbp{3};
  CHECK(sc.scalar_part() == doctest::Approx(std::exp(-1.0) / 2));
  // e^{-1} (theta' - theta) thetabar' and nothing along thetabar.
  CHECK(sc.coefficient({thp, thbp}) == doctest::Approx(std::exp(-1.0)));
  CHECK(sc.coefficient({th, thbp}) == doctest::Approx(-std::exp(-1.0)));
  CHECK(sc.coefficient({th, thb}) == 0.0);
  CHECK(sc.coefficient({thb, thp}) == 0.0);

  const auto eq = super_cov(one, 0.2, 0.2);
  CHECK(eq.scalar_part() == 0.5);
  CHECK(eq.coefficient({thp, thbp}) == 0.5);
  CHECK(eq.coefficient({th, thb}) == 0.5);

  for (double t : {-0.5, 0.0, 0.8})
    for (double s : {-1.0, 0.0, 0.8}) {
      Item a{t, 0}, b{s, 1};
      CHECK((super_cov(one, t, s) - pair_cov(1.0, a, b)).max_abs() < 1e-15);
    }
}

TEST_CASE("gaussian moments") {
  const CovarianceSpec one(1.0);
  auto mom = [&](std::vector<double> t, std::vector<int> e) { return gaussian_moment(one, t, e); };
  CHECK(mom({0.0}, {2}) == 0.5);
  CHECK(mom({0.0}, {4}) == doctest::Approx(0.75));
  CHECK(mom({0.0, 1.0}, {1, 1}) == doctest::Approx(std::exp(-1.0) / 2));
  CHECK(mom({0.0, 1.0}, {1, 2}) == 0.0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::uniform_int_distribution<int> E(0, 3);
  for (int trial = 0; trial < 40; ++trial) {
    const double m = 0.5 + trial % 3 * 0.5;
    std::vector<double> ts{U(rng), U(rng), U(rng)};
    std::vector<int> es{E(rng), E(rng), E(rng)};
    std::vector<double> items;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < es[i]; ++k) items.push_back(ts[i]);
    CHECK(gaussian_moment(CovarianceSpec(m), ts, es) ==
          doctest::Approx(brute_isserlis(items, m)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(mom({0.0}, {22}), std::invalid_argument);
}

TEST_CASE("fermionic determinant") {
  const CovarianceSpec one(1.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  CHECK(fermionic_det(one, std::vector<double>{0.4}) == 0.5);
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> t(n);
      for (auto& x : t) x = U(rng);
      std::vector<std::vector<double>> A(n, std::vector<double>(n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A[i][j] = i == j ? 0.5 : G(1.0, t[j] - t[i]);
      const double d = fermionic_det(one, t);
      CHECK(d == doctest::Approx(leibniz_det(A)).epsilon(1e-12));
      CHECK(std::abs(d - std::ldexp(1.0, -n)) < 1e-12);
    }
  }
}

TEST_CASE("super-Wick expectations") {
  const CovarianceSpec one(1.0);
  const std::vector<SuperInsertion> single{{0.3, 0, 1, {}}};
  CHECK(wick_super_expectation(one, single, {}).is_zero());

  const std::vector<SuperInsertion> square{{0.3, 0, 2, {}}};
  CHECK(wick_super_expectation(one, square, {}) == GrassmannElement(0.5));

  const std::vector<PrefactorFactor> pre{{0.0, 1}};
  const std::vector<SuperInsertion> at{{-0.4, 0, 1, {}}};
  const auto v = wick_super_expectation(one, at, pre);
  const auto ref = restrict_zero(super_cov(one, 0.0, -0.4), 0b11);
  CHECK(v.scalar_part() == doctest::Approx(ref.scalar_part()));
  CHECK(v.coefficient(0b11) == doctest::Approx(ref.coefficient(0b1100)));
}

TEST_CASE("super-Wick against the super-Hafnian") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const std::vector<std::vector<double>> polys{{}, {0.0, 1.0, 1.0}, {0.0, -1.0, 0.0, 1.0}, {0.5, 0.0, 2.0}};
  for (int trial = 0; trial < 30; ++trial) {
    const double m = trial % 2 ? 1.0 : 0.7;
    const int n_ins = 1 + trial % 3;
    std::vector<SuperInsertion> ins;
    for (int i = 0; i < n_ins; ++i) {
      // Some coincident times to exercise the equal-time conventions.
      const double t = (trial + i) % 4 == 0 ? 0.0 : U(rng);
      ins.push_back({t, (i * 2 + trial) % 5, n_ins == 1 ? 1 + trial % 2 : 1, polys[(trial + i) % polys.size()]});
    }
    std::vector<PrefactorFactor> pre;
    if (trial % 3 != 0) pre.push_back({0.0, 1 + trial % 2});
    const auto got = wick_super_expectation(CovarianceSpec(m), ins, pre);
    const auto want = hafnian_expectation(m, ins, pre);
    CHECK((got - want).max_abs() <= 1e-12 * std::max(1.0, want.max_abs()));
  }
}

TEST_CASE("wick expansion rejects duplicate pairs") {
  const std::vector<SuperInsertion> dup{{0.0, 1, 1, {}}, {0.5, 1, 1, {}}};
  CHECK_THROWS_AS(WickExpansion(dup, {}), std::invalid_argument);
}

TEST_CASE("localization examples") {
  const CovarianceSpec one(1.0);
  const auto g = fns::bump(1.5);
  LocalizationProblem p{{}, g, {0.0, 0.0, 1.0}, 1, {}};
  CHECK(localization_rhs(one, p) == doctest::Approx(-1.0));
  CHECK(std::abs(localization_lhs(one, p, 1e-9).value + 1.0) < 1e-7);

  LocalizationProblem odd{{}, g, {0.0, 1.0}, 1, {}};
  CHECK(std::abs(localization_lhs(one, odd, 1e-9).value) < 1e-9);
  CHECK(localization_rhs(one, odd) == 0.0);

  LocalizationProblem k1{{{0.0, 2}}, g, {0.0, 0.0, 1.0}, 2, {}};
  const double expect = 4.0 / 2.0 * gaussian_moment(one, std::vector<double>{0.0}, std::vector<int>{6});
  CHECK(localization_rhs(one, k1) == doctest::Approx(expect));
  CHECK(std::abs(localization_lhs(one, k1, 1e-9).value - expect) < 1e-6);

  LocalizationProblem none{{{0.2, 2}}, g, {0.0, 1.0}, 0, {}};
  CHECK(localization_lhs(one, none, 1e-9).value == doctest::Approx(0.5));
  CHECK(localization_rhs(one, none) == doctest::Approx(0.5));
}

TEST_CASE("localization is invariant under pair relabelling") {
  const CovarianceSpec one(1.0);
  const auto g = fns::bump(1.2);
  LocalizationProblem a{{{0.1, 1}, {-0.3, 1}}, g, {0.0, 1.0, 1.0}, 2, {}};
  LocalizationProblem b = a;
  b.pair_indices = {4, 2};
  const double va = localization_lhs(one, a, 1e-9).value;
  CHECK(std::abs(va - localization_lhs(one, b, 1e-9).value) < 1e-9);
  CHECK(std::abs(va - localization_rhs(one, a)) < 1e-6);
}

TEST_CASE("localization rejects bad input") {
  const CovarianceSpec one(1.0);
  LocalizationProblem unordered{{{0.0, 1}, {0.5, 1}}, fns::bump(1.0), {0.0, 1.0}, 1, {}};
  CHECK_THROWS_AS(localization_lhs(one, unordered, 1e-8), std::invalid_argument);
  LocalizationProblem unbounded{{}, fns::exp_quadratic(-1.0, 0.0), {0.0, 1.0}, 1, {}};
  CHECK_THROWS_AS(localization_lhs(one, unbounded, 1e-8), std::invalid_argument);
}
