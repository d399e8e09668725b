#include "susy/superfunction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "susy/quadrature.hpp"

namespace susy {

namespace {

using Mask = GrassmannElement::Mask;
using Series = std::vector<GrassmannElement>;  // coefficients of eps^j, eps^(k+1) = 0

Series series_mul(const Series& a, const Series& b) {
  Series r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (std::size_t j = 0; i + j < r.size(); ++j) {
      if (!b[j].is_zero()) r[i + j] += a[i] * b[j];
    }
  }
  return r;
}

bool series_zero(const Series& s) {
  return std::all_of(s.begin(), s.end(), [](const GrassmannElement& e) { return e.is_zero(); });
}

std::optional<Support> support_union(const std::optional<Support>& a,
                                     const std::optional<Support>& b) {
  if (!a || !b) return std::nullopt;
  return Support{std::min(a->lo, b->lo), std::max(a->hi, b->hi)};
}

std::optional<Support> support_intersection(const std::optional<Support>& a,
                                            const std::optional<Support>& b) {
  if (!a) return b;
  if (!b) return a;
  return Support{std::max(a->lo, b->lo), std::min(a->hi, b->hi)};
}

void require_two_generators(const SuperFunction& F, const char* what) {
  if (F.odd_count() != 2) {
    throw std::invalid_argument(std::string(what) + ": expected a superfunction of (theta, thetabar)");
  }
}

}  // namespace

SuperFunction::SuperFunction(unsigned odd_count, int max_order, JetFn jet,
                             std::optional<Support> support)
    : odd_count_(odd_count), max_order_(max_order), jet_(std::move(jet)), support_(support) {
  if (odd_count_ > 3) throw std::invalid_argument("SuperFunction: at most three odd generators");
  if (!jet_) throw std::invalid_argument("SuperFunction: empty jet");
}

GrassmannElement SuperFunction::jet(int order, double t) const {
  if (order < 0 || order > max_order_) {
    throw std::out_of_range("SuperFunction: derivative order " + std::to_string(order) +
                            " not available");
  }
  return jet_(order, t);
}

SuperFunction SuperFunction::from_components(ScalarFn empty, ScalarFn theta, ScalarFn thetabar,
                                             ScalarFn thetathetabar) {
  const int order = std::min({empty.max_order(), theta.max_order(), thetabar.max_order(),
                              thetathetabar.max_order()});
  const auto sup = support_union(support_union(empty.support(), theta.support()),
                                 support_union(thetabar.support(), thetathetabar.support()));
  const Mask mt = mask_of(kTheta);
  const Mask mb = mask_of(kThetaBar);
  return SuperFunction(
      2, order,
      [=](int k, double t) {
        GrassmannElement e(empty.derivative(t, k));
        e += GrassmannElement::from_mask(mt, theta.derivative(t, k));
        e += GrassmannElement::from_mask(mb, thetabar.derivative(t, k));
        e += GrassmannElement::from_mask(mt | mb, thetathetabar.derivative(t, k));
        return e;
      },
      sup);
}

SuperFunction SuperFunction::constant(GrassmannElement value, unsigned odd_count) {
  if (value.span_width() > odd_count) {
    throw std::invalid_argument("SuperFunction::constant: element uses too many generators");
  }
  return SuperFunction(odd_count, kUnboundedOrder,
                       [value](int k, double) { return k == 0 ? value : GrassmannElement{}; });
}

ScalarFn SuperFunction::component(Mask mask) const {
  auto j = jet_;
  return ScalarFn([j, mask](int k, double t) { return j(k, t).coefficient(mask); }, max_order_,
                  support_);
}

SuperFunction lift_supersymmetric(const ScalarFn& f) {
  if (f.max_order() < 1) {
    throw std::invalid_argument("lift_supersymmetric: function needs a first derivative");
  }
  const Mask tt = mask_of(kTheta) | mask_of(kThetaBar);
  return SuperFunction(
      2, f.max_order() - 1,
      [f, tt](int k, double t) {
        GrassmannElement e(f.derivative(t, k));
        e += GrassmannElement::from_mask(tt, 2.0 * f.derivative(t, k + 1));
        return e;
      },
      f.support());
}

SuperFunction compose(const ScalarFn& H, const SuperFunction& F) {
  const int odd = static_cast<int>(F.odd_count());
  const int order = std::min(F.max_order(), H.max_order() - odd);
  if (order < 0) {
    throw std::invalid_argument("compose: outer function needs derivatives up to order " +
                                std::to_string(odd));
  }
  return SuperFunction(odd, order, [H, F, odd](int k, double t) {
    // F(t + eps) as a truncated series in eps with Grassmann coefficients.
    Series shift(static_cast<std::size_t>(k) + 1);
    double factorial = 1.0;
    for (int j = 0; j <= k; ++j) {
      if (j > 0) factorial *= j;
      shift[j] = F.jet(j, t) * (1.0 / factorial);
    }
    const double base = shift[0].scalar_part();
    shift[0] -= GrassmannElement(base);

    Series acc(shift.size());
    Series power(shift.size());
    power[0] = GrassmannElement(1.0);
    double n_factorial = 1.0;
    for (int n = 0; n <= k + odd; ++n) {
      if (n > 0) {
        power = series_mul(power, shift);
        n_factorial *= n;
        if (series_zero(power)) break;
      }
      const double c = H.derivative(base, n) / n_factorial;
      for (std::size_t j = 0; j < acc.size(); ++j) {
        if (!power[j].is_zero()) acc[j] += power[j] * c;
      }
    }
    return acc[k] * factorial;
  }, F.support());
}

SuperFunction multiply(const SuperFunction& F, const SuperFunction& G) {
  return SuperFunction(
      std::max(F.odd_count(), G.odd_count()), std::min(F.max_order(), G.max_order()),
      [F, G](int k, double t) {
        GrassmannElement acc;
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
          acc += (F.jet(j, t) * G.jet(k - j, t)) * binom;
          binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
        }
        return acc;
      },
      support_intersection(F.support(), G.support()));
}

SuperFunction apply_Q(const SuperFunction& F) {
  const GrassmannElement two_theta = GrassmannElement::generator(kTheta, 2.0);
  return SuperFunction(
      F.odd_count(), F.max_order() - 1,
      [F, two_theta](int k, double t) {
        return two_theta * F.jet(k + 1, t) + left_derivative(F.jet(k, t), kThetaBar);
      },
      F.support());
}

SuperFunction apply_Qbar(const SuperFunction& F) {
  const GrassmannElement two_thetabar = GrassmannElement::generator(kThetaBar, 2.0);
  return SuperFunction(
      F.odd_count(), F.max_order() - 1,
      [F, two_thetabar](int k, double t) {
        return two_thetabar * F.jet(k + 1, t) - left_derivative(F.jet(k, t), kTheta);
      },
      F.support());
}

double supersymmetry_defect(const SuperFunction& F, std::span<const double> grid) {
  require_two_generators(F, "supersymmetry_defect");
  const Mask mt = mask_of(kTheta);
  const Mask mb = mask_of(kThetaBar);
  double worst = 0.0;
  for (double t : grid) {
    const GrassmannElement v = F.jet(0, t);
    const double d0 = F.jet(1, t).scalar_part();
    worst = std::max({worst, std::abs(v.coefficient(mt)), std::abs(v.coefficient(mb)),
                      std::abs(v.coefficient(mt | mb) - 2.0 * d0)});
  }
  return worst;
}

bool is_supersymmetric(const SuperFunction& F, std::span<const double> grid, double tol) {
  return supersymmetry_defect(F, grid) <= tol;
}

SuperFunction tau_transform(const SuperFunction& F, double b, double bbar) {
  // rho appears at most once in any nonzero term.
  constexpr int kRhoNilpotency = 1;
  SuperFunction lifted(3, F.max_order(), [F](int k, double t) { return F.jet(k, t); },
                       F.support());
  const GrassmannElement rho = GrassmannElement::generator(kRho);
  std::vector<SuperFunction> terms{lifted};
  for (int j = 1; j <= kRhoNilpotency; ++j) {
    const SuperFunction& prev = terms.back();
    const SuperFunction qb = apply_Qbar(prev);
    const SuperFunction q = apply_Q(prev);
    const double inv_j = 1.0 / j;
    terms.emplace_back(
        3, prev.max_order() - 1,
        [rho, qb, q, b, bbar, inv_j](int k, double t) {
          return rho * (qb.jet(k, t) * b + q.jet(k, t) * bbar) * inv_j;
        },
        prev.support());
  }
  int order = terms.back().max_order();
  return SuperFunction(
      3, order,
      [terms](int k, double t) {
        GrassmannElement acc;
        for (const auto& term : terms) acc += term.jet(k, t);
        return acc;
      },
      F.support());
}

ReductionResult reduce_integral(const SuperFunction& T, const SuperFunction& F, double K,
                                double tol) {
  require_two_generators(T, "reduce_integral");
  require_two_generators(F, "reduce_integral");
  constexpr double kNegligible = 1e-16;
  const std::array<GeneratorId, 2> order{kTheta, kThetaBar};

  auto integrand = [&](double t) {
    return berezin(T(t) * F(t), std::span<const GeneratorId>(order)).scalar_part();
  };

  ReductionResult result;
  result.rhs = -2.0 * T(K).scalar_part() * F(K).scalar_part();

  double lower;
  std::optional<double> support_lo;
  if (T.support()) support_lo = T.support()->lo;
  if (F.support()) support_lo = std::max(support_lo.value_or(-HUGE_VAL), F.support()->lo);
  if (support_lo) {
    lower = *support_lo;
  } else {
    double d = 1.0;
    while (std::abs(integrand(K - d)) >= kNegligible || std::abs(integrand(K - 2.0 * d)) >= kNegligible) {
      d *= 2.0;
      if (d > 1e12) throw QuadratureError("reduce_integral: integrand does not decay", HUGE_VAL);
    }
    lower = K - 2.0 * d;
  }
  result.lower_limit = lower;
  if (lower >= K) return result;

  constexpr int kCheckPoints = 65;
  std::vector<double> grid(kCheckPoints);
  for (int i = 0; i < kCheckPoints; ++i) {
    grid[i] = lower + (K - lower) * static_cast<double>(i) / (kCheckPoints - 1);
  }
  for (const SuperFunction* s : {&T, &F}) {
    double scale = 1.0;
    for (double t : grid) scale = std::max(scale, (*s)(t).max_abs());
    const double defect = supersymmetry_defect(*s, grid);
    if (defect > 1e-8 * scale) {
      throw SupersymmetryError("reduce_integral: argument is not supersymmetric on (-inf, K], defect " +
                               std::to_string(defect));
    }
  }

  const auto q = adaptive_simpson(integrand, lower, K, tol, 32);
  result.lhs = q.value;
  result.quad_error = q.error;
  return result;
}

}  // namespace susy
