#pragma once

// Superfunctions F(t, theta, thetabar[, rho]): Grassmann-valued functions of
// one real variable. Internally a superfunction is a jet map
// (order, t) -> GrassmannElement holding the order-th t-derivative of every
// component at once, so the supersymmetry generators and composition can be
// expressed directly through the Grassmann engine.

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>

#include "susy/grassmann.hpp"
#include "susy/scalar_fn.hpp"

namespace susy {

inline constexpr GeneratorId kTheta{0};
inline constexpr GeneratorId kThetaBar{1};
inline constexpr GeneratorId kRho{2};

class SupersymmetryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SuperFunction {
 public:
  using JetFn = std::function<GrassmannElement(int, double)>;

  SuperFunction(unsigned odd_count, int max_order, JetFn jet,
                std::optional<Support> support = std::nullopt);

  /// F = F_0 + F_theta theta + F_thetabar thetabar + F_thetathetabar theta thetabar.
  static SuperFunction from_components(ScalarFn empty, ScalarFn theta, ScalarFn thetabar,
                                       ScalarFn thetathetabar);
  /// t-independent element, e.g. F = theta.
  static SuperFunction constant(GrassmannElement value, unsigned odd_count = 2);

  GrassmannElement operator()(double t) const { return jet_(0, t); }
  /// order-th t-derivative of every component at t.
  GrassmannElement jet(int order, double t) const;

  unsigned odd_count() const { return odd_count_; }
  int max_order() const { return max_order_; }
  const std::optional<Support>& support() const { return support_; }

  ScalarFn component(GrassmannElement::Mask mask) const;
  ScalarFn empty() const { return component(0); }
  ScalarFn theta() const { return component(mask_of(kTheta)); }
  ScalarFn thetabar() const { return component(mask_of(kThetaBar)); }
  ScalarFn thetathetabar() const { return component(mask_of(kTheta) | mask_of(kThetaBar)); }

 private:
  unsigned odd_count_;
  int max_order_;
  JetFn jet_;
  std::optional<Support> support_;
};

/// f(t + 2 theta thetabar) = f(t) + 2 f'(t) theta thetabar.
SuperFunction lift_supersymmetric(const ScalarFn& f);

/// H o F by the nilpotent Taylor expansion around F_0. H needs derivatives
/// up to odd_count() + (requested jet order).
SuperFunction compose(const ScalarFn& H, const SuperFunction& F);

/// Pointwise product F * G.
SuperFunction multiply(const SuperFunction& F, const SuperFunction& G);

/// Q = 2 theta d/dt + d/dthetabar (graded left derivative).
SuperFunction apply_Q(const SuperFunction& F);
/// Qbar = 2 thetabar d/dt - d/dtheta.
SuperFunction apply_Qbar(const SuperFunction& F);

/// max over grid of |F_theta|, |F_thetabar|, |F_thetathetabar - 2 F_0'|.
double supersymmetry_defect(const SuperFunction& F, std::span<const double> grid);
bool is_supersymmetric(const SuperFunction& F, std::span<const double> grid, double tol);

/// tau(b, bbar) F = exp(rho (b Qbar + bbar Q)) F over (theta, thetabar, rho).
/// The odd parameter rho sits to the left of the generator, which keeps the
/// transformation even; the series stops once rho^2 = 0 kills a term.
SuperFunction tau_transform(const SuperFunction& F, double b, double bbar);

struct ReductionResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double quad_error = 0.0;
  double lower_limit = 0.0;
};

/// lhs = int_{-inf}^K Berezin[T F] dt with d theta innermost; rhs = -2 T_0(K) F_0(K).
/// Throws SupersymmetryError if T or F fails the supersymmetry check on the
/// truncated domain and QuadratureError if the integral does not converge.
ReductionResult reduce_integral(const SuperFunction& T, const SuperFunction& F, double K,
                                double tol);

}  // namespace susy
