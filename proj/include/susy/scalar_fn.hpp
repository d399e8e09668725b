#pragma once

// Real functions of one variable carrying analytic derivatives.

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace susy {

/// Closed interval outside of which a function and all its derivatives vanish.
struct Support {
  double lo;
  double hi;
};

class ScalarFn {
 public:
  /// jet(order, t) returns the order-th derivative at t.
  using Jet = std::function<double(int, double)>;

  ScalarFn(Jet jet, int max_order, std::optional<Support> support = std::nullopt);

  double operator()(double t) const { return jet_(0, t); }
  /// Throws std::out_of_range if order exceeds max_order().
  double derivative(double t, int order = 1) const;
  int max_order() const { return max_order_; }
  const std::optional<Support>& support() const { return support_; }

  /// f(t) = c * g(t), same support as g.
  ScalarFn scaled(double c) const;
  /// t -> f'(t).
  ScalarFn derivative_fn() const;

 private:
  Jet jet_;
  int max_order_;
  std::optional<Support> support_;
};

inline constexpr int kUnboundedOrder = 64;

namespace fns {

ScalarFn constant(double c);
ScalarFn identity();
/// sum_k coeffs[k] t^k.
ScalarFn polynomial(std::vector<double> coeffs);
/// exp(a t^2 + b t + c); covers exp(t) and Gaussian bumps.
ScalarFn exp_quadratic(double a, double b, double c = 0.0);
/// amplitude * cos(t + phase).
ScalarFn cosine(double amplitude = 1.0, double phase = 0.0);
/// p(tanh t) with p given by dense coefficients.
ScalarFn tanh_polynomial(std::vector<double> coeffs);
/// exp(1 - 1/(1 - (t/T)^2)) on |t| < T, 0 outside; value 1 at 0. Order <= 3.
ScalarFn bump(double half_width);
/// Leibniz product; order is the minimum of both, support the intersection.
ScalarFn product(const ScalarFn& a, const ScalarFn& b);
ScalarFn sum(const ScalarFn& a, const ScalarFn& b);

}  // namespace fns

/// Polynomial helpers on dense coefficient vectors (ascending powers).
namespace poly {

double eval(std::span<const double> c, double x);
std::vector<double> derivative(std::span<const double> c);
std::vector<double> multiply(std::span<const double> a, std::span<const double> b);
std::vector<double> power(std::span<const double> c, int n);

}  // namespace poly

}  // namespace susy
