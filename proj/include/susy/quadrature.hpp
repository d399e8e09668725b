#pragma once

// One-dimensional adaptive quadrature with absolute error control.

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace susy {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // accumulated error estimate
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}
  double achieved_error() const { return achieved_error_; }

 private:
  double achieved_error_;
};

using Integrand = std::function<double(double)>;

/// Adaptive Simpson with Richardson correction on [a, b]. The interval is
/// first split into `initial_panels` equal panels; each panel receives a
/// share of abs_tol proportional to its length. Throws QuadratureError if
/// any panel exhausts max_depth without meeting its share.
QuadratureResult adaptive_simpson(const Integrand& f, double a, double b, double abs_tol,
                                  int initial_panels = 16, int max_depth = 48);

/// Adaptive 7/15-point Gauss-Kronrod bisection with absolute tolerance.
/// Breakpoints inside (a, b) split the domain before adaptation.
QuadratureResult gauss_kronrod(const Integrand& f, double a, double b, double abs_tol,
                               std::span<const double> breakpoints = {}, int max_depth = 30);

}  // namespace susy
