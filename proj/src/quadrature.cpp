#include "susy/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace susy {

namespace {

struct SimpsonPanel {
  double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

QuadratureResult simpson_recurse(const Integrand& f, const SimpsonPanel& p, double tol, int depth) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m);
  const double rm = 0.5 * (m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(p.a, m, p.fa, flm, p.fm);
  const double right = simpson(m, p.b, p.fm, frm, p.fb);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * tol) {
    return {left + right + delta / 15.0, std::abs(delta) / 15.0};
  }
  if (depth <= 0) {
    throw QuadratureError("adaptive_simpson: maximum depth reached on [" + std::to_string(p.a) +
                              ", " + std::to_string(p.b) + "]",
                          std::abs(delta) / 15.0);
  }
  const auto l = simpson_recurse(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1);
  const auto r = simpson_recurse(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
  return {l.value + r.value, l.error + r.error};
}

using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;

QuadratureResult gk_recurse(const Integrand& f, double a, double b, double tol, int depth) {
  double err = 0.0;
  const double v = Rule::integrate(f, a, b, 0, 0.0, &err);
  if (err <= tol) return {v, err};
  if (depth <= 0) {
    throw QuadratureError("gauss_kronrod: maximum depth reached on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]",
                          err);
  }
  const double m = 0.5 * (a + b);
  const auto l = gk_recurse(f, a, m, 0.5 * tol, depth - 1);
  const auto r = gk_recurse(f, m, b, 0.5 * tol, depth - 1);
  return {l.value + r.value, l.error + r.error};
}

}  // namespace

QuadratureResult adaptive_simpson(const Integrand& f, double a, double b, double abs_tol,
                                  int initial_panels, int max_depth) {
  if (a == b) return {};
  if (initial_panels < 1) initial_panels = 1;
  QuadratureResult total;
  const double width = (b - a) / initial_panels;
  double fa = f(a);
  for (int i = 0; i < initial_panels; ++i) {
    const double pa = a + i * width;
    const double pb = (i + 1 == initial_panels) ? b : a + (i + 1) * width;
    const double pm = 0.5 * (pa + pb);
    const double fm = f(pm);
    const double fb = f(pb);
    const SimpsonPanel panel{pa, pb, fa, fm, fb, simpson(pa, pb, fa, fm, fb)};
    const auto r = simpson_recurse(f, panel, abs_tol / initial_panels, max_depth);
    total.value += r.value;
    total.error += r.error;
    fa = fb;
  }
  return total;
}

QuadratureResult gauss_kronrod(const Integrand& f, double a, double b, double abs_tol,
                               std::span<const double> breakpoints, int max_depth) {
  if (a == b) return {};
  std::vector<double> cuts{a};
  for (double x : breakpoints) {
    if (x > a && x < b) cuts.push_back(x);
  }
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.push_back(b);
  QuadratureResult total;
  const double length = b - a;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double share = abs_tol * (cuts[i + 1] - cuts[i]) / length;
    const auto r = gk_recurse(f, cuts[i], cuts[i + 1], share, max_depth);
    total.value += r.value;
    total.error += r.error;
  }
  return total;
}

}  // namespace susy
