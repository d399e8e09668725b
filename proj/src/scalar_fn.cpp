#include "susy/scalar_fn.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace susy {

ScalarFn::ScalarFn(Jet jet, int max_order, std::optional<Support> support)
    : jet_(std::move(jet)), max_order_(max_order), support_(support) {
  if (!jet_) throw std::invalid_argument("ScalarFn: empty jet");
  if (max_order_ < 0) throw std::invalid_argument("ScalarFn: negative max_order");
}

double ScalarFn::derivative(double t, int order) const {
  if (order < 0 || order > max_order_) {
    throw std::out_of_range("ScalarFn: derivative order " + std::to_string(order) +
                            " exceeds available order " + std::to_string(max_order_));
  }
  return jet_(order, t);
}

ScalarFn ScalarFn::scaled(double c) const {
  auto j = jet_;
  return ScalarFn([j, c](int k, double t) { return c * j(k, t); }, max_order_, support_);
}

ScalarFn ScalarFn::derivative_fn() const {
  if (max_order_ < 1) throw std::out_of_range("ScalarFn: no derivative available");
  auto j = jet_;
  return ScalarFn([j](int k, double t) { return j(k + 1, t); }, max_order_ - 1, support_);
}

namespace poly {

double eval(std::span<const double> c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> derivative(std::span<const double> c) {
  if (c.size() <= 1) return {};
  std::vector<double> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

std::vector<double> multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

std::vector<double> power(std::span<const double> c, int n) {
  std::vector<double> r{1.0};
  for (int i = 0; i < n; ++i) r = multiply(r, c);
  return r;
}

}  // namespace poly

namespace fns {

namespace {

constexpr int kTabulatedOrder = 16;

using PolyTable = std::vector<std::vector<double>>;

std::vector<double> add(std::span<const double> a, std::span<const double> b) {
  std::vector<double> r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

}  // namespace

ScalarFn constant(double c) {
  return ScalarFn([c](int k, double) { return k == 0 ? c : 0.0; }, kUnboundedOrder);
}

ScalarFn identity() {
  return ScalarFn([](int k, double t) { return k == 0 ? t : (k == 1 ? 1.0 : 0.0); },
                  kUnboundedOrder);
}

ScalarFn polynomial(std::vector<double> coeffs) {
  auto table = std::make_shared<PolyTable>();
  table->push_back(std::move(coeffs));
  while (!table->back().empty()) table->push_back(poly::derivative(table->back()));
  return ScalarFn(
      [table](int k, double t) {
        if (k >= static_cast<int>(table->size())) return 0.0;
        return poly::eval((*table)[k], t);
      },
      kUnboundedOrder);
}

ScalarFn exp_quadratic(double a, double b, double c) {
  // d^n/dt^n exp(q) = exp(q) P_n(t),  P_{n+1} = P_n' + q' P_n.
  auto table = std::make_shared<PolyTable>();
  table->push_back({1.0});
  const std::vector<double> dq{b, 2.0 * a};
  for (int n = 0; n < kTabulatedOrder; ++n) {
    const auto& p = table->back();
    table->push_back(add(poly::derivative(p), poly::multiply(dq, p)));
  }
  return ScalarFn(
      [table, a, b, c](int k, double t) {
        return std::exp(a * t * t + b * t + c) * poly::eval((*table)[k], t);
      },
      kTabulatedOrder);
}

ScalarFn cosine(double amplitude, double phase) {
  return ScalarFn(
      [amplitude, phase](int k, double t) {
        return amplitude * std::cos(t + phase + 0.5 * M_PI * static_cast<double>(k));
      },
      kUnboundedOrder);
}

ScalarFn tanh_polynomial(std::vector<double> coeffs) {
  // d/dt p(u) = p'(u) (1 - u^2) with u = tanh t.
  auto table = std::make_shared<PolyTable>();
  table->push_back(std::move(coeffs));
  const std::vector<double> sech2{1.0, 0.0, -1.0};
  for (int n = 0; n < kTabulatedOrder; ++n) {
    table->push_back(poly::multiply(poly::derivative(table->back()), sech2));
  }
  return ScalarFn([table](int k, double t) { return poly::eval((*table)[k], std::tanh(t)); },
                  kTabulatedOrder);
}

ScalarFn bump(double half_width) {
  if (!(half_width > 0.0)) throw std::invalid_argument("bump: half width must be positive");
  const double T = half_width;
  return ScalarFn(
      [T](int k, double t) {
        const double u = t / T;
        const double s = 1.0 - u * u;
        if (s <= 0.0) return 0.0;
        const double inv = 1.0 / s;
        if (inv > 700.0) return 0.0;
        const double f = std::exp(1.0 - inv);
        const double g1 = -2.0 * u * inv * inv;
        const double g2 = -2.0 * inv * inv - 8.0 * u * u * inv * inv * inv;
        const double g3 = -24.0 * u * inv * inv * inv - 48.0 * u * u * u * inv * inv * inv * inv;
        switch (k) {
          case 0: return f;
          case 1: return f * g1 / T;
          case 2: return f * (g1 * g1 + g2) / (T * T);
          case 3: return f * (g1 * g1 * g1 + 3.0 * g1 * g2 + g3) / (T * T * T);
          default: throw std::out_of_range("bump: derivative order > 3");
        }
      },
      3, Support{-T, T});
}

ScalarFn product(const ScalarFn& a, const ScalarFn& b) {
  const int order = std::min(a.max_order(), b.max_order());
  std::optional<Support> sup;
  if (a.support() && b.support()) {
    sup = Support{std::max(a.support()->lo, b.support()->lo),
                  std::min(a.support()->hi, b.support()->hi)};
  } else if (a.support()) {
    sup = a.support();
  } else if (b.support()) {
    sup = b.support();
  }
  return ScalarFn(
      [a, b](int k, double t) {
        double acc = 0.0;
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
          acc += binom * a.derivative(t, j) * b.derivative(t, k - j);
          binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
        }
        return acc;
      },
      order, sup);
}

ScalarFn sum(const ScalarFn& a, const ScalarFn& b) {
  std::optional<Support> sup;
  if (a.support() && b.support()) {
    sup = Support{std::min(a.support()->lo, b.support()->lo),
                  std::max(a.support()->hi, b.support()->hi)};
  }
  return ScalarFn([a, b](int k, double t) { return a.derivative(t, k) + b.derivative(t, k); },
                  std::min(a.max_order(), b.max_order()), sup);
}

}  // namespace fns

}  // namespace susy
