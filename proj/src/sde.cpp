#include "susy/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "susy/quadrature.hpp"
#include "susy/reduce.hpp"

namespace susy {

namespace {

// Relative density cut for Gibbs and Gaussian quadrature: ln(1e16).
constexpr double kLogDensityCut = 36.841361487904734;

struct Grid {
  double t0;
  double h;
  std::size_t steps;

  double time(std::size_t n) const { return t0 + static_cast<double>(n) * h; }
};

Grid make_grid(double t0, double t1, double h) {
  if (!(t1 > t0)) throw std::invalid_argument("path window must have t1 > t0");
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round((t1 - t0) / h)));
  return {t0, (t1 - t0) / static_cast<double>(steps), steps};
}

// Everything a path kernel needs that does not depend on the noise.
struct Model {
  double m2;
  ScalarFn V;
  Grid grid;
  std::vector<double> f, fp, f_mid;

  Model(const SimConfig& c, const Grid& g) : m2(c.m * c.m), V(c.V()), grid(g) {
    const ScalarFn fn = c.f();
    f.resize(g.steps + 1);
    fp.resize(g.steps + 1);
    f_mid.resize(g.steps);
    for (std::size_t n = 0; n <= g.steps; ++n) {
      f[n] = fn(g.time(n));
      fp[n] = fn.derivative(g.time(n), 1);
    }
    for (std::size_t n = 0; n < g.steps; ++n) f_mid[n] = fn(g.time(n) + 0.5 * g.h);
  }

  double decay() const { return std::exp(-m2 * grid.h); }
  double transition_sd() const {
    return std::sqrt(-std::expm1(-2.0 * m2 * grid.h) / (2.0 * m2));
  }
  double stationary_sd() const { return std::sqrt(1.0 / (2.0 * m2)); }
};

void simulate_ou(const Model& M, PathRng& rng, Path& p) {
  const std::size_t N = M.grid.steps;
  p.t0 = M.grid.t0;
  p.h = M.grid.h;
  p.phi.resize(N + 1);
  p.dB.resize(N);
  const double a = M.decay();
  const double sd = M.transition_sd();
  const double half_m2h = 0.5 * M.m2 * M.grid.h;
  p.phi[0] = M.stationary_sd() * rng.normal();
  for (std::size_t n = 0; n < N; ++n) {
    p.phi[n + 1] = a * p.phi[n] + sd * rng.normal();
    p.dB[n] = p.phi[n + 1] - p.phi[n] + half_m2h * (p.phi[n] + p.phi[n + 1]);
  }
}

void simulate_sde(const Model& M, PathRng& rng, Path& p) {
  const std::size_t N = M.grid.steps;
  const double h = M.grid.h;
  p.t0 = M.grid.t0;
  p.h = h;
  p.phi.resize(N + 1);
  p.dB.resize(N);
  const double a = M.decay();
  const double sd = M.transition_sd();
  const double half_m2h = 0.5 * M.m2 * h;
  p.phi[0] = M.stationary_sd() * rng.normal();
  for (std::size_t n = 0; n < N; ++n) {
    const double drift = M.f[n] == 0.0 ? 0.0 : M.f[n] * M.V.derivative(p.phi[n], 1);
    p.phi[n + 1] = a * (p.phi[n] - h * drift) + sd * rng.normal();
    p.dB[n] = p.phi[n + 1] - p.phi[n] + half_m2h * (p.phi[n] + p.phi[n + 1]) + h * drift;
  }
}

// Trapezoid sum of node values g(n).
template <class G>
double trapezoid(std::size_t steps, double h, const G& g) {
  double s = 0.5 * (g(0) + g(steps));
  for (std::size_t n = 1; n < steps; ++n) s += g(n);
  return s * h;
}

double log_weight_direct(const Model& M, const Path& p) {
  return -2.0 * trapezoid(M.grid.steps, M.grid.h, [&](std::size_t n) {
    return M.fp[n] == 0.0 ? 0.0 : M.fp[n] * M.V(p.phi[n]);
  });
}

double girsanov_exponent(const Model& M, const Path& p) {
  const double lebesgue = trapezoid(M.grid.steps, M.grid.h, [&](std::size_t n) {
    const double f = M.f[n];
    const double x = p.phi[n];
    double v = 0.0;
    if (f != 0.0) {
      const double fv1 = f * M.V.derivative(x, 1);
      v += 0.5 * f * M.V.derivative(x, 2) - 0.5 * fv1 * fv1;
    }
    if (M.fp[n] != 0.0) v -= 2.0 * M.fp[n] * M.V(x);
    return v;
  });
  double strat = 0.0;
  for (std::size_t n = 0; n < M.grid.steps; ++n) {
    if (M.f_mid[n] == 0.0) continue;
    strat += M.f_mid[n] * M.V.derivative(0.5 * (p.phi[n] + p.phi[n + 1]), 1) * p.dB[n];
  }
  return lebesgue - strat;
}

Grid path_grid(const Path& p) { return {p.t0, p.h, p.steps()}; }

Grid default_grid(const SimConfig& c) { return make_grid(-c.T_support, 0.0, c.h); }

double sup_abs_on(const ScalarFn& V, int order, double L, int samples) {
  double s = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double x = -L + 2.0 * L * i / samples;
    s = std::max(s, std::abs(V.derivative(x, order)));
  }
  return s;
}

double truncation_radius(const SimConfig& c) {
  const ScalarFn V = c.V();
  double vmin = V(0.0);
  for (int i = 0; i <= 20000; ++i) vmin = std::min(vmin, V(-100.0 + 0.01 * i));
  const double slack = kLogDensityCut + std::log(10.0) + 2.0 * (V(0.0) - vmin);
  return std::sqrt(slack) / c.m;
}

// Runs fn(i) for every path index. Each call writes only to slot i of its
// outputs, so the serial and parallel drivers fill identical arrays.
template <class PathFn>
void run_paths(std::uint64_t n, Exec exec, int threads, const PathFn& fn) {
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::uint64_t>(i));
    return;
  }
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
  for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::uint64_t>(i));
}

}  // namespace

ScalarFn make_potential(const std::string& name, double lambda) {
  if (name == "cosine") return fns::cosine(lambda);
  if (name == "tanhpoly") return fns::tanh_polynomial({0.0, -0.5 * lambda, lambda});
  if (name == "zero") return fns::constant(0.0);
  if (name == "constant") return fns::constant(lambda);
  if (name == "linear") return fns::polynomial({0.0, lambda});
  throw std::invalid_argument("unknown potential '" + name + "'");
}

Observable make_observable(const std::string& name) {
  if (name == "cos") return {name, [](double x) { return std::cos(x); }, {}};
  if (name == "tanh") return {name, [](double x) { return std::tanh(x); }, {}};
  if (name == "indicator") return {name, [](double x) { return x > 0.0 ? 1.0 : 0.0; }, {0.0}};
  if (name == "x") return {name, [](double x) { return x; }, {}};
  if (name == "x2") return {name, [](double x) { return x * x; }, {}};
  if (name == "one") return {name, [](double) { return 1.0; }, {}};
  throw std::invalid_argument("unknown observable '" + name + "'");
}

void SimConfig::validate() const {
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("m must be positive");
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("h must be positive");
  if (!(T_support > 0.0) || !std::isfinite(T_support)) {
    throw std::invalid_argument("T_support must be positive");
  }
  if (h > T_support) throw std::invalid_argument("h must not exceed T_support");
  if (n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
  if (!(quad_tol > 0.0)) throw std::invalid_argument("quad_tol must be positive");
  if (!std::isfinite(V_lambda)) throw std::invalid_argument("V.lambda must be finite");
  if (F_names.empty()) throw std::invalid_argument("F.name must list at least one observable");
  for (const auto& F : F_names) make_observable(F);
  for (double e : eps_list) {
    if (!(e > 0.0)) throw std::invalid_argument("eps_list entries must be positive");
  }
  if (threads < 0) throw std::invalid_argument("threads must be non-negative");

  const ScalarFn fn = f();
  if (std::abs(fn(0.0) - 1.0) > 1e-15) throw std::invalid_argument("f(0) must be 1");
  for (int i = 1; i <= 200; ++i) {
    const double t = 1.5 * T_support * i / 200.0;
    if (fn(t) != fn(-t)) throw std::invalid_argument("f must be even");
    if (fn(t) < 0.0) throw std::invalid_argument("f must be non-negative");
    if (t >= T_support && fn(t) != 0.0) {
      throw std::invalid_argument("f must vanish outside [-T_support, T_support]");
    }
  }

  // Bounded with bounded derivatives: the sup over a wide window may not
  // exceed the sup near the origin by more than a constant.
  const ScalarFn Vfn = V();
  if (Vfn.max_order() < 2) throw std::invalid_argument("V needs two derivatives");
  for (int order = 0; order <= 2; ++order) {
    const double near = sup_abs_on(Vfn, order, 10.0, 2000);
    const double far = sup_abs_on(Vfn, order, 1e4, 20000);
    if (far > 10.0 * near + 1.0) {
      throw std::invalid_argument("V." + V_name + " is not bounded with bounded derivatives");
    }
  }
}

ScalarFn SimConfig::V() const { return make_potential(V_name, V_lambda); }

ScalarFn SimConfig::f() const {
  if (f_name == "bump") return fns::bump(T_support);
  throw std::invalid_argument("unknown f '" + f_name + "'");
}

Path sample_ou_path(const SimConfig& c, double t0, double t1, std::uint64_t path_index,
                    Stream stream) {
  const Model M(c, make_grid(t0, t1, c.h));
  PathRng rng(c.master_seed, stream, path_index);
  Path p;
  simulate_ou(M, rng, p);
  return p;
}

Path sample_ou_path(const SimConfig& c, std::uint64_t path_index) {
  return sample_ou_path(c, -c.T_support, 0.0, path_index);
}

Path solve_sde_path(const SimConfig& c, double t0, double t1, std::uint64_t path_index,
                    Stream stream) {
  const Model M(c, make_grid(t0, t1, c.h));
  PathRng rng(c.master_seed, stream, path_index);
  Path p;
  simulate_sde(M, rng, p);
  return p;
}

Path solve_sde_path(const SimConfig& c, std::uint64_t path_index) {
  return solve_sde_path(c, -c.T_support, 0.0, path_index);
}

double weight_direct(const Path& path, const SimConfig& c) {
  return std::exp(log_weight_direct(Model(c, path_grid(path)), path));
}

double weight_girsanov(const Path& path, const SimConfig& c) {
  return std::exp(girsanov_exponent(Model(c, path_grid(path)), path));
}

double stratonovich_integral(const Path& path, const PathIntegrand& g) {
  double s = 0.0;
  for (std::size_t n = 0; n < path.steps(); ++n) {
    s += g(path.time(n) + 0.5 * path.h, 0.5 * (path.phi[n] + path.phi[n + 1])) * path.dB[n];
  }
  return s;
}

PathIntegrand drift_integrand(const SimConfig& c) {
  const ScalarFn f = c.f();
  const ScalarFn V = c.V();
  return [f, V](double t, double x) {
    const double ft = f(t);
    return ft == 0.0 ? 0.0 : ft * V.derivative(x, 1);
  };
}

std::vector<WongZakaiPoint> wong_zakai_check(const SimConfig& c, std::span<const double> epsilons,
                                             const PathIntegrand& F, std::uint64_t seed_index) {
  const double hf = c.h / 4.0;
  if (epsilons.empty()) return {};
  for (double e : epsilons) {
    if (!(e > 2.0 * hf)) {
      throw std::invalid_argument("wong_zakai_check: eps must exceed twice the fine step");
    }
  }
  const double eps_max = *std::max_element(epsilons.begin(), epsilons.end());
  const double margin = eps_max + 4.0 * hf;
  SimConfig fine = c;
  fine.h = hf;
  const Model M(fine, make_grid(-c.T_support - margin, c.T_support + margin, hf));
  PathRng rng(c.master_seed, Stream::wong_zakai, seed_index);
  Path p;
  simulate_ou(M, rng, p);

  // Steps whose midpoint lies in [-T, T]; F vanishes elsewhere.
  const double h = p.h;
  const auto first = static_cast<std::size_t>(std::floor((margin - 0.5 * h) / h));
  const auto last = std::min(p.steps(), static_cast<std::size_t>(std::ceil((margin + 2.0 * c.T_support) / h)) + 1);

  double strat = 0.0;
  for (std::size_t n = first; n < last; ++n) {
    strat += F(p.time(n) + 0.5 * h, 0.5 * (p.phi[n] + p.phi[n + 1])) * p.dB[n];
  }

  std::vector<WongZakaiPoint> out;
  for (double eps : epsilons) {
    // Discrete symmetric triangle of half-width K nodes.
    const auto K = static_cast<long>(std::lround(eps / h));
    std::vector<double> w(2 * K - 1);
    double norm = 0.0;
    for (long j = -(K - 1); j <= K - 1; ++j) {
      w[j + K - 1] = static_cast<double>(K - std::labs(j));
      norm += w[j + K - 1];
    }
    for (double& x : w) x /= norm;
    auto smooth = [&](const std::vector<double>& v, std::size_t n) {
      double s = 0.0;
      for (long j = -(K - 1); j <= K - 1; ++j) s += w[j + K - 1] * v[static_cast<std::size_t>(static_cast<long>(n) + j)];
      return s;
    };
    double moll = 0.0;
    double phi_lo = smooth(p.phi, first);
    for (std::size_t n = first; n < last; ++n) {
      const double phi_hi = smooth(p.phi, n + 1);
      moll += F(p.time(n) + 0.5 * h, 0.5 * (phi_lo + phi_hi)) * smooth(p.dB, n);
      phi_lo = phi_hi;
    }
    out.push_back({eps, std::abs(moll - strat)});
  }
  return out;
}

std::vector<std::vector<WongZakaiPoint>> wong_zakai_batch(const SimConfig& c,
                                                          std::span<const double> epsilons,
                                                          const PathIntegrand& F,
                                                          std::uint64_t n_seeds, Exec exec) {
  std::vector<std::vector<WongZakaiPoint>> out(n_seeds);
  run_paths(n_seeds, exec, c.threads,
            [&](std::uint64_t i) { out[i] = wong_zakai_check(c, epsilons, F, i); });
  return out;
}

double gibbs_normalizer(const SimConfig& c, double quad_tol) {
  const ScalarFn V = c.V();
  const double L = truncation_radius(c);
  const double m2 = c.m * c.m;
  return gauss_kronrod([&](double x) { return std::exp(-m2 * x * x - 2.0 * V(x)); }, -L, L,
                       0.1 * quad_tol)
      .value;
}

double gibbs_expectation(const Observable& F, const SimConfig& c, double quad_tol) {
  const ScalarFn V = c.V();
  const double L = truncation_radius(c);
  const double m2 = c.m * c.m;
  auto density = [&](double x) { return std::exp(-m2 * x * x - 2.0 * V(x)); };
  const double tol = 0.1 * quad_tol;
  const double num =
      gauss_kronrod([&](double x) { return F.fn(x) * density(x); }, -L, L, tol, F.breakpoints).value;
  const double den = gauss_kronrod(density, -L, L, tol).value;
  return num / den;
}

namespace {

struct WeightedSamples {
  std::vector<double> weight;
  std::vector<std::vector<double>> values;
};

WeightedSamples weighted_samples(const SimConfig& c, const std::vector<Observable>& obs, bool girsanov,
                                 Exec exec) {
  const Model M(c, default_grid(c));
  WeightedSamples s;
  s.weight.resize(c.n_paths);
  s.values.assign(obs.size(), std::vector<double>(c.n_paths));
  run_paths(c.n_paths, exec, c.threads, [&](std::uint64_t i) {
    PathRng rng(c.master_seed, girsanov ? Stream::ou : Stream::sde, i);
    Path p;
    if (girsanov) {
      simulate_ou(M, rng, p);
      s.weight[i] = std::exp(girsanov_exponent(M, p));
    } else {
      simulate_sde(M, rng, p);
      s.weight[i] = std::exp(log_weight_direct(M, p));
    }
    for (std::size_t k = 0; k < obs.size(); ++k) s.values[k][i] = obs[k].fn(p.phi.back());
  });
  return s;
}

}  // namespace

MainTheoremReport verify_main_theorem(const SimConfig& c, Exec exec) {
  std::vector<Observable> obs;
  for (const auto& name : c.F_names) obs.push_back(make_observable(name));
  const WeightedSamples direct = weighted_samples(c, obs, false, exec);
  const WeightedSamples girs = weighted_samples(c, obs, true, exec);

  MainTheoremReport report;
  report.mean_weight_direct = mean_estimate(direct.weight, exec);
  report.mean_weight_girsanov = mean_estimate(girs.weight, exec);
  report.gibbs_normalizer = gibbs_normalizer(c, c.quad_tol);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    MainTheoremRow row;
    row.observable = obs[k].name;
    row.e1 = ratio_estimate(direct.values[k], direct.weight, exec);
    row.e2 = ratio_estimate(girs.values[k], girs.weight, exec);
    row.e3 = gibbs_expectation(obs[k], c, c.quad_tol);
    row.pass_13 = std::abs(row.e1.mean - row.e3) <= 3.0 * (row.e1.std_err + c.quad_tol);
    row.pass_23 = std::abs(row.e2.mean - row.e3) <= 3.0 * (row.e2.std_err + c.quad_tol);
    row.pass_12 = std::abs(row.e1.mean - row.e2.mean) <=
                  3.0 * std::hypot(row.e1.std_err, row.e2.std_err);
    report.rows.push_back(row);
  }
  return report;
}

double LocalizationKernel::operator()(double x) const {
  return exponential ? std::exp(x) : poly::eval(poly, x);
}

std::vector<Estimate> super_expectation_estimates(std::span<const Observable> Fs,
                                                  const SuperFunction& G, const ScalarFn& H,
                                                  const LocalizationKernel& K, const SimConfig& c,
                                                  Exec exec) {
  if (G.odd_count() != 2) throw std::invalid_argument("super_expectation_estimate: G must be over (theta, thetabar)");
  if (H.max_order() < 2) throw std::invalid_argument("super_expectation_estimate: H needs two derivatives");
  const Model M(c, default_grid(c));
  const Grid& g = M.grid;
  const ScalarFn G0 = G.empty();
  const ScalarFn Gt = G.theta();
  const ScalarFn Gb = G.thetabar();
  const ScalarFn Gtt = G.thetathetabar();
  std::vector<double> g0(g.steps + 1), gtt(g.steps + 1), g0_mid(g.steps);
  for (std::size_t n = 0; n <= g.steps; ++n) {
    const double t = g.time(n);
    if (Gt(t) != 0.0 || Gb(t) != 0.0) {
      throw std::invalid_argument("super_expectation_estimate: G has odd components");
    }
    g0[n] = G0(t);
    gtt[n] = Gtt(t);
  }
  for (std::size_t n = 0; n < g.steps; ++n) g0_mid[n] = G0(g.time(n) + 0.5 * g.h);

  std::vector<std::vector<double>> samples(Fs.size(), std::vector<double>(c.n_paths));
  run_paths(c.n_paths, exec, c.threads, [&](std::uint64_t i) {
    PathRng rng(c.master_seed, Stream::super_estimate, i);
    Path p;
    simulate_ou(M, rng, p);
    const double a_leb = trapezoid(g.steps, g.h, [&](std::size_t n) {
      const double x = p.phi[n];
      double v = 0.0;
      if (g0[n] != 0.0) v += 0.5 * g0[n] * H.derivative(x, 2);
      if (gtt[n] != 0.0) v -= gtt[n] * H(x);
      return v;
    });
    double strat = 0.0;
    for (std::size_t n = 0; n < g.steps; ++n) {
      if (g0_mid[n] == 0.0) continue;
      strat += g0_mid[n] * H.derivative(0.5 * (p.phi[n] + p.phi[n + 1]), 1) * p.dB[n];
    }
    const double a = a_leb - strat;
    const double b = trapezoid(g.steps, g.h, [&](std::size_t n) {
      if (g0[n] == 0.0) return 0.0;
      const double v = g0[n] * H.derivative(p.phi[n], 1);
      return v * v;
    });
    double k;
    if (K.exponential) {
      k = std::exp(a - 0.5 * b);
    } else {
      // p_0 = 1, p_1 = a, p_{n+1} = a p_n - n b p_{n-1}.
      double prev = 1.0, cur = a;
      k = K.poly.empty() ? 0.0 : K.poly[0];
      for (std::size_t n = 1; n < K.poly.size(); ++n) {
        k += K.poly[n] * cur;
        const double next = a * cur - static_cast<double>(n) * b * prev;
        prev = cur;
        cur = next;
      }
    }
    for (std::size_t j = 0; j < Fs.size(); ++j) samples[j][i] = Fs[j].fn(p.phi.back()) * k;
  });
  std::vector<Estimate> out;
  for (const auto& v : samples) out.push_back(mean_estimate(v, exec));
  return out;
}

Estimate super_expectation_estimate(const Observable& F, const SuperFunction& G, const ScalarFn& H,
                                    const LocalizationKernel& K, const SimConfig& c, Exec exec) {
  return super_expectation_estimates(std::span<const Observable>(&F, 1), G, H, K, c, exec).front();
}

double gaussian_kernel_expectation(const Observable& F, const LocalizationKernel& K, double c,
                                   const ScalarFn& H, const SimConfig& cfg, double quad_tol) {
  const double var = 1.0 / (2.0 * cfg.m * cfg.m);
  const double L = std::sqrt(2.0 * var * (kLogDensityCut + 24.0));
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
  return gauss_kronrod(
             [&](double x) { return F.fn(x) * K(c * H(x)) * norm * std::exp(-0.5 * x * x / var); },
             -L, L, quad_tol, F.breakpoints)
      .value;
}

std::vector<Estimate> time_reversal_check(const SimConfig& c,
                                          std::span<const std::pair<double, double>> times,
                                          std::uint64_t n_paths, Exec exec) {
  const Model M(c, make_grid(-c.T_support, c.T_support, c.h));
  const Grid& g = M.grid;
  auto node = [&](double t) {
    const double x = (t - g.t0) / g.h;
    const auto n = static_cast<std::size_t>(std::llround(x));
    if (std::abs(x - static_cast<double>(n)) > 1e-9 || n > g.steps) {
      throw std::invalid_argument("time_reversal_check: time is not a grid node");
    }
    return n;
  };
  struct Nodes { std::size_t s, t, ms, mt; };
  std::vector<Nodes> nodes;
  for (const auto& [s, t] : times) nodes.push_back({node(s), node(t), node(-s), node(-t)});

  std::vector<std::vector<double>> d(times.size(), std::vector<double>(n_paths));
  run_paths(n_paths, exec, c.threads, [&](std::uint64_t i) {
    PathRng rng(c.master_seed, Stream::time_reversal, i);
    Path p;
    simulate_sde(M, rng, p);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const auto& q = nodes[k];
      d[k][i] = p.phi[q.s] * p.phi[q.t] - p.phi[q.ms] * p.phi[q.mt];
    }
  });
  std::vector<Estimate> out;
  for (const auto& v : d) out.push_back(mean_estimate(v, exec));
  return out;
}

}  // namespace susy
