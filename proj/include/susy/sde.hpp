#pragma once

// Path-level simulation of
//   d/dt phi + m^2 phi + f(t) V'(phi) = xi
// together with the reweighting identities that connect it to the
// Ornstein-Uhlenbeck process and to the Gibbs density exp(-m^2 x^2 - 2 V(x)).

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "susy/rng.hpp"
#include "susy/scalar_fn.hpp"
#include "susy/superfunction.hpp"

namespace susy {

/// Named potentials: "cosine" (lambda cos x), "tanhpoly"
/// (lambda (tanh^2 x - tanh x / 2)), "zero", "constant" (lambda) and
/// "linear" (lambda x, unbounded, only for drift-sign tests).
ScalarFn make_potential(const std::string& name, double lambda);

struct Observable {
  std::string name;
  std::function<double(double)> fn;
  std::vector<double> breakpoints;  // jump locations, for quadrature
};

/// "cos", "tanh", "indicator" (x > 0), "x", "x2", "one".
Observable make_observable(const std::string& name);

enum class Exec { serial, parallel };

struct SimConfig {
  double m = 1.0;
  double h = 1.0 / 1024.0;
  double T_support = 1.0;
  std::uint64_t n_paths = 200000;
  std::uint64_t master_seed = 0x5eed2024;
  std::string V_name = "cosine";
  double V_lambda = 0.5;
  std::string f_name = "bump";
  std::vector<std::string> F_names{"cos", "tanh", "indicator"};
  double quad_tol = 1e-8;
  std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
  int threads = 0;  // 0: OpenMP default

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  ScalarFn V() const;
  ScalarFn f() const;
};

/// Uniform grid t_n = t0 + n h, n = 0..steps; dB[n] belongs to [t_n, t_{n+1}].
struct Path {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<double> phi;
  std::vector<double> dB;

  std::size_t steps() const { return dB.size(); }
  double time(std::size_t n) const { return t0 + static_cast<double>(n) * h; }
};

struct Estimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::uint64_t n = 0;
};

/// Exact OU transitions from a stationary draw at t0. The recorded
/// increments are dB = dphi + m^2 h (phi_n + phi_{n+1}) / 2.
Path sample_ou_path(const SimConfig& c, double t0, double t1, std::uint64_t path_index,
                    Stream stream = Stream::ou);
/// On [-T_support, 0].
Path sample_ou_path(const SimConfig& c, std::uint64_t path_index);

/// Exponential Euler for the full drift, same start as the OU path.
/// dB records the noise actually used, i.e. dB = dphi + m^2 h avg(phi) + h f V'.
Path solve_sde_path(const SimConfig& c, double t0, double t1, std::uint64_t path_index,
                    Stream stream = Stream::sde);
Path solve_sde_path(const SimConfig& c, std::uint64_t path_index);

/// exp(-2 int f'(t) V(phi(t)) dt), trapezoid.
double weight_direct(const Path& path, const SimConfig& c);
/// exp(S): trapezoid for the Lebesgue part, midpoint Stratonovich sum for the
/// stochastic part.
double weight_girsanov(const Path& path, const SimConfig& c);

using PathIntegrand = std::function<double(double t, double x)>;

/// sum_n g(t_{n+1/2}, (phi_n + phi_{n+1}) / 2) dB_n.
double stratonovich_integral(const Path& path, const PathIntegrand& g);

struct WongZakaiPoint {
  double eps = 0.0;
  double discrepancy = 0.0;
};

/// Mollified integral int F(t, phi_eps) xi_eps dt against the Stratonovich sum
/// on one fine OU path (step h / 4) indexed by `seed_index`. F must vanish
/// for |t| > T_support. Rejects eps <= 2 * (fine step).
std::vector<WongZakaiPoint> wong_zakai_check(const SimConfig& c, std::span<const double> epsilons,
                                             const PathIntegrand& F, std::uint64_t seed_index);
/// wong_zakai_check for seed indices 0..n_seeds-1.
std::vector<std::vector<WongZakaiPoint>> wong_zakai_batch(const SimConfig& c,
                                                          std::span<const double> epsilons,
                                                          const PathIntegrand& F,
                                                          std::uint64_t n_seeds,
                                                          Exec exec = Exec::parallel);
/// F(t, x) = f(t) V'(x) for the configured model.
PathIntegrand drift_integrand(const SimConfig& c);

/// int F e^{-m^2 x^2 - 2V} / int e^{-m^2 x^2 - 2V}, truncated where the
/// density drops below 1e-16 of its peak.
double gibbs_expectation(const Observable& F, const SimConfig& c, double quad_tol);
double gibbs_normalizer(const SimConfig& c, double quad_tol);

struct MainTheoremRow {
  std::string observable;
  Estimate e1;  // SDE paths, direct weight, ratio form
  Estimate e2;  // OU paths, Girsanov weight, ratio form
  double e3 = 0.0;
  bool pass_13 = false;
  bool pass_23 = false;
  bool pass_12 = false;
};

struct MainTheoremReport {
  std::vector<MainTheoremRow> rows;
  Estimate mean_weight_direct;
  Estimate mean_weight_girsanov;
  double gibbs_normalizer = 0.0;
};

MainTheoremReport verify_main_theorem(const SimConfig& c, Exec exec = Exec::parallel);

/// Entire test function K in the localization statement: exp, or a
/// polynomial given by ascending coefficients.
struct LocalizationKernel {
  bool exponential = true;
  std::vector<double> poly;

  static LocalizationKernel exp() { return {true, {}}; }
  static LocalizationKernel polynomial(std::vector<double> c) { return {false, std::move(c)}; }
  double operator()(double x) const;
};

/// OU-path estimate of <F(Phi(0)) K(int_{-T}^0 G H(Phi))> where G has no
/// theta or thetabar component. Exponential K gives
///   F(phi(0)) exp(a - b/2),
///   a = 1/2 int G_0 H'' - strat(G_0 H') - int G_tt H,  b = int (G_0 H')^2,
/// and K(x) = x^n is replaced by E[(a + i sqrt(b) Z)^n] = p_n(a, b).
Estimate super_expectation_estimate(const Observable& F, const SuperFunction& G, const ScalarFn& H,
                                    const LocalizationKernel& K, const SimConfig& c,
                                    Exec exec = Exec::parallel);

/// Same paths for every observable.
std::vector<Estimate> super_expectation_estimates(std::span<const Observable> Fs,
                                                  const SuperFunction& G, const ScalarFn& H,
                                                  const LocalizationKernel& K, const SimConfig& c,
                                                  Exec exec = Exec::parallel);

/// <F(x) K(c H(x))> for x ~ N(0, 1/(2 m^2)), adaptive quadrature.
double gaussian_kernel_expectation(const Observable& F, const LocalizationKernel& K, double c,
                                   const ScalarFn& H, const SimConfig& cfg, double quad_tol);

/// Paired differences phi(s) phi(t) - phi(-s) phi(-t) over SDE paths on
/// [-T, T]. One Estimate per (s, t).
std::vector<Estimate> time_reversal_check(const SimConfig& c,
                                          std::span<const std::pair<double, double>> times,
                                          std::uint64_t n_paths, Exec exec = Exec::parallel);

}  // namespace susy
