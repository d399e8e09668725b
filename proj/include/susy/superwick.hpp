#pragma once

// Gaussian super-Wick calculus for the superfield
//   Phi(t, theta, thetabar) = phi(t) + psibar(t) theta + psi(t) thetabar + omega(t) theta thetabar.
//
// Two-point functions (equal-time values in brackets):
//   <phi(t) phi(s)>    = exp(-m^2 |t-s|) / (2 m^2)
//   <phi(t) omega(s)>  = G(t-s)          [1/2]
//   <omega omega>      = 0
//   <psibar(t) psi(s)> = G(t-s)          [1/2]
//   <psi(t) psibar(s)> = -G(s-t)         [-1/2]
// with G(t) = exp(-m^2 t) for t > 0, 0 for t < 0, G(0) = 1/2.

#include <cstddef>
#include <span>
#include <vector>

#include "susy/grassmann.hpp"
#include "susy/scalar_fn.hpp"
#include "susy/superfunction.hpp"

namespace susy {

struct CovarianceSpec {
  double m = 1.0;
  double G_at_zero = 0.5;

  explicit CovarianceSpec(double mass = 1.0);
  double phi_var() const { return 1.0 / (2.0 * m * m); }
};

enum class FieldKind { phi, omega, psi, psibar };

struct FieldSymbol {
  FieldKind kind;
  double time;

  bool fermionic() const { return kind == FieldKind::psi || kind == FieldKind::psibar; }
};

/// One factor (P(Phi(time, theta_p, thetabar_p)))^power inside an
/// expectation; theta_p = generator 2p, thetabar_p = generator 2p+1.
/// An empty poly means P(x) = x.
struct SuperInsertion {
  double time = 0.0;
  int pair_index = 0;
  int power = 1;
  std::vector<double> poly;
};

/// phi(time)^exponent in the commutative prefactor.
struct PrefactorFactor {
  double time = 0.0;
  int exponent = 0;
};

inline GeneratorId theta_of_pair(int p) { return GeneratorId{static_cast<unsigned>(2 * p)}; }
inline GeneratorId thetabar_of_pair(int p) { return GeneratorId{static_cast<unsigned>(2 * p + 1)}; }

double kernel_G(const CovarianceSpec& spec, double t);
double phi_cov(const CovarianceSpec& spec, double t, double s);
/// Two-point function of ordered fields; zero for fermion/boson mixtures.
double field_cov(const CovarianceSpec& spec, const FieldSymbol& a, const FieldSymbol& b);

/// <Phi(t, theta, thetabar) Phi(s, theta', thetabar')> over generators
/// theta = 0, thetabar = 1, theta' = 2, thetabar' = 3.
GrassmannElement super_cov(const CovarianceSpec& spec, double t, double s);

/// s -> <phi(t) Phi(s, theta, thetabar)> on (-inf, t], continued to s = t by
/// its left limit.
SuperFunction phi_superfield_correlation(const CovarianceSpec& spec, double t);

inline constexpr int kMaxMomentDegree = 20;

/// Isserlis moment <prod_i phi(times[i])^exponents[i]>. Throws
/// std::invalid_argument for total degree above kMaxMomentDegree.
double gaussian_moment(const CovarianceSpec& spec, std::span<const double> times,
                       std::span<const int> exponents);

/// Symbolic expansion of <prod phi(t_j)^m_j prod_i Q_i(Phi_i)> into field
/// monomials with Grassmann coefficients. The expansion depends only on the
/// structure (powers, polynomials, pair indices); times enter at evaluation.
class WickExpansion {
 public:
  WickExpansion(std::span<const SuperInsertion> insertions,
                std::span<const PrefactorFactor> prefactor);

  /// slot_times: prefactor times followed by insertion times.
  GrassmannElement evaluate(const CovarianceSpec& spec, std::span<const double> slot_times) const;

  std::size_t term_count() const { return terms_.size(); }
  std::size_t slot_count() const { return slots_; }

  struct Fermion {
    FieldKind kind;
    int slot;
    friend auto operator<=>(const Fermion&, const Fermion&) = default;
  };
  struct Term {
    double coef;
    std::vector<int> boson_exponents;  // phi per slot, then omega per insertion
    std::vector<Fermion> fermions;     // operator order
    GrassmannElement::Mask mask;
  };

 private:
  std::size_t slots_ = 0;
  std::size_t prefactor_slots_ = 0;
  std::vector<int> max_exponents_;
  std::vector<Term> terms_;
};

GrassmannElement wick_super_expectation(const CovarianceSpec& spec,
                                        std::span<const SuperInsertion> insertions,
                                        std::span<const PrefactorFactor> prefactor);

/// det(G_ij) with G_ij = G(t_j - t_i) off the diagonal and 1/2 on it.
double fermionic_det(const CovarianceSpec& spec, std::span<const double> times);

/// Nested-simplex superspace integral
///   < prod_j phi(t_j)^m_j  int_{tau_l < ... < tau_1 < t_k} prod_i g(tau_i + 2 theta_i thetabar_i) P(Phi_i) >
/// with upper limit t_k (0 without prefactor).
struct LocalizationProblem {
  std::vector<PrefactorFactor> prefactor;  // strictly decreasing times
  ScalarFn g;                              // compactly supported, first derivative available
  std::vector<double> poly;                // P
  int ell = 1;
  std::vector<int> pair_indices;           // optional relabelling, size ell

  double upper_limit() const { return prefactor.empty() ? 0.0 : prefactor.back().time; }
};

struct LocalizationValue {
  double value = 0.0;
  double error_estimate = 0.0;
};

LocalizationValue localization_lhs(const CovarianceSpec& spec, const LocalizationProblem& problem,
                                   double quad_tol);
/// (-2 g(t_k))^l / l! <prod_j phi(t_j)^m_j P(phi(t_k))^l>.
double localization_rhs(const CovarianceSpec& spec, const LocalizationProblem& problem);

}  // namespace susy
