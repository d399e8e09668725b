#include "susy/superwick.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

#include <Eigen/Dense>

#include "susy/quadrature.hpp"

namespace susy {

namespace {

using Mask = GrassmannElement::Mask;
using Term = WickExpansion::Term;
using Fermion = WickExpansion::Fermion;

// Moments of a centred Gaussian vector with several copies per species,
// memoised over the exponent vector. Pairings are enumerated by pairing the
// first remaining factor with every other factor.
class MomentTable {
 public:
  MomentTable(std::vector<double> cov, std::vector<int> max_exponents)
      : species_(max_exponents.size()), cov_(std::move(cov)), stride_(species_) {
    std::size_t size = 1;
    for (std::size_t s = 0; s < species_; ++s) {
      stride_[s] = size;
      size *= static_cast<std::size_t>(max_exponents[s] + 1);
    }
    memo_.assign(size, std::numeric_limits<double>::quiet_NaN());
  }

  double operator()(std::vector<int>& n) {
    int total = 0;
    std::size_t index = 0;
    for (std::size_t s = 0; s < species_; ++s) {
      total += n[s];
      index += stride_[s] * static_cast<std::size_t>(n[s]);
    }
    if (total & 1) return 0.0;
    return eval(n, index);
  }

 private:
  double eval(std::vector<int>& n, std::size_t index) {
    double& slot = memo_[index];
    if (!std::isnan(slot)) return slot;
    std::size_t a = 0;
    while (a < species_ && n[a] == 0) ++a;
    if (a == species_) return slot = 1.0;
    double acc = 0.0;
    for (std::size_t b = a; b < species_; ++b) {
      const int copies = (b == a) ? n[a] - 1 : n[b];
      if (copies <= 0) continue;
      const double c = cov_[a * species_ + b];
      if (c == 0.0) continue;
      --n[a];
      --n[b];
      acc += copies * c * eval(n, index - stride_[a] - stride_[b]);
      ++n[a];
      ++n[b];
    }
    return slot = acc;
  }

  std::size_t species_;
  std::vector<double> cov_;
  std::vector<std::size_t> stride_;
  std::vector<double> memo_;
};

// Signed sum over pairings of an ordered fermion string; the sign is the
// parity of crossings in the pairing diagram.
template <class PairValue>
double fermion_pairings(std::vector<int>& remaining, const PairValue& pair_value) {
  if (remaining.empty()) return 1.0;
  if (remaining.size() & 1u) return 0.0;
  const int first = remaining.front();
  double acc = 0.0;
  for (std::size_t j = 1; j < remaining.size(); ++j) {
    const double v = pair_value(first, remaining[j]);
    if (v == 0.0) continue;
    std::vector<int> rest;
    rest.reserve(remaining.size() - 2);
    for (std::size_t i = 1; i < remaining.size(); ++i) {
      if (i != j) rest.push_back(remaining[i]);
    }
    const double sign = ((j - 1) & 1u) ? -1.0 : 1.0;
    acc += sign * v * fermion_pairings(rest, pair_value);
  }
  return acc;
}

// Product of two symbolic terms written in the order a * b. Each term is
// normalised as (bosons)(fermion string)(Grassmann monomial); bringing the
// Grassmann part of `a` past the fermions of `b` costs a sign.
bool multiply_terms(const Term& a, const Term& b, Term& out) {
  const int gsign = product_sign(a.mask, b.mask);
  if (gsign == 0) return false;
  const bool cross_odd = (std::popcount(a.mask) & 1) && (b.fermions.size() & 1u);
  out.coef = a.coef * b.coef * gsign * (cross_odd ? -1.0 : 1.0);
  out.boson_exponents.resize(a.boson_exponents.size());
  for (std::size_t s = 0; s < a.boson_exponents.size(); ++s) {
    out.boson_exponents[s] = a.boson_exponents[s] + b.boson_exponents[s];
  }
  out.fermions = a.fermions;
  out.fermions.insert(out.fermions.end(), b.fermions.begin(), b.fermions.end());
  out.mask = a.mask | b.mask;
  return true;
}

using TermKey = std::tuple<std::vector<int>, std::vector<Fermion>, Mask>;

std::vector<Term> merge_terms(const std::vector<Term>& terms) {
  std::map<TermKey, double> merged;
  for (const Term& t : terms) merged[{t.boson_exponents, t.fermions, t.mask}] += t.coef;
  std::vector<Term> out;
  out.reserve(merged.size());
  for (auto& [key, coef] : merged) {
    if (coef == 0.0) continue;
    out.push_back(Term{coef, std::get<0>(key), std::get<1>(key), std::get<2>(key)});
  }
  return out;
}

std::vector<Term> multiply_sums(const std::vector<Term>& a, const std::vector<Term>& b) {
  std::vector<Term> out;
  out.reserve(a.size() * b.size());
  Term scratch;
  for (const Term& x : a) {
    for (const Term& y : b) {
      if (multiply_terms(x, y, scratch)) out.push_back(scratch);
    }
  }
  return merge_terms(out);
}

}  // namespace

CovarianceSpec::CovarianceSpec(double mass) : m(mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("CovarianceSpec: mass must be positive");
}

double kernel_G(const CovarianceSpec& spec, double t) {
  if (t > 0.0) return std::exp(-spec.m * spec.m * t);
  if (t < 0.0) return 0.0;
  return spec.G_at_zero;
}

double phi_cov(const CovarianceSpec& spec, double t, double s) {
  return std::exp(-spec.m * spec.m * std::abs(t - s)) * spec.phi_var();
}

double field_cov(const CovarianceSpec& spec, const FieldSymbol& a, const FieldSymbol& b) {
  using K = FieldKind;
  if (a.fermionic() != b.fermionic()) return 0.0;
  if (a.kind == K::phi && b.kind == K::phi) return phi_cov(spec, a.time, b.time);
  if (a.kind == K::phi && b.kind == K::omega) return kernel_G(spec, a.time - b.time);
  if (a.kind == K::omega && b.kind == K::phi) return kernel_G(spec, b.time - a.time);
  if (a.kind == K::psibar && b.kind == K::psi) return kernel_G(spec, a.time - b.time);
  if (a.kind == K::psi && b.kind == K::psibar) return -kernel_G(spec, b.time - a.time);
  return 0.0;
}

GrassmannElement super_cov(const CovarianceSpec& spec, double t, double s) {
  const auto th = GrassmannElement::generator(GeneratorId{0});
  const auto thb = GrassmannElement::generator(GeneratorId{1});
  const auto thp = GrassmannElement::generator(GeneratorId{2});
  const auto thbp = GrassmannElement::generator(GeneratorId{3});
  GrassmannElement r(phi_cov(spec, t, s));
  r += ((thp - th) * thbp) * kernel_G(spec, t - s);
  r -= ((thp - th) * thb) * kernel_G(spec, s - t);
  return r;
}

SuperFunction phi_superfield_correlation(const CovarianceSpec& spec, double t) {
  const double m2 = spec.m * spec.m;
  // exp(-m^2 (t - s)) / (2 m^2) and its theta-thetabar partner exp(-m^2 (t - s)).
  const ScalarFn scalar = fns::exp_quadratic(0.0, m2, -m2 * t - std::log(2.0 * m2));
  const ScalarFn top = fns::exp_quadratic(0.0, m2, -m2 * t);
  return SuperFunction::from_components(scalar, fns::constant(0.0), fns::constant(0.0), top);
}

double gaussian_moment(const CovarianceSpec& spec, std::span<const double> times,
                       std::span<const int> exponents) {
  if (times.size() != exponents.size()) {
    throw std::invalid_argument("gaussian_moment: times and exponents differ in length");
  }
  int total = 0;
  for (int e : exponents) {
    if (e < 0) throw std::invalid_argument("gaussian_moment: negative exponent");
    total += e;
  }
  if (total > kMaxMomentDegree) {
    throw std::invalid_argument("gaussian_moment: degree " + std::to_string(total) +
                                " exceeds " + std::to_string(kMaxMomentDegree));
  }
  const std::size_t n = times.size();
  std::vector<double> cov(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) cov[a * n + b] = phi_cov(spec, times[a], times[b]);
  std::vector<int> e(exponents.begin(), exponents.end());
  MomentTable table(std::move(cov), e);
  return table(e);
}

WickExpansion::WickExpansion(std::span<const SuperInsertion> insertions,
                             std::span<const PrefactorFactor> prefactor)
    : slots_(prefactor.size() + insertions.size()), prefactor_slots_(prefactor.size()) {
  const std::size_t species = slots_ + insertions.size();
  std::vector<int> seen_pairs;
  for (const auto& ins : insertions) {
    if (ins.pair_index < 0) throw std::invalid_argument("WickExpansion: negative pair index");
    if (std::find(seen_pairs.begin(), seen_pairs.end(), ins.pair_index) != seen_pairs.end()) {
      throw std::invalid_argument("WickExpansion: pair index used twice");
    }
    if (2 * ins.pair_index + 1 >= static_cast<int>(kMaxGenerators)) {
      throw std::invalid_argument("WickExpansion: pair index out of range");
    }
    if (ins.power < 0) throw std::invalid_argument("WickExpansion: negative power");
    seen_pairs.push_back(ins.pair_index);
  }

  Term unit{1.0, std::vector<int>(species, 0), {}, 0};
  for (std::size_t j = 0; j < prefactor.size(); ++j) {
    if (prefactor[j].exponent < 0) throw std::invalid_argument("WickExpansion: negative exponent");
    unit.boson_exponents[j] = prefactor[j].exponent;
  }
  std::vector<Term> product{unit};

  for (std::size_t i = 0; i < insertions.size(); ++i) {
    const auto& ins = insertions[i];
    const int slot = static_cast<int>(prefactor.size() + i);
    const std::size_t omega_species = slots_ + i;
    const Mask th = mask_of(theta_of_pair(ins.pair_index));
    const Mask thb = mask_of(thetabar_of_pair(ins.pair_index));

    // Nilpotent part N = psibar theta + psi thetabar + omega theta thetabar.
    std::vector<Term> nil;
    nil.push_back(Term{1.0, std::vector<int>(species, 0), {{FieldKind::psibar, slot}}, th});
    nil.push_back(Term{1.0, std::vector<int>(species, 0), {{FieldKind::psi, slot}}, thb});
    Term w{1.0, std::vector<int>(species, 0), {}, th | thb};
    w.boson_exponents[omega_species] = 1;
    nil.push_back(w);

    const std::vector<double> base = ins.poly.empty() ? std::vector<double>{0.0, 1.0} : ins.poly;
    std::vector<double> q = poly::power(base, ins.power);

    // Q(phi + N) = sum_n Q^(n)(phi) N^n / n!
    std::vector<Term> expansion;
    std::vector<Term> nil_power{Term{1.0, std::vector<int>(species, 0), {}, 0}};
    double factorial = 1.0;
    for (int n = 0; !q.empty() && !nil_power.empty(); ++n) {
      if (n > 0) {
        nil_power = multiply_sums(nil_power, nil);
        factorial *= n;
        q = poly::derivative(q);
      }
      std::vector<Term> poly_terms;
      for (std::size_t d = 0; d < q.size(); ++d) {
        if (q[d] == 0.0) continue;
        Term t{q[d] / factorial, std::vector<int>(species, 0), {}, 0};
        t.boson_exponents[slot] = static_cast<int>(d);
        poly_terms.push_back(t);
      }
      const auto contribution = multiply_sums(poly_terms, nil_power);
      expansion.insert(expansion.end(), contribution.begin(), contribution.end());
    }
    product = multiply_sums(product, merge_terms(expansion));
  }
  terms_ = std::move(product);

  max_exponents_.assign(species, 0);
  for (const Term& t : terms_) {
    for (std::size_t s = 0; s < species; ++s) {
      max_exponents_[s] = std::max(max_exponents_[s], t.boson_exponents[s]);
    }
  }
}

GrassmannElement WickExpansion::evaluate(const CovarianceSpec& spec,
                                         std::span<const double> slot_times) const {
  if (slot_times.size() != slots_) {
    throw std::invalid_argument("WickExpansion::evaluate: expected " + std::to_string(slots_) +
                                " times");
  }
  const std::size_t insertions = slots_ - prefactor_slots_;
  const std::size_t species = slots_ + insertions;
  auto species_symbol = [&](std::size_t s) {
    if (s < slots_) return FieldSymbol{FieldKind::phi, slot_times[s]};
    return FieldSymbol{FieldKind::omega, slot_times[prefactor_slots_ + (s - slots_)]};
  };
  std::vector<double> cov(species * species);
  for (std::size_t a = 0; a < species; ++a)
    for (std::size_t b = 0; b < species; ++b)
      cov[a * species + b] = field_cov(spec, species_symbol(a), species_symbol(b));
  MomentTable bosons(std::move(cov), max_exponents_);

  std::map<Mask, double> acc;
  std::vector<int> n;
  std::vector<int> order;
  for (const Term& t : terms_) {
    n = t.boson_exponents;
    const double b = bosons(n);
    if (b == 0.0) continue;
    double f = 1.0;
    if (!t.fermions.empty()) {
      order.resize(t.fermions.size());
      std::iota(order.begin(), order.end(), 0);
      f = fermion_pairings(order, [&](int x, int y) {
        const Fermion& fx = t.fermions[x];
        const Fermion& fy = t.fermions[y];
        return field_cov(spec, FieldSymbol{fx.kind, slot_times[fx.slot]},
                         FieldSymbol{fy.kind, slot_times[fy.slot]});
      });
    }
    if (f != 0.0) acc[t.mask] += t.coef * b * f;
  }
  GrassmannElement r;
  for (const auto& [mask, coef] : acc) r += GrassmannElement::from_mask(mask, coef);
  return r;
}

GrassmannElement wick_super_expectation(const CovarianceSpec& spec,
                                        std::span<const SuperInsertion> insertions,
                                        std::span<const PrefactorFactor> prefactor) {
  WickExpansion expansion(insertions, prefactor);
  std::vector<double> times;
  for (const auto& p : prefactor) times.push_back(p.time);
  for (const auto& i : insertions) times.push_back(i.time);
  return expansion.evaluate(spec, times);
}

double fermionic_det(const CovarianceSpec& spec, std::span<const double> times) {
  const auto n = static_cast<Eigen::Index>(times.size());
  if (n < 1) throw std::invalid_argument("fermionic_det: need at least one time");
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      G(i, j) = (i == j) ? spec.G_at_zero : kernel_G(spec, times[j] - times[i]);
  return G.determinant();
}

namespace {

void validate(const LocalizationProblem& p) {
  if (p.ell < 0 || p.ell > 3) throw std::invalid_argument("localization: need 0 <= ell <= 3");
  for (std::size_t j = 1; j < p.prefactor.size(); ++j) {
    if (!(p.prefactor[j].time < p.prefactor[j - 1].time)) {
      throw std::invalid_argument("localization: prefactor times must be strictly decreasing");
    }
  }
  if (!p.g.support()) throw std::invalid_argument("localization: g must have compact support");
  if (p.g.max_order() < 1) throw std::invalid_argument("localization: g needs a derivative");
  if (!p.pair_indices.empty() && p.pair_indices.size() != static_cast<std::size_t>(p.ell)) {
    throw std::invalid_argument("localization: pair_indices must have ell entries");
  }
}

}  // namespace

LocalizationValue localization_lhs(const CovarianceSpec& spec, const LocalizationProblem& problem,
                                   double quad_tol) {
  validate(problem);
  const int ell = problem.ell;
  std::vector<int> pairs = problem.pair_indices;
  if (pairs.empty()) {
    pairs.resize(ell);
    std::iota(pairs.begin(), pairs.end(), 0);
  }
  std::vector<SuperInsertion> insertions;
  for (int i = 0; i < ell; ++i) insertions.push_back({0.0, pairs[i], 1, problem.poly});
  const WickExpansion expansion(insertions, problem.prefactor);

  std::vector<GeneratorId> gens;
  for (int p : pairs) {
    gens.push_back(theta_of_pair(p));
    gens.push_back(thetabar_of_pair(p));
  }
  const std::size_t k = problem.prefactor.size();
  std::vector<double> slot_times(k + ell);
  for (std::size_t j = 0; j < k; ++j) slot_times[j] = problem.prefactor[j].time;

  auto integrand = [&]() {
    GrassmannElement e = expansion.evaluate(spec, slot_times);
    for (int i = 0; i < ell; ++i) {
      const double tau = slot_times[k + i];
      GrassmannElement lift(problem.g(tau));
      lift += GrassmannElement::monomial({theta_of_pair(pairs[i]), thetabar_of_pair(pairs[i])},
                                         2.0 * problem.g.derivative(tau));
      e = e * lift;
    }
    return berezin(e, gens).scalar_part();
  };

  if (ell == 0) return {integrand(), 0.0};

  const double lo = problem.g.support()->lo;
  const double hi = std::min(problem.upper_limit(), problem.g.support()->hi);
  if (hi <= lo) return {0.0, 0.0};
  const double width = hi - lo;

  std::vector<double> level_tol(ell);
  level_tol[0] = 0.5 * quad_tol;
  for (int i = 1; i < ell; ++i) level_tol[i] = 0.5 * level_tol[i - 1] / width;

  std::function<QuadratureResult(int, double)> level = [&](int i, double upper) -> QuadratureResult {
    if (upper <= lo) return {};
    return gauss_kronrod(
        [&, i](double tau) {
          slot_times[k + i] = tau;
          if (i + 1 == ell) return integrand();
          return level(i + 1, tau).value;
        },
        lo, upper, level_tol[i]);
  };
  const QuadratureResult r = level(0, hi);
  return {r.value, r.error + 0.5 * quad_tol * (ell > 1 ? 1.0 : 0.0)};
}

double localization_rhs(const CovarianceSpec& spec, const LocalizationProblem& problem) {
  validate(problem);
  const double tk = problem.upper_limit();
  std::vector<double> times;
  std::vector<int> exps;
  for (const auto& p : problem.prefactor) {
    times.push_back(p.time);
    exps.push_back(p.exponent);
  }
  const std::vector<double> base = problem.poly.empty() ? std::vector<double>{0.0, 1.0} : problem.poly;
  const std::vector<double> q = poly::power(base, problem.ell);
  times.push_back(tk);
  exps.push_back(0);
  double moment = 0.0;
  for (std::size_t d = 0; d < q.size(); ++d) {
    if (q[d] == 0.0) continue;
    exps.back() = static_cast<int>(d);
    moment += q[d] * gaussian_moment(spec, times, exps);
  }
  double factorial = 1.0;
  for (int i = 2; i <= problem.ell; ++i) factorial *= i;
  return std::pow(-2.0 * problem.g(tk), problem.ell) / factorial * moment;
}

}  // namespace susy
