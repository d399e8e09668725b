#pragma once

// Exact arithmetic in a finitely generated Grassmann algebra.
//
// Elements are stored canonically: each monomial is a bitmask of generator
// indices (ascending order is implied by the mask), the sign of any
// reordering is absorbed into the coefficient, and zero coefficients are
// never stored. Two elements are equal iff their term lists are identical.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace susy {

/// Index of one odd generator. Canonical order is numeric order.
struct GeneratorId {
  unsigned index = 0;

  friend constexpr bool operator==(GeneratorId, GeneratorId) = default;
  friend constexpr auto operator<=>(GeneratorId, GeneratorId) = default;
};

inline constexpr unsigned kMaxGenerators = 64;

class GrassmannElement {
 public:
  using Mask = std::uint64_t;
  struct Term {
    Mask mask;
    double coef;
    friend bool operator==(const Term&, const Term&) = default;
  };

  GrassmannElement() = default;
  explicit GrassmannElement(double scalar);

  static GrassmannElement generator(GeneratorId g, double coef = 1.0);
  /// Product gens[0] * gens[1] * ... in the given order, times coef.
  static GrassmannElement monomial(std::span<const GeneratorId> gens, double coef = 1.0);
  static GrassmannElement monomial(std::initializer_list<GeneratorId> gens, double coef = 1.0);
  /// Term with the given canonical mask (ascending product).
  static GrassmannElement from_mask(Mask mask, double coef);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  double coefficient(Mask mask) const;
  double coefficient(std::initializer_list<GeneratorId> ascending) const;
  double scalar_part() const { return coefficient(Mask{0}); }
  /// Highest generator index + 1 appearing in any term (0 for scalars).
  unsigned span_width() const;

  GrassmannElement& operator+=(const GrassmannElement& rhs);
  GrassmannElement& operator-=(const GrassmannElement& rhs);
  GrassmannElement& operator*=(double c);

  friend GrassmannElement operator+(GrassmannElement a, const GrassmannElement& b) { return a += b; }
  friend GrassmannElement operator-(GrassmannElement a, const GrassmannElement& b) { return a -= b; }
  friend GrassmannElement operator-(GrassmannElement a) { return a *= -1.0; }
  friend GrassmannElement operator*(GrassmannElement a, double c) { return a *= c; }
  friend GrassmannElement operator*(double c, GrassmannElement a) { return a *= c; }
  friend GrassmannElement operator*(const GrassmannElement& a, const GrassmannElement& b);
  friend bool operator==(const GrassmannElement&, const GrassmannElement&) = default;

  /// Largest |coefficient| (0 for the zero element).
  double max_abs() const;
  std::string to_string() const;

 private:
  void add_term(Mask mask, double coef);
  static GrassmannElement from_sorted(std::vector<Term> terms);

  std::vector<Term> terms_;  // sorted by mask, no zeros
};

inline constexpr GrassmannElement::Mask mask_of(GeneratorId g) {
  return GrassmannElement::Mask{1} << g.index;
}

/// Sign (+1 / -1) of moving the monomial `left` past `right` to reach the
/// canonical order of left*right; 0 if they share a generator.
int product_sign(GrassmannElement::Mask left, GrassmannElement::Mask right);

GrassmannElement mul(const GrassmannElement& a, const GrassmannElement& b);

/// a + c*b.
GrassmannElement add_scale(const GrassmannElement& a, const GrassmannElement& b, double c);

/// Iterated Berezin integral, innermost first: gens[0] is integrated first.
/// Single-variable rule: the integrated generator is moved to the right end
/// of each monomial and removed; monomials lacking it vanish.
/// Throws std::invalid_argument on repeated generators.
GrassmannElement berezin(const GrassmannElement& a, std::span<const GeneratorId> gens);
GrassmannElement berezin(const GrassmannElement& a, std::initializer_list<GeneratorId> gens);

/// Graded left derivative: the generator is moved to the left end and removed.
GrassmannElement left_derivative(const GrassmannElement& a, GeneratorId g);

/// Drops every term that contains any generator in `mask` (sets those
/// generators to zero).
GrassmannElement restrict_zero(const GrassmannElement& a, GrassmannElement::Mask mask);

}  // namespace susy
