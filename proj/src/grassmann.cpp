#include "susy/grassmann.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace susy {

namespace {

using Mask = GrassmannElement::Mask;

void check_index(GeneratorId g) {
  if (g.index >= kMaxGenerators) {
    throw std::invalid_argument("generator index out of range: " + std::to_string(g.index));
  }
}

Mask bits_above(unsigned index) {
  return index + 1 >= kMaxGenerators ? Mask{0} : ~((Mask{1} << (index + 1)) - 1);
}

Mask bits_below(unsigned index) { return (Mask{1} << index) - 1; }

}  // namespace

int product_sign(Mask left, Mask right) {
  if ((left & right) != 0) return 0;
  // Each generator j of `right` has to pass every generator of `left`
  // with a larger index.
  unsigned swaps = 0;
  for (Mask r = right; r != 0; r &= r - 1) {
    const auto j = static_cast<unsigned>(std::countr_zero(r));
    swaps += static_cast<unsigned>(std::popcount(left & bits_above(j)));
  }
  return (swaps & 1u) ? -1 : 1;
}

GrassmannElement::GrassmannElement(double scalar) {
  if (scalar != 0.0) terms_.push_back({0, scalar});
}

GrassmannElement GrassmannElement::generator(GeneratorId g, double coef) {
  check_index(g);
  return from_mask(mask_of(g), coef);
}

GrassmannElement GrassmannElement::from_mask(Mask mask, double coef) {
  GrassmannElement e;
  if (coef != 0.0) e.terms_.push_back({mask, coef});
  return e;
}

GrassmannElement GrassmannElement::monomial(std::span<const GeneratorId> gens, double coef) {
  Mask acc = 0;
  int sign = 1;
  for (GeneratorId g : gens) {
    check_index(g);
    sign *= product_sign(acc, mask_of(g));
    if (sign == 0) return {};
    acc |= mask_of(g);
  }
  return from_mask(acc, sign * coef);
}

GrassmannElement GrassmannElement::monomial(std::initializer_list<GeneratorId> gens, double coef) {
  return monomial(std::span<const GeneratorId>(gens.begin(), gens.size()), coef);
}

double GrassmannElement::coefficient(Mask mask) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), mask,
                             [](const Term& t, Mask m) { return t.mask < m; });
  return (it != terms_.end() && it->mask == mask) ? it->coef : 0.0;
}

double GrassmannElement::coefficient(std::initializer_list<GeneratorId> ascending) const {
  Mask m = 0;
  for (GeneratorId g : ascending) m |= mask_of(g);
  return coefficient(m);
}

unsigned GrassmannElement::span_width() const {
  Mask all = 0;
  for (const Term& t : terms_) all |= t.mask;
  return all == 0 ? 0u : static_cast<unsigned>(kMaxGenerators - std::countl_zero(all));
}

void GrassmannElement::add_term(Mask mask, double coef) {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), mask,
                             [](const Term& t, Mask m) { return t.mask < m; });
  if (it != terms_.end() && it->mask == mask) {
    it->coef += coef;
    if (it->coef == 0.0) terms_.erase(it);
  } else if (coef != 0.0) {
    terms_.insert(it, Term{mask, coef});
  }
}

GrassmannElement GrassmannElement::from_sorted(std::vector<Term> terms) {
  GrassmannElement e;
  e.terms_.reserve(terms.size());
  for (const Term& t : terms) {
    if (!e.terms_.empty() && e.terms_.back().mask == t.mask) {
      e.terms_.back().coef += t.coef;
      if (e.terms_.back().coef == 0.0) e.terms_.pop_back();
    } else if (t.coef != 0.0) {
      e.terms_.push_back(t);
    }
  }
  return e;
}

GrassmannElement& GrassmannElement::operator+=(const GrassmannElement& rhs) {
  std::vector<Term> merged;
  merged.reserve(terms_.size() + rhs.terms_.size());
  std::merge(terms_.begin(), terms_.end(), rhs.terms_.begin(), rhs.terms_.end(),
             std::back_inserter(merged), [](const Term& a, const Term& b) { return a.mask < b.mask; });
  *this = from_sorted(std::move(merged));
  return *this;
}

GrassmannElement& GrassmannElement::operator-=(const GrassmannElement& rhs) {
  return *this += rhs * -1.0;
}

GrassmannElement& GrassmannElement::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (Term& t : terms_) t.coef *= c;
  return *this;
}

GrassmannElement operator*(const GrassmannElement& a, const GrassmannElement& b) {
  std::vector<GrassmannElement::Term> out;
  out.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      const int s = product_sign(ta.mask, tb.mask);
      if (s != 0) out.push_back({ta.mask | tb.mask, s * ta.coef * tb.coef});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& x, const auto& y) { return x.mask < y.mask; });
  return GrassmannElement::from_sorted(std::move(out));
}

double GrassmannElement::max_abs() const {
  double m = 0.0;
  for (const Term& t : terms_) m = std::max(m, std::abs(t.coef));
  return m;
}

std::string GrassmannElement::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const Term& t : terms_) {
    if (!first) os << (t.coef < 0 ? " - " : " + ");
    else if (t.coef < 0) os << "-";
    first = false;
    os << std::abs(t.coef);
    for (Mask m = t.mask; m != 0; m &= m - 1) os << "*t" << std::countr_zero(m);
  }
  return os.str();
}

GrassmannElement mul(const GrassmannElement& a, const GrassmannElement& b) { return a * b; }

GrassmannElement add_scale(const GrassmannElement& a, const GrassmannElement& b, double c) {
  return a + b * c;
}

namespace {

GrassmannElement berezin_one(const GrassmannElement& a, GeneratorId g) {
  check_index(g);
  const Mask gm = mask_of(g);
  std::vector<GrassmannElement::Term> out;
  for (const auto& t : a.terms()) {
    if ((t.mask & gm) == 0) continue;
    const int passes = std::popcount(t.mask & bits_above(g.index));
    out.push_back({t.mask & ~gm, (passes & 1) ? -t.coef : t.coef});
  }
  // Removing one fixed bit preserves the mask order.
  GrassmannElement r;
  for (const auto& t : out) r += GrassmannElement::from_mask(t.mask, t.coef);
  return r;
}

}  // namespace

GrassmannElement berezin(const GrassmannElement& a, std::span<const GeneratorId> gens) {
  Mask seen = 0;
  for (GeneratorId g : gens) {
    check_index(g);
    if (seen & mask_of(g)) {
      throw std::invalid_argument("berezin: repeated generator " + std::to_string(g.index));
    }
    seen |= mask_of(g);
  }
  GrassmannElement r = a;
  for (GeneratorId g : gens) r = berezin_one(r, g);
  return r;
}

GrassmannElement berezin(const GrassmannElement& a, std::initializer_list<GeneratorId> gens) {
  return berezin(a, std::span<const GeneratorId>(gens.begin(), gens.size()));
}

GrassmannElement left_derivative(const GrassmannElement& a, GeneratorId g) {
  check_index(g);
  const Mask gm = mask_of(g);
  GrassmannElement r;
  for (const auto& t : a.terms()) {
    if ((t.mask & gm) == 0) continue;
    const int passes = std::popcount(t.mask & bits_below(g.index));
    r += GrassmannElement::from_mask(t.mask & ~gm, (passes & 1) ? -t.coef : t.coef);
  }
  return r;
}

GrassmannElement restrict_zero(const GrassmannElement& a, Mask mask) {
  GrassmannElement r;
  for (const auto& t : a.terms()) {
    if ((t.mask & mask) == 0) r += GrassmannElement::from_mask(t.mask, t.coef);
  }
  return r;
}

}  // namespace susy
