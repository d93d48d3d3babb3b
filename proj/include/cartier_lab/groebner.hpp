#pragma once

// Buchberger's algorithm with cofactor tracking, ideal normal forms,
// ideal quotients by elimination and regular-sequence checks.

#include <algorithm>
#include <deque>
#include <optional>
#include <vector>

#include "cartier_lab/polynomial.hpp"

namespace cartier_lab {

struct GroebnerCaps {
  int max_input_degree = 12;
  std::size_t max_basis = 400;
  std::size_t max_pairs = 20000;
};

/// A Gröbner basis together with, for each basis element, its expression
/// as a combination of the original generators.
struct GroebnerBasis {
  std::vector<Polynomial> basis;
  std::vector<std::vector<Polynomial>> cofactors;  // basis[i] = sum_j cofactors[i][j] gens[j]
};

namespace detail {

struct Tracked {
  Polynomial poly;
  std::vector<Polynomial> cof;
};

inline void axpy(std::vector<Polynomial>& dst, const std::vector<Polynomial>& src, const Polynomial& scale) {
  for (std::size_t j = 0; j < dst.size(); ++j)
    if (!src[j].is_zero()) dst[j] += src[j] * scale;
}

/// Fully reduces `t` by `basis`, keeping cofactors in sync.
inline void reduce_tracked(Tracked& t, const std::vector<Tracked>& basis, std::size_t skip = SIZE_MAX) {
  const RingPtr ring = t.poly.ring();
  const auto& f = ring->f();
  const std::size_t n = ring->nvars();
  Polynomial rest = std::move(t.poly);
  Polynomial rem(ring);
  while (!rest.is_zero()) {
    const Exponents lm = rest.leading_monomial();
    const Elem lc = rest.leading_coeff();
    bool reduced = false;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (i == skip) continue;
      const auto& g = basis[i].poly;
      if (g.is_zero() || !divides_monomial(g.leading_monomial(), lm, n)) continue;
      const Exponents shift = monomial_quotient(lm, g.leading_monomial(), n);
      const Elem factor = f.div(lc, g.leading_coeff());
      rest -= g.shifted(shift).scaled(factor);
      axpy(t.cof, basis[i].cof, Polynomial::monomial(ring, shift, f.neg(factor)));
      reduced = true;
      break;
    }
    if (!reduced) {
      rem.add_term(lm, lc);
      rest -= Polynomial::monomial(ring, lm, lc);
    }
  }
  t.poly = std::move(rem);
}

inline Polynomial s_polynomial(const Polynomial& a, const Polynomial& b, Polynomial* ca, Polynomial* cb) {
  const auto& ring = a.ring();
  const auto& f = ring->f();
  const std::size_t n = ring->nvars();
  const Exponents l = monomial_lcm(a.leading_monomial(), b.leading_monomial(), n);
  *ca = Polynomial::monomial(ring, monomial_quotient(l, a.leading_monomial(), n), f.inv(a.leading_coeff()));
  *cb = Polynomial::monomial(ring, monomial_quotient(l, b.leading_monomial(), n),
                             f.neg(f.inv(b.leading_coeff())));
  return a * *ca + b * *cb;
}

}  // namespace detail

/// Reduced Gröbner basis (monic, sorted by increasing leading monomial).
inline GroebnerBasis buchberger_tracked(const RingPtr& ring, const std::vector<Polynomial>& gens,
                                        const GroebnerCaps& caps = {}) {
  const std::size_t m = gens.size();
  const std::size_t n = ring->nvars();
  std::vector<detail::Tracked> basis;
  for (std::size_t j = 0; j < m; ++j) {
    require(gens[j].ring()->same_ring(*ring), ErrorCode::kContextMismatch, "generator from another ring");
    require(gens[j].degree() <= caps.max_input_degree, ErrorCode::kCapExceeded,
            "generator degree above the Gröbner input cap");
    detail::Tracked t{gens[j], std::vector<Polynomial>(m, Polynomial(ring))};
    t.cof[j] = Polynomial::one(ring);
    detail::reduce_tracked(t, basis);
    if (!t.poly.is_zero()) basis.push_back(std::move(t));
  }

  std::deque<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j) pairs.emplace_back(i, j);
  std::size_t processed = 0;
  while (!pairs.empty()) {
    require(++processed <= caps.max_pairs, ErrorCode::kCapExceeded, "Gröbner pair cap exceeded");
    auto [i, j] = pairs.front();
    pairs.pop_front();
    const auto& a = basis[i].poly;
    const auto& b = basis[j].poly;
    // Coprime leading monomials: the S-polynomial reduces to zero.
    const Exponents l = monomial_lcm(a.leading_monomial(), b.leading_monomial(), n);
    bool coprime = true;
    for (std::size_t k = 0; k < n; ++k)
      if (l[k] != a.leading_monomial()[k] + b.leading_monomial()[k]) coprime = false;
    if (coprime) continue;
    Polynomial ca(ring), cb(ring);
    detail::Tracked s{detail::s_polynomial(a, b, &ca, &cb), std::vector<Polynomial>(m, Polynomial(ring))};
    detail::axpy(s.cof, basis[i].cof, ca);
    detail::axpy(s.cof, basis[j].cof, cb);
    detail::reduce_tracked(s, basis);
    if (s.poly.is_zero()) continue;
    require(basis.size() < caps.max_basis, ErrorCode::kCapExceeded, "Gröbner basis size cap exceeded");
    basis.push_back(std::move(s));
    for (std::size_t k = 0; k + 1 < basis.size(); ++k) pairs.emplace_back(k, basis.size() - 1);
  }

  // Minimalize: drop elements whose leading monomial is divisible by another's.
  std::vector<detail::Tracked> minimal;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    bool redundant = false;
    for (std::size_t j = 0; j < basis.size() && !redundant; ++j) {
      if (i == j) continue;
      const auto& li = basis[i].poly.leading_monomial();
      const auto& lj = basis[j].poly.leading_monomial();
      if (divides_monomial(lj, li, n) && (lj != li || j < i)) redundant = true;
    }
    if (!redundant) minimal.push_back(basis[i]);
  }
  // Interreduce and normalize.
  for (std::size_t i = 0; i < minimal.size(); ++i) {
    detail::Tracked t = minimal[i];
    const Exponents lm = t.poly.leading_monomial();
    const Elem lc = t.poly.leading_coeff();
    detail::Tracked tail{t.poly - Polynomial::monomial(ring, lm, lc), t.cof};
    detail::reduce_tracked(tail, minimal, i);
    tail.poly.add_term(lm, lc);
    const Elem inv = ring->f().inv(lc);
    minimal[i].poly = tail.poly.scaled(inv);
    for (auto& c : tail.cof) c = c.scaled(inv);
    minimal[i].cof = std::move(tail.cof);
  }
  const MonomialLess less = ring->less();
  std::sort(minimal.begin(), minimal.end(), [&](const detail::Tracked& a, const detail::Tracked& b) {
    return less(a.poly.leading_monomial(), b.poly.leading_monomial());
  });
  GroebnerBasis out;
  for (auto& t : minimal) {
    out.basis.push_back(std::move(t.poly));
    out.cofactors.push_back(std::move(t.cof));
  }
  return out;
}

inline std::vector<Polynomial> buchberger(const RingPtr& ring, const std::vector<Polynomial>& gens,
                                          const GroebnerCaps& caps = {}) {
  return buchberger_tracked(ring, gens, caps).basis;
}

/// True when every S-polynomial of `basis` reduces to zero modulo `basis`.
inline bool verify_groebner(const std::vector<Polynomial>& basis) {
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      Polynomial ca(basis[i].ring()), cb(basis[i].ring());
      if (!divide(detail::s_polynomial(basis[i], basis[j], &ca, &cb), basis).remainder.is_zero())
        return false;
    }
  return true;
}

/// An ideal of a polynomial ring together with its reduced Gröbner basis.
class IdealSpec {
 public:
  static IdealSpec make(const RingPtr& ring, std::vector<Polynomial> generators,
                        const GroebnerCaps& caps = {}) {
    IdealSpec out(ring);
    out.generators_ = std::move(generators);
    auto gb = buchberger_tracked(ring, out.generators_, caps);
    out.groebner_ = std::move(gb.basis);
    out.cofactors_ = std::move(gb.cofactors);
    require(verify_groebner(out.groebner_), ErrorCode::kInvariantViolation,
            "Gröbner basis failed S-pair verification");
    return out;
  }

  static IdealSpec zero(const RingPtr& ring) { return make(ring, {}); }

  const RingPtr& ring() const { return ring_; }
  const std::vector<Polynomial>& generators() const { return generators_; }
  const std::vector<Polynomial>& groebner() const { return groebner_; }

  bool is_zero_ideal() const { return groebner_.empty(); }
  bool is_unit() const { return groebner_.size() == 1 && groebner_[0].is_constant(); }

  Polynomial normal_form(const Polynomial& f) const {
    require(f.ring()->same_ring(*ring_), ErrorCode::kContextMismatch, "polynomial from another ring");
    if (groebner_.empty()) return f;
    return divide(f, groebner_).remainder;
  }

  bool contains(const Polynomial& f) const { return normal_form(f).is_zero(); }

  bool contains(const IdealSpec& other) const {
    for (const auto& g : other.groebner_)
      if (!contains(g)) return false;
    return true;
  }

  friend bool operator==(const IdealSpec& a, const IdealSpec& b) {
    if (a.groebner_.size() != b.groebner_.size()) return false;
    for (std::size_t i = 0; i < a.groebner_.size(); ++i)
      if (!(a.groebner_[i] == b.groebner_[i])) return false;
    return true;
  }

  /// Coefficients c with f = sum_j c_j generators()[j], if f lies in the ideal.
  std::optional<std::vector<Polynomial>> lift(const Polynomial& f) const {
    std::vector<Polynomial> out(generators_.size(), Polynomial(ring_));
    if (f.is_zero()) return out;
    if (groebner_.empty()) return std::nullopt;
    auto d = divide(f, groebner_);
    if (!d.remainder.is_zero()) return std::nullopt;
    for (std::size_t i = 0; i < groebner_.size(); ++i)
      if (!d.quotients[i].is_zero()) detail::axpy(out, cofactors_[i], d.quotients[i]);
    return out;
  }

  IdealSpec operator+(const IdealSpec& o) const {
    auto gens = generators_;
    gens.insert(gens.end(), o.generators_.begin(), o.generators_.end());
    return make(ring_, std::move(gens));
  }

  /// Standard monomials of R/I when the quotient is finite dimensional.
  std::optional<std::vector<Exponents>> standard_monomials(std::size_t limit = 4096) const;

 private:
  explicit IdealSpec(RingPtr ring) : ring_(std::move(ring)) {}

  RingPtr ring_;
  std::vector<Polynomial> generators_;
  std::vector<Polynomial> groebner_;
  std::vector<std::vector<Polynomial>> cofactors_;
};

inline std::optional<std::vector<Exponents>> IdealSpec::standard_monomials(std::size_t limit) const {
  const std::size_t n = ring_->nvars();
  std::vector<Exponents> out;
  if (is_unit()) return out;
  // Each variable needs a pure power among the leading monomials.
  std::vector<std::uint32_t> bound(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& g : groebner_) {
      const auto& lm = g.leading_monomial();
      bool pure = lm[v] > 0;
      for (std::size_t k = 0; k < n; ++k)
        if (k != v && lm[k] != 0) pure = false;
      if (pure && (bound[v] == 0 || lm[v] < bound[v])) bound[v] = lm[v];
    }
    if (bound[v] == 0) return std::nullopt;
  }
  Exponents e{};
  while (true) {
    bool standard = true;
    for (const auto& g : groebner_)
      if (divides_monomial(g.leading_monomial(), e, n)) standard = false;
    if (standard) {
      out.push_back(e);
      require(out.size() <= limit, ErrorCode::kCapExceeded, "quotient dimension too large");
    }
    std::size_t v = 0;
    while (v < n && ++e[v] == bound[v]) e[v++] = 0;
    if (v == n) break;
  }
  const MonomialLess less = ring_->less();
  std::sort(out.begin(), out.end(), less);
  return out;
}

/// Generators of the ideal quotient J : f, via J ∩ (f) computed by
/// eliminating an auxiliary variable s from s J + (1 - s)(f).
inline IdealSpec ideal_quotient(const IdealSpec& j, const Polynomial& f) {
  const auto& ring = j.ring();
  const std::size_t n = ring->nvars();
  require(f.ring()->same_ring(*ring), ErrorCode::kContextMismatch, "polynomial from another ring");
  if (f.is_zero()) return IdealSpec::make(ring, {Polynomial::one(ring)});
  if (j.is_zero_ideal()) return j;
  require(n < kMaxVars, ErrorCode::kUnsupported, "ideal quotient needs a spare variable");
  auto vars = ring->vars();
  vars.push_back("_s");
  auto big = PolyRing::make(ring->field(), vars, MonomialOrder::kEliminateLast);
  std::vector<std::optional<std::size_t>> up(n);
  for (std::size_t i = 0; i < n; ++i) up[i] = i;
  const Polynomial s = Polynomial::variable(big, n);
  const Polynomial one = Polynomial::one(big);
  std::vector<Polynomial> gens;
  for (const auto& g : j.groebner()) gens.push_back(s * g.transport(big, up));
  gens.push_back((one - s) * f.transport(big, up));
  GroebnerCaps caps;
  caps.max_input_degree = 64;
  auto gb = buchberger(big, gens, caps);
  std::vector<std::optional<std::size_t>> down(n + 1);
  for (std::size_t i = 0; i < n; ++i) down[i] = i;
  std::vector<Polynomial> quotient_gens;
  for (const auto& g : gb) {
    if (g.leading_monomial()[n] != 0) continue;  // elimination order: t-free iff lm is t-free
    auto q = exact_divide(g.transport(ring, down), f);
    require(q.has_value(), ErrorCode::kInvariantViolation, "intersection element not divisible by f");
    quotient_gens.push_back(*q);
  }
  GroebnerCaps qcaps;
  qcaps.max_input_degree = 64;
  return IdealSpec::make(ring, quotient_gens, qcaps);
}

/// f is a nonzerodivisor on R/J iff J : f = J.
inline bool is_nonzerodivisor(const IdealSpec& j, const Polynomial& f) {
  return j.contains(ideal_quotient(j, f));
}

inline bool regular_sequence_supported(const RingPtr& ring, const std::vector<Polynomial>& seq) {
  if (ring->nvars() <= 2) return true;
  if (ring->nvars() > kMaxUserVars) return false;
  for (const auto& f : seq)
    if (f.degree() > 1) return false;
  return true;
}

inline bool is_regular_sequence(const RingPtr& ring, const std::vector<Polynomial>& seq) {
  require(regular_sequence_supported(ring, seq), ErrorCode::kUnsupported,
          "regular-sequence check supports n <= 2, or linear forms with n <= 3");
  std::vector<Polynomial> prefix;
  for (const auto& f : seq) {
    auto j = IdealSpec::make(ring, prefix);
    if (!is_nonzerodivisor(j, f)) return false;
    prefix.push_back(f);
  }
  return true;
}

/// Expresses each g_i as sum_j c_ij f_j. Fails when some g_i is outside (f).
inline std::vector<std::vector<Polynomial>> sequence_change_matrix(const RingPtr& ring,
                                                                   const std::vector<Polynomial>& f,
                                                                   const std::vector<Polynomial>& g) {
  auto ideal = IdealSpec::make(ring, f);
  std::vector<std::vector<Polynomial>> out;
  for (const auto& gi : g) {
    auto c = ideal.lift(gi);
    require(c.has_value(), ErrorCode::kValidation, "second sequence does not lie in the first ideal");
    out.push_back(std::move(*c));
  }
  return out;
}

}  // namespace cartier_lab
