#pragma once

// Torsion along V(g), localization at g, closed pushforward, the Koszul
// pullback along a regular sequence and the identification of R/(x_k - c_k)
// with a smaller polynomial ring.

#include <optional>
#include <string>
#include <vector>

#include "cartier_lab/gamma.hpp"

namespace cartier_lab {

namespace detail {

inline void require_nonzero_g(const Polynomial& g) {
  require(!g.is_zero(), ErrorCode::kValidation, "g must be nonzero");
}

/// {u : g^k u in Rel}.
inline Submodule killed_by_power(const CartierModule& m, const Polynomial& g, std::uint32_t k) {
  const auto gk = g.pow(k);
  std::vector<Vec> images;
  for (std::size_t i = 0; i < m.rank(); ++i) images.push_back(scaled(m.generator(i), gk));
  return preimage(m.ring(), m.rank(), images, relation_submodule(m));
}

}  // namespace detail

/// Exponent K with g^K killing the g-power torsion of R^r / Rel: the
/// torsion exponent is bounded by the degree of the product of the
/// invariant factors, which divides the product of the Hermite pivots.
inline std::uint32_t torsion_exponent_bound(const CartierModule& m) {
  return static_cast<std::uint32_t>(relation_submodule(m).pivot_degree_sum()) + 1;
}

struct Torsion {
  Submodule submodule;  // contains Rel
  CartierModule module;
  std::uint32_t exponent;  // first k with (Rel : g^k) = (Rel : g^{k+1})
};

/// Gamma_Z(M) = {m : g^k m = 0 for some k}, grown one power of g at a time.
inline Torsion torsion_gamma_Z(const CartierModule& m, const Polynomial& g, const StabilizationLimits& limits = {}) {
  require(m.ring()->nvars() <= 1, ErrorCode::kUnsupported, "torsion needs F_q or F_q[x]");
  detail::require_nonzero_g(g);
  Submodule cur = relation_submodule(m);
  for (std::uint32_t k = 1;; ++k) {
    if (k > limits.max_iter) fail(ErrorCode::kNonStabilized, "torsion chain did not stabilize");
    auto next = detail::killed_by_power(m, g, k);
    if (next == cur) {
      require(is_kappa_stable(m, cur), ErrorCode::kInvariantViolation, "torsion is not kappa-stable");
      return {cur, submodule_module(m, cur), k - 1};
    }
    cur = std::move(next);
  }
}

/// Fractions num / g^k.
struct Fraction {
  Vec num;
  std::uint32_t k = 0;
};

/// M_g over R_g with kappa(m / g^{pk}) = kappa(m) / g^k.
class LocalizedCartier {
 public:
  LocalizedCartier(CartierModule base, Polynomial g) : base_(std::move(base)), g_(std::move(g)) {
    require(base_.ring()->nvars() == 1 && base_.ideal().is_zero_ideal(), ErrorCode::kUnsupported,
            "localization needs F_q[x]");
    detail::require_nonzero_g(g_);
    require(g_.ring()->same_ring(*base_.ring()), ErrorCode::kContextMismatch, "g from another ring");
    kill_ = torsion_exponent_bound(base_);
  }

  const CartierModule& base() const { return base_; }
  const Polynomial& g() const { return g_; }
  const RingPtr& ring() const { return base_.ring(); }
  std::size_t rank() const { return base_.rank(); }

  Fraction of(Vec m) const { return {std::move(m), 0}; }

  /// Same fraction with the exponent raised to the next multiple of p.
  Fraction normalize(Fraction f) const {
    const std::uint32_t p = ring()->p();
    const std::uint32_t j = (p - f.k % p) % p;
    if (j > 0) f.num = scaled(f.num, g_.pow(j));
    f.k += j;
    f.num = base_.reduce(std::move(f.num));
    return f;
  }

  Fraction kappa(const Fraction& f) const {
    auto n = normalize(f);
    return {base_.apply_kappa(n.num), n.k / ring()->p()};
  }

  Fraction add(const Fraction& a, const Fraction& b) const {
    const std::uint32_t k = std::max(a.k, b.k);
    return {scaled(a.num, g_.pow(k - a.k)) + scaled(b.num, g_.pow(k - b.k)), k};
  }

  Fraction scale(const Fraction& a, const Polynomial& f) const { return {scaled(a.num, f), a.k}; }

  /// m / g^k = 0 in M_g iff g^K m lies in Rel.
  bool is_zero(const Fraction& f) const { return base_.is_zero_elem(scaled(f.num, g_.pow(kill_))); }

  bool equal(const Fraction& a, const Fraction& b) const {
    return is_zero({scaled(a.num, g_.pow(b.k)) - scaled(b.num, g_.pow(a.k)), 0});
  }

  /// {m in R^r : m / 1 = 0}.
  Submodule localization_kernel() const { return detail::killed_by_power(base_, g_, kill_); }

 private:
  CartierModule base_;
  Polynomial g_;
  std::uint32_t kill_;
};

inline LocalizedCartier open_pullback(const CartierModule& m, const Polynomial& g) { return LocalizedCartier(m, g); }

/// M / Gamma_g(M), the image of M in M_g.
inline CartierModule torsion_free_part(const CartierModule& m, const Polynomial& g) {
  return quotient_module(m, torsion_gamma_Z(m, g).submodule);
}

/// The lattice g^{-k} M inside M_g for g-torsion-free M, presented on the
/// generators m_i / g^k: kappa(x^a m_i / g^k) = kappa(x^a g^{k(p-1)} m_i) / g^k.
inline CartierModule lattice_shift(const CartierModule& m, const Polynomial& g, std::uint32_t k) {
  require(torsion_gamma_Z(m, g).submodule == relation_submodule(m), ErrorCode::kValidation,
          "lattice shift needs a g-torsion-free module");
  const auto& ring = m.ring();
  const auto w = g.pow(k * (ring->p() - 1));
  std::vector<Vec> table;
  for (std::size_t code = 0; code < m.monomials(); ++code) {
    const auto mono = Polynomial::monomial(ring, exponent_digits(code, ring->p(), ring->nvars()), ring->f().one());
    for (std::size_t i = 0; i < m.rank(); ++i) table.push_back(m.apply_kappa(scaled(m.generator(i), mono * w)));
  }
  return CartierModule(ring, m.ideal(), m.rank(), m.relations(), std::move(table), m.names());
}

/// The same rescaling on the gamma side: gamma(n_i / g^k) has matrix g^{k(p-1)} C
/// in the generators 1 (x) (n_j / g^k).
inline GammaSheaf gamma_lattice_shift(const GammaSheaf& n, const Polynomial& g, std::uint32_t k) {
  const auto w = g.pow(k * (n.ring()->p() - 1));
  std::vector<Vec> cols;
  for (const auto& c : n.columns()) cols.push_back(scaled(c, w));
  return GammaSheaf(n.ring(), n.ideal(), n.rank(), n.relations(), std::move(cols), n.names());
}

/// M over R/I viewed over R: the ideal becomes explicit relations.
inline CartierModule closed_pushforward(const CartierModule& m) {
  require(m.ring()->nvars() <= 1, ErrorCode::kUnsupported, "closed pushforward needs F_q or F_q[x]");
  return CartierModule(m.ring(), IdealSpec::zero(m.ring()), m.rank(), m.rel().generators(), m.table(), m.names());
}

/// A zero-dimensional module pushed forward along the point x = c of A^1.
inline CartierModule closed_pushforward_point(const CartierModule& m, const RingPtr& target, Elem c) {
  require(m.ring()->nvars() == 0, ErrorCode::kUnsupported, "expected a zero-dimensional module");
  require(target->nvars() == 1 && target->field()->same_field(*m.ring()->field()), ErrorCode::kContextMismatch,
          "target must be a line over the same field");
  const auto& f = target->f();
  const std::size_t r = m.rank();
  auto lift = [&](const Vec& v) {
    Vec out;
    for (const auto& x : v) out.push_back(Polynomial::constant(target, x.constant_term()));
    return out;
  };
  std::vector<Vec> rels;
  for (const auto& v : m.rel().generators()) rels.push_back(lift(v));
  const auto lin = Polynomial::variable(target, 0) - Polynomial::constant(target, c);
  for (std::size_t i = 0; i < r; ++i) rels.push_back(scaled(unit_vec(target, r, i), lin));
  // x^a m_i = c^a m_i, so kappa(x^a m_i) = (c^a)^{1/p} kappa(m_i).
  std::vector<Vec> table;
  for (std::uint32_t a = 0; a < target->p(); ++a) {
    const auto s = Polynomial::constant(target, f.frobenius_inv(f.pow(c, a)));
    for (std::size_t i = 0; i < r; ++i) table.push_back(scaled(lift(m.kappa_of(0, i)), s));
  }
  return CartierModule(target, IdealSpec::zero(target), r, std::move(rels), std::move(table), m.names());
}

/// {m : I m = 0} as a submodule containing Rel.
inline Submodule annihilated_by(const CartierModule& m, const IdealSpec& ideal) {
  Submodule out = Submodule::whole(m.ring(), m.rank());
  for (const auto& g : ideal.groebner()) {
    std::vector<Vec> images;
    for (std::size_t i = 0; i < m.rank(); ++i) images.push_back(scaled(m.generator(i), g));
    out = intersect(out, preimage(m.ring(), m.rank(), images, relation_submodule(m)));
  }
  return out + relation_submodule(m);
}

/// M / IM with kappa_quot(m) = kappa((f_1 ... f_n)^{p-1} m) mod IM.
inline CartierModule koszul_pullback(const CartierModule& m, const std::vector<Polynomial>& seq) {
  const auto& ring = m.ring();
  require(m.ideal().is_zero_ideal(), ErrorCode::kUnsupported, "Koszul pullback starts from a polynomial ring");
  for (const auto& f : seq)
    require(f.ring()->same_ring(*ring), ErrorCode::kContextMismatch, "sequence from another ring");
  if (!is_regular_sequence(ring, seq)) fail(ErrorCode::kNonRegular, "sequence is not regular");
  auto ideal = IdealSpec::make(ring, seq);
  Polynomial prod = Polynomial::one(ring);
  for (const auto& f : seq) prod = prod * f;
  const auto w = prod.pow(ring->p() - 1);
  std::vector<Vec> table;
  for (std::size_t code = 0; code < m.monomials(); ++code) {
    const auto mono = Polynomial::monomial(ring, exponent_digits(code, ring->p(), ring->nvars()), ring->f().one());
    for (std::size_t i = 0; i < m.rank(); ++i) table.push_back(m.apply_kappa(scaled(m.generator(i), mono * w)));
  }
  std::vector<Vec> rels = ring->nvars() <= 1 ? m.relations() : std::vector<Vec>{};
  return CartierModule(ring, ideal, m.rank(), std::move(rels), std::move(table), m.names());
}

/// R / (x_k - c_k : k in K) identified with the polynomial ring on the
/// remaining variables.
struct LinearIdentification {
  RingPtr source;
  RingPtr target;
  std::vector<std::optional<std::size_t>> var_map;
  std::vector<std::optional<Elem>> value;

  Polynomial map(Polynomial f) const {
    for (std::size_t k = 0; k < value.size(); ++k)
      if (value[k]) f = f.substitute(k, Polynomial::constant(source, *value[k]));
    return f.transport(target, var_map);
  }
  Vec map(const Vec& v) const {
    Vec out;
    for (const auto& x : v) out.push_back(map(x));
    return out;
  }
  /// Source table code for a target code (dropped exponents are zero).
  std::size_t source_code(std::size_t code) const {
    const auto a = exponent_digits(code, target->p(), target->nvars());
    Exponents s{};
    for (std::size_t k = 0; k < var_map.size(); ++k)
      if (var_map[k]) s[k] = a[*var_map[k]];
    return digit_code(s, source->p(), source->nvars());
  }
};

inline LinearIdentification linear_identification(const IdealSpec& ideal) {
  const auto& ring = ideal.ring();
  require(!ideal.is_unit(), ErrorCode::kUnsupported, "the unit ideal has no identification");
  LinearIdentification out{ring, nullptr, std::vector<std::optional<std::size_t>>(ring->nvars()),
                           std::vector<std::optional<Elem>>(ring->nvars())};
  for (const auto& g : ideal.groebner()) {
    const auto lead = g.leading_monomial();
    std::size_t k = ring->nvars();
    for (std::size_t i = 0; i < ring->nvars(); ++i)
      if (lead[i] == 1) k = i;
    const bool linear = g.degree() == 1 && k < ring->nvars() && g.size() <= 2 &&
                        (g.size() == 1 || g.constant_term() != ring->f().zero());
    require(linear, ErrorCode::kUnsupported, "ideal is not of the form (x_k - c_k)");
    out.value[k] = ring->f().neg(g.constant_term());
  }
  std::vector<std::string> vars;
  for (std::size_t i = 0; i < ring->nvars(); ++i)
    if (!out.value[i]) {
      out.var_map[i] = vars.size();
      vars.push_back(ring->vars()[i]);
    }
  out.target = PolyRing::make(ring->field(), std::move(vars), ring->order());
  return out;
}

inline CartierModule canonical_identification(const CartierModule& m) {
  if (m.ideal().is_zero_ideal()) return m;
  const auto id = linear_identification(m.ideal());
  std::vector<Vec> rels;
  for (const auto& v : m.relations()) rels.push_back(id.map(v));
  std::vector<Vec> table;
  for (std::size_t code = 0; code < id.target->frobenius_rank(); ++code)
    for (std::size_t i = 0; i < m.rank(); ++i) table.push_back(id.map(m.kappa_of(id.source_code(code), i)));
  return CartierModule(id.target, IdealSpec::zero(id.target), m.rank(), std::move(rels), std::move(table), m.names());
}

inline GammaSheaf canonical_identification(const GammaSheaf& n) {
  if (n.ideal().is_zero_ideal()) return n;
  const auto id = linear_identification(n.ideal());
  std::vector<Vec> rels, cols;
  for (const auto& v : n.relations()) rels.push_back(id.map(v));
  for (const auto& v : n.columns()) cols.push_back(id.map(v));
  return GammaSheaf(id.target, IdealSpec::zero(id.target), n.rank(), std::move(rels), std::move(cols), n.names());
}

/// Determinant by cofactor expansion along the first row.
inline Polynomial determinant(const RingPtr& ring, const std::vector<std::vector<Polynomial>>& c) {
  const std::size_t n = c.size();
  if (n == 0) return Polynomial::one(ring);
  if (n == 1) return c[0][0];
  Polynomial out(ring);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<Polynomial>> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<Polynomial> row;
      for (std::size_t l = 0; l < n; ++l)
        if (l != j) row.push_back(c[i][l]);
      minor.push_back(std::move(row));
    }
    const auto term = c[0][j] * determinant(ring, minor);
    if (j % 2 == 0)
      out += term;
    else
      out -= term;
  }
  return out;
}

struct SequenceChange {
  std::vector<std::vector<Polynomial>> matrix;  // g_i = sum_j c_ij f_j
  Polynomial det;
  CartierModule via_f;
  CartierModule via_g;
  bool relation_holds = false;  // det kappa_f(y) = kappa_g(det y) on every table entry
  bool tables_equal = false;
};

inline SequenceChange sequence_change_factor(const std::vector<Polynomial>& f, const std::vector<Polynomial>& g,
                                             const CartierModule& m) {
  const auto& ring = m.ring();
  require(f.size() == g.size(), ErrorCode::kValidation, "sequences have different lengths");
  require(IdealSpec::make(ring, f) == IdealSpec::make(ring, g), ErrorCode::kValidation,
          "sequences generate different ideals");
  auto c = sequence_change_matrix(ring, f, g);
  auto det = determinant(ring, c);
  auto kf = koszul_pullback(m, f);
  auto kg = koszul_pullback(m, g);
  bool holds = true;
  for (std::size_t code = 0; code < m.monomials() && holds; ++code) {
    const auto mono = Polynomial::monomial(ring, exponent_digits(code, ring->p(), ring->nvars()), ring->f().one());
    for (std::size_t i = 0; i < m.rank() && holds; ++i) {
      const Vec lhs = scaled(kf.kappa_of(code, i), det);
      const Vec rhs = kg.apply_kappa(scaled(m.generator(i), mono * det));
      holds = kg.equal_elems(lhs, rhs);
    }
  }
  const bool equal = same_cartier(kf, kg);
  return {std::move(c), std::move(det), std::move(kf), std::move(kg), holds, equal};
}

}  // namespace cartier_lab
