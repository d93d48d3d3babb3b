#pragma once

// gamma-sheaves N -> F^*N and their dictionary with Cartier modules through
// the dualizing module, unit roots and solution spaces at a point.
//
// F^*N for N = R^r / Rel is presented as R^r / (Rel^[p] + I R^r), where v^[p]
// raises each coordinate to the p-th power: 1 (x) (f m) = f^p (1 (x) m).

#include <optional>
#include <string>
#include <vector>

#include "cartier_lab/cartier_module.hpp"

namespace cartier_lab {

inline Vec frobenius_vec(const Vec& v) {
  Vec out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.frobenius());
  return out;
}

inline std::vector<Vec> frobenius_vecs(const std::vector<Vec>& vs) {
  std::vector<Vec> out;
  for (const auto& v : vs) out.push_back(frobenius_vec(v));
  return out;
}

/// omega with its fixed generator, the monomial basis s_a = x^a of F_*R and
/// the dual maps phi_a(f) = g_a for f = sum_b g_b^p x^b.
struct DualizingData {
  RingPtr ring;
  CartierModule omega;
  std::vector<Polynomial> basis;

  static DualizingData make(const RingPtr& ring) {
    std::vector<Polynomial> basis;
    for (std::size_t code = 0; code < ring->frobenius_rank(); ++code)
      basis.push_back(Polynomial::monomial(ring, exponent_digits(code, ring->p(), ring->nvars()), ring->f().one()));
    return {ring, standard_omega(ring), std::move(basis)};
  }

  Polynomial dual(std::size_t code, const Polynomial& f) const { return frobenius_decompose(f)[code]; }
  /// Code of (p-1, ..., p-1) - a.
  std::size_t complement(std::size_t code) const { return basis.size() - 1 - code; }
};

class GammaSheaf {
 public:
  /// columns[j] = gamma(m_j) in the coordinates 1 (x) m_i of F^*N.
  GammaSheaf(RingPtr ring, IdealSpec ideal, std::size_t rank, std::vector<Vec> relations, std::vector<Vec> columns,
             std::vector<std::string> names = {})
      : ring_(std::move(ring)), rel_(ring_, ideal, rank, relations),
        fstar_rel_(ring_, ideal, rank, frobenius_vecs(relations)), rank_(rank),
        columns_(std::move(columns)), names_(std::move(names)) {
    require(columns_.size() == rank_, ErrorCode::kDimensionMismatch, "gamma needs one column per generator");
    for (auto& c : columns_) {
      require(c.size() == rank_, ErrorCode::kDimensionMismatch, "gamma column has wrong length");
      c = fstar_rel_.reduce(std::move(c));
    }
    if (names_.empty())
      for (std::size_t i = 0; i < rank_; ++i) names_.push_back("n" + std::to_string(i + 1));
    require(names_.size() == rank_, ErrorCode::kValidation, "one name per generator");
    require(well_defined(), ErrorCode::kValidation, "gamma does not map relations into F^*(relations)");
  }

  static GammaSheaf structure_sheaf(const RingPtr& ring, const IdealSpec& ideal) {
    return GammaSheaf(ring, ideal, 1, {}, {unit_vec(ring, 1, 0)}, {"1"});
  }
  static GammaSheaf structure_sheaf(const RingPtr& ring) { return structure_sheaf(ring, IdealSpec::zero(ring)); }

  const RingPtr& ring() const { return ring_; }
  const IdealSpec& ideal() const { return rel_.ideal(); }
  const Relations& rel() const { return rel_; }
  const Relations& fstar_rel() const { return fstar_rel_; }
  std::size_t rank() const { return rank_; }
  const std::vector<Vec>& relations() const { return rel_.explicit_relations(); }
  const std::vector<Vec>& columns() const { return columns_; }
  const Polynomial& entry(std::size_t i, std::size_t j) const { return columns_[j][i]; }
  const std::vector<std::string>& names() const { return names_; }

  Vec zero() const { return zero_vec(ring_, rank_); }
  bool is_zero_elem(const Vec& v) const { return rel_.contains(v); }
  bool is_zero_module() const {
    for (std::size_t i = 0; i < rank_; ++i)
      if (!is_zero_elem(unit_vec(ring_, rank_, i))) return false;
    return true;
  }

  /// gamma(sum_j v_j m_j) = sum_j v_j gamma(m_j), reduced in F^*N.
  Vec apply(const Vec& v) const {
    require(v.size() == rank_, ErrorCode::kDimensionMismatch, "element has wrong length");
    return fstar_rel_.reduce(apply_columns(columns_, v, ring_, rank_));
  }

  bool well_defined() const {
    for (const auto& rho : rel_.generators())
      if (!fstar_rel_.contains(apply_columns(columns_, rho, ring_, rank_))) return false;
    return true;
  }

 private:
  RingPtr ring_;
  Relations rel_;
  Relations fstar_rel_;
  std::size_t rank_;
  std::vector<Vec> columns_;
  std::vector<std::string> names_;
};

/// Same presentation and same gamma matrix.
inline bool same_gamma(const GammaSheaf& a, const GammaSheaf& b) {
  if (!a.ring()->same_ring(*b.ring()) || !(a.ideal() == b.ideal()) || a.rank() != b.rank()) return false;
  if (a.rel().pid() && !(a.rel().submodule() == b.rel().submodule())) return false;
  for (std::size_t j = 0; j < a.rank(); ++j)
    if (!vec_equal(a.columns()[j], b.columns()[j])) return false;
  return true;
}

/// Same presentation and same kappa table.
inline bool same_cartier(const CartierModule& a, const CartierModule& b) {
  if (!a.ring()->same_ring(*b.ring()) || !(a.ideal() == b.ideal()) || a.rank() != b.rank()) return false;
  if (a.rel().pid() && !(relation_submodule(a) == relation_submodule(b))) return false;
  for (std::size_t k = 0; k < a.table().size(); ++k)
    if (!vec_equal(a.table()[k], b.table()[k])) return false;
  return true;
}

/// C_ij = sum_a s_{(p-1)-a} (K^(a)_ij)^p where K^(a)_ij is the m_i-coefficient
/// of kappa(x^a m_j).
inline GammaSheaf cartier_to_gamma(const CartierModule& m, const DualizingData& d) {
  require(m.ring()->same_ring(*d.ring), ErrorCode::kContextMismatch, "dualizing data for another ring");
  require(m.ideal().is_zero_ideal(), ErrorCode::kUnsupported, "the dictionary needs a polynomial ring or a point");
  const std::size_t r = m.rank();
  std::vector<Vec> cols(r, m.zero());
  for (std::size_t code = 0; code < m.monomials(); ++code) {
    const Polynomial& s = d.basis[d.complement(code)];
    for (std::size_t j = 0; j < r; ++j) {
      const Vec& k = m.kappa_of(code, j);
      for (std::size_t i = 0; i < r; ++i)
        if (!k[i].is_zero()) cols[j][i] += s * k[i].frobenius();
    }
  }
  return GammaSheaf(m.ring(), m.ideal(), r, m.relations(), std::move(cols), m.names());
}

inline GammaSheaf cartier_to_gamma(const CartierModule& m) { return cartier_to_gamma(m, DualizingData::make(m.ring())); }

/// Inverse: K^(a)_ij = phi_{(p-1)-a}(C_ij).
inline CartierModule gamma_to_cartier(const GammaSheaf& n, const DualizingData& d) {
  require(n.ring()->same_ring(*d.ring), ErrorCode::kContextMismatch, "dualizing data for another ring");
  require(n.ideal().is_zero_ideal(), ErrorCode::kUnsupported, "the dictionary needs a polynomial ring or a point");
  const std::size_t r = n.rank();
  const std::size_t P = d.basis.size();
  std::vector<Vec> table(P * r, n.zero());
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < r; ++i) {
      if (n.entry(i, j).is_zero()) continue;
      auto parts = frobenius_decompose(n.entry(i, j));
      for (std::size_t code = 0; code < P; ++code) table[code * r + j][i] = parts[d.complement(code)];
    }
  return CartierModule(n.ring(), n.ideal(), r, n.relations(), std::move(table), n.names());
}

inline CartierModule gamma_to_cartier(const GammaSheaf& n) { return gamma_to_cartier(n, DualizingData::make(n.ring())); }

/// F^*N with gamma_{F^*N} = F^*gamma, matrix C^[p].
inline GammaSheaf frobenius_pullback(const GammaSheaf& n) {
  std::vector<std::string> names;
  for (const auto& nm : n.names()) names.push_back("F*" + nm);
  return GammaSheaf(n.ring(), n.ideal(), n.rank(), frobenius_vecs(n.relations()), frobenius_vecs(n.columns()),
                    std::move(names));
}

/// Columns of gamma_e = F^{(e-1)*}gamma o ... o gamma : N -> F^{e*}N, reduced
/// modulo Rel^[p^e] + I.
inline std::vector<Vec> iterated_gamma(const GammaSheaf& n, std::size_t e) {
  const auto& ring = n.ring();
  const std::size_t r = n.rank();
  std::vector<Vec> cols;
  for (std::size_t j = 0; j < r; ++j) cols.push_back(unit_vec(ring, r, j));
  std::vector<Vec> rels = n.relations();
  for (std::size_t k = 0; k < e; ++k) {
    rels = frobenius_vecs(rels);
    Relations target(ring, n.ideal(), r, rels);
    std::vector<Vec> next;
    for (std::size_t j = 0; j < r; ++j) {
      Vec v = zero_vec(ring, r);
      for (std::size_t i = 0; i < r; ++i)
        if (!n.entry(i, j).is_zero()) add_scaled(v, frobenius_vec(cols[i]), n.entry(i, j));
      next.push_back(target.reduce(std::move(v)));
    }
    cols = std::move(next);
  }
  if (e == 0) {
    for (auto& c : cols) c = n.rel().reduce(std::move(c));
  }
  return cols;
}

/// First e <= bound with gamma_e = 0, if any.
inline std::optional<std::size_t> gamma_nilpotent_direct(const GammaSheaf& n, std::size_t bound) {
  for (std::size_t e = 0; e <= bound; ++e) {
    bool zero = true;
    for (const auto& c : iterated_gamma(n, e)) zero = zero && ::cartier_lab::is_zero(c);
    if (zero) return e;
  }
  return std::nullopt;
}

struct GammaNilpotency {
  bool nilpotent = false;
  std::optional<std::size_t> order;
  std::size_t chain_length = 0;
  bool direct_agrees = false;
};

/// Transported through gamma_to_cartier, then confirmed by iterating gamma
/// itself up to the length of the transported image chain.
inline GammaNilpotency gamma_nilpotent(const GammaSheaf& n, const StabilizationLimits& limits = {}) {
  auto t = is_nilpotent(gamma_to_cartier(n), limits);
  GammaNilpotency out{t.nilpotent, t.order, t.chain_length, false};
  out.direct_agrees = gamma_nilpotent_direct(n, t.chain_length) == t.order;
  return out;
}

/// Image chain of the transported Cartier module.
inline ChainResult gamma_image_chain(const GammaSheaf& n, const StabilizationLimits& limits = {}) {
  return image_chain(gamma_to_cartier(n), limits);
}

/// The subsheaf generated by `gens`, with gamma expressed through F^*(gens).
inline GammaSheaf gamma_subsheaf(const GammaSheaf& n, const std::vector<Vec>& gens, std::vector<std::string> names = {}) {
  const auto& ring = n.ring();
  const Submodule rel = n.rel().submodule();
  const Submodule frel = n.fstar_rel().submodule();
  const std::size_t s = gens.size();
  std::vector<Vec> fgens = frobenius_vecs(gens);
  fgens.insert(fgens.end(), frel.rows().begin(), frel.rows().end());
  const auto fspan = Submodule::generated(ring, n.rank(), std::move(fgens));
  std::vector<Vec> cols;
  for (const auto& g : gens) {
    auto c = fspan.express(n.apply(g));
    require(c.has_value(), ErrorCode::kValidation, "subsheaf is not gamma-stable");
    cols.emplace_back(c->begin(), c->begin() + static_cast<std::ptrdiff_t>(s));
  }
  return GammaSheaf(ring, IdealSpec::zero(ring), s, preimage(ring, s, gens, rel).rows(), std::move(cols),
                    std::move(names));
}

/// ker(gamma) as a submodule of R^r containing Rel.
inline Submodule gamma_kernel_submodule(const GammaSheaf& n) {
  return preimage(n.ring(), n.rank(), n.columns(), n.fstar_rel().submodule());
}

struct DefectPart {
  GammaSheaf sheaf;
  bool nilpotent = false;
  std::optional<std::size_t> order;
};

struct UnitDefect {
  DefectPart kernel;
  DefectPart cokernel;
};

inline DefectPart defect_part(GammaSheaf s) {
  // gamma is zero on either part, so order <= 1 is found directly.
  auto order = gamma_nilpotent_direct(s, 1);
  return {std::move(s), order.has_value(), order};
}

/// Kernel and cokernel of gamma: N -> F^*N with their induced gamma-structures.
inline UnitDefect gamma_unit_defect(const GammaSheaf& n) {
  require(n.ring()->nvars() <= 1, ErrorCode::kUnsupported, "unit defect needs F_q or F_q[x]");
  const auto& ring = n.ring();
  const auto ker = gamma_kernel_submodule(n);
  std::vector<Vec> kgens;
  for (const auto& row : ker.rows())
    if (!n.is_zero_elem(row)) kgens.push_back(row);
  std::vector<std::string> knames;
  for (std::size_t i = 0; i < kgens.size(); ++i) knames.push_back("k" + std::to_string(i + 1));
  auto ksheaf = gamma_subsheaf(n, kgens, std::move(knames));

  auto img = n.fstar_rel().submodule().plus(n.columns());
  std::vector<std::string> cnames;
  for (const auto& nm : n.names()) cnames.push_back("F*" + nm);
  GammaSheaf coker(ring, IdealSpec::zero(ring), n.rank(), img.rows(), frobenius_vecs(n.columns()), std::move(cnames));
  return {defect_part(std::move(ksheaf)), defect_part(std::move(coker))};
}

/// N / IN with the gamma-matrix reduced modulo I.
inline GammaSheaf gamma_pullback(const GammaSheaf& n, const IdealSpec& ideal) {
  require(ideal.ring()->same_ring(*n.ring()), ErrorCode::kContextMismatch, "ideal in another ring");
  return GammaSheaf(n.ring(), n.ideal() + ideal, n.rank(), n.relations(), n.columns(), n.names());
}

struct UnitRoot {
  GammaSheaf root;
  bool injective = false;
  std::size_t steps = 0;
  Submodule kernel;  // ker(N -> F^{e*}N) for the stabilized e, containing Rel
};

/// K_0 = Rel, K_{e+1} = gamma^{-1}(F^*K_e); the root is N / K_infinity.
inline UnitRoot unit_root_stabilize(const GammaSheaf& n, const StabilizationLimits& limits = {}) {
  require(n.ring()->nvars() <= 1, ErrorCode::kUnsupported, "unit roots need F_q or F_q[x]");
  const auto& ring = n.ring();
  Submodule k = n.rel().submodule();
  for (std::size_t it = 0;; ++it) {
    if (it >= limits.max_iter) fail(ErrorCode::kNonStabilized, "unit root kernel chain did not stabilize");
    auto target = n.fstar_rel().submodule().plus(frobenius_vecs(k.rows()));
    auto next = preimage(ring, n.rank(), n.columns(), target);
    if (next == k) {
      GammaSheaf root(ring, n.ideal(), n.rank(), k.rows(), n.columns(), n.names());
      const bool inj = gamma_kernel_submodule(root) == root.rel().submodule();
      return {std::move(root), inj, it, std::move(k)};
    }
    k = std::move(next);
  }
}

/// Inverse of a square matrix over F_q given by columns.
inline std::vector<Row> invert_columns(const FrobeniusContext& f, const std::vector<Row>& cols) {
  const std::size_t n = cols.size();
  std::vector<Row> rows(n, Row(2 * n, f.zero()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = cols[j][i];
    rows[i][n + i] = f.one();
  }
  auto piv = rref(f, rows, n);
  require(piv.size() == n && (n == 0 || piv.back() == n - 1), ErrorCode::kInvariantViolation, "matrix is singular");
  std::vector<Row> inv(n, Row(n, f.zero()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv[j][i] = rows[i][n + j];
  return inv;
}

/// The p-linear map v -> gamma^{-1}(v^[p]) on a basis of the unit root of a
/// zero-dimensional gamma-sheaf. Its fixed points are the solutions.
inline SemilinearMap root_frobenius(const GammaSheaf& n, const StabilizationLimits& limits = {}) {
  require(n.ring()->nvars() == 0 && n.ideal().is_zero_ideal(), ErrorCode::kUnsupported,
          "solutions are computed at a point");
  const auto& f = n.ring()->field();
  auto u = unit_root_stabilize(n, limits);
  require(u.injective, ErrorCode::kInvariantViolation, "unit root is not injective");
  std::vector<bool> pivot(n.rank(), false);
  for (auto c : u.kernel.pivots()) pivot[c] = true;
  std::vector<std::size_t> basis;
  for (std::size_t i = 0; i < n.rank(); ++i)
    if (!pivot[i]) basis.push_back(i);
  std::vector<Row> cols;
  for (std::size_t j : basis) {
    const Vec& c = u.root.columns()[j];
    Row col;
    for (std::size_t i : basis) col.push_back(c[i].constant_term());
    cols.push_back(std::move(col));
  }
  return SemilinearMap(f, Twist::kPLinear, invert_columns(*f, cols));
}

/// dim_{F_p} of the solution space over F_{q^m}, m = 1..max_m.
inline std::vector<std::size_t> sol_dimension_gamma(const GammaSheaf& n, std::size_t max_m,
                                                    const StabilizationLimits& limits = {}) {
  auto t = root_frobenius(n, limits);
  std::vector<std::size_t> out;
  for (std::size_t m = 1; m <= max_m; ++m) out.push_back(fixed_points_dimension(t, m));
  return out;
}

inline std::vector<std::size_t> sol_dimension(const CartierModule& m, std::size_t max_m,
                                              const StabilizationLimits& limits = {}) {
  require(m.ring()->nvars() == 0, ErrorCode::kValidation, "solutions need a zero-dimensional module");
  return sol_dimension_gamma(cartier_to_gamma(m), max_m, limits);
}

}  // namespace cartier_lab
