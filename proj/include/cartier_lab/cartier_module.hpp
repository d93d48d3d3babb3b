#pragma once

// Coherent Cartier modules M = R^r / Rel over R = F_q[x_1..x_n] / I with a
// p^{-1}-linear structural map kappa, stored as the table of values
// kappa(x^a m_i) for a in [0,p)^n.

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cartier_lab/groebner.hpp"
#include "cartier_lab/linalg.hpp"
#include "cartier_lab/pid_module.hpp"
#include "cartier_lab/semilinear.hpp"

namespace cartier_lab {

/// Relation data of R^r / Rel over R / I. Over F_q and F_q[x] the relations
/// and the ideal are folded into one Hermite-form submodule; in more
/// variables the module must be free over R / I.
class Relations {
 public:
  Relations(const RingPtr& ring, const IdealSpec& ideal, std::size_t rank, std::vector<Vec> rels)
      : ring_(ring), ideal_(ideal), rank_(rank), extra_(std::move(rels)) {
    for (const auto& v : extra_)
      require(v.size() == rank_, ErrorCode::kDimensionMismatch, "relation has wrong length");
    if (ring_->nvars() <= 1) {
      sub_ = Submodule::generated(ring_, rank_, generators());
    } else {
      for (const auto& v : extra_)
        require(::cartier_lab::is_zero(reduce_coordinates(v)), ErrorCode::kUnsupported,
                "explicit relations need at most one variable");
      extra_.clear();
    }
  }

  const IdealSpec& ideal() const { return ideal_; }
  std::size_t rank() const { return rank_; }
  bool pid() const { return sub_.has_value(); }
  const Submodule& submodule() const {
    require(pid(), ErrorCode::kUnsupported, "submodule arithmetic needs F_q or F_q[x]");
    return *sub_;
  }
  const std::vector<Vec>& explicit_relations() const { return extra_; }

  /// Explicit relations followed by g e_i for every Gröbner element g.
  std::vector<Vec> generators() const {
    std::vector<Vec> out = extra_;
    for (const auto& g : ideal_.groebner())
      for (std::size_t i = 0; i < rank_; ++i) {
        Vec v = zero_vec(ring_, rank_);
        v[i] = g;
        out.push_back(std::move(v));
      }
    return out;
  }

  Vec reduce(Vec v) const {
    if (sub_) return sub_->reduce(std::move(v));
    return reduce_coordinates(std::move(v));
  }

  bool contains(const Vec& v) const { return ::cartier_lab::is_zero(reduce(v)); }

 private:
  Vec reduce_coordinates(Vec v) const {
    for (auto& x : v) x = ideal_.normal_form(x);
    return v;
  }

  RingPtr ring_;
  IdealSpec ideal_;
  std::size_t rank_;
  std::vector<Vec> extra_;
  std::optional<Submodule> sub_;
};

class CartierModule {
 public:
  /// table[code * rank + i] = kappa(x^a m_i), a the base-p digits of code.
  CartierModule(RingPtr ring, IdealSpec ideal, std::size_t rank, std::vector<Vec> relations,
                std::vector<Vec> table, std::vector<std::string> names = {})
      : ring_(std::move(ring)), rel_(ring_, ideal, rank, std::move(relations)), rank_(rank),
        table_(std::move(table)), names_(std::move(names)) {
    require(table_.size() == ring_->frobenius_rank() * rank_, ErrorCode::kValidation,
            "kappa table needs one entry per monomial and generator");
    for (auto& v : table_) {
      require(v.size() == rank_, ErrorCode::kDimensionMismatch, "kappa value has wrong length");
      v = rel_.reduce(std::move(v));
    }
    if (names_.empty())
      for (std::size_t i = 0; i < rank_; ++i) names_.push_back("m" + std::to_string(i + 1));
    require(names_.size() == rank_, ErrorCode::kValidation, "one name per generator");
    require(well_defined(), ErrorCode::kValidation, "kappa does not preserve the relations");
  }

  static CartierModule free(const RingPtr& ring, std::size_t rank, std::vector<Vec> table,
                            std::vector<std::string> names = {}) {
    return CartierModule(ring, IdealSpec::zero(ring), rank, {}, std::move(table), std::move(names));
  }

  const RingPtr& ring() const { return ring_; }
  const IdealSpec& ideal() const { return rel_.ideal(); }
  const Relations& rel() const { return rel_; }
  std::size_t rank() const { return rank_; }
  const std::vector<Vec>& relations() const { return rel_.explicit_relations(); }
  const std::vector<Vec>& table() const { return table_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t monomials() const { return ring_->frobenius_rank(); }
  const Vec& kappa_of(std::size_t code, std::size_t i) const { return table_[code * rank_ + i]; }

  Vec zero() const { return zero_vec(ring_, rank_); }
  Vec generator(std::size_t i) const { return unit_vec(ring_, rank_, i); }
  Vec reduce(Vec v) const { return rel_.reduce(std::move(v)); }
  bool is_zero_elem(const Vec& v) const { return rel_.contains(v); }
  bool equal_elems(const Vec& a, const Vec& b) const { return rel_.contains(a - b); }

  bool is_zero_module() const {
    for (std::size_t i = 0; i < rank_; ++i)
      if (!is_zero_elem(generator(i))) return false;
    return true;
  }

  /// kappa(sum_i f_i m_i) = sum_{i,a} g_{i,a} kappa(x^a m_i) where f_i = sum_a g_{i,a}^p x^a.
  Vec apply_kappa(const Vec& v) const {
    require(v.size() == rank_, ErrorCode::kDimensionMismatch, "element has wrong length");
    Vec out = zero();
    for (std::size_t i = 0; i < rank_; ++i) {
      if (v[i].is_zero()) continue;
      require(v[i].ring()->same_ring(*ring_), ErrorCode::kContextMismatch, "element from another ring");
      auto parts = frobenius_decompose(v[i]);
      for (std::size_t code = 0; code < parts.size(); ++code)
        if (!parts[code].is_zero()) add_scaled(out, kappa_of(code, i), parts[code]);
    }
    return reduce(std::move(out));
  }

  Vec kappa_power(std::size_t n, Vec v) const {
    v = reduce(std::move(v));
    for (std::size_t k = 0; k < n && !::cartier_lab::is_zero(v); ++k) v = apply_kappa(v);
    return v;
  }

  /// kappa(x^b rho) lies in Rel for every relation generator rho and every b.
  bool well_defined() const {
    const std::size_t n = ring_->nvars();
    for (const auto& rho : rel_.generators())
      for (std::size_t code = 0; code < monomials(); ++code) {
        const Exponents b = exponent_digits(code, ring_->p(), n);
        const Polynomial mono = Polynomial::monomial(ring_, b, ring_->f().one());
        if (!is_zero_elem(apply_kappa(scaled(rho, mono)))) return false;
      }
    return true;
  }

  /// Renders sum f_i m_i as "f1*name1+...", omitting unit coefficients.
  std::string element_string(const Vec& v) const {
    std::string out;
    for (std::size_t i = 0; i < rank_; ++i) {
      if (v[i].is_zero()) continue;
      std::string term;
      if (v[i] == Polynomial::one(ring_))
        term = names_[i];
      else if (v[i].size() == 1)
        term = v[i].to_string() + "*" + names_[i];
      else
        term = "(" + v[i].to_string() + ")*" + names_[i];
      if (!out.empty()) out += "+";
      out += term;
    }
    return out.empty() ? "0" : out;
  }

 private:
  RingPtr ring_;
  Relations rel_;
  std::size_t rank_;
  std::vector<Vec> table_;
  std::vector<std::string> names_;
};

inline std::string omega_name(const PolyRing& ring) {
  if (ring.nvars() == 0) return "w";
  std::string s;
  for (const auto& v : ring.vars()) s += "d" + v;
  return s;
}

/// (omega, kappa) with kappa(x^a dx) = x^{(a+1)/p - 1} dx when every
/// exponent is integral, zero otherwise. On the basis table this is the
/// indicator of a = (p-1, ..., p-1).
inline CartierModule standard_omega(const RingPtr& ring) {
  const std::size_t count = ring->frobenius_rank();
  std::vector<Vec> table(count, zero_vec(ring, 1));
  table[count - 1][0] = Polynomial::one(ring);
  return CartierModule::free(ring, 1, std::move(table), {omega_name(*ring)});
}

/// The free module R^r with kappa(x^a m_i) = sum_j c_{a,j,i} m_j given by a
/// function of (code, i).
template <class F>
CartierModule free_module_from(const RingPtr& ring, std::size_t rank, F&& entry) {
  std::vector<Vec> table;
  for (std::size_t code = 0; code < ring->frobenius_rank(); ++code)
    for (std::size_t i = 0; i < rank; ++i) table.push_back(entry(code, i));
  return CartierModule::free(ring, rank, std::move(table));
}

/// Zero-dimensional module F_q^r with kappa given by a p^{-1}-linear map.
inline CartierModule point_module(const SemilinearMap& t, std::vector<std::string> names = {}) {
  require(t.kind() == Twist::kPInvLinear, ErrorCode::kValidation, "Cartier structure is p^{-1}-linear");
  auto ring = PolyRing::make(t.field(), {});
  std::vector<Vec> table;
  for (std::size_t i = 0; i < t.dim(); ++i) {
    Vec v;
    for (auto c : t.images()[i]) v.push_back(Polynomial::constant(ring, c));
    table.push_back(std::move(v));
  }
  return CartierModule::free(ring, t.dim(), std::move(table), std::move(names));
}

inline CartierModule direct_sum(const CartierModule& a, const CartierModule& b) {
  require(a.ring()->same_ring(*b.ring()) && a.ideal() == b.ideal(), ErrorCode::kContextMismatch,
          "direct sum over different rings");
  const auto& ring = a.ring();
  const std::size_t r = a.rank() + b.rank();
  auto embed = [&](const Vec& v, std::size_t offset) {
    Vec out = zero_vec(ring, r);
    for (std::size_t k = 0; k < v.size(); ++k) out[offset + k] = v[k];
    return out;
  };
  std::vector<Vec> rels;
  for (const auto& v : a.relations()) rels.push_back(embed(v, 0));
  for (const auto& v : b.relations()) rels.push_back(embed(v, a.rank()));
  std::vector<Vec> table;
  for (std::size_t code = 0; code < a.monomials(); ++code) {
    for (std::size_t i = 0; i < a.rank(); ++i) table.push_back(embed(a.kappa_of(code, i), 0));
    for (std::size_t i = 0; i < b.rank(); ++i) table.push_back(embed(b.kappa_of(code, i), a.rank()));
  }
  std::vector<std::string> names = a.names();
  names.insert(names.end(), b.names().begin(), b.names().end());
  std::map<std::string, int> seen;
  for (auto& nm : names)
    if (seen[nm]++ > 0) nm += "_" + std::to_string(seen[nm]);
  return CartierModule(ring, a.ideal(), r, std::move(rels), std::move(table), std::move(names));
}

// --- submodules over F_q and F_q[x] ------------------------------------------------

inline Submodule relation_submodule(const CartierModule& m) { return m.rel().submodule(); }

inline Submodule whole_submodule(const CartierModule& m) {
  return relation_submodule(m) + Submodule::whole(m.ring(), m.rank());
}

/// The R-span of kappa(x^b s) over generators s of S, plus the relations.
inline Submodule kappa_image(const CartierModule& m, const Submodule& s) {
  const auto& ring = m.ring();
  std::vector<Vec> gens;
  for (const auto& row : s.rows())
    for (std::size_t code = 0; code < m.monomials(); ++code) {
      const Exponents b = exponent_digits(code, ring->p(), ring->nvars());
      gens.push_back(m.apply_kappa(scaled(row, Polynomial::monomial(ring, b, ring->f().one()))));
    }
  return relation_submodule(m).plus(gens);
}

inline bool is_kappa_stable(const CartierModule& m, const Submodule& s) {
  return s.contains(kappa_image(m, s));
}

struct ChainResult {
  std::vector<Submodule> chain;
  StabilizationStatus status = StabilizationStatus::kStabilized;
};

/// M ⊇ kappa(M) ⊇ kappa^2(M) ⊇ ... up to the first repeated member (as
/// submodules of R^r containing Rel).
inline ChainResult image_chain(const CartierModule& m, const StabilizationLimits& limits = {}) {
  ChainResult out;
  out.chain.push_back(whole_submodule(m));
  for (std::size_t it = 0;; ++it) {
    if (it >= limits.max_iter) {
      out.status = StabilizationStatus::kNonStabilized;
      return out;
    }
    Submodule next = kappa_image(m, out.chain.back());
    if (next == out.chain.back()) return out;
    out.chain.push_back(std::move(next));
  }
}

inline void require_stabilized(StabilizationStatus s, const std::string& what) {
  if (s == StabilizationStatus::kNonStabilized) fail(ErrorCode::kNonStabilized, what);
}

struct NilpotencyResult {
  bool nilpotent = false;
  std::optional<std::size_t> order;
  std::size_t chain_length = 0;
};

inline NilpotencyResult is_nilpotent(const CartierModule& m, const StabilizationLimits& limits = {}) {
  auto c = image_chain(m, limits);
  require_stabilized(c.status, "image chain did not stabilize");
  NilpotencyResult out;
  out.chain_length = c.chain.size();
  if (c.chain.back() == relation_submodule(m)) {
    out.nilpotent = true;
    out.order = c.chain.size() - 1;
  }
  return out;
}

/// The module generated by `gens` inside M, with kappa restricted. Relations
/// are the syzygies of gens modulo Rel; kappa values are expressed through gens.
inline CartierModule submodule_module(const CartierModule& m, const std::vector<Vec>& gens,
                                      std::vector<std::string> names = {}) {
  const auto& ring = m.ring();
  const Submodule rel = relation_submodule(m);
  const std::size_t s = gens.size();
  Submodule span = Submodule::generated(ring, m.rank(), [&] {
    std::vector<Vec> all = gens;
    all.insert(all.end(), rel.rows().begin(), rel.rows().end());
    return all;
  }());
  std::vector<Vec> relations = preimage(ring, s, gens, rel).rows();
  std::vector<Vec> table;
  for (std::size_t code = 0; code < m.monomials(); ++code) {
    const Exponents b = exponent_digits(code, ring->p(), ring->nvars());
    const Polynomial mono = Polynomial::monomial(ring, b, ring->f().one());
    for (std::size_t j = 0; j < s; ++j) {
      auto c = span.express(m.apply_kappa(scaled(gens[j], mono)));
      require(c.has_value(), ErrorCode::kValidation, "submodule is not kappa-stable");
      table.emplace_back(c->begin(), c->begin() + static_cast<std::ptrdiff_t>(s));
    }
  }
  return CartierModule(ring, IdealSpec::zero(ring), s, std::move(relations), std::move(table), std::move(names));
}

/// Generators of S that are nonzero in M.
inline std::vector<Vec> nonzero_generators(const CartierModule& m, const Submodule& s) {
  std::vector<Vec> out;
  for (const auto& row : s.rows())
    if (!m.is_zero_elem(row)) out.push_back(row);
  return out;
}

inline CartierModule submodule_module(const CartierModule& m, const Submodule& s) {
  return submodule_module(m, nonzero_generators(m, s));
}

/// M / S for a kappa-stable S containing Rel.
inline CartierModule quotient_module(const CartierModule& m, const Submodule& s) {
  require(is_kappa_stable(m, s), ErrorCode::kValidation, "quotient by a non-kappa-stable submodule");
  auto rel = relation_submodule(m) + s;
  return CartierModule(m.ring(), IdealSpec::zero(m.ring()), m.rank(), rel.rows(), m.table(), m.names());
}

struct StableImage {
  Submodule sigma;
  std::size_t chain_length;
};

inline StableImage stable_image(const CartierModule& m, const StabilizationLimits& limits = {}) {
  auto c = image_chain(m, limits);
  require_stabilized(c.status, "image chain did not stabilize");
  return {c.chain.back(), c.chain.size()};
}

/// Largest nilpotent kappa-submodule: B_0 = 0, B_{k+1} = {m : kappa(x^b m) in B_k for all b},
/// each step the kernel of the R-linear map F_*M -> (M/B_k)^{p^n}.
inline Submodule max_nilpotent_submodule(const CartierModule& m, const StabilizationLimits& limits = {}) {
  const auto& ring = m.ring();
  const std::size_t n = ring->nvars();
  const std::size_t P = m.monomials();
  const std::size_t r = m.rank();
  const Elem one = ring->f().one();
  std::vector<Polynomial> monos;
  for (std::size_t code = 0; code < P; ++code) monos.push_back(Polynomial::monomial(ring, exponent_digits(code, ring->p(), n), one));

  // F_*M generator (c, i) is x^c m_i; its image is (kappa(x^b x^c m_i))_b.
  std::vector<Vec> images;
  for (std::size_t c = 0; c < P; ++c)
    for (std::size_t i = 0; i < r; ++i) {
      Vec img;
      for (std::size_t b = 0; b < P; ++b) {
        Vec k = m.apply_kappa(scaled(m.generator(i), monos[b] * monos[c]));
        img.insert(img.end(), k.begin(), k.end());
      }
      images.push_back(std::move(img));
    }
  auto pull_back = [&](const Vec& u) {
    Vec out = m.zero();
    for (std::size_t c = 0; c < P; ++c)
      for (std::size_t i = 0; i < r; ++i)
        if (!u[c * r + i].is_zero()) out[i] += u[c * r + i].frobenius() * monos[c];
    return out;
  };

  Submodule current = relation_submodule(m);
  for (std::size_t it = 0; it < limits.max_iter; ++it) {
    std::vector<Vec> target_gens;
    for (std::size_t b = 0; b < P; ++b)
      for (const auto& row : current.rows()) {
        Vec v = zero_vec(ring, P * r);
        for (std::size_t i = 0; i < r; ++i) v[b * r + i] = row[i];
        target_gens.push_back(std::move(v));
      }
    auto target = Submodule::generated(ring, P * r, std::move(target_gens));
    auto kernel = preimage(ring, P * r, images, target);
    std::vector<Vec> gens;
    for (const auto& u : kernel.rows()) gens.push_back(pull_back(u));
    Submodule next = current.plus(gens);
    if (next == current) return current;
    current = std::move(next);
  }
  fail(ErrorCode::kNonStabilized, "maximal nilpotent submodule did not stabilize");
}

// --- morphisms -------------------------------------------------------------------------

class CartierMorphism {
 public:
  /// images[i] = phi(m_i) in the target.
  CartierMorphism(CartierModule source, CartierModule target, std::vector<Vec> images)
      : source_(std::move(source)), target_(std::move(target)), images_(std::move(images)) {
    require(source_.ring()->same_ring(*target_.ring()), ErrorCode::kContextMismatch,
            "morphism between modules over different rings");
    require(images_.size() == source_.rank(), ErrorCode::kDimensionMismatch, "one image per generator");
    for (auto& v : images_) {
      require(v.size() == target_.rank(), ErrorCode::kDimensionMismatch, "image has wrong length");
      v = target_.reduce(std::move(v));
    }
    require(respects_relations(), ErrorCode::kValidation, "morphism does not respect relations");
    require(commutes(), ErrorCode::kValidation, "morphism does not commute with kappa");
  }

  static CartierMorphism identity(const CartierModule& m) {
    std::vector<Vec> imgs;
    for (std::size_t i = 0; i < m.rank(); ++i) imgs.push_back(m.generator(i));
    return CartierMorphism(m, m, std::move(imgs));
  }

  static CartierMorphism zero(const CartierModule& s, const CartierModule& t) {
    return CartierMorphism(s, t, std::vector<Vec>(s.rank(), t.zero()));
  }

  const CartierModule& source() const { return source_; }
  const CartierModule& target() const { return target_; }
  const std::vector<Vec>& images() const { return images_; }

  Vec apply(const Vec& v) const {
    return target_.reduce(apply_columns(images_, v, source_.ring(), target_.rank()));
  }

  CartierMorphism then(const CartierMorphism& next) const {
    std::vector<Vec> imgs;
    for (const auto& v : images_) imgs.push_back(next.apply(v));
    return CartierMorphism(source_, next.target_, std::move(imgs));
  }

  bool equals(const CartierMorphism& o) const {
    for (std::size_t i = 0; i < images_.size(); ++i)
      if (!target_.equal_elems(images_[i], o.images_[i])) return false;
    return true;
  }

 private:
  bool respects_relations() const {
    for (const auto& rho : source_.rel().generators())
      if (!target_.is_zero_elem(apply(rho))) return false;
    return true;
  }

  bool commutes() const {
    const auto& ring = source_.ring();
    for (std::size_t code = 0; code < source_.monomials(); ++code) {
      const auto mono = Polynomial::monomial(ring, exponent_digits(code, ring->p(), ring->nvars()), ring->f().one());
      for (std::size_t i = 0; i < source_.rank(); ++i) {
        const Vec lhs = apply(source_.kappa_of(code, i));
        const Vec rhs = target_.apply_kappa(scaled(images_[i], mono));
        if (!target_.equal_elems(lhs, rhs)) return false;
      }
    }
    return true;
  }

  CartierModule source_;
  CartierModule target_;
  std::vector<Vec> images_;
};

/// ker(phi) as a submodule of R^{r_M} containing Rel_M.
inline Submodule kernel_submodule(const CartierMorphism& phi) {
  return preimage(phi.source().ring(), phi.source().rank(), phi.images(), relation_submodule(phi.target()));
}

inline Submodule image_submodule(const CartierMorphism& phi) {
  return relation_submodule(phi.target()).plus(phi.images());
}

inline CartierModule kernel(const CartierMorphism& phi) {
  return submodule_module(phi.source(), kernel_submodule(phi));
}

inline CartierModule cokernel(const CartierMorphism& phi) {
  return quotient_module(phi.target(), image_submodule(phi));
}

/// The image presented on the generators phi(m_i).
inline CartierModule image(const CartierMorphism& phi) {
  return submodule_module(phi.target(), phi.images(), phi.source().names());
}

struct HomResult {
  std::vector<CartierMorphism> basis;
  bool partial = false;
  int degree_cap = 0;
};

/// F_p-basis of Cartier morphisms M -> N. In one variable the entries are
/// searched in normal form with free-column degree at most D.
inline HomResult hom_cartier(const CartierModule& m, const CartierModule& nmod, std::optional<int> cap = {}) {
  const auto& ring = m.ring();
  require(ring->same_ring(*nmod.ring()), ErrorCode::kContextMismatch, "modules over different rings");
  require(ring->nvars() <= 1, ErrorCode::kUnsupported, "hom needs F_q or F_q[x]");
  const auto& f = ring->f();
  HomResult out;
  int max_rel = 0;
  for (const auto& v : m.rel().generators())
    for (const auto& x : v) max_rel = std::max(max_rel, x.degree());
  for (const auto& v : nmod.rel().generators())
    for (const auto& x : v) max_rel = std::max(max_rel, x.degree());
  const int D = ring->nvars() == 0 ? 0 : cap.value_or(2 * max_rel + static_cast<int>(ring->p()));
  out.degree_cap = D;

  const Submodule& reln = relation_submodule(nmod);
  std::vector<int> col_bound(nmod.rank(), D);  // inclusive maximal degree, -1 = forced zero
  std::vector<bool> free_col(nmod.rank(), true);
  for (std::size_t k = 0; k < reln.rows().size(); ++k) {
    const std::size_t c = reln.pivots()[k];
    col_bound[c] = reln.rows()[k][c].degree() - 1;
    free_col[c] = false;
  }

  struct Unknown {
    std::size_t i, c;
    int deg;
    std::uint32_t digit;
  };
  std::vector<Unknown> unknowns;
  for (std::size_t i = 0; i < m.rank(); ++i)
    for (std::size_t c = 0; c < nmod.rank(); ++c)
      for (int d = 0; d <= col_bound[c]; ++d)
        for (std::uint32_t k = 0; k < f.e(); ++k) unknowns.push_back({i, c, d, k});

  auto basis_images = [&](const Unknown& u) {
    std::vector<Vec> imgs(m.rank(), nmod.zero());
    std::vector<std::uint32_t> digits(f.e(), 0);
    digits[u.digit] = 1;
    Exponents e{};
    if (ring->nvars() == 1) e[0] = static_cast<std::uint32_t>(u.deg);
    imgs[u.i][u.c] = Polynomial::monomial(ring, e, f.from_coords(digits));
    return imgs;
  };
  // All constraint vectors for a candidate (additive in the candidate).
  auto constraints = [&](const std::vector<Vec>& imgs) {
    std::vector<Vec> out_c;
    auto apply = [&](const Vec& v) { return nmod.reduce(apply_columns(imgs, v, ring, nmod.rank())); };
    for (const auto& rho : m.rel().generators()) out_c.push_back(apply(rho));
    for (std::size_t code = 0; code < m.monomials(); ++code) {
      const auto mono = Polynomial::monomial(ring, exponent_digits(code, ring->p(), ring->nvars()), f.one());
      for (std::size_t i = 0; i < m.rank(); ++i)
        out_c.push_back(nmod.reduce(apply(m.kappa_of(code, i)) - nmod.apply_kappa(scaled(imgs[i], mono))));
    }
    return out_c;
  };

  std::map<std::tuple<std::size_t, std::uint32_t, std::uint32_t>, std::size_t> keys;
  std::vector<std::vector<std::pair<std::size_t, std::uint32_t>>> columns(unknowns.size());
  for (std::size_t u = 0; u < unknowns.size(); ++u) {
    auto cs = constraints(basis_images(unknowns[u]));
    for (std::size_t ci = 0; ci < cs.size(); ++ci)
      for (std::size_t j = 0; j < cs[ci].size(); ++j)
        for (const auto& [e, c] : cs[ci][j].terms()) {
          auto digits = f.coords(c);
          for (std::uint32_t k = 0; k < f.e(); ++k) {
            if (digits[k] == 0) continue;
            auto key = std::make_tuple(ci * nmod.rank() + j, e[0], k);
            auto [it, ins] = keys.try_emplace(key, keys.size());
            columns[u].emplace_back(it->second, digits[k]);
          }
        }
  }
  const auto prime = FrobeniusContext::make(f.p(), 1);
  std::vector<Row> rows(keys.size(), Row(unknowns.size(), prime->zero()));
  for (std::size_t u = 0; u < unknowns.size(); ++u)
    for (auto [row, val] : columns[u]) rows[row][u] = Elem{val};
  auto sols = nullspace(*prime, std::move(rows), unknowns.size());
  for (const auto& s : sols) {
    std::vector<Vec> imgs(m.rank(), nmod.zero());
    for (std::size_t u = 0; u < unknowns.size(); ++u) {
      if (prime->is_zero(s[u])) continue;
      const auto& un = unknowns[u];
      if (free_col[un.c] && un.deg == D && ring->nvars() == 1) out.partial = true;
      auto b = basis_images(un);
      imgs[un.i][un.c] += b[un.i][un.c].scaled(f.from_int(s[u].code));
    }
    out.basis.emplace_back(m, nmod, std::move(imgs));
  }
  return out;
}

// --- zero-dimensional helpers -------------------------------------------------------------

/// Re-presents a module over F_q as a free module on a basis of R^r / Rel.
inline CartierModule minimal_presentation(const CartierModule& m) {
  require(m.ring()->nvars() == 0, ErrorCode::kUnsupported, "minimal presentation is zero-dimensional");
  const auto& rel = relation_submodule(m);
  std::vector<bool> pivot(m.rank(), false);
  for (auto c : rel.pivots()) pivot[c] = true;
  std::vector<std::size_t> basis;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < m.rank(); ++i)
    if (!pivot[i]) {
      basis.push_back(i);
      names.push_back(m.names()[i]);
    }
  std::vector<Vec> table;
  for (std::size_t j : basis) {
    Vec k = m.reduce(m.kappa_of(0, j));
    Vec v;
    for (std::size_t i : basis) v.push_back(k[i]);
    table.push_back(std::move(v));
  }
  return CartierModule::free(m.ring(), basis.size(), std::move(table), std::move(names));
}

/// kappa of a free zero-dimensional module as a p^{-1}-linear map.
inline SemilinearMap to_semilinear(const CartierModule& m) {
  require(m.ring()->nvars() == 0 && m.relations().empty() && m.ideal().is_zero_ideal(), ErrorCode::kUnsupported,
          "semilinear form needs a free zero-dimensional module");
  std::vector<Row> cols;
  for (std::size_t i = 0; i < m.rank(); ++i) {
    Row c;
    for (const auto& x : m.kappa_of(0, i)) c.push_back(x.constant_term());
    cols.push_back(std::move(c));
  }
  return SemilinearMap(m.ring()->field(), Twist::kPInvLinear, std::move(cols));
}

}  // namespace cartier_lab
