#pragma once

// Cartier crystals over A^1: nil-isomorphisms, support on V(g), lattices in
// M_g and the intermediate extension j_!* with its certificate.
//
// A lattice g^{-K} L' lives in M_g where L' is a submodule of R^r containing
// the relations of Mbar = M / Gamma_g(M); K is kept minimal, which makes
// (K, L') canonical.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cartier_lab/functors.hpp"

namespace cartier_lab {

inline bool nil_isomorphic(const CartierMorphism& phi, const StabilizationLimits& limits = {}) {
  return is_nilpotent(kernel(phi), limits).nilpotent && is_nilpotent(cokernel(phi), limits).nilpotent;
}

/// M_g is a nilpotent crystal iff kappa is nilpotent on the image of M in M_g.
inline bool supported_on_Z(const CartierModule& m, const Polynomial& g, const StabilizationLimits& limits = {}) {
  require(m.ring()->nvars() == 1, ErrorCode::kUnsupported, "support needs F_q[x]");
  return is_nilpotent(torsion_free_part(m, g), limits).nilpotent;
}

struct LatticeAmbient {
  CartierModule mbar;
  Polynomial g;
  Submodule rel;          // relations of mbar
  Submodule g_multiples;  // g R^r + rel, generated by g e_1..g e_r first
};

using AmbientPtr = std::shared_ptr<const LatticeAmbient>;

inline AmbientPtr make_ambient(const LocalizedCartier& n) {
  auto mbar = torsion_free_part(n.base(), n.g());
  const auto& ring = mbar.ring();
  auto rel = relation_submodule(mbar);
  std::vector<Vec> gens;
  for (std::size_t i = 0; i < mbar.rank(); ++i) gens.push_back(scaled(unit_vec(ring, mbar.rank(), i), n.g()));
  gens.insert(gens.end(), rel.rows().begin(), rel.rows().end());
  auto gm = Submodule::generated(ring, mbar.rank(), std::move(gens));
  return std::make_shared<const LatticeAmbient>(LatticeAmbient{std::move(mbar), n.g(), std::move(rel), std::move(gm)});
}

/// v / g in Mbar, when it exists.
inline std::optional<Vec> divide_by_g(const LatticeAmbient& a, const Vec& v) {
  auto c = a.g_multiples.express(v);
  if (!c) return std::nullopt;
  return Vec(c->begin(), c->begin() + static_cast<std::ptrdiff_t>(a.mbar.rank()));
}

class Lattice {
 public:
  Lattice(AmbientPtr amb, std::uint32_t k, const std::vector<Vec>& numerators)
      : amb_(std::move(amb)), k_(k), sub_(amb_->rel.plus(numerators)) {
    normalize();
  }

  static Lattice whole(const AmbientPtr& amb) {
    std::vector<Vec> gens;
    for (std::size_t i = 0; i < amb->mbar.rank(); ++i) gens.push_back(amb->mbar.generator(i));
    return Lattice(amb, 0, gens);
  }

  const AmbientPtr& ambient() const { return amb_; }
  std::uint32_t exponent() const { return k_; }
  /// L' with L = g^{-K} L'; contains the relations of Mbar.
  const Submodule& numerators() const { return sub_; }
  std::vector<Vec> generators() const { return nonzero_generators(amb_->mbar, sub_); }
  bool is_zero() const { return sub_ == amb_->rel; }

  /// L' g^{k - K}, the numerators over the denominator g^k >= g^K.
  Submodule at_exponent(std::uint32_t k) const {
    require(k >= k_, ErrorCode::kInvariantViolation, "exponent below the lattice exponent");
    if (k == k_) return sub_;
    const auto w = amb_->g.pow(k - k_);
    std::vector<Vec> gens;
    for (const auto& row : sub_.rows()) gens.push_back(scaled(row, w));
    return amb_->rel.plus(gens);
  }

  /// num / g^k rewritten over g^K, when it lies in g^{-K} R^r.
  std::optional<Vec> over_exponent(Vec num, std::uint32_t k) const {
    if (k <= k_) return scaled(num, amb_->g.pow(k_ - k));
    for (std::uint32_t s = k_; s < k; ++s) {
      auto q = divide_by_g(*amb_, num);
      if (!q) return std::nullopt;
      num = std::move(*q);
    }
    return num;
  }

  bool contains(const Vec& num, std::uint32_t k) const {
    auto v = over_exponent(num, k);
    return v && sub_.contains(*v);
  }

  bool contains(const Lattice& o) const {
    const std::uint32_t k = std::max(k_, o.k_);
    return at_exponent(k).contains(o.at_exponent(k));
  }

  friend bool operator==(const Lattice& a, const Lattice& b) { return a.k_ == b.k_ && a.sub_ == b.sub_; }

  Lattice operator+(const Lattice& o) const {
    const std::uint32_t k = std::max(k_, o.k_);
    return Lattice(amb_, k, (at_exponent(k) + o.at_exponent(k)).rows());
  }

  Lattice plus(const Vec& num, std::uint32_t k) const {
    const std::uint32_t kk = std::max(k_, k);
    auto gens = at_exponent(kk).rows();
    gens.push_back(scaled(num, amb_->g.pow(kk - k)));
    return Lattice(amb_, kk, gens);
  }

  Lattice times_g_power(std::uint32_t j) const {
    const auto w = amb_->g.pow(j);
    std::vector<Vec> gens;
    for (const auto& row : sub_.rows()) gens.push_back(scaled(row, w));
    return Lattice(amb_, k_, gens);
  }

  /// kappa(x^b l / g^K) = kappa(x^b g^{K'-K} l) / g^{K'/p} with K' the next multiple of p.
  Lattice kappa_image() const {
    const auto& m = amb_->mbar;
    const auto& ring = m.ring();
    const std::uint32_t p = ring->p();
    const std::uint32_t kp = (k_ + p - 1) / p;
    const auto w = amb_->g.pow(kp * p - k_);
    std::vector<Vec> nums;
    for (const auto& row : generators())
      for (std::size_t code = 0; code < m.monomials(); ++code) {
        const auto mono = Polynomial::monomial(ring, exponent_digits(code, p, ring->nvars()), ring->f().one());
        nums.push_back(m.apply_kappa(scaled(row, mono * w)));
      }
    return Lattice(amb_, kp, nums);
  }

  bool is_kappa_stable() const { return contains(kappa_image()); }

  /// Least j <= bound with g^j S inside this lattice.
  std::optional<std::uint32_t> absorbs(const Lattice& s, std::uint32_t bound) const {
    for (std::uint32_t j = 0; j <= bound; ++j)
      if (contains(s.times_g_power(j))) return j;
    return std::nullopt;
  }

  /// L_g = M_g: least j with g^j Mbar inside L.
  std::optional<std::uint32_t> localization_exponent() const {
    return absorbs(whole(amb_), static_cast<std::uint32_t>(sub_.pivot_degree_sum()) + k_);
  }

  std::vector<std::string> generator_strings() const {
    std::string denom;
    if (k_ > 0) {
      const std::string g = amb_->g.size() == 1 ? amb_->g.to_string() : "(" + amb_->g.to_string() + ")";
      denom = "/" + g + (k_ > 1 ? "^" + std::to_string(k_) : "");
    }
    std::vector<std::string> out;
    for (const auto& row : generators()) {
      std::string num = amb_->mbar.element_string(row);
      if (!denom.empty() && has_top_level_sum(num)) num = "(" + num + ")";
      out.push_back(num + denom);
    }
    return out;
  }

 private:
  static bool has_top_level_sum(const std::string& s) {
    int depth = 0;
    for (char c : s) {
      depth += c == '(' ? 1 : c == ')' ? -1 : 0;
      if (depth == 0 && c == '+') return true;
    }
    return false;
  }

  void normalize() {
    while (k_ > 0) {
      std::vector<Vec> quotients;
      for (const auto& row : generators()) {
        auto q = divide_by_g(*amb_, row);
        if (!q) return;
        quotients.push_back(std::move(*q));
      }
      sub_ = amb_->rel.plus(quotients);
      --k_;
    }
  }

  AmbientPtr amb_;
  std::uint32_t k_;
  Submodule sub_;
};

/// The lattice as a Cartier module over R on its Hermite generators.
inline CartierModule lattice_module(const Lattice& t) {
  const auto& amb = *t.ambient();
  const auto& m = amb.mbar;
  const auto& ring = m.ring();
  const std::uint32_t p = ring->p();
  const auto gens = t.generators();
  const std::size_t s = gens.size();
  std::vector<Vec> all = gens;
  all.insert(all.end(), amb.rel.rows().begin(), amb.rel.rows().end());
  const auto span = Submodule::generated(ring, m.rank(), std::move(all));
  const std::uint32_t k = t.exponent();
  const std::uint32_t kp = (k + p - 1) / p;
  const auto shift = amb.g.pow(kp * p - k);
  const auto lift = amb.g.pow(k - kp);
  std::vector<Vec> table;
  for (std::size_t code = 0; code < m.monomials(); ++code) {
    const auto mono = Polynomial::monomial(ring, exponent_digits(code, p, ring->nvars()), ring->f().one());
    for (std::size_t j = 0; j < s; ++j) {
      auto c = span.express(scaled(m.apply_kappa(scaled(gens[j], mono * shift)), lift));
      require(c.has_value(), ErrorCode::kValidation, "lattice is not kappa-stable");
      table.emplace_back(c->begin(), c->begin() + static_cast<std::ptrdiff_t>(s));
    }
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < s; ++j) names.push_back("l" + std::to_string(j + 1));
  return CartierModule(ring, IdealSpec::zero(ring), s, preimage(ring, s, gens, amb.rel).rows(), std::move(table),
                       std::move(names));
}

/// Coordinates of num / g^k on the generators of lattice_module(t).
inline std::optional<Vec> lattice_coordinates(const Lattice& t, const Vec& num, std::uint32_t k) {
  auto v = t.over_exponent(num, k);
  if (!v) return std::nullopt;
  const auto gens = t.generators();
  std::vector<Vec> all = gens;
  const auto& rel = t.ambient()->rel;
  all.insert(all.end(), rel.rows().begin(), rel.rows().end());
  auto c = Submodule::generated(t.ambient()->mbar.ring(), t.ambient()->mbar.rank(), std::move(all)).express(*v);
  if (!c) return std::nullopt;
  return Vec(c->begin(), c->begin() + static_cast<std::ptrdiff_t>(gens.size()));
}

/// T / S for lattices S in T, both kappa-stable.
inline CartierModule lattice_quotient(const Lattice& t, const Lattice& s) {
  require(t.contains(s), ErrorCode::kValidation, "quotient by a lattice that is not contained");
  const auto gens = t.generators();
  auto mod = lattice_module(t);
  auto sub = preimage(mod.ring(), gens.size(), gens, s.at_exponent(t.exponent()));
  return quotient_module(mod, sub);
}

struct SaturationResult {
  std::vector<Lattice> chain;
  StabilizationStatus status = StabilizationStatus::kStabilized;
  const Lattice& lattice() const { return chain.back(); }
  std::size_t steps() const { return chain.size() - 1; }
};

/// L, L + kappa(L), ... up to the first repeat.
inline SaturationResult kappa_saturate(const Lattice& l, const StabilizationLimits& limits = {}) {
  SaturationResult out{{l}};
  for (std::size_t it = 0;; ++it) {
    if (it >= limits.max_iter) {
      out.status = StabilizationStatus::kNonStabilized;
      return out;
    }
    auto next = out.chain.back() + out.chain.back().kappa_image();
    if (next == out.chain.back()) return out;
    out.chain.push_back(std::move(next));
  }
}

inline Lattice saturated(const Lattice& l, const StabilizationLimits& limits = {}) {
  auto s = kappa_saturate(l, limits);
  require_stabilized(s.status, "kappa saturation did not stabilize");
  return s.lattice();
}

/// T_k = sum_e kappa^e(g^k L).
inline Lattice test_module_sum(const Lattice& l, std::uint32_t k, const StabilizationLimits& limits = {}) {
  require(l.is_kappa_stable(), ErrorCode::kValidation, "test modules start from a kappa-stable lattice");
  return saturated(l.times_g_power(k), limits);
}

/// L, kappa(L), kappa^2(L), ... for a kappa-stable L.
inline Lattice lattice_stable_image(const Lattice& l, const StabilizationLimits& limits = {}) {
  require(l.is_kappa_stable(), ErrorCode::kValidation, "stable image needs a kappa-stable lattice");
  Lattice cur = l;
  for (std::size_t it = 0; it < limits.max_iter; ++it) {
    auto next = cur.kappa_image();
    if (next == cur) return cur;
    cur = std::move(next);
  }
  fail(ErrorCode::kNonStabilized, "lattice image chain did not stabilize");
}

struct IECertificate {
  Lattice saturated;  // kappa-saturation of Mbar
  Lattice stable;     // its stable image, nil-isomorphic to M_g
  Lattice result;
  CartierModule module;
  std::size_t saturation_steps = 0;
  std::size_t k_star = 0;
  std::uint32_t localization_exponent = 0;
  bool localization_agrees = false;
  bool torsion_nilpotent = false;
  bool quotient_nilpotent = false;        // T / T_1(T)
  bool quotient_nilpotent_k_star = false;  // T / T_{k*}(T)

  bool passed() const {
    return localization_agrees && torsion_nilpotent && quotient_nilpotent && quotient_nilpotent_k_star;
  }
};

/// Runs the three checks against a candidate lattice.
inline void certify(IECertificate& c, const StabilizationLimits& limits) {
  const auto& t = c.result;
  const auto& g = t.ambient()->g;
  auto le = c.stable.contains(t) ? t.absorbs(c.stable, static_cast<std::uint32_t>(limits.max_iter)) : std::nullopt;
  c.localization_agrees = le.has_value();
  c.localization_exponent = le.value_or(0);
  c.torsion_nilpotent = is_nilpotent(torsion_gamma_Z(c.module, g, limits).module, limits).nilpotent;
  c.quotient_nilpotent = is_nilpotent(lattice_quotient(t, test_module_sum(t, 1, limits)), limits).nilpotent;
  c.quotient_nilpotent_k_star =
      is_nilpotent(lattice_quotient(t, test_module_sum(t, static_cast<std::uint32_t>(c.k_star), limits)), limits)
          .nilpotent;
}

/// Saturate the lattice of M, pass to its stable image L, then
/// T_1, T_2, ... until T_k = T_{k+1}. All T_k lie between gL and L.
inline IECertificate intermediate_extension(const LocalizedCartier& n, const StabilizationLimits& limits = {}) {
  auto amb = make_ambient(n);
  auto sat = kappa_saturate(Lattice::whole(amb), limits);
  require_stabilized(sat.status, "kappa saturation did not stabilize");
  const Lattice l = lattice_stable_image(sat.lattice(), limits);
  Lattice cur = test_module_sum(l, 1, limits);
  std::size_t k = 1;
  while (true) {
    if (k >= limits.max_iter) fail(ErrorCode::kNonStabilized, "test module sums did not stabilize");
    auto next = test_module_sum(l, static_cast<std::uint32_t>(k + 1), limits);
    if (next == cur) break;
    cur = std::move(next);
    ++k;
  }
  IECertificate c{sat.lattice(), l, cur, lattice_module(cur), sat.steps(), k};
  certify(c, limits);
  if (!c.passed()) fail(ErrorCode::kCertificateFailed, "intermediate extension certificate failed");
  return c;
}

struct IEMorphism {
  IECertificate source;
  IECertificate target;
  CartierMorphism restricted;
};

/// phi: M -> N over F_q[x] restricted to the intermediate extensions of M_g and N_g.
inline IEMorphism ie_functorial(const CartierMorphism& phi, const Polynomial& g, const StabilizationLimits& limits = {}) {
  auto src = intermediate_extension(open_pullback(phi.source(), g), limits);
  auto dst = intermediate_extension(open_pullback(phi.target(), g), limits);
  std::vector<Vec> images;
  for (const auto& l : src.result.generators()) {
    auto c = lattice_coordinates(dst.result, phi.apply(l), src.result.exponent());
    if (!c) fail(ErrorCode::kCertificateFailed, "restricted morphism does not land in the target lattice");
    images.push_back(std::move(*c));
  }
  CartierMorphism r(src.module, dst.module, std::move(images));
  return {std::move(src), std::move(dst), std::move(r)};
}

struct ExactnessProbe {
  bool injective = false;   // after localization
  bool surjective = false;  // after localization
  bool kernel_nilpotent = false;
  bool cokernel_nilpotent = false;
  bool holds() const { return (!injective || kernel_nilpotent) && (!surjective || cokernel_nilpotent); }
};

inline ExactnessProbe ie_exactness_probe(const CartierMorphism& phi, const Polynomial& g,
                                         const StabilizationLimits& limits = {}) {
  auto ms = torsion_free_part(phi.source(), g);
  auto mt = torsion_free_part(phi.target(), g);
  auto bar = CartierMorphism(ms, mt, phi.images());
  auto ie = ie_functorial(phi, g, limits);
  ExactnessProbe out;
  out.injective = kernel(bar).is_zero_module();
  out.surjective = torsion_free_part(cokernel(bar), g).is_zero_module();
  out.kernel_nilpotent = is_nilpotent(kernel(ie.restricted), limits).nilpotent;
  out.cokernel_nilpotent = is_nilpotent(cokernel(ie.restricted), limits).nilpotent;
  return out;
}

enum class OracleStatus { kConfirmed, kRefuted, kSkipped };

inline std::string to_string(OracleStatus s) {
  switch (s) {
    case OracleStatus::kConfirmed: return "CONFIRMED";
    case OracleStatus::kRefuted: return "REFUTED";
    case OracleStatus::kSkipped: return "SKIPPED";
  }
  return "?";
}

struct OracleResult {
  OracleStatus status = OracleStatus::kSkipped;
  std::size_t dimension = 0;  // of the truncation T / g^D T over F_q, as enumerated
  std::size_t explored = 0;   // kappa-stable lattices between kappa(g^D T)-closure and T
  std::optional<Lattice> witness;
};

/// Enumerates the kappa-stable S with sat(g^D T) <= S <= T and checks that
/// T / S is nilpotent for each of them.
inline OracleResult minimality_oracle(const Lattice& t, std::uint32_t truncate, const StabilizationLimits& limits = {},
                                      std::size_t max_dim = 12) {
  OracleResult out;
  if (t.is_zero()) {
    out.status = OracleStatus::kConfirmed;
    return out;
  }
  const auto& amb = *t.ambient();
  const auto& ring = amb.mbar.ring();
  const auto& f = ring->f();
  const auto gens = t.generators();
  const std::uint32_t span = truncate * static_cast<std::uint32_t>(amb.g.degree());
  out.dimension = gens.size() * span * f.e();
  if (out.dimension > max_dim || f.q() > 3) return out;

  // Representatives sum_j h_j l_j with deg h_j < D deg g.
  std::vector<Vec> reps{amb.mbar.zero()};
  for (const auto& l : gens)
    for (std::uint32_t d = 0; d < span; ++d) {
      std::vector<Vec> next;
      const auto mono = Polynomial::monomial(ring, Exponents{d}, f.one());
      for (const auto& v : reps)
        for (std::uint64_t c = 0; c < f.q(); ++c) {
          Vec w = v;
          if (c != 0) add_scaled(w, l, mono.scaled(Elem{static_cast<std::uint32_t>(c)}));
          next.push_back(std::move(w));
        }
      reps = std::move(next);
    }

  std::vector<Lattice> found{saturated(t.times_g_power(truncate), limits)};
  for (std::size_t i = 0; i < found.size(); ++i) {
    const Lattice s = found[i];
    for (const auto& v : reps) {
      if (s.contains(v, t.exponent())) continue;
      auto bigger = saturated(s.plus(v, t.exponent()), limits);
      bool seen = false;
      for (const auto& x : found) seen = seen || x == bigger;
      if (!seen) found.push_back(std::move(bigger));
    }
  }
  out.explored = found.size();
  for (const auto& s : found) {
    if (s == t) continue;
    if (!is_nilpotent(lattice_quotient(t, s), limits).nilpotent) {
      out.status = OracleStatus::kRefuted;
      out.witness = s;
      return out;
    }
  }
  out.status = OracleStatus::kConfirmed;
  return out;
}

/// Simplicity of a crystal at a point: the minimal representative
/// sigma(M) / M_nil(sigma(M)) is nonzero with no proper nonzero kappa-stable subspace.
inline bool simple_crystal_probe(const CartierModule& m, const StabilizationLimits& limits = {}) {
  require(m.ring()->nvars() == 0, ErrorCode::kUnsupported, "simplicity probe is zero-dimensional");
  require(m.ring()->f().q() <= 4, ErrorCode::kCapExceeded, "simplicity probe needs q <= 4");
  auto sigma = submodule_module(m, stable_image(m, limits).sigma);
  auto q = minimal_presentation(quotient_module(sigma, max_nilpotent_submodule(sigma, limits)));
  if (q.rank() == 0) return false;
  require(q.rank() <= 3, ErrorCode::kCapExceeded, "simplicity probe needs dimension <= 3");
  const auto t = to_semilinear(q);
  const auto field = q.ring()->field();
  std::vector<Row> vecs{Row{}};
  for (std::size_t i = 0; i < q.rank(); ++i) {
    std::vector<Row> next;
    for (const auto& v : vecs)
      for (std::uint64_t c = 0; c < field->q(); ++c) {
        Row w = v;
        w.push_back(Elem{static_cast<std::uint32_t>(c)});
        next.push_back(std::move(w));
      }
    vecs = std::move(next);
  }
  for (const auto& v : vecs) {
    bool zero = true;
    for (auto x : v) zero = zero && field->is_zero(x);
    if (zero) continue;
    Subspace closure = Subspace::span(field, q.rank(), {v});
    while (true) {
      auto next = closure + t.image(closure);
      if (next == closure) break;
      closure = std::move(next);
    }
    if (closure.dim() < q.rank()) return false;
  }
  return true;
}

}  // namespace cartier_lab
