#pragma once

// Sparse multivariate polynomials over F_q in at most four variables.
//
// User-facing rings carry at most three variables ordered by graded reverse
// lexicographic order; the fourth slot and the elimination order exist for
// internal ideal-quotient computations.

#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cartier_lab/field.hpp"

namespace cartier_lab {

constexpr std::size_t kMaxVars = 4;
constexpr std::size_t kMaxUserVars = 3;
using Exponents = std::array<std::uint32_t, kMaxVars>;

enum class MonomialOrder {
  kGrevlex,
  kEliminateLast,  // last variable dominates, grevlex on the rest
};

struct MonomialLess {
  MonomialOrder order = MonomialOrder::kGrevlex;
  std::size_t nvars = 0;

  static bool grevlex_less(const Exponents& a, const Exponents& b, std::size_t n) {
    std::uint64_t da = 0, db = 0;
    for (std::size_t i = 0; i < n; ++i) {
      da += a[i];
      db += b[i];
    }
    if (da != db) return da < db;
    for (std::size_t i = n; i-- > 0;) {
      if (a[i] != b[i]) return a[i] > b[i];
    }
    return false;
  }

  bool operator()(const Exponents& a, const Exponents& b) const {
    if (order == MonomialOrder::kEliminateLast && nvars > 0) {
      const std::size_t t = nvars - 1;
      if (a[t] != b[t]) return a[t] < b[t];
      return grevlex_less(a, b, t);
    }
    return grevlex_less(a, b, nvars);
  }
};

class PolyRing;
using RingPtr = std::shared_ptr<const PolyRing>;

class PolyRing {
 public:
  static RingPtr make(FieldPtr field, std::vector<std::string> vars,
                      MonomialOrder order = MonomialOrder::kGrevlex) {
    require(vars.size() <= kMaxVars, ErrorCode::kCapExceeded, "too many variables");
    std::set<std::string> seen;
    for (const auto& v : vars) {
      require(valid_name(v), ErrorCode::kValidation, "invalid variable name '" + v + "'");
      require(!(field->e() > 1 && v == "t"), ErrorCode::kValidation,
              "variable name 't' is reserved for the field generator");
      require(seen.insert(v).second, ErrorCode::kValidation, "duplicate variable '" + v + "'");
    }
    return std::shared_ptr<const PolyRing>(new PolyRing(std::move(field), std::move(vars), order));
  }

  const FieldPtr& field() const { return field_; }
  const FrobeniusContext& f() const { return *field_; }
  std::size_t nvars() const { return vars_.size(); }
  const std::vector<std::string>& vars() const { return vars_; }
  MonomialOrder order() const { return order_; }
  MonomialLess less() const { return MonomialLess{order_, vars_.size()}; }
  std::uint32_t p() const { return field_->p(); }

  /// Size of the monomial basis {x^a : a in [0,p)^n} of F_*R over R.
  std::size_t frobenius_rank() const {
    std::size_t r = 1;
    for (std::size_t i = 0; i < nvars(); ++i) r *= p();
    return r;
  }

  std::optional<std::size_t> var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return i;
    return std::nullopt;
  }

  bool same_ring(const PolyRing& other) const {
    return this == &other || (field_->same_field(*other.field_) && vars_ == other.vars_ &&
                              order_ == other.order_);
  }

  static bool valid_name(const std::string& v) {
    if (v.empty() || !(std::isalpha(static_cast<unsigned char>(v[0])) || v[0] == '_')) return false;
    for (char c : v)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
  }

 private:
  PolyRing(FieldPtr field, std::vector<std::string> vars, MonomialOrder order)
      : field_(std::move(field)), vars_(std::move(vars)), order_(order) {}

  FieldPtr field_;
  std::vector<std::string> vars_;
  MonomialOrder order_;
};

/// Digits of a in base p packed little-endian over the ring variables.
inline Exponents exponent_digits(std::size_t code, std::uint32_t p, std::size_t n) {
  Exponents a{};
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = static_cast<std::uint32_t>(code % p);
    code /= p;
  }
  return a;
}

inline std::size_t digit_code(const Exponents& a, std::uint32_t p, std::size_t n) {
  std::size_t code = 0, scale = 1;
  for (std::size_t i = 0; i < n; ++i) {
    code += a[i] * scale;
    scale *= p;
  }
  return code;
}

class Polynomial {
 public:
  using Terms = std::map<Exponents, Elem, MonomialLess>;

  explicit Polynomial(RingPtr ring) : ring_(std::move(ring)), terms_(ring_->less()) {}

  static Polynomial constant(const RingPtr& ring, Elem c) {
    Polynomial out(ring);
    out.add_term(Exponents{}, c);
    return out;
  }
  static Polynomial one(const RingPtr& ring) { return constant(ring, ring->f().one()); }
  static Polynomial monomial(const RingPtr& ring, const Exponents& e, Elem c) {
    Polynomial out(ring);
    out.add_term(e, c);
    return out;
  }
  static Polynomial variable(const RingPtr& ring, std::size_t index) {
    require(index < ring->nvars(), ErrorCode::kValidation, "variable index out of range");
    Exponents e{};
    e[index] = 1;
    return monomial(ring, e, ring->f().one());
  }

  const RingPtr& ring() const { return ring_; }
  const FrobeniusContext& field() const { return ring_->f(); }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Exponents{});
  }
  Elem constant_term() const { return coeff(Exponents{}); }

  Elem coeff(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? field().zero() : it->second;
  }

  const Exponents& leading_monomial() const {
    require(!is_zero(), ErrorCode::kValidation, "leading monomial of zero");
    return terms_.rbegin()->first;
  }
  Elem leading_coeff() const {
    require(!is_zero(), ErrorCode::kValidation, "leading coefficient of zero");
    return terms_.rbegin()->second;
  }

  /// Total degree; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (std::size_t i = 0; i < ring_->nvars(); ++i) s += static_cast<int>(e[i]);
      d = std::max(d, s);
    }
    return d;
  }

  void add_term(const Exponents& e, Elem c) {
    if (field().is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second = field().add(it->second, c);
      if (field().is_zero(it->second)) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    check(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check(o);
    for (const auto& [e, c] : o.terms_) add_term(e, field().neg(c));
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  Polynomial operator-() const {
    Polynomial out(ring_);
    for (const auto& [e, c] : terms_) out.terms_.emplace(e, field().neg(c));
    return out;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check(b);
    Polynomial out(a.ring_);
    const auto& f = a.field();
    const std::size_t n = a.ring_->nvars();
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e{};
        for (std::size_t i = 0; i < n; ++i) e[i] = ea[i] + eb[i];
        out.add_term(e, f.mul(ca, cb));
      }
    }
    return out;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  Polynomial scaled(Elem c) const {
    Polynomial out(ring_);
    if (field().is_zero(c)) return out;
    for (const auto& [e, x] : terms_) out.terms_.emplace(e, field().mul(c, x));
    return out;
  }

  Polynomial shifted(const Exponents& m) const {
    Polynomial out(ring_);
    const std::size_t n = ring_->nvars();
    for (const auto& [e, x] : terms_) {
      Exponents s{};
      for (std::size_t i = 0; i < n; ++i) s[i] = e[i] + m[i];
      out.terms_.emplace(s, x);
    }
    return out;
  }

  Polynomial monic() const {
    if (is_zero()) return *this;
    return scaled(field().inv(leading_coeff()));
  }

  Polynomial pow(std::uint64_t k) const {
    Polynomial result = one(ring_), base = *this;
    while (k > 0) {
      if (k & 1U) result *= base;
      k >>= 1U;
      if (k) base *= base;
    }
    return result;
  }

  /// f^p, computed termwise since Frobenius is additive.
  Polynomial frobenius() const {
    Polynomial out(ring_);
    const std::uint32_t p = ring_->p();
    const std::size_t n = ring_->nvars();
    for (const auto& [e, c] : terms_) {
      Exponents s{};
      for (std::size_t i = 0; i < n; ++i) s[i] = e[i] * p;
      out.terms_.emplace(s, field().frobenius(c));
    }
    return out;
  }

  Polynomial frobenius_power(std::size_t k) const {
    Polynomial out = *this;
    for (std::size_t i = 0; i < k; ++i) out = out.frobenius();
    return out;
  }

  /// Substitutes `value` for variable `index` (value lives in the same ring).
  Polynomial substitute(std::size_t index, const Polynomial& value) const {
    check(value);
    Polynomial out(ring_);
    std::map<std::uint32_t, Polynomial> powers;
    for (const auto& [e, c] : terms_) {
      Exponents rest = e;
      rest[index] = 0;
      auto it = powers.find(e[index]);
      if (it == powers.end()) it = powers.emplace(e[index], value.pow(e[index])).first;
      out += it->second.shifted(rest).scaled(c);
    }
    return out;
  }

  /// Re-expresses this polynomial in another ring whose variables are the
  /// images under `var_map` (source index -> target index, or none if the
  /// variable does not occur).
  Polynomial transport(const RingPtr& target, const std::vector<std::optional<std::size_t>>& var_map) const {
    Polynomial out(target);
    for (const auto& [e, c] : terms_) {
      Exponents s{};
      for (std::size_t i = 0; i < ring_->nvars(); ++i) {
        if (e[i] == 0) continue;
        require(var_map[i].has_value(), ErrorCode::kValidation, "variable has no image in target ring");
        s[*var_map[i]] = e[i];
      }
      out.add_term(s, c);
    }
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    if (!a.ring_->same_ring(*b.ring_)) return false;
    if (a.terms_.size() != b.terms_.size()) return false;
    auto ia = a.terms_.begin();
    for (auto ib = b.terms_.begin(); ib != b.terms_.end(); ++ia, ++ib)
      if (ia->first != ib->first || ia->second != ib->second) return false;
    return true;
  }

  std::string to_string() const;

 private:
  void check(const Polynomial& o) const {
    require(ring_->same_ring(*o.ring_), ErrorCode::kContextMismatch,
            "polynomials from different rings");
  }

  RingPtr ring_;
  Terms terms_;
};

inline bool divides_monomial(const Exponents& d, const Exponents& m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > m[i]) return false;
  return true;
}

inline Exponents monomial_quotient(const Exponents& m, const Exponents& d, std::size_t n) {
  Exponents q{};
  for (std::size_t i = 0; i < n; ++i) q[i] = m[i] - d[i];
  return q;
}

inline Exponents monomial_lcm(const Exponents& a, const Exponents& b, std::size_t n) {
  Exponents l{};
  for (std::size_t i = 0; i < n; ++i) l[i] = std::max(a[i], b[i]);
  return l;
}

struct DivisionResult {
  std::vector<Polynomial> quotients;
  Polynomial remainder;
};

/// Full multivariate division: f = sum q_i g_i + r with no term of r
/// divisible by any leading monomial.
inline DivisionResult divide(const Polynomial& f, const std::vector<Polynomial>& divisors) {
  const auto& ring = f.ring();
  const std::size_t n = ring->nvars();
  const auto& fld = f.field();
  DivisionResult out{std::vector<Polynomial>(divisors.size(), Polynomial(ring)), Polynomial(ring)};
  Polynomial rest = f;
  while (!rest.is_zero()) {
    const Exponents lm = rest.leading_monomial();
    const Elem lc = rest.leading_coeff();
    bool reduced = false;
    for (std::size_t i = 0; i < divisors.size(); ++i) {
      const auto& g = divisors[i];
      if (g.is_zero() || !divides_monomial(g.leading_monomial(), lm, n)) continue;
      const Exponents shift = monomial_quotient(lm, g.leading_monomial(), n);
      const Elem factor = fld.div(lc, g.leading_coeff());
      out.quotients[i].add_term(shift, factor);
      rest -= g.shifted(shift).scaled(factor);
      reduced = true;
      break;
    }
    if (!reduced) {
      out.remainder.add_term(lm, lc);
      Polynomial lead = Polynomial::monomial(ring, lm, lc);
      rest -= lead;
    }
  }
  return out;
}

inline std::optional<Polynomial> exact_divide(const Polynomial& a, const Polynomial& b) {
  require(!b.is_zero(), ErrorCode::kDivisionByZero, "division by the zero polynomial");
  auto r = divide(a, {b});
  if (!r.remainder.is_zero()) return std::nullopt;
  return r.quotients[0];
}

/// Frobenius decomposition f = sum_a g_a^{p^k} x^a over a in [0,p^k)^n.
/// Entry `code` of the result corresponds to a with base-p^k digits `code`.
inline std::vector<Polynomial> frobenius_decompose_power(const Polynomial& f, std::size_t k) {
  const auto& ring = f.ring();
  const std::size_t n = ring->nvars();
  std::uint32_t base = 1;
  for (std::size_t i = 0; i < k; ++i) base *= ring->p();
  std::size_t count = 1;
  for (std::size_t i = 0; i < n; ++i) count *= base;
  std::vector<Polynomial> parts(count, Polynomial(ring));
  for (const auto& [e, c] : f.terms()) {
    Exponents a{}, qexp{};
    std::size_t code = 0, scale = 1;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = e[i] % base;
      qexp[i] = e[i] / base;
      code += a[i] * scale;
      scale *= base;
    }
    Elem root = c;
    for (std::size_t i = 0; i < k; ++i) root = f.field().frobenius_inv(root);
    parts[code].add_term(qexp, root);
  }
  return parts;
}

inline std::vector<Polynomial> frobenius_decompose(const Polynomial& f) {
  return frobenius_decompose_power(f, 1);
}

/// Reassembles sum_a g_a^p x^a.
inline Polynomial frobenius_recompose(const RingPtr& ring, const std::vector<Polynomial>& parts) {
  Polynomial out(ring);
  for (std::size_t code = 0; code < parts.size(); ++code) {
    Exponents a = exponent_digits(code, ring->p(), ring->nvars());
    out += parts[code].frobenius().shifted(a);
  }
  return out;
}

// --- univariate helpers (rings with at most one variable) -------------------

inline void require_univariate(const Polynomial& f) {
  require(f.ring()->nvars() <= 1, ErrorCode::kUnsupported, "operation needs at most one variable");
}

inline std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
  require_univariate(a);
  require(!b.is_zero(), ErrorCode::kDivisionByZero, "division by the zero polynomial");
  auto r = divide(a, {b});
  return {r.quotients[0], r.remainder};
}

/// Monic gcd (zero when both inputs are zero).
inline Polynomial gcd(Polynomial a, Polynomial b) {
  require_univariate(a);
  while (!b.is_zero()) {
    Polynomial r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

// --- text format ---------------------------------------------------------------

inline std::string coefficient_string(const FrobeniusContext& f, Elem c) {
  if (f.in_prime_field(c)) return std::to_string(c.code);
  auto coords = f.coords(c);
  std::size_t nonzero = 0, where = 0;
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (coords[i] != 0) {
      ++nonzero;
      where = i;
    }
  if (nonzero == 1 && coords[where] == 1) return where == 1 ? "t" : "t^" + std::to_string(where);
  return "(" + f.to_string(c) + ")";
}

inline std::string Polynomial::to_string() const {
  if (is_zero()) return "0";
  std::string out;
  const auto& vars = ring_->vars();
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    std::string mono;
    for (std::size_t i = 0; i < ring_->nvars(); ++i) {
      if (e[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += vars[i];
      if (e[i] > 1) mono += "^" + std::to_string(e[i]);
    }
    std::string term;
    if (mono.empty())
      term = coefficient_string(field(), c);
    else if (c == field().one())
      term = mono;
    else
      term = coefficient_string(field(), c) + "*" + mono;
    if (!out.empty()) out += "+";
    out += term;
  }
  return out;
}

namespace detail {

class PolyParser {
 public:
  PolyParser(const RingPtr& ring, const std::string& text) : ring_(ring), text_(text) {}

  Polynomial parse() {
    skip_space();
    Polynomial out(ring_);
    if (peek() == '0' && rest_is_zero_literal()) return out;
    std::set<Exponents> seen;
    while (true) {
      const std::size_t start = pos_;
      auto [mono, coeff] = term();
      const std::size_t n = ring_->nvars();
      Exponents key{};
      for (std::size_t i = 0; i < n; ++i) key[i] = mono[i];
      if (!seen.insert(key).second) error(start, "repeated monomial");
      out.add_term(key, coeff);
      skip_space();
      if (at_end()) break;
      if (peek() != '+') error(pos_, peek() == '-' ? "'-' is not allowed; use coefficients in [0,p)"
                                                   : "expected '+'");
      ++pos_;
      skip_space();
    }
    return out;
  }

 private:
  [[noreturn]] void error(std::size_t at, const std::string& msg) const {
    fail(ErrorCode::kValidation,
         "polynomial '" + text_ + "' at position " + std::to_string(at) + ": " + msg);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool rest_is_zero_literal() {
    std::size_t save = pos_;
    ++pos_;
    skip_space();
    bool ok = at_end();
    pos_ = save;
    return ok;
  }

  std::uint64_t integer() {
    const std::size_t start = pos_;
    if (!std::isdigit(static_cast<unsigned char>(peek()))) error(pos_, "expected integer");
    std::uint64_t v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + static_cast<std::uint64_t>(peek() - '0');
      if (v > (1ULL << 40)) error(start, "integer too large");
      ++pos_;
    }
    return v;
  }

  std::uint64_t exponent() {
    skip_space();
    if (peek() != '^') return 1;
    ++pos_;
    skip_space();
    const std::size_t at = pos_;
    const auto k = integer();
    if (k == 0) error(at, "zero exponent");
    return k;
  }

  Elem small_int(std::size_t at, std::uint64_t v) {
    if (v >= ring_->p()) error(at, "coefficient out of range [0,p)");
    return Elem{static_cast<std::uint32_t>(v)};
  }

  Elem t_power(std::uint64_t k) {
    const auto& f = ring_->f();
    return f.pow(f.generator(), k);
  }

  // tpoly := tterm ('+' tterm)*, tterm := INT ['*' 't' ['^' INT]] | 't' ['^' INT]
  Elem tpoly() {
    const auto& f = ring_->f();
    Elem acc = f.zero();
    std::set<std::uint64_t> powers;
    while (true) {
      skip_space();
      const std::size_t at = pos_;
      Elem scale = f.one();
      std::uint64_t power = 0;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        scale = small_int(at, integer());
        if (f.is_zero(scale)) error(at, "zero coefficient");
        skip_space();
        if (peek() == '*') {
          ++pos_;
          skip_space();
          if (peek() != 't') error(pos_, "expected 't'");
          ++pos_;
          power = exponent();
        }
      } else if (peek() == 't') {
        ++pos_;
        power = exponent();
      } else {
        error(at, "expected coefficient term");
      }
      if (!powers.insert(power).second) error(at, "repeated power of t");
      acc = f.add(acc, f.mul(scale, t_power(power)));
      skip_space();
      if (peek() != '+') break;
      ++pos_;
    }
    return acc;
  }

  std::string identifier() {
    std::string id;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      id += peek();
      ++pos_;
    }
    return id;
  }

  std::pair<std::array<std::uint64_t, kMaxVars>, Elem> term() {
    const auto& f = ring_->f();
    std::array<std::uint64_t, kMaxVars> mono{};
    std::array<bool, kMaxVars> used{};
    bool have_int = false, have_field = false, have_any = false;
    Elem coeff = f.one();
    const std::size_t term_start = pos_;
    while (true) {
      skip_space();
      const std::size_t at = pos_;
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        if (have_int || have_field || have_any) error(at, "integer coefficient must lead the term");
        coeff = f.mul(coeff, small_int(at, integer()));
        have_int = true;
      } else if (c == '(') {
        if (f.e() == 1) error(at, "parenthesized coefficients need a proper extension field");
        if (have_field) error(at, "second field coefficient in term");
        ++pos_;
        coeff = f.mul(coeff, tpoly());
        skip_space();
        if (peek() != ')') error(pos_, "expected ')'");
        ++pos_;
        have_field = true;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::string id = identifier();
        if (id == "t" && f.e() > 1) {
          if (have_field) error(at, "second field coefficient in term");
          coeff = f.mul(coeff, t_power(exponent()));
          have_field = true;
        } else {
          auto idx = ring_->var_index(id);
          if (!idx) error(at, "unknown variable '" + id + "'");
          if (used[*idx]) error(at, "repeated variable '" + id + "' in monomial");
          used[*idx] = true;
          mono[*idx] = exponent();
        }
      } else {
        error(at, at_end() ? "unexpected end of input" : std::string("unexpected character '") + c + "'");
      }
      have_any = true;
      skip_space();
      if (peek() != '*') break;
      ++pos_;
    }
    if (f.is_zero(coeff)) error(term_start, "zero coefficient");
    return {mono, coeff};
  }

  const RingPtr& ring_;
  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Polynomial parse_polynomial(const RingPtr& ring, const std::string& text) {
  detail::PolyParser parser(ring, text);
  return parser.parse();
}

}  // namespace cartier_lab
