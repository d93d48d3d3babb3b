#pragma once

// Finite fields F_q, q = p^e, with Frobenius and its inverse.
//
// Elements are stored as packed base-p integers (coordinates w.r.t. the power
// basis 1, t, ..., t^{e-1} of F_p[t]/(modulus)). The modulus is the
// lexicographically first monic irreducible polynomial of degree e, so two
// contexts built from the same (p, e) agree element by element.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cartier_lab/error.hpp"

namespace cartier_lab {

struct Elem {
  std::uint32_t code = 0;
  friend bool operator==(Elem, Elem) = default;
  friend auto operator<=>(Elem, Elem) = default;
};

namespace detail {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::vector<std::uint64_t> prime_divisors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

// Dense univariate polynomial arithmetic over any field given by Ops.
// Coefficients are stored low degree first with no trailing zeros.
template <class Ops>
struct Univariate {
  using C = typename Ops::Coeff;
  using Poly = std::vector<C>;

  const Ops& ops;

  void trim(Poly& a) const {
    while (!a.empty() && ops.is_zero(a.back())) a.pop_back();
  }

  Poly sub(Poly a, const Poly& b) const {
    if (a.size() < b.size()) a.resize(b.size(), ops.zero());
    for (std::size_t i = 0; i < b.size(); ++i) a[i] = ops.sub(a[i], b[i]);
    trim(a);
    return a;
  }

  Poly mul(const Poly& a, const Poly& b) const {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1, ops.zero());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (ops.is_zero(a[i])) continue;
      for (std::size_t j = 0; j < b.size(); ++j)
        out[i + j] = ops.add(out[i + j], ops.mul(a[i], b[j]));
    }
    trim(out);
    return out;
  }

  // Remainder of a modulo a nonzero polynomial m.
  Poly mod(Poly a, const Poly& m) const {
    trim(a);
    const std::size_t dm = m.size() - 1;
    const C lead_inv = ops.inv(m.back());
    while (a.size() > dm) {
      const C factor = ops.mul(a.back(), lead_inv);
      const std::size_t shift = a.size() - 1 - dm;
      for (std::size_t i = 0; i <= dm; ++i)
        a[shift + i] = ops.sub(a[shift + i], ops.mul(factor, m[i]));
      trim(a);
    }
    return a;
  }

  Poly gcd(Poly a, Poly b) const {
    trim(a);
    trim(b);
    while (!b.empty()) {
      Poly r = mod(a, b);
      a = std::move(b);
      b = std::move(r);
    }
    return a;
  }

  Poly powmod(Poly base, std::uint64_t exponent, const Poly& m) const {
    Poly result{ops.one()};
    result = mod(result, m);
    base = mod(base, m);
    while (exponent > 0) {
      if (exponent & 1U) result = mod(mul(result, base), m);
      base = mod(mul(base, base), m);
      exponent >>= 1U;
    }
    return result;
  }

  // Rabin's test: m monic of degree d over a field with `field_size` elements.
  bool is_irreducible(const Poly& m, std::uint64_t field_size) const {
    const std::size_t d = m.size() - 1;
    if (d == 0) return false;
    if (d == 1) return true;
    const Poly x{ops.zero(), ops.one()};
    auto frobenius_iterate = [&](std::size_t k) {
      Poly y = x;
      for (std::size_t i = 0; i < k; ++i) y = powmod(y, field_size, m);
      return y;
    };
    if (sub(frobenius_iterate(d), mod(x, m)).size() != 0) return false;
    for (std::uint64_t r : prime_divisors(d)) {
      Poly g = gcd(m, sub(frobenius_iterate(d / r), x));
      if (g.size() != 1) return false;
    }
    return true;
  }
};

struct PrimeOps {
  using Coeff = std::uint32_t;
  std::uint32_t p;
  Coeff zero() const { return 0; }
  Coeff one() const { return 1; }
  bool is_zero(Coeff a) const { return a == 0; }
  Coeff add(Coeff a, Coeff b) const { return (a + b) % p; }
  Coeff sub(Coeff a, Coeff b) const { return (a + p - b) % p; }
  Coeff mul(Coeff a, Coeff b) const {
    return static_cast<Coeff>((static_cast<std::uint64_t>(a) * b) % p);
  }
  Coeff inv(Coeff a) const {
    std::uint64_t result = 1, base = a, k = p - 2;
    while (k) {
      if (k & 1U) result = result * base % p;
      base = base * base % p;
      k >>= 1U;
    }
    return static_cast<Coeff>(result);
  }
};

}  // namespace detail

class FrobeniusContext;
using FieldPtr = std::shared_ptr<const FrobeniusContext>;

class FrobeniusContext {
 public:
  static constexpr std::uint32_t kMaxDegree = 8;
  static constexpr std::uint64_t kTableLimit = 1U << 20;

  /// Builds F_{p^e} with the lexicographically first monic irreducible modulus.
  static FieldPtr make(std::uint32_t p, std::uint32_t e) {
    validate_parameters(p, e);
    return std::shared_ptr<const FrobeniusContext>(
        new FrobeniusContext(p, e, first_irreducible(p, e)));
  }

  /// Builds F_{p^e} from an explicit monic modulus (low degree first).
  static FieldPtr make_with_modulus(std::uint32_t p, std::vector<std::uint32_t> modulus) {
    require(!modulus.empty(), ErrorCode::kValidation, "empty modulus");
    const auto e = static_cast<std::uint32_t>(modulus.size() - 1);
    validate_parameters(p, e);
    require(modulus.back() == 1, ErrorCode::kValidation, "modulus must be monic");
    for (auto c : modulus) require(c < p, ErrorCode::kValidation, "modulus coefficient out of range");
    detail::PrimeOps ops{p};
    detail::Univariate<detail::PrimeOps> uni{ops};
    require(uni.is_irreducible(modulus, p), ErrorCode::kValidation, "modulus is not irreducible");
    return std::shared_ptr<const FrobeniusContext>(new FrobeniusContext(p, e, std::move(modulus)));
  }

  std::uint32_t p() const { return p_; }
  std::uint32_t e() const { return e_; }
  std::uint64_t q() const { return q_; }
  const std::vector<std::uint32_t>& modulus() const { return modulus_; }

  bool same_field(const FrobeniusContext& other) const {
    return p_ == other.p_ && e_ == other.e_ && modulus_ == other.modulus_;
  }

  Elem zero() const { return Elem{0}; }
  Elem one() const { return Elem{1}; }
  /// The power-basis generator t of F_q over F_p (1 when e = 1).
  Elem generator() const { return e_ == 1 ? one() : Elem{p_}; }

  Elem from_int(std::int64_t value) const {
    auto m = static_cast<std::int64_t>(p_);
    return Elem{static_cast<std::uint32_t>(((value % m) + m) % m)};
  }

  Elem from_coords(std::span<const std::uint32_t> coords) const {
    require(coords.size() <= e_, ErrorCode::kValidation, "too many coordinates");
    std::uint64_t code = 0, scale = 1;
    for (auto c : coords) {
      require(c < p_, ErrorCode::kValidation, "coordinate out of range");
      code += c * scale;
      scale *= p_;
    }
    return Elem{static_cast<std::uint32_t>(code)};
  }

  std::vector<std::uint32_t> coords(Elem a) const {
    std::vector<std::uint32_t> out(e_);
    std::uint32_t v = a.code;
    for (std::uint32_t i = 0; i < e_; ++i) {
      out[i] = v % p_;
      v /= p_;
    }
    return out;
  }

  bool is_zero(Elem a) const { return a.code == 0; }
  bool in_prime_field(Elem a) const { return a.code < p_; }

  Elem add(Elem a, Elem b) const {
    if (e_ == 1) return Elem{(a.code + b.code) % p_};
    if (p_ == 2) return Elem{a.code ^ b.code};
    std::uint32_t x = a.code, y = b.code, out = 0, scale = 1;
    for (std::uint32_t i = 0; i < e_; ++i) {
      out += ((x % p_ + y % p_) % p_) * scale;
      x /= p_;
      y /= p_;
      scale *= p_;
    }
    return Elem{out};
  }

  Elem neg(Elem a) const {
    if (e_ == 1) return Elem{(p_ - a.code) % p_};
    if (p_ == 2) return a;
    std::uint32_t x = a.code, out = 0, scale = 1;
    for (std::uint32_t i = 0; i < e_; ++i) {
      out += ((p_ - x % p_) % p_) * scale;
      x /= p_;
      scale *= p_;
    }
    return Elem{out};
  }

  Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }

  Elem mul(Elem a, Elem b) const {
    if (a.code == 0 || b.code == 0) return zero();
    if (e_ == 1)
      return Elem{static_cast<std::uint32_t>(static_cast<std::uint64_t>(a.code) * b.code % p_)};
    if (!log_.empty()) {
      std::uint64_t s = static_cast<std::uint64_t>(log_[a.code]) + log_[b.code];
      if (s >= q_ - 1) s -= q_ - 1;
      return Elem{exp_[s]};
    }
    return slow_mul(a, b);
  }

  Elem inv(Elem a) const {
    require(a.code != 0, ErrorCode::kDivisionByZero, "inverse of zero");
    if (!log_.empty()) return Elem{exp_[(q_ - 1 - log_[a.code]) % (q_ - 1)]};
    return pow(a, q_ - 2);
  }

  Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }

  Elem pow(Elem a, std::uint64_t k) const {
    Elem result = one();
    while (k > 0) {
      if (k & 1U) result = mul(result, a);
      a = mul(a, a);
      k >>= 1U;
    }
    return result;
  }

  Elem frobenius(Elem a) const {
    if (e_ == 1) return a;
    if (!frob_.empty()) return Elem{frob_[a.code]};
    return pow(a, p_);
  }

  /// p-th root, computed as a^{q/p}.
  Elem frobenius_inv(Elem a) const {
    if (e_ == 1) return a;
    if (!frob_inv_.empty()) return Elem{frob_inv_[a.code]};
    return pow(a, q_ / p_);
  }

  /// Applies Frobenius k times; negative k applies the inverse.
  Elem frobenius_power(Elem a, std::int64_t k) const {
    std::int64_t r = k % static_cast<std::int64_t>(e_);
    if (r < 0) r += e_;
    for (std::int64_t i = 0; i < r; ++i) a = frobenius(a);
    return a;
  }

  Elem random(std::mt19937_64& rng) const {
    std::uniform_int_distribution<std::uint64_t> dist(0, q_ - 1);
    return Elem{static_cast<std::uint32_t>(dist(rng))};
  }

  /// Human-readable form: an integer for prime-field elements, else a t-polynomial.
  std::string to_string(Elem a) const {
    if (in_prime_field(a)) return std::to_string(a.code);
    auto c = coords(a);
    std::string out;
    for (std::size_t i = c.size(); i-- > 0;) {
      if (c[i] == 0) continue;
      if (!out.empty()) out += "+";
      std::string mono = i == 0 ? "" : (i == 1 ? "t" : "t^" + std::to_string(i));
      if (i == 0)
        out += std::to_string(c[i]);
      else if (c[i] == 1)
        out += mono;
      else
        out += std::to_string(c[i]) + "*" + mono;
    }
    return out;
  }

 private:
  FrobeniusContext(std::uint32_t p, std::uint32_t e, std::vector<std::uint32_t> modulus)
      : p_(p), e_(e), modulus_(std::move(modulus)) {
    q_ = 1;
    for (std::uint32_t i = 0; i < e_; ++i) q_ *= p_;
    if (e_ > 1 && q_ <= kTableLimit) build_tables();
  }

  static void validate_parameters(std::uint32_t p, std::uint32_t e) {
    require(detail::is_prime(p), ErrorCode::kValidation, "characteristic must be prime");
    require(e >= 1 && e <= kMaxDegree, ErrorCode::kValidation, "extension degree must be in [1, 8]");
    std::uint64_t q = 1;
    for (std::uint32_t i = 0; i < e; ++i) {
      q *= p;
      require(q < (1ULL << 31), ErrorCode::kValidation, "field too large");
    }
  }

  static std::vector<std::uint32_t> first_irreducible(std::uint32_t p, std::uint32_t e) {
    detail::PrimeOps ops{p};
    detail::Univariate<detail::PrimeOps> uni{ops};
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < e; ++i) count *= p;
    for (std::uint64_t code = 0; code < count; ++code) {
      std::vector<std::uint32_t> m(e + 1, 0);
      std::uint64_t v = code;
      for (std::uint32_t i = 0; i < e; ++i) {
        m[i] = static_cast<std::uint32_t>(v % p);
        v /= p;
      }
      m[e] = 1;
      if (uni.is_irreducible(m, p)) return m;
    }
    fail(ErrorCode::kInvariantViolation, "no irreducible polynomial found");
  }

  Elem slow_mul(Elem a, Elem b) const {
    detail::PrimeOps ops{p_};
    detail::Univariate<detail::PrimeOps> uni{ops};
    auto x = coords(a), y = coords(b);
    uni.trim(x);
    uni.trim(y);
    auto r = uni.mod(uni.mul(x, y), modulus_);
    return from_coords(r);
  }

  void build_tables() {
    // Primitive element search; q - 1 has few prime divisors at this size.
    auto divisors = detail::prime_divisors(q_ - 1);
    auto slow_pow = [&](Elem a, std::uint64_t k) {
      Elem r = one();
      while (k > 0) {
        if (k & 1U) r = slow_mul(r, a);
        a = slow_mul(a, a);
        k >>= 1U;
      }
      return r;
    };
    Elem primitive{0};
    for (std::uint32_t c = 2; c < q_; ++c) {
      bool ok = true;
      for (auto r : divisors) {
        if (slow_pow(Elem{c}, (q_ - 1) / r) == one()) {
          ok = false;
          break;
        }
      }
      if (ok) {
        primitive = Elem{c};
        break;
      }
    }
    exp_.assign(q_ - 1, 0);
    log_.assign(q_, 0);
    Elem cur = one();
    for (std::uint64_t i = 0; i + 1 < q_; ++i) {
      exp_[i] = cur.code;
      log_[cur.code] = static_cast<std::uint32_t>(i);
      cur = slow_mul(cur, primitive);
    }
    frob_.assign(q_, 0);
    frob_inv_.assign(q_, 0);
    for (std::uint32_t c = 0; c < q_; ++c) {
      std::uint32_t f = pow(Elem{c}, p_).code;
      frob_[c] = f;
      frob_inv_[f] = c;
    }
  }

  std::uint32_t p_;
  std::uint32_t e_;
  std::uint64_t q_ = 1;
  std::vector<std::uint32_t> modulus_;
  std::vector<std::uint32_t> exp_, log_, frob_, frob_inv_;
};

/// Context-carrying element for the checked public arithmetic API.
class FieldElement {
 public:
  FieldElement(FieldPtr ctx, Elem value) : ctx_(std::move(ctx)), value_(value) {}

  const FieldPtr& context() const { return ctx_; }
  Elem value() const { return value_; }
  std::vector<std::uint32_t> coords() const { return ctx_->coords(value_); }
  bool is_zero() const { return value_.code == 0; }

  friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    check(a, b);
    return {a.ctx_, a.ctx_->add(a.value_, b.value_)};
  }
  friend FieldElement operator-(const FieldElement& a, const FieldElement& b) {
    check(a, b);
    return {a.ctx_, a.ctx_->sub(a.value_, b.value_)};
  }
  friend FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    check(a, b);
    return {a.ctx_, a.ctx_->mul(a.value_, b.value_)};
  }
  friend FieldElement operator/(const FieldElement& a, const FieldElement& b) {
    check(a, b);
    return {a.ctx_, a.ctx_->div(a.value_, b.value_)};
  }
  friend bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.ctx_->same_field(*b.ctx_) && a.value_ == b.value_;
  }

  FieldElement inv() const { return {ctx_, ctx_->inv(value_)}; }
  FieldElement pow(std::uint64_t k) const { return {ctx_, ctx_->pow(value_, k)}; }
  FieldElement frobenius() const { return {ctx_, ctx_->frobenius(value_)}; }
  FieldElement frobenius_inv() const { return {ctx_, ctx_->frobenius_inv(value_)}; }

  std::string to_string() const { return ctx_->to_string(value_); }

 private:
  static void check(const FieldElement& a, const FieldElement& b) {
    require(a.ctx_->same_field(*b.ctx_), ErrorCode::kContextMismatch,
            "field elements from different contexts");
  }

  FieldPtr ctx_;
  Elem value_;
};

namespace detail {

struct ContextOps {
  using Coeff = Elem;
  const FrobeniusContext* ctx;
  Coeff zero() const { return ctx->zero(); }
  Coeff one() const { return ctx->one(); }
  bool is_zero(Coeff a) const { return ctx->is_zero(a); }
  Coeff add(Coeff a, Coeff b) const { return ctx->add(a, b); }
  Coeff sub(Coeff a, Coeff b) const { return ctx->sub(a, b); }
  Coeff mul(Coeff a, Coeff b) const { return ctx->mul(a, b); }
  Coeff inv(Coeff a) const { return ctx->inv(a); }
};

}  // namespace detail

/// F_{q^m} = F_q[s]/(h) for the first monic irreducible h of degree m over F_q.
/// Used to extend scalars of semilinear maps; elements are coefficient vectors
/// of length m over F_q.
class ExtensionField {
 public:
  using Value = std::vector<Elem>;

  ExtensionField(FieldPtr base, std::size_t degree) : base_(std::move(base)), m_(degree) {
    require(m_ >= 1, ErrorCode::kValidation, "extension degree must be >= 1");
    require(m_ * base_->e() <= 64, ErrorCode::kCapExceeded, "extension too large");
    detail::ContextOps ops{base_.get()};
    detail::Univariate<detail::ContextOps> uni{ops};
    if (m_ == 1) {
      modulus_ = {base_->zero(), base_->one()};
    } else {
      const std::uint64_t q = base_->q();
      bool found = false;
      std::vector<std::uint64_t> digits(m_, 0);
      while (!found) {
        Value h(m_ + 1, base_->zero());
        for (std::size_t i = 0; i < m_; ++i) h[i] = Elem{static_cast<std::uint32_t>(digits[i])};
        h[m_] = base_->one();
        if (!base_->is_zero(h[0]) && uni.is_irreducible(h, q)) {
          modulus_ = h;
          found = true;
          break;
        }
        std::size_t k = 0;
        while (k < m_ && ++digits[k] == q) digits[k++] = 0;
        require(k < m_, ErrorCode::kInvariantViolation, "no irreducible extension modulus");
      }
    }
    // s^{p j} mod h for j < m: Frobenius on the tower coordinate.
    Value s{base_->zero(), base_->one()};
    Value sp = uni.powmod(s, base_->p(), modulus_);
    Value cur{base_->one()};
    for (std::size_t j = 0; j < m_; ++j) {
      Value padded = cur;
      padded.resize(m_, base_->zero());
      frob_images_.push_back(padded);
      cur = uni.mod(uni.mul(cur, sp), modulus_);
    }
  }

  const FieldPtr& base() const { return base_; }
  std::size_t degree() const { return m_; }

  Value zero() const { return Value(m_, base_->zero()); }
  Value embed(Elem a) const {
    Value v = zero();
    v[0] = a;
    return v;
  }

  Value add(const Value& a, const Value& b) const {
    Value out(m_);
    for (std::size_t i = 0; i < m_; ++i) out[i] = base_->add(a[i], b[i]);
    return out;
  }
  Value sub(const Value& a, const Value& b) const {
    Value out(m_);
    for (std::size_t i = 0; i < m_; ++i) out[i] = base_->sub(a[i], b[i]);
    return out;
  }
  Value mul(const Value& a, const Value& b) const {
    detail::ContextOps ops{base_.get()};
    detail::Univariate<detail::ContextOps> uni{ops};
    Value x = a, y = b;
    uni.trim(x);
    uni.trim(y);
    Value r = uni.mod(uni.mul(x, y), modulus_);
    r.resize(m_, base_->zero());
    return r;
  }
  Value frobenius(const Value& a) const {
    Value out = zero();
    for (std::size_t j = 0; j < m_; ++j) {
      Elem c = base_->frobenius(a[j]);
      if (base_->is_zero(c)) continue;
      for (std::size_t i = 0; i < m_; ++i)
        out[i] = base_->add(out[i], base_->mul(c, frob_images_[j][i]));
    }
    return out;
  }

  /// F_p-coordinates: m * e digits.
  std::vector<std::uint32_t> flatten(const Value& a) const {
    std::vector<std::uint32_t> out;
    out.reserve(m_ * base_->e());
    for (const auto& c : a) {
      auto d = base_->coords(c);
      out.insert(out.end(), d.begin(), d.end());
    }
    return out;
  }
  Value unflatten(std::span<const std::uint32_t> digits) const {
    Value out(m_);
    const std::size_t e = base_->e();
    for (std::size_t j = 0; j < m_; ++j) out[j] = base_->from_coords(digits.subspan(j * e, e));
    return out;
  }

 private:
  FieldPtr base_;
  std::size_t m_;
  Value modulus_;
  std::vector<Value> frob_images_;
};

}  // namespace cartier_lab
