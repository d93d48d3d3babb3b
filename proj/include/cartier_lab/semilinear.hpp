#pragma once

// p-linear and p^{-1}-linear maps on F_q^r, their iterated images and
// Artin-Schreier style fixed-point spaces.

#include <optional>
#include <random>
#include <vector>

#include "cartier_lab/linalg.hpp"

namespace cartier_lab {

enum class Twist {
  kPLinear,     // T(a v) = a^p T(v)
  kPInvLinear,  // T(a^p v) = a T(v)
};

class SemilinearMap {
 public:
  /// images[j] is T(e_j).
  SemilinearMap(FieldPtr field, Twist kind, std::vector<Row> images)
      : field_(std::move(field)), kind_(kind), images_(std::move(images)) {
    dim_ = images_.size();
    require(dim_ <= 64, ErrorCode::kCapExceeded, "semilinear map dimension above 64");
    for (const auto& col : images_)
      require(col.size() == dim_, ErrorCode::kDimensionMismatch, "image vector has wrong length");
    require(check_twist_law(8, 0x5eed), ErrorCode::kInvariantViolation, "twist law violated");
  }

  static SemilinearMap zero(FieldPtr field, Twist kind, std::size_t dim) {
    std::vector<Row> cols(dim, Row(dim, field->zero()));
    return SemilinearMap(std::move(field), kind, std::move(cols));
  }

  static SemilinearMap identity(FieldPtr field, Twist kind, std::size_t dim) {
    std::vector<Row> cols(dim, Row(dim, field->zero()));
    for (std::size_t i = 0; i < dim; ++i) cols[i][i] = field->one();
    return SemilinearMap(std::move(field), kind, std::move(cols));
  }

  const FieldPtr& field() const { return field_; }
  std::size_t dim() const { return dim_; }
  Twist kind() const { return kind_; }
  const std::vector<Row>& images() const { return images_; }

  Elem twist(Elem a) const {
    return kind_ == Twist::kPLinear ? field_->frobenius(a) : field_->frobenius_inv(a);
  }

  Row apply(const Row& v) const {
    require(v.size() == dim_, ErrorCode::kDimensionMismatch, "vector has wrong length");
    const auto& f = *field_;
    Row out(dim_, f.zero());
    for (std::size_t j = 0; j < dim_; ++j) {
      if (f.is_zero(v[j])) continue;
      const Elem c = twist(v[j]);
      for (std::size_t i = 0; i < dim_; ++i) out[i] = f.add(out[i], f.mul(c, images_[j][i]));
    }
    return out;
  }

  /// T(W) is spanned by the images of a basis of W because the twist is bijective.
  Subspace image(const Subspace& w) const {
    std::vector<Row> imgs;
    for (const auto& b : w.basis()) imgs.push_back(apply(b));
    return Subspace::span(field_, dim_, std::move(imgs));
  }

  /// Randomized check of the twist law on (a, v) pairs.
  bool check_twist_law(std::size_t trials, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    const auto& f = *field_;
    for (std::size_t t = 0; t < trials; ++t) {
      const Elem a = f.random(rng);
      Row v(dim_);
      for (auto& x : v) x = f.random(rng);
      Row lhs, rhs;
      if (kind_ == Twist::kPInvLinear) {
        Row scaled = v;
        for (auto& x : scaled) x = f.mul(f.frobenius(a), x);
        lhs = apply(scaled);
        rhs = apply(v);
        for (auto& x : rhs) x = f.mul(a, x);
      } else {
        Row scaled = v;
        for (auto& x : scaled) x = f.mul(a, x);
        lhs = apply(scaled);
        rhs = apply(v);
        for (auto& x : rhs) x = f.mul(f.frobenius(a), x);
      }
      if (lhs != rhs) return false;
    }
    return true;
  }

 private:
  FieldPtr field_;
  Twist kind_;
  std::size_t dim_ = 0;
  std::vector<Row> images_;
};

/// V, T(V), T^2(V), ... up to and including the first repeated term.
/// The chain has at most dim + 1 distinct members.
inline std::vector<Subspace> iterated_image_chain(const SemilinearMap& t) {
  std::vector<Subspace> chain{Subspace::whole(t.field(), t.dim())};
  while (true) {
    Subspace next = t.image(chain.back());
    if (next == chain.back()) break;
    chain.push_back(std::move(next));
  }
  return chain;
}

inline std::vector<std::size_t> chain_dims(const std::vector<Subspace>& chain) {
  std::vector<std::size_t> dims;
  for (const auto& s : chain) dims.push_back(s.dim());
  return dims;
}

struct Nilpotency {
  bool nilpotent = false;
  std::optional<std::size_t> order;  // first n with T^n = 0
};

inline Nilpotency is_nilpotent_semilinear(const SemilinearMap& t) {
  auto chain = iterated_image_chain(t);
  if (chain.back().dim() != 0) return {false, std::nullopt};
  return {true, chain.size() - 1};
}

/// dim_{F_p} { v in F_{q^m}^r : T(v) = v } for a p-linear T defined over F_q.
inline std::size_t fixed_points_dimension(const SemilinearMap& t, std::size_t m) {
  require(t.kind() == Twist::kPLinear, ErrorCode::kValidation,
          "fixed points are taken of a p-linear map");
  require(m >= 1, ErrorCode::kValidation, "extension degree must be >= 1");
  const std::size_t r = t.dim();
  if (r == 0) return 0;
  ExtensionField ext(t.field(), m);
  const FieldPtr prime = FrobeniusContext::make(t.field()->p(), 1);
  const std::size_t block = m * t.field()->e();
  const std::size_t n = r * block;
  require(n <= 4096, ErrorCode::kCapExceeded, "restriction of scalars too large");

  std::vector<std::vector<ExtensionField::Value>> columns(r);
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < r; ++i) columns[j].push_back(ext.embed(t.images()[j][i]));

  // Columns of (T - id) on the F_p-basis, stored as rows of the transpose.
  std::vector<Row> transpose;
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t d = 0; d < block; ++d) {
      std::vector<std::uint32_t> digits(block, 0);
      digits[d] = 1;
      const auto unit = ext.unflatten(digits);
      const auto twisted = ext.frobenius(unit);
      Row col;
      col.reserve(n);
      for (std::size_t i = 0; i < r; ++i) {
        auto value = ext.mul(twisted, columns[j][i]);
        if (i == j) value = ext.sub(value, unit);
        for (auto x : ext.flatten(value)) col.push_back(Elem{x});
      }
      transpose.push_back(std::move(col));
    }
  }
  return n - rank(*prime, std::move(transpose), n);
}

}  // namespace cartier_lab
