#pragma once

// Dense linear algebra over F_q: reduced row echelon forms, subspaces, kernels.

#include <cstddef>
#include <optional>
#include <vector>

#include "cartier_lab/field.hpp"

namespace cartier_lab {

using Row = std::vector<Elem>;

/// Row-reduces in place (reduced echelon form, zero rows dropped).
/// Returns the pivot column of each remaining row.
inline std::vector<std::size_t> rref(const FrobeniusContext& f, std::vector<Row>& rows,
                                     std::size_t ncols) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < ncols && r < rows.size(); ++c) {
    std::size_t sel = r;
    while (sel < rows.size() && f.is_zero(rows[sel][c])) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[r], rows[sel]);
    const Elem inv = f.inv(rows[r][c]);
    for (auto& x : rows[r]) x = f.mul(x, inv);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || f.is_zero(rows[i][c])) continue;
      const Elem factor = rows[i][c];
      for (std::size_t k = c; k < ncols; ++k)
        rows[i][k] = f.sub(rows[i][k], f.mul(factor, rows[r][k]));
    }
    pivots.push_back(c);
    ++r;
  }
  rows.resize(r);
  return pivots;
}

/// Basis of {x : A x = 0} for A given by rows (each of length ncols).
inline std::vector<Row> nullspace(const FrobeniusContext& f, std::vector<Row> rows,
                                  std::size_t ncols) {
  auto pivots = rref(f, rows, ncols);
  std::vector<bool> is_pivot(ncols, false);
  for (auto c : pivots) is_pivot[c] = true;
  std::vector<Row> basis;
  for (std::size_t free = 0; free < ncols; ++free) {
    if (is_pivot[free]) continue;
    Row v(ncols, f.zero());
    v[free] = f.one();
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = f.neg(rows[i][free]);
    basis.push_back(std::move(v));
  }
  return basis;
}

inline std::size_t rank(const FrobeniusContext& f, std::vector<Row> rows, std::size_t ncols) {
  return rref(f, rows, ncols).size();
}

/// F_q-subspace of F_q^n stored as a reduced echelon basis, so equal
/// subspaces have identical representations.
class Subspace {
 public:
  Subspace(FieldPtr field, std::size_t ambient) : field_(std::move(field)), ambient_(ambient) {}

  static Subspace span(FieldPtr field, std::size_t ambient, std::vector<Row> vectors) {
    Subspace s(std::move(field), ambient);
    for (const auto& v : vectors)
      require(v.size() == ambient, ErrorCode::kDimensionMismatch, "vector has wrong length");
    s.pivots_ = rref(*s.field_, vectors, ambient);
    s.basis_ = std::move(vectors);
    return s;
  }

  static Subspace whole(FieldPtr field, std::size_t ambient) {
    std::vector<Row> id(ambient, Row(ambient, field->zero()));
    for (std::size_t i = 0; i < ambient; ++i) id[i][i] = field->one();
    return span(std::move(field), ambient, std::move(id));
  }

  const FieldPtr& field() const { return field_; }
  std::size_t ambient() const { return ambient_; }
  std::size_t dim() const { return basis_.size(); }
  const std::vector<Row>& basis() const { return basis_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }

  Row reduce(Row v) const {
    const auto& f = *field_;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const Elem c = v[pivots_[i]];
      if (f.is_zero(c)) continue;
      for (std::size_t k = 0; k < ambient_; ++k) v[k] = f.sub(v[k], f.mul(c, basis_[i][k]));
    }
    return v;
  }

  bool contains(const Row& v) const {
    Row r = reduce(v);
    for (auto x : r)
      if (!field_->is_zero(x)) return false;
    return true;
  }

  bool contains(const Subspace& other) const {
    for (const auto& v : other.basis_)
      if (!contains(v)) return false;
    return true;
  }

  Subspace operator+(const Subspace& other) const {
    std::vector<Row> all = basis_;
    all.insert(all.end(), other.basis_.begin(), other.basis_.end());
    return span(field_, ambient_, std::move(all));
  }

  friend bool operator==(const Subspace& a, const Subspace& b) {
    return a.ambient_ == b.ambient_ && a.basis_ == b.basis_;
  }

 private:
  FieldPtr field_;
  std::size_t ambient_;
  std::vector<Row> basis_;
  std::vector<std::size_t> pivots_;
};

}  // namespace cartier_lab
