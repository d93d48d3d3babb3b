#pragma once

// Finitely generated submodules of R^r for R = F_q or F_q[x], kept in
// Hermite normal form (monic pivots, entries above pivots reduced). This is
// the canonical form behind every submodule comparison over a PID.

#include <optional>
#include <vector>

#include "cartier_lab/polynomial.hpp"

namespace cartier_lab {

using Vec = std::vector<Polynomial>;

inline Vec zero_vec(const RingPtr& ring, std::size_t r) { return Vec(r, Polynomial(ring)); }

inline Vec unit_vec(const RingPtr& ring, std::size_t r, std::size_t i) {
  Vec v = zero_vec(ring, r);
  v[i] = Polynomial::one(ring);
  return v;
}

inline bool is_zero(const Vec& v) {
  for (const auto& x : v)
    if (!x.is_zero()) return false;
  return true;
}

inline void add_scaled(Vec& dst, const Vec& src, const Polynomial& c) {
  if (c.is_zero()) return;
  for (std::size_t k = 0; k < dst.size(); ++k)
    if (!src[k].is_zero()) dst[k] += src[k] * c;
}

inline Vec scaled(const Vec& v, const Polynomial& c) {
  Vec out = v;
  for (auto& x : out) x = x * c;
  return out;
}

inline Vec operator+(Vec a, const Vec& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
  return a;
}

inline Vec operator-(Vec a, const Vec& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] -= b[k];
  return a;
}

inline bool vec_equal(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!(a[k] == b[k])) return false;
  return true;
}

/// Polynomial matrix acting on column vectors: (cols[j] is the image of e_j).
inline Vec apply_columns(const std::vector<Vec>& cols, const Vec& v, const RingPtr& ring, std::size_t target_rank) {
  Vec out = zero_vec(ring, target_rank);
  for (std::size_t j = 0; j < v.size(); ++j) add_scaled(out, cols[j], v[j]);
  return out;
}

class Submodule {
 public:
  Submodule(RingPtr ring, std::size_t rank) : ring_(std::move(ring)), rank_(rank) {
    require(ring_->nvars() <= 1, ErrorCode::kUnsupported,
            "submodule arithmetic needs F_q or F_q[x]");
  }

  static Submodule generated(const RingPtr& ring, std::size_t rank, std::vector<Vec> gens) {
    Submodule s(ring, rank);
    for (const auto& g : gens)
      require(g.size() == rank, ErrorCode::kDimensionMismatch, "generator has wrong length");
    s.gens_ = std::move(gens);
    s.echelonize();
    return s;
  }

  static Submodule whole(const RingPtr& ring, std::size_t rank) {
    std::vector<Vec> gens;
    for (std::size_t i = 0; i < rank; ++i) gens.push_back(unit_vec(ring, rank, i));
    return generated(ring, rank, std::move(gens));
  }

  const RingPtr& ring() const { return ring_; }
  std::size_t rank() const { return rank_; }
  /// Hermite rows; rows()[k] has its monic pivot in column pivots()[k].
  const std::vector<Vec>& rows() const { return rows_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }
  const std::vector<Vec>& generators() const { return gens_; }
  bool is_zero() const { return rows_.empty(); }

  /// Sum of the pivot degrees; the F_q-dimension of R^r / S when S has full rank.
  std::size_t pivot_degree_sum() const {
    std::size_t d = 0;
    for (std::size_t k = 0; k < rows_.size(); ++k) d += static_cast<std::size_t>(rows_[k][pivots_[k]].degree());
    return d;
  }

  bool full_rank() const { return rows_.size() == rank_; }

  Vec reduce(Vec v) const { return reduce_with_quotients(std::move(v), nullptr); }

  bool contains(const Vec& v) const { return ::cartier_lab::is_zero(reduce(v)); }

  bool contains(const Submodule& other) const {
    for (const auto& r : other.rows_)
      if (!contains(r)) return false;
    return true;
  }

  friend bool operator==(const Submodule& a, const Submodule& b) {
    if (a.rank_ != b.rank_ || a.rows_.size() != b.rows_.size() || a.pivots_ != b.pivots_) return false;
    for (std::size_t k = 0; k < a.rows_.size(); ++k)
      if (!vec_equal(a.rows_[k], b.rows_[k])) return false;
    return true;
  }

  Submodule operator+(const Submodule& o) const {
    std::vector<Vec> gens = rows_;
    gens.insert(gens.end(), o.rows_.begin(), o.rows_.end());
    return generated(ring_, rank_, std::move(gens));
  }

  Submodule plus(const std::vector<Vec>& extra) const {
    std::vector<Vec> gens = rows_;
    gens.insert(gens.end(), extra.begin(), extra.end());
    return generated(ring_, rank_, std::move(gens));
  }

  /// Coefficients c with v = sum_j c_j generators()[j], when v lies in S.
  std::optional<Vec> express(const Vec& v) const {
    Vec quotients;
    Vec rest = reduce_with_quotients(v, &quotients);
    if (!::cartier_lab::is_zero(rest)) return std::nullopt;
    Vec out = zero_vec(ring_, gens_.size());
    for (std::size_t k = 0; k < rows_.size(); ++k) add_scaled(out, transform_[k], quotients[k]);
    return out;
  }

  /// Generators of the module of relations among generators().
  const std::vector<Vec>& syzygies() const { return syzygies_; }

 private:
  Vec reduce_with_quotients(Vec v, Vec* quotients) const {
    require(v.size() == rank_, ErrorCode::kDimensionMismatch, "vector has wrong length");
    if (quotients) *quotients = zero_vec(ring_, rows_.size());
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      const std::size_t c = pivots_[k];
      if (v[c].is_zero()) continue;
      auto [q, r] = divmod(v[c], rows_[k][c]);
      if (q.is_zero()) continue;
      add_scaled(v, rows_[k], -q);
      if (quotients) (*quotients)[k] = q;
    }
    return v;
  }

  void echelonize() {
    const std::size_t m = gens_.size();
    std::vector<Vec> w = gens_;
    std::vector<Vec> u;
    for (std::size_t i = 0; i < m; ++i) u.push_back(unit_vec(ring_, m, i));
    auto row_op = [&](std::size_t dst, std::size_t src, const Polynomial& c) {
      add_scaled(w[dst], w[src], c);
      add_scaled(u[dst], u[src], c);
    };
    std::size_t cur = 0;
    for (std::size_t c = 0; c < rank_ && cur < m; ++c) {
      while (true) {
        std::size_t best = m;
        for (std::size_t i = cur; i < m; ++i) {
          if (w[i][c].is_zero()) continue;
          if (best == m || w[i][c].degree() < w[best][c].degree()) best = i;
        }
        if (best == m) break;
        std::swap(w[cur], w[best]);
        std::swap(u[cur], u[best]);
        bool clean = true;
        for (std::size_t i = cur + 1; i < m; ++i) {
          if (w[i][c].is_zero()) continue;
          auto [q, r] = divmod(w[i][c], w[cur][c]);
          row_op(i, cur, -q);
          if (!w[i][c].is_zero()) clean = false;
        }
        if (clean) break;
      }
      if (cur < m && !w[cur][c].is_zero()) {
        const auto inv = Polynomial::constant(ring_, ring_->f().inv(w[cur][c].leading_coeff()));
        w[cur] = scaled(w[cur], inv);
        u[cur] = scaled(u[cur], inv);
        for (std::size_t k = 0; k < cur; ++k) {
          if (w[k][c].is_zero()) continue;
          auto [q, r] = divmod(w[k][c], w[cur][c]);
          if (!q.is_zero()) row_op(k, cur, -q);
        }
        pivots_.push_back(c);
        ++cur;
      }
    }
    rows_.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(cur));
    transform_.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(cur));
    syzygies_.assign(u.begin() + static_cast<std::ptrdiff_t>(cur), u.end());
  }

  RingPtr ring_;
  std::size_t rank_;
  std::vector<Vec> gens_;
  std::vector<Vec> rows_;
  std::vector<std::size_t> pivots_;
  std::vector<Vec> transform_;  // rows_[k] = sum_j transform_[k][j] gens_[j]
  std::vector<Vec> syzygies_;
};

/// {u in R^s : sum_j u_j images[j] in target} as a submodule of R^s.
inline Submodule preimage(const RingPtr& ring, std::size_t s, const std::vector<Vec>& images,
                          const Submodule& target) {
  require(images.size() == s, ErrorCode::kDimensionMismatch, "one image per source generator");
  std::vector<Vec> stacked = images;
  stacked.insert(stacked.end(), target.rows().begin(), target.rows().end());
  auto all = Submodule::generated(ring, target.rank(), std::move(stacked));
  std::vector<Vec> proj;
  for (const auto& z : all.syzygies()) proj.emplace_back(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(s));
  return Submodule::generated(ring, s, std::move(proj));
}

inline Submodule intersect(const Submodule& a, const Submodule& b) {
  auto coeffs = preimage(a.ring(), a.rows().size(), a.rows(), b);
  std::vector<Vec> gens;
  for (const auto& c : coeffs.rows()) gens.push_back(apply_columns(a.rows(), c, a.ring(), a.rank()));
  return Submodule::generated(a.ring(), a.rank(), std::move(gens));
}

}  // namespace cartier_lab
