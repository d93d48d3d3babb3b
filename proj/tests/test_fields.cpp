#include <gtest/gtest.h>

#include <random>
#include <set>

#include "cartier_lab/semilinear.hpp"

using namespace cartier_lab;

namespace {

// Schoolbook product of two coordinate vectors modulo the context modulus,
// independent of the table-driven multiplication under test.
std::vector<std::uint32_t> naive_mul(const FrobeniusContext& f, const std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b) {
  const std::uint32_t p = f.p();
  std::vector<std::uint64_t> prod(2 * f.e(), 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) prod[i + j] = (prod[i + j] + a[i] * b[j]) % p;
  const auto& m = f.modulus();
  for (std::size_t d = prod.size(); d-- > f.e();) {
    const std::uint64_t c = prod[d];
    if (c == 0) continue;
    for (std::size_t k = 0; k <= f.e(); ++k) {
      const std::size_t idx = d - f.e() + k;
      prod[idx] = (prod[idx] + (p - c) * m[k]) % p;
    }
  }
  std::vector<std::uint32_t> out(f.e());
  for (std::size_t i = 0; i < f.e(); ++i) out[i] = static_cast<std::uint32_t>(prod[i]);
  return out;
}

// All vectors of F_q^r for tiny q^r.
std::vector<Row> all_vectors(const FrobeniusContext& f, std::size_t r) {
  std::vector<Row> out{Row{}};
  for (std::size_t i = 0; i < r; ++i) {
    std::vector<Row> next;
    for (const auto& v : out)
      for (std::uint64_t c = 0; c < f.q(); ++c) {
        Row w = v;
        w.push_back(Elem{static_cast<std::uint32_t>(c)});
        next.push_back(std::move(w));
      }
    out = std::move(next);
  }
  return out;
}

SemilinearMap random_map(const FieldPtr& f, Twist kind, std::size_t r, std::mt19937_64& rng) {
  std::vector<Row> cols(r, Row(r));
  for (auto& c : cols)
    for (auto& x : c) x = f->random(rng);
  return SemilinearMap(f, kind, cols);
}

}  // namespace

TEST(Field, ModulusIsFirstIrreducible) {
  auto f4 = FrobeniusContext::make(2, 2);
  EXPECT_EQ(f4->modulus(), (std::vector<std::uint32_t>{1, 1, 1}));
  auto f8 = FrobeniusContext::make(2, 3);
  EXPECT_EQ(f8->modulus(), (std::vector<std::uint32_t>{1, 1, 0, 1}));
  auto f9 = FrobeniusContext::make(3, 2);
  EXPECT_EQ(f9->modulus(), (std::vector<std::uint32_t>{1, 0, 1}));
}

TEST(Field, RejectsBadParameters) {
  EXPECT_THROW(FrobeniusContext::make(4, 1), CartierError);
  EXPECT_THROW(FrobeniusContext::make(2, 9), CartierError);
  EXPECT_THROW(FrobeniusContext::make_with_modulus(2, {1, 0, 1}), CartierError);
}

TEST(Field, FrobeniusOfGeneratorInF4) {
  auto f = FrobeniusContext::make(2, 2);
  const Elem t = f->generator();
  const Elem t_plus_1 = f->add(t, f->one());
  EXPECT_EQ(f->frobenius(t), t_plus_1);
  EXPECT_EQ(f->mul(t, t), t_plus_1);
}

TEST(Field, FrobeniusFixesZeroAndOne) {
  for (auto [p, e] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 1}, {2, 3}, {3, 2}, {5, 1}, {7, 2}}) {
    auto f = FrobeniusContext::make(p, e);
    EXPECT_EQ(f->frobenius(f->zero()), f->zero());
    EXPECT_EQ(f->frobenius(f->one()), f->one());
  }
}

TEST(Field, CubeRootInF3) {
  auto f = FrobeniusContext::make(3, 1);
  EXPECT_EQ(f->frobenius_inv(Elem{2}), Elem{2});
  // Enumerated cubes: 0,1,8 reduce to 0,1,2.
  for (std::uint32_t a = 0; a < 3; ++a) EXPECT_EQ((a * a * a) % 3, a);
}

TEST(Field, InverseOfZeroFails) {
  auto f = FrobeniusContext::make(3, 2);
  try {
    f->inv(f->zero());
    FAIL();
  } catch (const CartierError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivisionByZero);
  }
}

TEST(Field, ContextMismatchOnFieldElements) {
  auto a = FrobeniusContext::make(2, 2);
  auto b = FrobeniusContext::make(3, 1);
  FieldElement x(a, a->one()), y(b, b->one());
  try {
    (void)(x + y);
    FAIL();
  } catch (const CartierError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContextMismatch);
  }
}

TEST(Field, MultiplicationMatchesSchoolbook) {
  for (auto [p, e] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 2}, {2, 5}, {3, 3}, {5, 2}, {2, 8}}) {
    auto f = FrobeniusContext::make(p, e);
    std::mt19937_64 rng(p * 31 + e);
    for (int t = 0; t < 300; ++t) {
      const Elem a = f->random(rng), b = f->random(rng);
      EXPECT_EQ(f->coords(f->mul(a, b)), naive_mul(*f, f->coords(a), f->coords(b)));
    }
  }
}

TEST(Field, FieldAxiomsAndFrobeniusBijection) {
  for (auto [p, e] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 1}, {2, 4}, {3, 2}, {5, 3}, {7, 1}, {3, 8}}) {
    auto f = FrobeniusContext::make(p, e);
    std::mt19937_64 rng(p * 97 + e);
    for (int t = 0; t < 200; ++t) {
      const Elem a = f->random(rng), b = f->random(rng), c = f->random(rng);
      EXPECT_EQ(f->mul(a, f->add(b, c)), f->add(f->mul(a, b), f->mul(a, c)));
      EXPECT_EQ(f->frobenius_inv(f->frobenius(a)), a);
      EXPECT_EQ(f->frobenius(f->frobenius_inv(a)), a);
      EXPECT_EQ(f->frobenius(f->add(a, b)), f->add(f->frobenius(a), f->frobenius(b)));
      if (!f->is_zero(a)) {
        EXPECT_EQ(f->mul(a, f->inv(a)), f->one());
      }
      EXPECT_EQ(f->frobenius_power(a, static_cast<std::int64_t>(e)), a);
    }
  }
}

TEST(Semilinear, ZeroMapKillsEverything) {
  auto f = FrobeniusContext::make(3, 2);
  auto t = SemilinearMap::zero(f, Twist::kPInvLinear, 3);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    Row v{f->random(rng), f->random(rng), f->random(rng)};
    EXPECT_EQ(t.apply(v), Row(3, f->zero()));
  }
}

TEST(Semilinear, PInverseOnF4) {
  auto f = FrobeniusContext::make(2, 2);
  SemilinearMap t(f, Twist::kPInvLinear, {Row{f->one()}});
  const Elem tt = f->generator();
  const Elem tp1 = f->add(tt, f->one());
  // Oracle: the square root of t is the element whose square is t.
  Elem root = f->zero();
  for (std::uint32_t c = 0; c < 4; ++c)
    if (f->mul(Elem{c}, Elem{c}) == tt) root = Elem{c};
  EXPECT_EQ(root, tp1);
  EXPECT_EQ(t.apply(Row{tt}), Row{tp1});
}

TEST(Semilinear, AdditivityOnJordanBlock) {
  auto f = FrobeniusContext::make(2, 1);
  SemilinearMap t(f, Twist::kPInvLinear, {Row{Elem{0}, Elem{1}}, Row{Elem{0}, Elem{0}}});
  EXPECT_EQ(t.apply(Row{Elem{1}, Elem{1}}), (Row{Elem{0}, Elem{1}}));
}

TEST(Semilinear, DimensionMismatch) {
  auto f = FrobeniusContext::make(2, 1);
  auto t = SemilinearMap::identity(f, Twist::kPLinear, 2);
  try {
    t.apply(Row{f->one()});
    FAIL();
  } catch (const CartierError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Semilinear, JordanChainAndNilpotency) {
  auto f = FrobeniusContext::make(2, 1);
  SemilinearMap t(f, Twist::kPInvLinear, {Row{Elem{0}, Elem{1}}, Row{Elem{0}, Elem{0}}});
  EXPECT_EQ(chain_dims(iterated_image_chain(t)), (std::vector<std::size_t>{2, 1, 0}));
  auto n = is_nilpotent_semilinear(t);
  EXPECT_TRUE(n.nilpotent);
  EXPECT_EQ(n.order, 2U);
}

TEST(Semilinear, IdentityAndZeroNilpotency) {
  auto f = FrobeniusContext::make(3, 1);
  auto id = SemilinearMap::identity(f, Twist::kPInvLinear, 3);
  EXPECT_EQ(chain_dims(iterated_image_chain(id)), (std::vector<std::size_t>{3}));
  EXPECT_FALSE(is_nilpotent_semilinear(id).nilpotent);
  EXPECT_FALSE(is_nilpotent_semilinear(id).order.has_value());
  auto z = SemilinearMap::zero(f, Twist::kPInvLinear, 3);
  auto n = is_nilpotent_semilinear(z);
  EXPECT_TRUE(n.nilpotent);
  EXPECT_EQ(n.order, 1U);
}

TEST(Semilinear, Rank2ChainMatchesEnumeration) {
  auto f = FrobeniusContext::make(3, 1);
  // Rank-2 matrix: T(e1) = e1 + e2, T(e2) = e2, T(e3) = e1 + 2 e2.
  SemilinearMap t(f, Twist::kPInvLinear,
                  {Row{Elem{1}, Elem{1}, Elem{0}}, Row{Elem{0}, Elem{1}, Elem{0}}, Row{Elem{1}, Elem{2}, Elem{0}}});
  auto chain = iterated_image_chain(t);
  // Oracle: iterate the image of the full set of vectors and count elements.
  std::set<Row> current;
  for (const auto& v : all_vectors(*f, 3)) current.insert(v);
  std::vector<std::size_t> sizes{current.size()};
  while (true) {
    std::set<Row> next;
    for (const auto& v : current) next.insert(t.apply(v));
    if (next == current) break;
    current = std::move(next);
    sizes.push_back(current.size());
  }
  ASSERT_EQ(chain.size(), sizes.size());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    std::size_t expect = 1;
    for (std::size_t k = 0; k < chain[i].dim(); ++k) expect *= 3;
    EXPECT_EQ(expect, sizes[i]);
  }
  EXPECT_EQ(chain_dims(chain), (std::vector<std::size_t>{3, 2}));
}

TEST(Semilinear, FixedPoints) {
  auto f2 = FrobeniusContext::make(2, 1);
  EXPECT_EQ(fixed_points_dimension(SemilinearMap::identity(f2, Twist::kPLinear, 1), 1), 1U);
  for (std::size_t m = 1; m <= 4; ++m)
    EXPECT_EQ(fixed_points_dimension(SemilinearMap::zero(f2, Twist::kPLinear, 2), m), 0U);
  auto f4 = FrobeniusContext::make(2, 2);
  EXPECT_EQ(fixed_points_dimension(SemilinearMap::identity(f4, Twist::kPLinear, 1), 3), 1U);
  // Oracle for F_64: enumerate all a with a^2 = a.
  auto f64 = FrobeniusContext::make(2, 6);
  std::size_t count = 0;
  for (std::uint32_t c = 0; c < 64; ++c)
    if (f64->frobenius(Elem{c}) == Elem{c}) ++count;
  EXPECT_EQ(count, 2U);
}

TEST(Semilinear, FixedPointsRequirePLinear) {
  auto f = FrobeniusContext::make(2, 1);
  EXPECT_THROW(fixed_points_dimension(SemilinearMap::identity(f, Twist::kPInvLinear, 1), 1), CartierError);
}

// --- properties ---------------------------------------------------------------

TEST(SemilinearProperty, TwistLawHolds) {
  for (auto [p, e] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 2}, {3, 2}, {5, 1}, {2, 3}}) {
    auto f = FrobeniusContext::make(p, e);
    std::mt19937_64 rng(p + 10 * e);
    for (int k = 0; k < 5; ++k) {
      auto t = random_map(f, Twist::kPInvLinear, 3, rng);
      EXPECT_TRUE(t.check_twist_law(100, rng()));
      auto s = random_map(f, Twist::kPLinear, 3, rng);
      EXPECT_TRUE(s.check_twist_law(100, rng()));
    }
  }
}

TEST(SemilinearProperty, ChainStrictlyDecreasesAndStabilizesFast) {
  std::mt19937_64 rng(77);
  for (auto [p, e] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 1}, {3, 1}, {2, 2}, {5, 1}}) {
    auto f = FrobeniusContext::make(p, e);
    for (int k = 0; k < 50; ++k) {
      const std::size_t r = 1 + rng() % 5;
      std::vector<Row> cols(r, Row(r, f->zero()));
      // Sparse matrices give a mix of nilpotent and non-nilpotent maps.
      for (auto& c : cols)
        for (auto& x : c)
          if (rng() % 3 == 0) x = f->random(rng);
      SemilinearMap t(f, Twist::kPInvLinear, cols);
      auto dims = chain_dims(iterated_image_chain(t));
      EXPECT_LE(dims.size(), r + 1);
      for (std::size_t i = 1; i < dims.size(); ++i) EXPECT_LT(dims[i], dims[i - 1]);
    }
  }
}

TEST(SemilinearProperty, NilpotencyMatchesBruteForcePowers) {
  std::mt19937_64 rng(99);
  for (std::uint32_t p : {2U, 3U}) {
    auto f = FrobeniusContext::make(p, 1);
    for (int k = 0; k < 200; ++k) {
      const std::size_t r = 1 + rng() % 3;
      std::vector<Row> cols(r, Row(r, f->zero()));
      for (auto& c : cols)
        for (auto& x : c)
          if (rng() % 2 == 0) x = f->random(rng);
      SemilinearMap t(f, Twist::kPInvLinear, cols);
      // Brute force: T^n on the standard basis for n <= r.
      std::optional<std::size_t> order;
      std::vector<Row> basis;
      for (std::size_t i = 0; i < r; ++i) {
        Row v(r, f->zero());
        v[i] = f->one();
        basis.push_back(v);
      }
      for (std::size_t n = 1; n <= r && !order; ++n) {
        bool all_zero = true;
        for (auto& v : basis) {
          v = t.apply(v);
          for (auto x : v) all_zero = all_zero && f->is_zero(x);
        }
        if (all_zero) order = n;
      }
      auto got = is_nilpotent_semilinear(t);
      EXPECT_EQ(got.nilpotent, order.has_value());
      EXPECT_EQ(got.order, order);
    }
  }
}

TEST(SemilinearProperty, FixedPointsMatchEnumeration) {
  std::mt19937_64 rng(1234);
  for (auto [p, e, r] : std::vector<std::tuple<std::uint32_t, std::uint32_t, std::size_t>>{
           {2, 1, 1}, {2, 1, 3}, {2, 2, 2}, {3, 1, 2}, {5, 1, 2}, {2, 3, 2}, {3, 2, 2}, {2, 4, 2}}) {
    auto f = FrobeniusContext::make(p, e);
    for (int k = 0; k < 8; ++k) {
      auto t = random_map(f, Twist::kPLinear, r, rng);
      std::size_t count = 0;
      for (const auto& v : all_vectors(*f, r))
        if (t.apply(v) == v) ++count;
      std::size_t dim = 0;
      for (std::size_t c = count; c > 1; c /= p) ++dim;
      EXPECT_EQ(fixed_points_dimension(t, 1), dim);
      for (std::size_t m = 1; m <= 3; ++m) EXPECT_LE(fixed_points_dimension(t, m), e * m * r);
    }
  }
}
