#include <gtest/gtest.h>

#include <random>

#include "cartier_lab/groebner.hpp"

using namespace cartier_lab;

namespace {

RingPtr ring(std::uint32_t p, std::uint32_t e, std::vector<std::string> vars) {
  return PolyRing::make(FrobeniusContext::make(p, e), std::move(vars));
}

Polynomial P(const RingPtr& r, const std::string& s) { return parse_polynomial(r, s); }

Polynomial random_poly(const RingPtr& r, std::mt19937_64& rng, std::uint32_t max_exp, std::size_t terms) {
  Polynomial out(r);
  for (std::size_t k = 0; k < terms; ++k) {
    Exponents e{};
    for (std::size_t i = 0; i < r->nvars(); ++i) e[i] = static_cast<std::uint32_t>(rng() % (max_exp + 1));
    out.add_term(e, r->f().random(rng));
  }
  return out;
}

// Test-local reduction: repeatedly cancel any term divisible by a leading
// monomial, scanning terms from the top. Does not share code with divide().
Polynomial naive_reduce(Polynomial f, const std::vector<Polynomial>& basis) {
  const std::size_t n = f.ring()->nvars();
  for (int guard = 0; guard < 100000; ++guard) {
    std::optional<Polynomial> step;
    for (auto it = f.terms().rbegin(); it != f.terms().rend() && !step; ++it) {
      for (const auto& g : basis) {
        const auto& lm = g.leading_monomial();
        bool div = true;
        for (std::size_t i = 0; i < n; ++i) div = div && lm[i] <= it->first[i];
        if (!div) continue;
        Exponents s{};
        for (std::size_t i = 0; i < n; ++i) s[i] = it->first[i] - lm[i];
        const Elem c = f.field().div(it->second, g.leading_coeff());
        step = g * Polynomial::monomial(f.ring(), s, c);
        break;
      }
    }
    if (!step) return f;
    f -= *step;
  }
  ADD_FAILURE() << "naive reduction did not terminate";
  return f;
}

}  // namespace

TEST(Poly, FrobeniusOnBinomial) {
  auto r = ring(2, 1, {"x"});
  EXPECT_EQ(P(r, "x+1").pow(2), P(r, "x^2+1"));
  EXPECT_EQ(P(r, "x+1").frobenius(), P(r, "x^2+1"));
}

TEST(Poly, CubeInF3) {
  auto r = ring(3, 1, {"x"});
  // Expand (x+2)^3 = x^3 + 3*2 x^2 + 3*4 x + 8; reduce coefficients mod 3.
  EXPECT_EQ(P(r, "x+2").pow(3), P(r, "x^3+2"));
}

TEST(Poly, NormalFormModY) {
  auto r = ring(3, 1, {"x", "y"});
  auto i = IdealSpec::make(r, {P(r, "y")});
  EXPECT_EQ(i.normal_form(P(r, "x^2*y+x")), P(r, "x"));
}

TEST(Poly, RingMismatch) {
  auto a = ring(3, 1, {"x"});
  auto b = ring(3, 1, {"y"});
  try {
    (void)(P(a, "x") + P(b, "y"));
    FAIL();
  } catch (const CartierError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContextMismatch);
  }
}

TEST(Poly, ExactDivision) {
  auto r = ring(5, 1, {"x", "y"});
  auto f = P(r, "x+y"), g = P(r, "x^2+3*y");
  auto q = exact_divide(f * g, g);
  ASSERT_TRUE(q.has_value());
  EXPECT_EQ(*q, f);
  EXPECT_FALSE(exact_divide(g, f).has_value());
}

TEST(Groebner, PrincipalIdealIsMonic) {
  auto r = ring(5, 1, {"x", "y"});
  auto gb = buchberger(r, {P(r, "3*x^2+y")});
  ASSERT_EQ(gb.size(), 1U);
  EXPECT_EQ(gb[0], P(r, "x^2+2*y"));
}

TEST(Groebner, VariablesIdeal) {
  auto r = ring(2, 1, {"x", "y"});
  auto gb = buchberger(r, {P(r, "x"), P(r, "y")});
  ASSERT_EQ(gb.size(), 2U);
  EXPECT_EQ(gb[0], P(r, "y"));
  EXPECT_EQ(gb[1], P(r, "x"));
}

TEST(Groebner, SPairsReduceToZero) {
  auto r = ring(3, 1, {"x", "y"});
  std::vector<Polynomial> gens{P(r, "x^2+2*y"), P(r, "y^2")};
  auto gb = buchberger(r, gens);
  for (std::size_t i = 0; i < gb.size(); ++i) {
    EXPECT_EQ(gb[i].leading_coeff(), r->f().one());
    for (std::size_t j = i + 1; j < gb.size(); ++j) {
      const std::size_t n = r->nvars();
      const auto& a = gb[i].leading_monomial();
      const auto& b = gb[j].leading_monomial();
      Exponents l{}, sa{}, sb{};
      for (std::size_t k = 0; k < n; ++k) {
        l[k] = std::max(a[k], b[k]);
        sa[k] = l[k] - a[k];
        sb[k] = l[k] - b[k];
      }
      auto s = gb[i] * Polynomial::monomial(r, sa, r->f().one()) -
               gb[j] * Polynomial::monomial(r, sb, r->f().one());
      EXPECT_TRUE(naive_reduce(s, gb).is_zero());
    }
  }
  for (const auto& g : gens) EXPECT_TRUE(naive_reduce(g, gb).is_zero());
  // Basis elements lie in the original ideal: x^2 y - (x^2 - y) y... the
  // basis for this ideal has leading monomials x^2, x*y, y^2 up to order.
  for (const auto& g : gb) EXPECT_TRUE(IdealSpec::make(r, gens).lift(g).has_value());
}

TEST(Groebner, CofactorsReproduceMembers) {
  auto r = ring(3, 1, {"x", "y"});
  std::vector<Polynomial> gens{P(r, "x^2+2*y"), P(r, "x*y+1")};
  auto ideal = IdealSpec::make(r, gens);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    auto a = random_poly(r, rng, 2, 3), b = random_poly(r, rng, 2, 3);
    auto f = a * gens[0] + b * gens[1];
    auto c = ideal.lift(f);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ((*c)[0] * gens[0] + (*c)[1] * gens[1], f);
  }
  EXPECT_FALSE(ideal.lift(P(r, "x")).has_value());
}

TEST(Groebner, InputDegreeCap) {
  auto r = ring(2, 1, {"x"});
  try {
    buchberger(r, {P(r, "x^13")});
    FAIL();
  } catch (const CartierError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapExceeded);
  }
}

TEST(Groebner, IdealQuotient) {
  auto r = ring(3, 1, {"x", "y"});
  auto j = IdealSpec::make(r, {P(r, "x*y")});
  auto q = ideal_quotient(j, P(r, "x"));
  EXPECT_EQ(q, IdealSpec::make(r, {P(r, "y")}));
  auto q2 = ideal_quotient(IdealSpec::make(r, {P(r, "x^2"), P(r, "x*y")}), P(r, "x"));
  EXPECT_EQ(q2, IdealSpec::make(r, {P(r, "x"), P(r, "y")}));
}

TEST(Groebner, StandardMonomials) {
  auto r = ring(2, 1, {"x", "y"});
  auto i = IdealSpec::make(r, {P(r, "x^2"), P(r, "y^2")});
  auto sm = i.standard_monomials();
  ASSERT_TRUE(sm.has_value());
  EXPECT_EQ(sm->size(), 4U);
  EXPECT_FALSE(IdealSpec::make(r, {P(r, "x")}).standard_monomials().has_value());
}

TEST(Regular, Examples) {
  for (std::uint32_t p : {2U, 3U, 5U}) {
    auto r1 = ring(p, 1, {"x"});
    EXPECT_TRUE(is_regular_sequence(r1, {P(r1, "x")}));
    auto r2 = ring(p, 1, {"x", "y"});
    EXPECT_TRUE(is_regular_sequence(r2, {P(r2, "x"), P(r2, "y")}));
    EXPECT_FALSE(is_regular_sequence(r2, {P(r2, "x"), P(r2, "x")}));
  }
}

TEST(Regular, MoreCases) {
  auto r2 = ring(3, 1, {"x", "y"});
  EXPECT_FALSE(is_regular_sequence(r2, {P(r2, "x*y"), P(r2, "x")}));
  EXPECT_TRUE(is_regular_sequence(r2, {P(r2, "x^2+y"), P(r2, "y")}));
  EXPECT_FALSE(is_regular_sequence(r2, {Polynomial(r2)}));
  auto r3 = ring(2, 1, {"x", "y", "z"});
  EXPECT_TRUE(is_regular_sequence(r3, {P(r3, "x"), P(r3, "y+z"), P(r3, "z+1")}));
  EXPECT_FALSE(is_regular_sequence(r3, {P(r3, "x+y"), P(r3, "y"), P(r3, "x")}));
  try {
    is_regular_sequence(r3, {P(r3, "x*y")});
    FAIL();
  } catch (const CartierError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupported);
  }
}

TEST(Decompose, Examples) {
  auto r2 = ring(2, 1, {"x"});
  auto parts = frobenius_decompose(P(r2, "x^3+x"));
  ASSERT_EQ(parts.size(), 2U);
  EXPECT_TRUE(parts[0].is_zero());
  EXPECT_EQ(parts[1], P(r2, "x+1"));
  EXPECT_EQ(P(r2, "x+1").pow(2) * P(r2, "x"), P(r2, "x^3+x"));

  auto r3 = ring(3, 1, {"x"});
  auto p3 = frobenius_decompose(P(r3, "x^4+2*x"));
  ASSERT_EQ(p3.size(), 3U);
  EXPECT_TRUE(p3[0].is_zero());
  EXPECT_EQ(p3[1], P(r3, "x+2"));
  EXPECT_TRUE(p3[2].is_zero());
  EXPECT_EQ(P(r3, "x+2").pow(3) * P(r3, "x"), P(r3, "x^4+2*x"));

  auto one = frobenius_decompose(Polynomial::one(r3));
  EXPECT_EQ(one[0], Polynomial::one(r3));
  EXPECT_TRUE(one[1].is_zero() && one[2].is_zero());
}

TEST(Decompose, ExtensionFieldCoefficients) {
  auto r = ring(2, 2, {"x"});
  // t*x^2 = (t+1)^2 x^2 since (t+1)^2 = t.
  auto parts = frobenius_decompose(P(r, "t*x^2"));
  EXPECT_EQ(parts[0], P(r, "(t+1)*x"));
}

TEST(DecomposeProperty, RoundTrip) {
  std::mt19937_64 rng(2024);
  for (std::uint32_t p : {2U, 3U, 5U}) {
    for (std::size_t n : {1U, 2U}) {
      std::vector<std::string> vars{"x", "y"};
      vars.resize(n);
      auto r = ring(p, 1, vars);
      for (int k = 0; k < 200; ++k) {
        auto f = random_poly(r, rng, 3 * p, 6);
        auto parts = frobenius_decompose(f);
        // Independent reassembly: expand each g_a^p by repeated multiplication.
        Polynomial back(r);
        for (std::size_t code = 0; code < parts.size(); ++code) {
          Exponents a = exponent_digits(code, p, n);
          Polynomial gp = Polynomial::one(r);
          for (std::uint32_t i = 0; i < p; ++i) gp = gp * parts[code];
          back += gp * Polynomial::monomial(r, a, r->f().one());
        }
        EXPECT_EQ(back, f);
        EXPECT_EQ(frobenius_recompose(r, parts), f);
      }
    }
  }
}

TEST(DecomposeProperty, Semilinear) {
  std::mt19937_64 rng(11);
  for (auto [p, e] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 2}, {3, 2}, {5, 1}, {2, 3}}) {
    auto r = ring(p, e, {"x", "y"});
    for (int k = 0; k < 50; ++k) {
      auto f = random_poly(r, rng, 5, 5);
      const Elem c = r->f().random(rng);
      auto lhs = frobenius_decompose(f.scaled(r->f().frobenius(c)));
      auto rhs = frobenius_decompose(f);
      for (std::size_t a = 0; a < lhs.size(); ++a) EXPECT_EQ(lhs[a], rhs[a].scaled(c));
    }
  }
}

TEST(NormalFormProperty, IdempotentAndLinear) {
  std::mt19937_64 rng(8);
  auto r = ring(3, 1, {"x", "y"});
  std::vector<IdealSpec> ideals{IdealSpec::make(r, {P(r, "x^2+2*y"), P(r, "y^2")}),
                                IdealSpec::make(r, {P(r, "x*y+1")}),
                                IdealSpec::make(r, {P(r, "x^3"), P(r, "x*y^2+y")})};
  for (const auto& i : ideals) {
    for (int k = 0; k < 50; ++k) {
      auto f = random_poly(r, rng, 4, 6), g = random_poly(r, rng, 4, 6), h = random_poly(r, rng, 2, 3);
      auto nf = i.normal_form(f);
      EXPECT_EQ(i.normal_form(nf), nf);
      EXPECT_EQ(i.normal_form(f + g), nf + i.normal_form(g));
      EXPECT_EQ(i.normal_form(f * h), i.normal_form(nf * h));
      EXPECT_EQ(naive_reduce(f, i.groebner()), nf);
    }
  }
}

TEST(Parse, CanonicalPrinting) {
  auto r = ring(3, 1, {"x", "y"});
  EXPECT_EQ(P(r, "y + 2*x^2*y + 1").to_string(), "2*x^2*y+y+1");
  EXPECT_EQ(P(r, "0").to_string(), "0");
  auto r4 = ring(2, 2, {"x"});
  EXPECT_EQ(P(r4, "(t+1)*x+t").to_string(), "(t+1)*x+t");
  EXPECT_EQ(P(r4, "t^2").to_string(), "(t+1)");
  std::mt19937_64 rng(3);
  auto r9 = ring(3, 2, {"x", "y"});
  for (int k = 0; k < 100; ++k) {
    auto f = random_poly(r9, rng, 3, 5);
    EXPECT_EQ(P(r9, f.to_string()), f);
  }
}

TEST(Parse, RejectsAmbiguousInput) {
  auto r = ring(3, 1, {"x", "y"});
  for (const char* bad : {"x*x", "x+x", "3*x", "0*x", "x-y", "z", "x+", "x y", "x^0", "2*3*x", "", "x^",
                          "(1)*x", "t*x"}) {
    EXPECT_THROW(P(r, bad), CartierError) << bad;
  }
  auto r4 = ring(2, 2, {"x"});
  for (const char* bad : {"t*t", "(t+t)*x", "(t+1)*(t)", "2*x"}) {
    EXPECT_THROW(P(r4, bad), CartierError) << bad;
  }
  EXPECT_THROW(PolyRing::make(FrobeniusContext::make(2, 2), {"t"}), CartierError);
  EXPECT_THROW(PolyRing::make(FrobeniusContext::make(2, 1), {"x", "x"}), CartierError);
}
