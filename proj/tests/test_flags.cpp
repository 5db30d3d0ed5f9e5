#include <gtest/gtest.h>

#include <random>

#include "geoctl/flags/derived_flag.hpp"
#include "test_support.hpp"

using namespace geoctl;
using namespace geoctl::testing;

namespace {

RationalVector origin(std::size_t n) { return RationalVector(n, Rational(0)); }

std::vector<PolyVectorField> engel_padded() {
  const auto n = xnames(5);
  return {field({"1", "0", "0", "0", "0"}, n), field({"0", "1", "x1", "x3", "0"}, n)};
}

}  // namespace

TEST(DerivedFlag, FreeNilpotentAtOrigin) {
  const auto f = derived_flag(m5_frame(), origin(5));
  EXPECT_EQ(f.growth, (std::vector<int>{2, 3, 5}));
  EXPECT_TRUE(f.complete);
  EXPECT_TRUE(f.exact);
  EXPECT_EQ(f.stages[1].words, (std::vector<std::string>{"X1", "X2", "[X1,X2]"}));
}

TEST(DerivedFlag, InvolutivePlaneStabilizes) {
  const auto f = derived_flag({PolyVectorField::coordinate(3, 0), PolyVectorField::coordinate(3, 1)}, origin(3));
  EXPECT_EQ(f.growth, (std::vector<int>{2, 2}));
  EXPECT_TRUE(f.complete);
}

TEST(DerivedFlag, MaxDepthExhaustedIsIncomplete) {
  const auto f = derived_flag(m5_frame(), origin(5), 2);
  EXPECT_EQ(f.growth, (std::vector<int>{2, 3}));
  EXPECT_FALSE(f.complete);
}

TEST(DerivedFlag, RanksNondecreasingAndBounded) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto f = derived_flag({random_field(rng, 4, 2, 3), random_field(rng, 4, 2, 3)}, random_point(rng, 4), 5);
    for (std::size_t k = 1; k < f.growth.size(); ++k) EXPECT_GE(f.growth[k], f.growth[k - 1]);
    for (int r : f.growth) EXPECT_LE(r, 4);
  }
}

TEST(DerivedFlag, FloatingModeAgreesWithExact) {
  std::mt19937_64 rng(5);
  const auto x = random_point(rng, 5);
  const auto fe = derived_flag(m5_frame(), x);
  const auto ff = derived_flag(m5_frame(), to_double(x), 6, 1e-8);
  EXPECT_EQ(fe.growth, ff.growth);
}

TEST(IsCartan, FreeNilpotent) { EXPECT_TRUE(is_cartan(m5_frame(), origin(5))); }

TEST(IsCartan, InvolutiveRankTwo) {
  EXPECT_FALSE(is_cartan({PolyVectorField::coordinate(5, 0), PolyVectorField::coordinate(5, 1)}, origin(5)));
}

TEST(IsCartan, EngelPaddedWithFlatDirection) {
  const auto f = derived_flag(engel_padded(), origin(5));
  EXPECT_EQ(f.growth, (std::vector<int>{2, 3, 4, 4}));
  EXPECT_FALSE(is_cartan(engel_padded(), origin(5)));
}

TEST(IsCartan, WrongAmbientDimensionThrows) {
  EXPECT_THROW(is_cartan({PolyVectorField::coordinate(3, 0), PolyVectorField::coordinate(3, 1)}, origin(3)),
               DimensionMismatch);
}

TEST(BracketGenerating, FreeNilpotentAtDepthThree) {
  const auto f = derived_flag(m5_frame(), origin(5));
  EXPECT_TRUE(is_bracket_generating(f));
  EXPECT_EQ(generating_depth(f), 3);
  EXPECT_FALSE(is_bracket_generating(m5_frame(), origin(5), 2));
}

TEST(BracketGenerating, SingleFieldOnPlane) {
  EXPECT_FALSE(is_bracket_generating({PolyVectorField::coordinate(2, 0)}, origin(2), 6));
}

TEST(Annihilator, SecondStageOfFreeNilpotent) {
  const auto f = derived_flag(m5_frame(), origin(5));
  const auto a = annihilator_basis_exact(f, 2);
  ASSERT_EQ(a.size(), 2U);
  RationalMatrix rows{a[0].components, a[1].components};
  rref(rows);
  EXPECT_EQ(rows[0], (RationalVector{0, 0, 0, 1, 0}));
  EXPECT_EQ(rows[1], (RationalVector{0, 0, 0, 0, 1}));
}

TEST(Annihilator, FirstStageOfFreeNilpotent) {
  const auto f = derived_flag(m5_frame(), origin(5));
  const auto a = annihilator_basis_exact(f, 1);
  ASSERT_EQ(a.size(), 3U);
  for (const auto& c : a) {
    EXPECT_EQ(c.components[0], 0);
    EXPECT_EQ(c.components[1], 0);
  }
}

TEST(Annihilator, FinalStageIsEmpty) {
  const auto f = derived_flag(m5_frame(), origin(5));
  EXPECT_TRUE(annihilator_basis_exact(f, 3).empty());
  EXPECT_THROW(annihilator_basis_exact(derived_flag(m5_frame(), origin(5), 2), 3), InvalidArgument);
}

TEST(Annihilator, DimensionCountAndChainAtRandomPoints) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const auto f = derived_flag(m5_frame(), random_point(rng, 5));
    for (int k = 1; k <= 3; ++k) {
      const auto a = annihilator_basis_exact(f, k);
      EXPECT_EQ(static_cast<int>(a.size()) + f.growth[static_cast<std::size_t>(k - 1)], 5);
      // Chain: every annihilator of D^(k+1) annihilates D^(k).
      if (k < 3) {
        for (const auto& c : annihilator_basis_exact(f, k + 1)) {
          for (const auto& row : flag_stage(f, k).exact_vectors) {
            Rational s = 0;
            for (std::size_t i = 0; i < 5; ++i) s += c.components[i] * row[i];
            EXPECT_EQ(s, 0);
          }
        }
      }
    }
  }
}

TEST(Annihilator, FloatingBasisIsOrthonormalAnnihilator) {
  const auto f = derived_flag(m5_frame(), std::vector<double>{0.3, -0.2, 1, 2, 0.5}, 6, 1e-9);
  const auto a = annihilator_basis(f, 2);
  ASSERT_EQ(a.size(), 2U);
  const Mat& V = flag_stage(f, 2).vectors;
  for (const auto& c : a) EXPECT_LE((V.transpose() * to_vec(c.components)).norm(), 1e-12);
}

TEST(DerivedFlag, GrowthInvariantUnderPolynomialFrameChange) {
  // (X1, X2) -> (g11 X1 + g12 X2, g21 X1 + g22 X2) with unimodular polynomial G.
  std::mt19937_64 rng(11);
  const auto base = m5_frame();
  const auto n = xnames(5);
  for (int t = 0; t < 5; ++t) {
    const auto a = random_polynomial(rng, 5, 2, 3);
    const auto b = random_polynomial(rng, 5, 2, 3);
    // G = [[1, a], [0, 1]] * [[1, 0], [b, 1]] has determinant 1.
    const auto one = Polynomial::constant(5, 1);
    const auto y1 = (one + a * b) * base[0] + a * base[1];
    const auto y2 = b * base[0] + base[1];
    const auto x = random_point(rng, 5);
    EXPECT_EQ(derived_flag({y1, y2}, x).growth, derived_flag(base, x).growth);
  }
}
