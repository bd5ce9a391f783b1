#include <random>

#include <gtest/gtest.h>

#include "builders.hpp"
#include "oracles.hpp"
#include "treeopt/encoding.hpp"
#include "treeopt/error.hpp"

namespace treeopt {
namespace {

using namespace testing;

VariableSchema two_vars() {
  return VariableSchema({{"X1", VariableKind::kNumeric, {1.0, 2.0}, 0}, {"X2", VariableKind::kCategorical, {}, 3}});
}

std::vector<std::uint8_t> bits_of(const VariableSchema& s, std::vector<double> x) { return encode(s, x).bits; }

TEST(Encode, NumericLadder) {
  const VariableSchema s = two_vars();
  EXPECT_EQ(bits_of(s, {1.5, 1}), (std::vector<std::uint8_t>{0, 1, 1, 0, 0}));
  EXPECT_EQ(bits_of(s, {0.5, 1}), (std::vector<std::uint8_t>{1, 1, 1, 0, 0}));
  EXPECT_EQ(bits_of(s, {3.0, 1}), (std::vector<std::uint8_t>{0, 0, 1, 0, 0}));
}

TEST(Encode, CategoricalOneHot) {
  const VariableSchema s = two_vars();
  EXPECT_EQ(bits_of(s, {0.0, 2}), (std::vector<std::uint8_t>{1, 1, 0, 1, 0}));
}

TEST(Decode, SmallestTrueSplitPoint) {
  const VariableSchema s = two_vars();
  EXPECT_EQ(decode(s, BinaryEncoding{{0, 1, 0, 0, 1}}), (std::vector<double>{2.0, 3.0}));
  EXPECT_EQ(decode(s, BinaryEncoding{{1, 1, 1, 0, 0}}), (std::vector<double>{1.0, 1.0}));
}

TEST(Decode, TopCellIsLastSplitPointPlusOne) {
  const VariableSchema s = two_vars();
  EXPECT_EQ(decode(s, BinaryEncoding{{0, 0, 1, 0, 0}})[0], 3.0);
}

TEST(Decode, InvalidEncodingThrows) {
  const VariableSchema s = two_vars();
  try {
    decode(s, BinaryEncoding{{1, 0, 1, 0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEncoding);
  }
}

TEST(Validate, LadderAndOneHot) {
  const VariableSchema s = two_vars();
  const std::vector<std::uint8_t> ladder{1, 0, 1, 0, 0};
  const auto v = validate(s, ladder);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, EncodingViolation::Kind::kLadder);
  EXPECT_EQ(v->var, 0);
  EXPECT_EQ(v->index, 0);

  const std::vector<std::uint8_t> none_hot{0, 1, 0, 0, 0};
  const auto w = validate(s, none_hot);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->kind, EncodingViolation::Kind::kOneHot);
  EXPECT_EQ(w->var, 1);

  const std::vector<std::uint8_t> short_vec{0, 1};
  EXPECT_EQ(validate(s, short_vec)->kind, EncodingViolation::Kind::kLength);
  const std::vector<std::uint8_t> not_binary{0, 2, 1, 0, 0};
  EXPECT_EQ(validate(s, not_binary)->kind, EncodingViolation::Kind::kNotBinary);
}

std::vector<std::uint8_t> random_valid_bits(const VariableSchema& s, std::mt19937_64& rng) {
  std::vector<std::uint8_t> bits;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int k = s.cardinality(i);
    if (s.is_numeric(i)) {
      const int first_one = std::uniform_int_distribution<int>(0, k)(rng);
      for (int j = 0; j < k; ++j) bits.push_back(j >= first_one ? 1 : 0);
    } else {
      const int hot = std::uniform_int_distribution<int>(0, k - 1)(rng);
      for (int j = 0; j < k; ++j) bits.push_back(j == hot ? 1 : 0);
    }
  }
  return bits;
}

TEST(Encode, RoundTripOnRandomValidEncodings) {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 1000; ++rep) {
    const Ensemble e = random_instance(small_spec(static_cast<std::uint64_t>(rep % 50)));
    const BinaryEncoding x{random_valid_bits(e.schema(), rng)};
    ASSERT_FALSE(validate(e.schema(), x.bits));
    EXPECT_EQ(encode(e.schema(), decode(e.schema(), x)), x);
  }
}

TEST(Encode, OutputAlwaysValidates) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> raw(-5.0, 15.0);
  for (int rep = 0; rep < 500; ++rep) {
    const Ensemble e = random_instance(small_spec(static_cast<std::uint64_t>(rep % 40)));
    std::vector<double> x;
    for (std::size_t i = 0; i < e.schema().size(); ++i)
      x.push_back(e.schema().is_numeric(i) ? raw(rng)
                                           : std::uniform_int_distribution<int>(1, e.schema().cardinality(i))(rng));
    EXPECT_FALSE(validate(e.schema(), encode(e.schema(), x).bits));
  }
}

TEST(GetLeaf, SingleLeafAndOneSplit) {
  const Ensemble c = constant_trees({4.0}, {1.0});
  EXPECT_EQ(get_leaf(c.tree(0), c.schema(), encode(c.schema(), std::vector<double>{9.0})), 0);
  const Ensemble e = single_split(1.0, 5.0, 2.0);
  EXPECT_EQ(get_leaf(e.tree(0), e.schema(), encode(e.schema(), std::vector<double>{1.5})), 0);
}

TEST(GetLeaf, AgreesWithPredicateChainOnDecodedInput) {
  std::mt19937_64 rng(1234);
  const auto vars = mixed_variables();
  for (int rep = 0; rep < 100; ++rep) {
    const Ensemble e = build_ensemble(vars, std::vector<RawTree>{random_raw_tree(vars, 5, rng)});
    const BinaryEncoding bits{random_valid_bits(e.schema(), rng)};
    const auto x = decode(e.schema(), bits);
    EXPECT_EQ(get_leaf(e.tree(0), e.schema(), bits), e.tree(0).leaf_ordinal(descend(e.tree(0), e.schema(), x)));
  }
}

TEST(CellBounds, IntervalsAroundDecodedValue) {
  const VariableSchema s = two_vars();
  const auto cells = cell_bounds(s, BinaryEncoding{{0, 1, 0, 0, 1}});
  EXPECT_EQ(cells[0].lower, 1.0);
  EXPECT_EQ(cells[0].upper, 2.0);
  EXPECT_EQ(cells[1].lower, 3.0);
  EXPECT_EQ(cells[1].upper, 3.0);
  const auto low = cell_bounds(s, BinaryEncoding{{1, 1, 1, 0, 0}});
  EXPECT_EQ(low[0].lower, -std::numeric_limits<double>::infinity());
  const auto high = cell_bounds(s, BinaryEncoding{{0, 0, 1, 0, 0}});
  EXPECT_EQ(high[0].upper, std::numeric_limits<double>::infinity());
}

TEST(Cells, IndexingIsConsistent) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Ensemble e = random_instance(small_spec(seed));
    const VariableSchema& s = e.schema();
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(cell_count(s, i), s.is_numeric(i) ? s.cardinality(i) + 1 : s.cardinality(i));
      for (int c = 0; c < cell_count(s, i); ++c) EXPECT_EQ(cell_of(s, i, cell_value(s, i, c)), c);
    }
  }
}

}  // namespace
}  // namespace treeopt
