#include "caprank/error.hpp"
#include "caprank/scoring.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace caprank;
using caprank::testing::gaussian_matrix;

TEST(Scores, TwoAgreeOneDissents) {
  Eigen::MatrixXd m(3, 2);
  m << 1, 0, 1, 0, 0, 1;
  DecompositionConfig c;
  c.rank_override = 1;
  const auto scores = hallucination_scores(decompose(EmbeddingMatrix(m), c));
  ASSERT_EQ(scores.scores.size(), 3u);
  EXPECT_NEAR(scores.scores[0], 0.0, 1e-12);
  EXPECT_NEAR(scores.scores[1], 0.0, 1e-12);
  EXPECT_NEAR(scores.scores[2], 1.0, 1e-12);
  EXPECT_EQ(scores.rank, 1u);
  const auto r = rank_and_select(scores);
  EXPECT_NE(r.selected, 2u);
  EXPECT_EQ(r.ordering.back(), 2u);
}

TEST(Scores, AreResidualRowNorms) {
  std::mt19937_64 rng(3);
  const auto dec = decompose(EmbeddingMatrix(gaussian_matrix(rng, 7, 9)), DecompositionConfig{});
  const auto s = hallucination_scores(dec);
  for (Eigen::Index i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(s.scores[static_cast<std::size_t>(i)], dec.residual.row(i).norm());
}

TEST(Selection, PicksTheSmallestScore) {
  // Three captions with residual scores reported for one keyframe.
  const std::vector<double> scores{0.1614, 0.0496, 0.1205};
  const auto r = rank_and_select(scores);
  EXPECT_EQ(r.selected, 1u);
  EXPECT_EQ(r.ordering, (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_FALSE(r.degenerate);
}

TEST(Selection, TiesBreakByIndex) {
  const std::vector<double> scores{0.3, 0.1, 0.1, 0.2};
  const auto r = rank_and_select(scores);
  EXPECT_EQ(r.ordering, (std::vector<std::size_t>{1, 2, 3, 0}));
  EXPECT_EQ(r.selected, 1u);
}

TEST(Selection, FlatScoresAreDegenerate) {
  const std::vector<double> scores{0.5, 0.5, 0.5 + 1e-14};
  const auto r = rank_and_select(scores);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.selected, 0u);
}

TEST(Selection, EmptyIsAnError) {
  try {
    rank_and_select(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(Scores, PermutationEquivariant) {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd m = gaussian_matrix(rng, 9, 16);
  std::vector<Eigen::Index> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd p(9, 16);
  for (Eigen::Index i = 0; i < 9; ++i) p.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
  DecompositionConfig c;
  c.rank_override = 3;
  const auto a = hallucination_scores(decompose(EmbeddingMatrix(m), c)).scores;
  const auto b = hallucination_scores(decompose(EmbeddingMatrix(p), c)).scores;
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(b[i], a[static_cast<std::size_t>(perm[i])], 1e-10);
}

TEST(Scores, ScaleCovariant) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd m = gaussian_matrix(rng, 6, 10);
  const auto a = hallucination_scores(decompose(EmbeddingMatrix(m), DecompositionConfig{}));
  const auto b = hallucination_scores(decompose(EmbeddingMatrix(m * 7.5), DecompositionConfig{}));
  EXPECT_EQ(a.rank, b.rank);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(b.scores[i], 7.5 * a.scores[i], 1e-9 * 7.5 * a.scores[i] + 1e-12);
}
