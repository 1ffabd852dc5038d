#include "caprank/error.hpp"
#include "caprank/scoring.hpp"
#include "caprank/synth.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace caprank;

TEST(Synth, SameSeedSameScene) {
  SynthConfig c;
  c.seed = 99;
  const auto a = generate_scene(c);
  const auto b = generate_scene(c);
  EXPECT_EQ(a.matrix.data(), b.matrix.data());
  EXPECT_EQ(a.outlier_flags, b.outlier_flags);
  c.seed = 100;
  EXPECT_NE(generate_scene(c).matrix.data(), a.matrix.data());
}

TEST(Synth, ShapeAndLabels) {
  SynthConfig c;
  c.captions = 12;
  c.dims = 20;
  c.outlier_count = 3;
  const auto s = generate_scene(c);
  EXPECT_EQ(s.matrix.rows(), 12u);
  EXPECT_EQ(s.matrix.dims(), 20u);
  EXPECT_EQ(std::count(s.outlier_flags.begin(), s.outlier_flags.end(), true), 3);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(s.gt_labels[i].front().hallucinated, s.outlier_flags[i]);
    EXPECT_NEAR(s.matrix.data().row(static_cast<Eigen::Index>(i)).norm(), 1.0, 1e-12);
  }
  const Eigen::MatrixXd gram = s.consensus_basis.transpose() * s.consensus_basis;
  EXPECT_TRUE(gram.isIdentity(1e-12));
}

TEST(Synth, SparseSpikesTouchFivePercentOfCoordinates) {
  SynthConfig c;
  c.mode = OutlierMode::SparseSpike;
  c.dims = 100;
  c.outlier_count = 2;
  const auto s = generate_scene(c);
  EXPECT_EQ(s.spike_positions.size(), 10u);
  for (const auto& [row, col] : s.spike_positions) EXPECT_TRUE(s.outlier_flags[row]);
}

TEST(Synth, OutliersDeviateMoreThanInliersUsually) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SynthConfig c;
    c.seed = seed;
    const auto s = generate_scene(c);
    double worst_inlier = 0.0, outlier = 0.0;
    for (std::size_t i = 0; i < c.captions; ++i) {
      if (s.outlier_flags[i]) outlier = s.deviation_magnitudes[i];
      else worst_inlier = std::max(worst_inlier, s.deviation_magnitudes[i]);
    }
    ok += outlier > worst_inlier;
  }
  EXPECT_GE(ok, 195);
}

TEST(Synth, PlantedOutlierIsRarelySelected) {
  int selected_outlier = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SynthConfig c;
    c.seed = derive_seed(7, seed);
    const auto s = generate_scene(c);
    const auto r = rank_and_select(hallucination_scores(decompose(s.matrix, DecompositionConfig{})));
    selected_outlier += s.outlier_flags[r.selected];
  }
  EXPECT_LE(selected_outlier, 4);
}

TEST(Synth, RejectsInvalidConfig) {
  SynthConfig c;
  c.outlier_count = c.captions;
  EXPECT_THROW(c.validate(), Error);
  c = SynthConfig{};
  c.consensus_rank = 64;
  EXPECT_THROW(c.validate(), Error);
  c = SynthConfig{};
  c.noise_sigma = -1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Seeds, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0, 1), derive_seed(1, 1, 0));
  EXPECT_EQ(derive_seed(5, 3, 2), derive_seed(5, 3, 2));
}

TEST(SpikePrecision, CountsTopEntriesOnSpikes) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(2, 3);
  e(0, 1) = 5;
  e(1, 2) = -4;
  e(1, 0) = 3;
  EXPECT_EQ(spike_precision(e, {{0, 1}, {1, 2}}), 1.0);
  EXPECT_EQ(spike_precision(e, {{0, 1}, {1, 1}}), 0.5);
}

TEST(Benchmark, IndependentOfWorkerCount) {
  BenchmarkGrid g;
  g.trials = 6;
  g.deltas = {0.3};
  g.sigmas = {0.05};
  g.seed = 17;
  g.workers = 1;
  const auto a = run_benchmark(g);
  g.workers = 4;
  const auto b = run_benchmark(g);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].selection_rate, b[i].selection_rate);
    EXPECT_EQ(a[i].mean_rho, b[i].mean_rho);
    EXPECT_EQ(a[i].spike_precision, b[i].spike_precision);
  }
  EXPECT_EQ(a[0].method, Method::Svd);
  EXPECT_EQ(a[1].method, Method::Rpca);
  EXPECT_EQ(a[2].mode, OutlierMode::SparseSpike);
  EXPECT_TRUE(a[2].spike_precision);
  EXPECT_FALSE(a[0].spike_precision);
}
