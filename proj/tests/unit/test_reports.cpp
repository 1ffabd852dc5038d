#include "caprank/error.hpp"
#include "caprank/oracle.hpp"
#include "caprank/reports.hpp"
#include "caprank/scoring.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <fstream>
#include <sstream>

using namespace caprank;
using caprank::testing::gaussian_matrix;
using caprank::testing::scratch_dir;

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(SpectrumCsv, MatchesDecompositionExactly) {
  std::mt19937_64 rng(1);
  DecompositionConfig c;
  c.rank_override = 3;
  const auto dec = decompose(EmbeddingMatrix(gaussian_matrix(rng, 6, 8)), c);
  const auto rows = csv_rows(spectrum_csv(dec));
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "sigma_original", "sigma_lowrank"}));
  for (std::size_t k = 1; k <= 6; ++k) {
    EXPECT_EQ(std::stod(rows[k][1]), dec.spectrum.values[k - 1]);
    EXPECT_EQ(std::stod(rows[k][2]), k <= 3 ? dec.spectrum.values[k - 1] : 0.0);
  }
}

TEST(SpectrumCsv, IdenticalRowsHaveOneNonzeroValue) {
  Eigen::MatrixXd m(4, 5);
  m.rowwise() = Eigen::RowVectorXd::LinSpaced(5, 1.0, 2.0);
  const auto dec = decompose(EmbeddingMatrix(m), DecompositionConfig{});
  const auto rows = csv_rows(spectrum_csv(dec));
  EXPECT_GT(std::stod(rows[1][1]), 1.0);
  for (std::size_t k = 2; k < rows.size(); ++k) EXPECT_LT(std::stod(rows[k][1]), 1e-12);
  for (const auto& r : csv_rows(sensitivity_csv(dec.spectrum))) {
    if (r[0] == "component") EXPECT_LT(std::stod(r[3]), 1e-12);
  }
}

TEST(HeatmapCsv, ExactSubmatricesOfFirstFortyColumns) {
  std::mt19937_64 rng(2);
  const auto dec = decompose(EmbeddingMatrix(gaussian_matrix(rng, 3, 50)), DecompositionConfig{});
  const auto rows = csv_rows(heatmap_csv(dec));
  ASSERT_EQ(rows.size(), 1 + 3u * 3u * 40u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const Eigen::MatrixXd& src = r[0] == "M" ? dec.input : r[0] == "R" ? dec.consensus : dec.residual;
    EXPECT_EQ(std::stod(r[3]), src(std::stol(r[1]), std::stol(r[2])));
    EXPECT_LT(std::stol(r[2]), 40);
  }
}

TEST(SensitivityCsv, EnergySplitsAndOracleRatios) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd m = gaussian_matrix(rng, 7, 9);
  const auto spectrum = singular_spectrum(m);
  const auto ref = oracle::oracle_spectrum(caprank::testing::to_small(m));
  double ref_total = 0.0;
  for (double s : ref) ref_total += s * s;
  double ref_cum = 0.0;
  int markers = 0;
  for (const auto& r : csv_rows(sensitivity_csv(spectrum))) {
    if (r[0] == "component") {
      const std::size_t k = std::stoul(r[1]);
      const double captured = std::stod(r[2]), residual = std::stod(r[3]);
      EXPECT_NEAR(captured * captured + residual * residual, spectrum.total_energy(), 1e-9 * spectrum.total_energy());
      ref_cum += ref[k - 1] * ref[k - 1];
      EXPECT_NEAR(std::stod(r[4]), ref_cum / ref_total, 1e-9);
    } else if (r[0] == "threshold") {
      ++markers;
      EXPECT_GE(std::stod(r[4]), std::stod(r[5]));
    }
  }
  EXPECT_EQ(markers, 3);
}

TEST(Projection, CollinearRowsHaveNoSecondComponent) {
  Eigen::MatrixXd m(3, 4);
  m << 1, 2, 3, 4, 2, 4, 6, 8, 3, 6, 9, 12;
  const std::vector<double> scores{0.1, 0.2, 0.3};
  const auto pts = projection_rows(EmbeddingMatrix(m), scores);
  for (const auto& p : pts) EXPECT_NEAR(p.pc2, 0.0, 1e-12);
  EXPECT_GT(std::abs(pts[0].pc1), 1.0);
}

TEST(Projection, CoordinatesAreCentered) {
  std::mt19937_64 rng(4);
  const EmbeddingMatrix m(gaussian_matrix(rng, 8, 10).array() + 3.0);
  const std::vector<double> scores(8, 0.0);
  double s1 = 0, s2 = 0;
  for (const auto& p : projection_rows(m, scores)) s1 += p.pc1, s2 += p.pc2;
  EXPECT_NEAR(s1, 0.0, 1e-10);
  EXPECT_NEAR(s2, 0.0, 1e-10);
}

TEST(Projection, NeedsThreeRows) {
  const std::vector<double> scores{0, 0};
  try {
    projection_rows(EmbeddingMatrix(Eigen::MatrixXd::Ones(2, 3)), scores);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFew);
  }
}

TEST(Projection, PlantedOutliersStandApart) {
  // One-dimensional consensus: with two, the displayed plane is the
  // consensus plane itself and the orthogonal outlier shift is invisible.
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SynthConfig c;
    c.consensus_rank = 1;
    c.seed = derive_seed(3, seed);
    const auto s = generate_scene(c);
    const std::vector<double> scores(c.captions, 0.0);
    const auto pts = projection_rows(s.matrix, scores);
    double cx = 0, cy = 0;
    std::size_t inliers = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!s.outlier_flags[i]) cx += pts[i].pc1, cy += pts[i].pc2, ++inliers;
    }
    cx /= static_cast<double>(inliers), cy /= static_cast<double>(inliers);
    std::vector<double> inlier_dist;
    double outlier_dist = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = std::hypot(pts[i].pc1 - cx, pts[i].pc2 - cy);
      if (s.outlier_flags[i]) outlier_dist = d;
      else inlier_dist.push_back(d);
    }
    std::nth_element(inlier_dist.begin(), inlier_dist.begin() + inlier_dist.size() / 2, inlier_dist.end());
    ok += outlier_dist > inlier_dist[inlier_dist.size() / 2];
  }
  EXPECT_GE(ok, 95);
}

TEST(Reports, EmitsFilesAndSvg) {
  std::mt19937_64 rng(5);
  const EmbeddingMatrix m(gaussian_matrix(rng, 5, 6));
  const auto dec = decompose(m, DecompositionConfig{});
  const auto dir = scratch_dir("reports_emit");
  const auto paths = emit_decomposition_reports(dec, dir, "kf_");
  ASSERT_EQ(paths.size(), 3u);
  for (const auto& p : paths) EXPECT_TRUE(std::filesystem::exists(p));
  const auto proj = emit_projection_report(m, hallucination_scores(dec).scores, dir, "kf_", true);
  ASSERT_EQ(proj.size(), 2u);
  std::ifstream in(proj[1]);
  std::string svg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 5, true);
}

TEST(BenchmarkCsv, HasBothMethodsAndModes) {
  BenchmarkGrid g;
  g.trials = 3;
  g.deltas = {1.0};
  g.sigmas = {0.05};
  const std::string csv = benchmark_csv(run_benchmark(g));
  const auto rows = csv_rows(csv);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0][0], "mode");
  EXPECT_NE(csv.find("dense_shift,1,0.05,svd"), std::string::npos);
  EXPECT_NE(csv.find("sparse_spike,1,0.05,rpca"), std::string::npos);
}
