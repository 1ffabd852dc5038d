#include "caprank/cli.hpp"
#include "caprank/pipeline.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace caprank;
using caprank::testing::fixture;
using caprank::testing::scratch_dir;

namespace {

struct Run {
  int status;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Pipeline, RanksEveryFixtureScene) {
  const auto scenes = load_scenes(fixture("three_scenes.jsonl"));
  const RankingFile f = rank_corpus(scenes, RankOptions{});
  ASSERT_EQ(f.rankings.size(), 3u);
  EXPECT_EQ(f.rankings[0].scene_id, "a");
  for (const auto& r : f.rankings) {
    EXPECT_TRUE(r.captions.front().selected);
    EXPECT_EQ(std::count_if(r.captions.begin(), r.captions.end(), [](auto& c) { return c.selected; }), 1);
    // Caption 2 carries the planted off-consensus component.
    EXPECT_EQ(r.captions.back().index, 2u);
  }
  EXPECT_FALSE(f.summary.wall_seconds);
}

TEST(Pipeline, MissingEmbeddingsFailOnlyThatScene) {
  auto scenes = load_scenes(fixture("three_scenes.jsonl"));
  const auto extra = load_scenes(fixture("texts_only.jsonl"));
  scenes.push_back(extra[0]);
  const RankingFile f = rank_corpus(scenes, RankOptions{});
  EXPECT_EQ(f.rankings.size(), 3u);
  ASSERT_EQ(f.failures.size(), 1u);
  EXPECT_EQ(f.failures[0].code, ErrorCode::MissingEmbeddings);
  EXPECT_EQ(f.failures[0].scene_id, "t1");
}

TEST(Pipeline, EvaluationReportsUncoveredScenes) {
  auto scenes = load_scenes(fixture("three_scenes.jsonl"));
  scenes[1].captions[0].sentences.reset();
  const auto result = evaluate_corpus(scenes, rank_corpus(scenes, RankOptions{}));
  EXPECT_EQ(result.evaluations.size(), 2u);
  ASSERT_EQ(result.uncovered.size(), 1u);
  EXPECT_EQ(result.uncovered[0].scene_id, scenes[1].scene_id);
  EXPECT_EQ(result.report.accuracy, 1.0);
}

TEST(Pipeline, MisalignedRankingIsLengthMismatch) {
  const auto scenes = load_scenes(fixture("quarter.jsonl"));
  RankingFile f = rank_corpus(scenes, RankOptions{});
  f.rankings[0].captions.pop_back();
  const auto result = evaluate_corpus(scenes, f);
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_EQ(result.failures[0].code, ErrorCode::LengthMismatch);
}

TEST(Pipeline, SynthCorpusRoundTripsThroughFiles) {
  SynthConfig c;
  const auto scenes = synth_corpus(c, 3, 42);
  ASSERT_EQ(scenes.size(), 3u);
  EXPECT_EQ(scenes[0].scene_id, "scene-000000");
  const auto dir = scratch_dir("cli_synth_corpus");
  write_scenes(dir / "s.jsonl", scenes);
  EXPECT_EQ(load_scenes(dir / "s.jsonl"), scenes);
}

TEST(Cli, RankEvaluateFixture) {
  const auto dir = scratch_dir("cli_rank");
  auto r = cli({"rank", "--input", fixture("three_scenes.jsonl").string(), "--output", (dir / "r.jsonl").string()});
  EXPECT_EQ(r.status, 0) << r.err;
  r = cli({"evaluate", "--input", fixture("three_scenes.jsonl").string(), "--rankings", (dir / "r.jsonl").string(),
           "--output", (dir / "e.jsonl").string()});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(slurp(dir / "e.jsonl").find("\"accuracy\":1"), std::string::npos);
}

TEST(Cli, QuarterCaptionSelection) {
  const auto dir = scratch_dir("cli_quarter");
  const auto r = cli({"evaluate", "--input", fixture("quarter.jsonl").string(), "--output", (dir / "e.jsonl").string()});
  EXPECT_EQ(r.status, 0) << r.err;
  const std::string report = slurp(dir / "e.jsonl");
  EXPECT_NE(report.find("\"selected_fraction\":0.25,\"correct\":false"), std::string::npos) << report;
}

TEST(Cli, WorkerCountDoesNotChangeOutput) {
  const auto dir = scratch_dir("cli_workers");
  const auto corpus = (dir / "s.jsonl").string();
  ASSERT_EQ(cli({"synth", "--scenes-output", corpus, "--scene-count", "20", "--seed", "3"}).status, 0);
  ASSERT_EQ(cli({"rank", "--input", corpus, "--output", (dir / "r1").string(), "--workers", "1"}).status, 0);
  ASSERT_EQ(cli({"rank", "--input", corpus, "--output", (dir / "r8").string(), "--workers", "8"}).status, 0);
  EXPECT_EQ(slurp(dir / "r1"), slurp(dir / "r8"));
}

TEST(Cli, ExitStatuses) {
  const auto dir = scratch_dir("cli_status");
  EXPECT_EQ(cli({}).status, 2);
  EXPECT_EQ(cli({"rank", "--input", "x"}).status, 2);
  EXPECT_EQ(cli({"rank", "--input", "/nonexistent", "--output", (dir / "o").string()}).status, 2);
  EXPECT_EQ(cli({"rank", "--input", fixture("malformed_dimension.jsonl").string(), "--output", (dir / "o").string()}).status, 2);
  EXPECT_EQ(cli({"rank", "--input", fixture("three_scenes.jsonl").string(), "--output", (dir / "o").string(),
                 "--variance-threshold", "1.5"}).status, 2);
  EXPECT_EQ(cli({"rank", "--input", fixture("three_scenes.jsonl").string(), "--output", (dir / "o").string(),
                 "--method", "pca"}).status, 2);
  const auto r = cli({"rank", "--input", fixture("texts_only.jsonl").string(), "--output", (dir / "o").string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("MissingEmbeddings"), std::string::npos);
  EXPECT_NE(slurp(dir / "o").find("\"failed\":1"), std::string::npos);
  EXPECT_EQ(cli({"--help"}).status, 0);
}

TEST(Cli, TimingOnlyWhenAsked) {
  const auto dir = scratch_dir("cli_timing");
  ASSERT_EQ(cli({"rank", "--input", fixture("three_scenes.jsonl").string(), "--output", (dir / "r").string(),
                 "--timing"}).status, 0);
  EXPECT_NE(slurp(dir / "r").find("\"wall_seconds\""), std::string::npos);
}

TEST(Cli, ReportCommandWritesFigureData) {
  const auto dir = scratch_dir("cli_report");
  const auto r = cli({"report", "--input", fixture("three_scenes.jsonl").string(), "--scene", "b", "--report-dir",
                      dir.string(), "--svg"});
  EXPECT_EQ(r.status, 0) << r.err;
  for (const char* f : {"spectrum.csv", "heatmap.csv", "sensitivity.csv", "projection.csv", "projection.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_EQ(cli({"report", "--input", fixture("three_scenes.jsonl").string(), "--scene", "zz", "--report-dir",
                 dir.string()}).status, 2);
}

TEST(Cli, EmitReportsDuringRank) {
  const auto dir = scratch_dir("cli_emit");
  ASSERT_EQ(cli({"rank", "--input", fixture("three_scenes.jsonl").string(), "--output", (dir / "r").string(),
                 "--emit-reports", "--report-dir", (dir / "rep").string()}).status, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "rep" / "a_spectrum.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "rep" / "c_projection.svg"));
}

TEST(Cli, SynthBenchmarkIsDeterministic) {
  const auto dir = scratch_dir("cli_bench");
  const std::vector<std::string> base{"synth", "--trials", "5", "--deltas", "0.3,1.0", "--sigmas", "0.05", "--seed", "9"};
  auto a = base, b = base;
  a.insert(a.end(), {"--output", (dir / "a.csv").string(), "--workers", "1"});
  b.insert(b.end(), {"--output", (dir / "b.csv").string(), "--workers", "8"});
  ASSERT_EQ(cli(a).status, 0);
  ASSERT_EQ(cli(b).status, 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(cli({"synth", "--output", (dir / "c.csv").string(), "--modes", "bogus"}).status, 2);
}
