#pragma once

#include "caprank/decomposition.hpp"
#include "caprank/metrics.hpp"
#include "caprank/provider.hpp"
#include "caprank/records.hpp"
#include "caprank/synth.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace caprank {

struct RankOptions {
  DecompositionConfig decomposition;
  std::size_t workers = 1;
  /// Used for captions without an embedding. Unset means such scenes fail
  /// with MissingEmbeddings.
  std::optional<ProviderConfig> provider;
  /// Adds wall-clock and per-scene latency to the summary.
  bool timing = false;
  /// Writes spectrum, heatmap, sensitivity and projection files per scene.
  std::optional<std::filesystem::path> report_dir;
};

/// Decomposes, scores and ranks one scene whose captions all carry
/// embeddings. Throws MissingEmbeddings and anything decompose throws.
SceneRanking rank_scene(const SceneRecord& scene, const DecompositionConfig& config);

/// Ranks every scene; a failing scene becomes a SceneFailure and the rest
/// carry on. Output is sorted by scene_id and does not depend on
/// options.workers. Timing covers decomposition and scoring only.
RankingFile rank_corpus(const std::vector<SceneRecord>& scenes, const RankOptions& options);

struct EvaluationResult {
  std::vector<SceneEvaluation> evaluations;  // sorted by scene_id
  std::vector<UncoveredScene> uncovered;
  std::vector<SceneFailure> failures;
  CorpusReport report;
};

/// Joins rankings with labeled scenes. Scenes without labels on every
/// caption, or absent from the rankings, are uncovered; ranking failures
/// and misaligned scenes (LengthMismatch) are failures.
EvaluationResult evaluate_corpus(const std::vector<SceneRecord>& scenes, const RankingFile& rankings);

/// `count` planted scenes with embeddings and sentence labels. Scene k uses
/// derive_seed(seed, k) and has id "scene-00000k".
std::vector<SceneRecord> synth_corpus(const SynthConfig& base, std::size_t count, std::uint64_t seed);

}  // namespace caprank
