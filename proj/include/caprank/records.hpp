#pragma once

#include "caprank/error.hpp"
#include "caprank/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace caprank {

struct CaptionRecord {
  std::string caption_id;
  std::string model;
  std::string text;
  std::optional<std::vector<double>> embedding;
  std::optional<std::vector<SentenceLabel>> sentences;

  bool operator==(const CaptionRecord&) const = default;
};

/// One keyframe's candidate captions, in file order.
struct SceneRecord {
  std::string scene_id;
  std::vector<CaptionRecord> captions;

  bool has_all_embeddings() const;
  bool has_all_labels() const;

  bool operator==(const SceneRecord&) const = default;
};

/// Reads the line-delimited scene format: one JSON object per caption with
/// scene_id, caption_id, model, text, and optional embedding (array of
/// numbers) and sentences (array of {text, hallucinated: 0|1}). Scenes come
/// back in order of first appearance. Blank lines are skipped.
///
/// Throws ParseError (with line number), DimensionMismatch, DuplicateId,
/// NonFiniteEntry, IoError.
std::vector<SceneRecord> load_scenes(const std::filesystem::path& path);
std::vector<SceneRecord> parse_scenes(std::istream& in, std::string_view source = "<input>");

/// Writes scenes in the format load_scenes reads; numbers round-trip exactly.
void write_scenes(const std::filesystem::path& path, const std::vector<SceneRecord>& scenes);
std::string format_scenes(const std::vector<SceneRecord>& scenes);

struct RankedCaption {
  std::string caption_id;
  std::size_t index = 0;  // row in the scene
  double score = 0.0;
  std::size_t rank = 0;   // 1-based position in ascending-score order
  bool selected = false;

  bool operator==(const RankedCaption&) const = default;
};

struct SceneRanking {
  std::string scene_id;
  std::string method;
  std::size_t rank_used = 0;
  bool degenerate = false;
  std::vector<RankedCaption> captions;  // ascending score, ties by index

  bool operator==(const SceneRanking&) const = default;
};

struct SceneFailure {
  std::string scene_id;
  ErrorCode code = ErrorCode::IoError;
  std::string message;

  bool operator==(const SceneFailure&) const = default;
};

struct RankingSummary {
  std::size_t scenes = 0;
  std::size_t ranked = 0;
  std::size_t failed = 0;
  std::size_t captions = 0;
  std::size_t degenerate = 0;
  /// Only written when requested; wall-clock numbers break byte-identity.
  std::optional<double> wall_seconds;
  std::optional<double> mean_scene_ms;
  std::optional<double> max_scene_ms;

  bool operator==(const RankingSummary&) const = default;
};

struct RankingFile {
  std::vector<SceneRanking> rankings;
  std::vector<SceneFailure> failures;
  RankingSummary summary;

  bool operator==(const RankingFile&) const = default;
};

/// One line per caption (scene_id, caption_id, index, score, rank, selected,
/// method, rank_used, degenerate), one line per failed scene, then a summary
/// line. Scenes are sorted by scene_id; captions keep ranking order.
std::string format_rankings(const RankingFile& file);
void write_rankings(const std::filesystem::path& path, const RankingFile& file);
RankingFile read_rankings(const std::filesystem::path& path);
RankingFile parse_rankings(std::istream& in, std::string_view source = "<input>");

struct UncoveredScene {
  std::string scene_id;
  std::string reason;
};

/// Per-scene evaluation lines sorted by scene_id, uncovered and failed scene
/// lines, then the corpus summary line.
std::string format_report(const std::vector<SceneEvaluation>& evaluations,
                          const std::vector<UncoveredScene>& uncovered,
                          const std::vector<SceneFailure>& failures, const CorpusReport& report);
void write_report(const std::filesystem::path& path, const std::vector<SceneEvaluation>& evaluations,
                  const std::vector<UncoveredScene>& uncovered,
                  const std::vector<SceneFailure>& failures, const CorpusReport& report);

/// Writes via a temporary file in the same directory and renames it into
/// place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace caprank
