#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace caprank {

struct SentenceLabel {
  std::string text;
  bool hallucinated = false;

  bool operator==(const SentenceLabel&) const = default;
};

/// Splits at '.', '!' or '?' followed by whitespace or end of text. Segments
/// are trimmed and empty ones dropped. Abbreviations ("Dr. Smith") are split
/// too; there is no language model behind this. Throws EmptyCaption.
std::vector<std::string> split_sentences(std::string_view text);

/// Fraction of flagged sentences, in [0, 1]. Throws NoSentences.
double gt_caption_score(std::span<const SentenceLabel> sentences);

struct SelectionOutcome {
  double selected_fraction = 0.0;  // flagged fraction of the selected caption
  bool correct = false;            // selected caption has no flagged sentence
};

/// `gt_scores[i]` is empty for captions without labels. Throws
/// IndexOutOfRange or MissingLabels.
SelectionOutcome scene_selection_outcome(std::span<const std::optional<double>> gt_scores,
                                         std::size_t selected);

/// Share of correct selections. Throws EmptyCorpus.
double selection_accuracy(const std::vector<bool>& correct);

/// 1-based ranks; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average-rank vectors. Empty when either rank
/// vector is constant. Throws LengthMismatch or TooFew (n < 2).
std::optional<double> spearman_rho(std::span<const double> scores, std::span<const double> gt_scores);

struct CorrelationSummary {
  std::size_t defined = 0;
  std::size_t undefined = 0;
  double positive_fraction = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // population variance over defined values
};

CorrelationSummary correlation_summary(std::span<const double> rhos, std::size_t undefined);

struct SceneEvaluation {
  std::string scene_id;
  std::vector<double> gt_scores;
  std::size_t selected = 0;
  std::string selected_caption;
  double selected_fraction = 0.0;
  bool correct = false;
  bool degenerate = false;
  std::optional<double> spearman_rho;
  std::optional<std::string> undefined_reason;
};

/// Evaluates one ranked scene against sentence labels (one list per caption,
/// aligned with `scores`). Throws LengthMismatch, MissingLabels, NoSentences.
SceneEvaluation evaluate_scene(std::string scene_id, std::span<const double> scores,
                               std::span<const std::vector<SentenceLabel>> labels,
                               std::span<const std::string> caption_ids = {});

struct CorpusReport {
  std::size_t scenes = 0;     // evaluated + uncovered + failed
  std::size_t evaluated = 0;
  std::size_t uncovered = 0;
  std::size_t failed = 0;
  std::size_t correct = 0;
  std::size_t degenerate = 0;
  double accuracy = 0.0;      // correct / evaluated, 0 when nothing evaluated
  double mean_selected_fraction = 0.0;
  CorrelationSummary correlation;
};

/// Ordered reduction over evaluated scenes.
CorpusReport aggregate_corpus(std::span<const SceneEvaluation> evaluations, std::size_t uncovered,
                              std::size_t failed);

}  // namespace caprank
