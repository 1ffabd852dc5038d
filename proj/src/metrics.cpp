#include "caprank/metrics.hpp"

#include "caprank/error.hpp"
#include "caprank/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace caprank {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  if (trim(text).empty()) {
    throw Error(ErrorCode::EmptyCaption, "caption text is empty");
  }
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    const auto piece = trim(text.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]))) {
      flush(i + 1);
    }
  }
  flush(text.size());
  return out;
}

double gt_caption_score(std::span<const SentenceLabel> sentences) {
  if (sentences.empty()) {
    throw Error(ErrorCode::NoSentences, "caption has no labelled sentences");
  }
  const auto flagged = std::count_if(sentences.begin(), sentences.end(),
                                     [](const SentenceLabel& s) { return s.hallucinated; });
  return static_cast<double>(flagged) / static_cast<double>(sentences.size());
}

SelectionOutcome scene_selection_outcome(std::span<const std::optional<double>> gt_scores,
                                         std::size_t selected) {
  if (selected >= gt_scores.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "selected index " + std::to_string(selected) +
                                                " outside scene of " +
                                                std::to_string(gt_scores.size()) + " captions");
  }
  if (!gt_scores[selected]) {
    throw Error(ErrorCode::MissingLabels, "selected caption has no labels");
  }
  const double fraction = *gt_scores[selected];
  return {fraction, fraction == 0.0};
}

double selection_accuracy(const std::vector<bool>& correct) {
  if (correct.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "no scenes to score");
  }
  const auto hits = std::count(correct.begin(), correct.end(), true);
  return static_cast<double>(hits) / static_cast<double>(correct.size());
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 (0-based) share the mean 1-based rank
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

std::optional<double> spearman_rho(std::span<const double> scores, std::span<const double> gt_scores) {
  if (scores.size() != gt_scores.size()) {
    throw Error(ErrorCode::LengthMismatch, "score vectors differ in length (" +
                                               std::to_string(scores.size()) + " vs " +
                                               std::to_string(gt_scores.size()) + ")");
  }
  if (scores.size() < 2) {
    throw Error(ErrorCode::TooFew, "rank correlation needs at least two captions");
  }
  const auto ra = average_ranks(scores);
  const auto rb = average_ranks(gt_scores);
  // Average ranks always sum to n(n+1)/2.
  const double mean = 0.5 * static_cast<double>(scores.size() + 1);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double a = ra[i] - mean;
    const double b = rb[i] - mean;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

CorrelationSummary correlation_summary(std::span<const double> rhos, std::size_t undefined) {
  CorrelationSummary s;
  s.defined = rhos.size();
  s.undefined = undefined;
  if (rhos.empty()) return s;
  const double n = static_cast<double>(rhos.size());
  const auto positive = std::count_if(rhos.begin(), rhos.end(), [](double r) { return r > 0.0; });
  s.positive_fraction = static_cast<double>(positive) / n;
  s.mean = std::accumulate(rhos.begin(), rhos.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : rhos) ss += (r - s.mean) * (r - s.mean);
  s.variance = ss / n;
  return s;
}

SceneEvaluation evaluate_scene(std::string scene_id, std::span<const double> scores,
                               std::span<const std::vector<SentenceLabel>> labels,
                               std::span<const std::string> caption_ids) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "scene '" + scene_id + "' has " +
                                               std::to_string(scores.size()) + " scores but " +
                                               std::to_string(labels.size()) + " label sets");
  }
  if (!caption_ids.empty() && caption_ids.size() != scores.size()) {
    throw Error(ErrorCode::LengthMismatch, "scene '" + scene_id + "' caption ids misaligned");
  }
  SceneEvaluation ev;
  ev.scene_id = std::move(scene_id);

  std::vector<std::optional<double>> gt(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].empty()) {
      throw Error(ErrorCode::MissingLabels, "scene '" + ev.scene_id + "' caption " +
                                                std::to_string(i) + " has no sentence labels");
    }
    gt[i] = gt_caption_score(labels[i]);
    ev.gt_scores.push_back(*gt[i]);
  }

  const RankingResult ranking = rank_and_select(scores);
  ev.selected = ranking.selected;
  ev.degenerate = ranking.degenerate;
  if (!caption_ids.empty()) ev.selected_caption = caption_ids[ev.selected];
  const SelectionOutcome outcome = scene_selection_outcome(gt, ev.selected);
  ev.selected_fraction = outcome.selected_fraction;
  ev.correct = outcome.correct;

  if (scores.size() < 2) {
    ev.undefined_reason = "fewer than two captions";
  } else {
    ev.spearman_rho = spearman_rho(scores, ev.gt_scores);
    if (!ev.spearman_rho) {
      const bool flat_scores = constant(scores);
      const bool flat_gt = constant(ev.gt_scores);
      ev.undefined_reason = flat_scores && flat_gt ? "constant scores and ground truth"
                            : flat_scores          ? "constant scores"
                                                   : "constant ground truth";
    }
  }
  return ev;
}

CorpusReport aggregate_corpus(std::span<const SceneEvaluation> evaluations, std::size_t uncovered,
                              std::size_t failed) {
  CorpusReport report;
  report.evaluated = evaluations.size();
  report.uncovered = uncovered;
  report.failed = failed;
  report.scenes = evaluations.size() + uncovered + failed;

  std::vector<double> rhos;
  std::size_t undefined = 0;
  double fraction_sum = 0.0;
  for (const auto& ev : evaluations) {
    if (ev.correct) ++report.correct;
    if (ev.degenerate) ++report.degenerate;
    fraction_sum += ev.selected_fraction;
    if (ev.spearman_rho) {
      rhos.push_back(*ev.spearman_rho);
    } else {
      ++undefined;
    }
  }
  if (!evaluations.empty()) {
    std::vector<bool> flags;
    flags.reserve(evaluations.size());
    for (const auto& ev : evaluations) flags.push_back(ev.correct);
    report.accuracy = selection_accuracy(flags);
    report.mean_selected_fraction = fraction_sum / static_cast<double>(evaluations.size());
  }
  report.correlation = correlation_summary(rhos, undefined);
  return report;
}

}  // namespace caprank
