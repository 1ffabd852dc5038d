#pragma once

#include "caprank/decomposition.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace caprank {

/// Per-caption hallucination scores h_i = ||E_i,:||_2, aligned to matrix rows.
struct ScoreVector {
  std::vector<double> scores;
  Method method = Method::Svd;
  std::size_t rank = 0;
};

struct RankingResult {
  std::vector<std::size_t> ordering;  // ascending score, ties by row index
  std::size_t selected = 0;           // ordering[0]
  bool degenerate = false;            // max - min < 1e-12
};

ScoreVector hallucination_scores(const DecompositionOutput& decomposition);

/// Throws EmptyInput for an empty score vector.
RankingResult rank_and_select(std::span<const double> scores);
RankingResult rank_and_select(const ScoreVector& scores);

}  // namespace caprank
