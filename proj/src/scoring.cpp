#include "caprank/scoring.hpp"

#include "caprank/error.hpp"

#include <algorithm>
#include <numeric>

namespace caprank {

namespace {
constexpr double kTieSpread = 1e-12;
}

ScoreVector hallucination_scores(const DecompositionOutput& decomposition) {
  ScoreVector out;
  out.method = decomposition.method;
  out.rank = decomposition.rank;
  const Eigen::MatrixXd& e = decomposition.residual;
  out.scores.reserve(static_cast<std::size_t>(e.rows()));
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    out.scores.push_back(e.row(i).norm());
  }
  return out;
}

RankingResult rank_and_select(std::span<const double> scores) {
  if (scores.empty()) {
    throw Error(ErrorCode::EmptyInput, "cannot rank an empty score vector");
  }
  RankingResult out;
  out.ordering.resize(scores.size());
  std::iota(out.ordering.begin(), out.ordering.end(), std::size_t{0});
  std::stable_sort(out.ordering.begin(), out.ordering.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  out.selected = out.ordering.front();
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  out.degenerate = (*hi - *lo) < kTieSpread;
  return out;
}

RankingResult rank_and_select(const ScoreVector& scores) {
  return rank_and_select(std::span<const double>(scores.scores));
}

}  // namespace caprank
