#pragma once

#include "caprank/decomposition.hpp"
#include "caprank/matrix.hpp"
#include "caprank/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace caprank {

enum class OutlierMode { DenseShift, SparseSpike };

std::string_view outlier_mode_name(OutlierMode mode) noexcept;
/// Accepts "dense_shift" or "sparse_spike".
std::optional<OutlierMode> parse_outlier_mode(std::string_view name) noexcept;

/// Planted-scene generator settings.
///
/// Each row is consensus_scale * (unit vector in a random r*-dim subspace)
/// plus Gaussian noise with per-entry std noise_sigma * w_i, where the row
/// multiplier w_i ~ U(1 - noise_spread, 1 + noise_spread). Outlier rows are
/// then shifted by outlier_strength along a unit direction orthogonal to the
/// subspace (dense_shift), or get +/-outlier_strength spikes on 5% of the
/// coordinates (sparse_spike).
struct SynthConfig {
  std::size_t captions = 10;
  std::size_t dims = 64;
  std::size_t consensus_rank = 2;
  double noise_sigma = 0.05;
  std::size_t outlier_count = 1;
  double outlier_strength = 1.0;
  OutlierMode mode = OutlierMode::DenseShift;
  bool normalize_rows = true;
  std::uint64_t seed = 0;
  double consensus_scale = 3.0;
  double noise_spread = 1.0;

  /// Throws InvalidConfig.
  void validate() const;
};

struct PlantedScene {
  EmbeddingMatrix matrix;
  std::vector<bool> outlier_flags;
  /// Distance of each final row from the planted consensus subspace.
  std::vector<double> deviation_magnitudes;
  /// One single-sentence caption per row, flagged iff the row is an outlier.
  std::vector<std::vector<SentenceLabel>> gt_labels;
  Eigen::MatrixXd consensus_basis;  // dims x consensus_rank, orthonormal
  /// (row, column) of every planted spike; empty in dense_shift mode.
  std::vector<std::pair<std::size_t, std::size_t>> spike_positions;
};

/// Deterministic for a fixed config (including seed).
PlantedScene generate_scene(const SynthConfig& config);

/// Mixes a base seed with two indices; used for per-trial and per-scene
/// seeds so that results do not depend on execution order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Fraction of the k largest |E| entries (k = number of planted spikes) that
/// sit on planted spike positions. Ties broken by row-major position.
double spike_precision(const Eigen::MatrixXd& residual,
                       const std::vector<std::pair<std::size_t, std::size_t>>& spikes);

struct BenchmarkGrid {
  SynthConfig base;  // seed ignored; trials draw derived seeds
  std::vector<OutlierMode> modes{OutlierMode::DenseShift, OutlierMode::SparseSpike};
  std::vector<double> deltas{0.1, 0.3, 1.0};
  std::vector<double> sigmas{0.02, 0.05};
  std::vector<Method> methods{Method::Svd, Method::Rpca};
  DecompositionConfig decomposition;  // method overridden per cell
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct BenchmarkCell {
  OutlierMode mode = OutlierMode::DenseShift;
  double delta = 0.0;
  double sigma = 0.0;
  Method method = Method::Svd;
  std::size_t trials = 0;
  double selection_rate = 0.0;   // selected caption is not an outlier
  double mean_rho = 0.0;         // Spearman(scores, deviation magnitudes)
  std::size_t undefined_rho = 0;
  std::optional<double> spike_precision;  // sparse_spike only
  std::uint64_t seed = 0;
};

/// Runs every (mode, delta, sigma) scene cell `trials` times; all methods see
/// the same scenes. Cells come back in mode, delta, sigma, method order.
/// Aggregates do not depend on grid.workers.
std::vector<BenchmarkCell> run_benchmark(const BenchmarkGrid& grid);

}  // namespace caprank
