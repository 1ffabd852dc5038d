#pragma once

#include "caprank/decomposition.hpp"
#include "caprank/matrix.hpp"
#include "caprank/synth.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace caprank {

/// Columns k,sigma_original,sigma_lowrank. The low-rank column is the
/// truncated spectrum for svd and the spectrum of R for rpca.
std::string spectrum_csv(const DecompositionOutput& decomposition);

/// Columns matrix,row,col,value for M, R and E over the first min(40, d)
/// columns. Values are copied verbatim.
std::string heatmap_csv(const DecompositionOutput& decomposition, std::size_t max_columns = 40);

/// Columns kind,k,captured_norm,residual_norm,cumulative_ratio,threshold.
/// "component" rows cover every k; "threshold" rows mark the first k
/// reaching 0.80, 0.90 and 0.95.
std::string sensitivity_csv(const SingularSpectrum& spectrum);

/// Writes <prefix>spectrum.csv, <prefix>heatmap.csv and
/// <prefix>sensitivity.csv under `dir`. Returns the paths written.
std::vector<std::filesystem::path> emit_decomposition_reports(const DecompositionOutput& decomposition,
                                                              const std::filesystem::path& dir,
                                                              const std::string& prefix = "");

struct ProjectedPoint {
  std::string caption_id;
  double pc1 = 0.0;
  double pc2 = 0.0;
  double score = 0.0;
};

/// Rows are mean-centered and projected on the top two right singular
/// vectors of the centered matrix. Throws TooFew (n < 3), LengthMismatch.
std::vector<ProjectedPoint> projection_rows(const EmbeddingMatrix& matrix, std::span<const double> scores);

std::string projection_csv(std::span<const ProjectedPoint> points);
/// Standalone scatter plot; color runs from blue (low score) to red.
std::string projection_svg(std::span<const ProjectedPoint> points);

/// Writes <prefix>projection.csv and, if asked, <prefix>projection.svg.
std::vector<std::filesystem::path> emit_projection_report(const EmbeddingMatrix& matrix,
                                                          std::span<const double> scores,
                                                          const std::filesystem::path& dir,
                                                          const std::string& prefix = "",
                                                          bool svg = false);

/// One row per benchmark cell.
std::string benchmark_csv(std::span<const BenchmarkCell> cells);

}  // namespace caprank
