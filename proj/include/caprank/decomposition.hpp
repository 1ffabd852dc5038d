#pragma once

#include "caprank/matrix.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace caprank {

enum class Method { Svd, Rpca };

std::string_view method_name(Method method) noexcept;
/// Accepts "svd" or "rpca".
std::optional<Method> parse_method(std::string_view name) noexcept;

/// Singular values in non-increasing order together with the cumulative
/// explained-variance ratio rho_k = sum_{i<=k} s_i^2 / sum_i s_i^2.
struct SingularSpectrum {
  std::vector<double> values;
  std::vector<double> variance_profile;

  /// Builds the profile from already-sorted values. A zero spectrum gets an
  /// all-zero profile; otherwise the last entry is exactly 1.
  static SingularSpectrum from_values(std::vector<double> values);

  double total_energy() const noexcept;
  /// sum_{i>k} s_i^2, i.e. the squared Frobenius error of the best rank-k fit.
  double tail_energy(std::size_t k) const noexcept;
};

struct DecompositionConfig {
  Method method = Method::Svd;
  double variance_threshold = 0.95;
  /// Unset means rows - 1 (at least 1) so the residual stays informative.
  std::optional<std::size_t> rank_cap;
  /// Bypasses the variance threshold and the cap.
  std::optional<std::size_t> rank_override;
  bool normalize_rows = false;
  /// Unset means 1 / sqrt(max(rows, dims)).
  std::optional<double> rpca_lambda;
  double rpca_tolerance = 1e-7;
  int rpca_max_iterations = 500;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

struct SvdFactors {
  Eigen::MatrixXd u;      // n x r
  Eigen::VectorXd sigma;  // r
  Eigen::MatrixXd v;      // d x r
};

struct RpcaDiagnostics {
  int iterations = 0;
  double feasibility_gap = 0.0;  // ||M - R - E||_F / ||M||_F
  bool converged = false;
  double lambda = 0.0;
};

/// M = consensus + residual, where `input` is the matrix actually decomposed
/// (the row-normalized copy when normalize_rows is set).
struct DecompositionOutput {
  Method method = Method::Svd;
  std::size_t rank = 0;
  SingularSpectrum spectrum;
  Eigen::MatrixXd input;
  Eigen::MatrixXd consensus;
  Eigen::MatrixXd residual;
  std::optional<SvdFactors> factors;     // svd only
  std::optional<RpcaDiagnostics> rpca;   // rpca only
  /// ||E||_F < 1e-12 ||M||_F (or M == 0): scores carry no information.
  bool degenerate_residual = false;
  /// Rows with zero norm that normalization left untouched.
  std::vector<std::size_t> zero_rows;
  std::vector<std::string> warnings;
};

/// All min(n, d) singular values plus the variance profile. Deterministic.
SingularSpectrum singular_spectrum(const EmbeddingMatrix& matrix);
SingularSpectrum singular_spectrum(const Eigen::MatrixXd& matrix);

/// Smallest k with rho_k >= threshold, clipped to the rank cap and min(n, d).
/// `rows` is n, needed for the default cap. Throws InvalidOverride.
std::size_t select_rank(const SingularSpectrum& spectrum, const DecompositionConfig& config,
                        std::size_t rows);

/// Truncated SVD: R = U_r S_r V_r^T, E = M - R.
DecompositionOutput decompose_svd(const EmbeddingMatrix& matrix, const DecompositionConfig& config);

/// Principal component pursuit, min ||R||_* + lambda ||E||_1 s.t. M = R + E,
/// by inexact augmented Lagrange multipliers. Running out of iterations is
/// not an error: the result carries converged = false and the final gap.
DecompositionOutput decompose_rpca(const EmbeddingMatrix& matrix, const DecompositionConfig& config);

/// Dispatches on config.method.
DecompositionOutput decompose(const EmbeddingMatrix& matrix, const DecompositionConfig& config);

}  // namespace caprank
