#pragma once

// Reference implementations used to cross-check the main code paths. They
// share no code with decomposition.cpp or metrics.cpp and favour clarity
// over speed.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace caprank::oracle {

/// Dense row-major matrix, small enough for brute force.
struct SmallMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows * cols, row-major

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

/// Singular values of `m` (non-increasing, min(rows, cols) of them) from the
/// eigenvalues of M^T M, found by cyclic Jacobi rotations until the
/// off-diagonal norm drops below 1e-14 of the total. Intended for
/// rows, cols <= 12.
std::vector<double> oracle_spectrum(const SmallMatrix& m);

/// Spearman rho by explicit sort and tie grouping, then the Pearson formula
/// on rank deviations from their own means. Empty if a rank vector is flat.
/// Throws like caprank::spearman_rho.
std::optional<double> oracle_spearman(std::span<const double> a, std::span<const double> b);

/// 1 - 6 sum d^2 / (n (n^2 - 1)); valid only without ties.
double classical_spearman(std::span<const double> a, std::span<const double> b);

}  // namespace caprank::oracle
