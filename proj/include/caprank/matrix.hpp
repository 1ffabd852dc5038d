#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace caprank {

/// Caption embeddings stacked row-wise: row i is the embedding of caption i.
///
/// Shape and contents are fixed at construction. Every entry is finite and
/// row ids are unique; the constructor enforces both.
class EmbeddingMatrix {
 public:
  /// Takes ownership of `data`; `row_ids` must have one entry per row.
  EmbeddingMatrix(Eigen::MatrixXd data, std::vector<std::string> row_ids);

  /// Convenience for tests and synthetic data: ids become "0", "1", ...
  explicit EmbeddingMatrix(Eigen::MatrixXd data);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  const Eigen::MatrixXd& data() const noexcept { return data_; }
  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }

  /// A single caption is valid input but yields no ranking information.
  bool degenerate() const noexcept { return rows() < 2; }

 private:
  Eigen::MatrixXd data_;
  std::vector<std::string> row_ids_;
};

/// Stacks embeddings row-wise. Throws DimensionMismatch, NonFiniteEntry,
/// DuplicateId or EmptyInput.
EmbeddingMatrix build_matrix(std::span<const std::vector<double>> embeddings,
                             std::span<const std::string> ids);

}  // namespace caprank
