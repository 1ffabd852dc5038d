#include "caprank/matrix.hpp"

#include "caprank/error.hpp"

#include <cmath>
#include <unordered_set>

namespace caprank {

namespace {

void validate(const Eigen::MatrixXd& data, const std::vector<std::string>& ids) {
  if (data.rows() == 0 || data.cols() == 0) {
    throw Error(ErrorCode::EmptyInput, "embedding matrix needs at least one row and one column");
  }
  if (ids.size() != static_cast<std::size_t>(data.rows())) {
    throw Error(ErrorCode::DimensionMismatch,
                "got " + std::to_string(ids.size()) + " ids for " +
                    std::to_string(data.rows()) + " rows");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate row id '" + id + "'");
    }
  }
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (!std::isfinite(data(i, j))) {
        throw Error(ErrorCode::NonFiniteEntry,
                    "non-finite entry in row '" + ids[static_cast<std::size_t>(i)] +
                        "' at column " + std::to_string(j));
      }
    }
  }
}

std::vector<std::string> index_ids(Eigen::Index n) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(Eigen::MatrixXd data, std::vector<std::string> row_ids)
    : data_(std::move(data)), row_ids_(std::move(row_ids)) {
  validate(data_, row_ids_);
}

EmbeddingMatrix::EmbeddingMatrix(Eigen::MatrixXd data)
    : EmbeddingMatrix(data, index_ids(data.rows())) {}

EmbeddingMatrix build_matrix(std::span<const std::vector<double>> embeddings,
                             std::span<const std::string> ids) {
  if (embeddings.empty()) {
    throw Error(ErrorCode::EmptyInput, "no embeddings given");
  }
  if (ids.size() != embeddings.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "got " + std::to_string(ids.size()) + " ids for " +
                    std::to_string(embeddings.size()) + " embeddings");
  }
  const std::size_t d = embeddings.front().size();
  if (d == 0) {
    throw Error(ErrorCode::EmptyInput, "embedding dimension is zero");
  }
  Eigen::MatrixXd data(static_cast<Eigen::Index>(embeddings.size()),
                       static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].size() != d) {
      throw Error(ErrorCode::DimensionMismatch,
                  "embedding '" + ids[i] + "' has dimension " +
                      std::to_string(embeddings[i].size()) + ", expected " + std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = embeddings[i][j];
    }
  }
  return EmbeddingMatrix(std::move(data), std::vector<std::string>(ids.begin(), ids.end()));
}

}  // namespace caprank
