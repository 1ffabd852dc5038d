#pragma once

#include "caprank/oracle.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <random>
#include <string>

namespace caprank::testing {

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index size) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, size, size));
  return qr.householderQ() * Eigen::MatrixXd::Identity(size, size);
}

inline oracle::SmallMatrix to_small(const Eigen::MatrixXd& m) {
  oracle::SmallMatrix s{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), {}};
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) s.values.push_back(m(i, j));
  return s;
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(CAPRANK_FIXTURE_DIR) / name;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("caprank_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace caprank::testing
