#include "caprank/oracle.hpp"

#include "caprank/error.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace caprank::oracle {

namespace {

constexpr double kOffDiagonalTol = 1e-14;
constexpr int kMaxSweeps = 100;

std::vector<double> ranks_by_grouping(std::span<const double> v) {
  std::vector<std::pair<double, std::size_t>> sorted;
  for (std::size_t i = 0; i < v.size(); ++i) sorted.emplace_back(v[i], i);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> ranks(v.size());
  std::size_t group_start = 0;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i == sorted.size() || sorted[i].first != sorted[group_start].first) {
      double sum = 0.0;
      for (std::size_t k = group_start; k < i; ++k) sum += static_cast<double>(k + 1);
      const double avg = sum / static_cast<double>(i - group_start);
      for (std::size_t k = group_start; k < i; ++k) ranks[sorted[k].second] = avg;
      group_start = i;
    }
  }
  return ranks;
}

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "length mismatch");
  if (a.size() < 2) throw Error(ErrorCode::TooFew, "need at least two values");
}

}  // namespace

std::vector<double> oracle_spectrum(const SmallMatrix& m) {
  const std::size_t n = m.rows;
  const std::size_t d = m.cols;
  // G = M^T M, symmetric d x d.
  std::vector<std::vector<double>> g(d, std::vector<double>(d, 0.0));
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += m.at(i, a) * m.at(i, b);
      g[a][b] = s;
    }
  }
  double total = 0.0;
  for (const auto& row : g)
    for (double x : row) total += x * x;
  total = std::sqrt(total);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        if (a != b) s += g[a][b] * g[a][b];
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < kMaxSweeps && total > 0.0 && off_norm() > kOffDiagonalTol * total;
       ++sweep) {
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (g[p][q] == 0.0) continue;
        // Classical Jacobi rotation zeroing g[p][q].
        const double theta = (g[q][q] - g[p][p]) / (2.0 * g[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double gkp = g[k][p];
          const double gkq = g[k][q];
          g[k][p] = c * gkp - s * gkq;
          g[k][q] = s * gkp + c * gkq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double gpk = g[p][k];
          const double gqk = g[q][k];
          g[p][k] = c * gpk - s * gqk;
          g[q][k] = s * gpk + c * gqk;
        }
      }
    }
  }

  std::vector<double> sigma;
  for (std::size_t a = 0; a < d; ++a) sigma.push_back(std::sqrt(std::max(g[a][a], 0.0)));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  sigma.resize(std::min(n, d));
  return sigma;
}

std::optional<double> oracle_spearman(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  const auto ra = ranks_by_grouping(a);
  const auto rb = ranks_by_grouping(b);
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    mean_a += ra[i];
    mean_b += rb[i];
  }
  mean_a /= static_cast<double>(ra.size());
  mean_b /= static_cast<double>(rb.size());
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - mean_a) * (rb[i] - mean_b);
    da += (ra[i] - mean_a) * (ra[i] - mean_a);
    db += (rb[i] - mean_b) * (rb[i] - mean_b);
  }
  if (da == 0.0 || db == 0.0) return std::nullopt;
  return num / std::sqrt(da * db);
}

double classical_spearman(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  const auto ra = ranks_by_grouping(a);
  const auto rb = ranks_by_grouping(b);
  double d2 = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  const double n = static_cast<double>(a.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace caprank::oracle
