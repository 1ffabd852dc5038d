#include "caprank/decomposition.hpp"

#include "caprank/error.hpp"

#include <algorithm>
#include <cmath>

namespace caprank {

namespace {

// rho_k >= tau is decided up to this slack so that hand-computed boundary
// cases (rho_1 = 0.9 exactly) survive rounding of s_i^2.
constexpr double kThresholdSlack = 1e-12;
constexpr double kDegenerateResidual = 1e-12;
constexpr double kRpcaRankCutoff = 1e-9;

using Svd = Eigen::JacobiSVD<Eigen::MatrixXd>;

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

struct Prepared {
  Eigen::MatrixXd matrix;
  std::vector<std::size_t> zero_rows;
};

Prepared prepare(const EmbeddingMatrix& input, const DecompositionConfig& config) {
  Prepared out{input.data(), {}};
  if (!config.normalize_rows) return out;
  for (Eigen::Index i = 0; i < out.matrix.rows(); ++i) {
    const double norm = out.matrix.row(i).norm();
    if (norm > 0.0) {
      out.matrix.row(i) /= norm;
    } else {
      out.zero_rows.push_back(static_cast<std::size_t>(i));
    }
  }
  return out;
}

void flag_degenerate(DecompositionOutput& out) {
  const double total = out.input.norm();
  const double resid = out.residual.norm();
  if (total == 0.0 || resid < kDegenerateResidual * total) {
    out.degenerate_residual = true;
    out.warnings.emplace_back("DegenerateResidual: residual is numerically zero, scores are uninformative");
  }
  if (!out.zero_rows.empty()) {
    out.warnings.emplace_back("zero rows left unnormalized: " + std::to_string(out.zero_rows.size()));
  }
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

std::string_view method_name(Method method) noexcept {
  return method == Method::Svd ? "svd" : "rpca";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  if (name == "svd") return Method::Svd;
  if (name == "rpca") return Method::Rpca;
  return std::nullopt;
}

SingularSpectrum SingularSpectrum::from_values(std::vector<double> values) {
  SingularSpectrum s;
  s.values = std::move(values);
  s.variance_profile.assign(s.values.size(), 0.0);
  const double total = s.total_energy();
  if (total <= 0.0) return s;
  double acc = 0.0;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    acc += s.values[k] * s.values[k];
    s.variance_profile[k] = std::min(1.0, acc / total);
  }
  // Same summation order as total_energy(), but pin it anyway.
  s.variance_profile.back() = 1.0;
  return s;
}

double SingularSpectrum::total_energy() const noexcept {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return acc;
}

double SingularSpectrum::tail_energy(std::size_t k) const noexcept {
  double acc = 0.0;
  for (std::size_t i = k; i < values.size(); ++i) acc += values[i] * values[i];
  return acc;
}

void DecompositionConfig::validate() const {
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "variance_threshold must lie in (0, 1]");
  }
  if (rank_cap && *rank_cap < 1) {
    throw Error(ErrorCode::InvalidConfig, "rank_cap must be >= 1");
  }
  if (rank_override && *rank_override < 1) {
    throw Error(ErrorCode::InvalidOverride, "rank_override must be >= 1");
  }
  if (rpca_lambda && !(*rpca_lambda > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "rpca_lambda must be positive");
  }
  if (!(rpca_tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "rpca_tolerance must be positive");
  }
  if (rpca_max_iterations < 1) {
    throw Error(ErrorCode::InvalidConfig, "rpca_max_iterations must be >= 1");
  }
}

SingularSpectrum singular_spectrum(const Eigen::MatrixXd& matrix) {
  Svd svd(matrix);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "singular value iteration did not converge");
  }
  return SingularSpectrum::from_values(to_vector(svd.singularValues()));
}

SingularSpectrum singular_spectrum(const EmbeddingMatrix& matrix) {
  return singular_spectrum(matrix.data());
}

std::size_t select_rank(const SingularSpectrum& spectrum, const DecompositionConfig& config,
                        std::size_t rows) {
  const std::size_t full = spectrum.values.size();
  if (config.rank_override) {
    const std::size_t r = *config.rank_override;
    if (r < 1 || r > full) {
      throw Error(ErrorCode::InvalidOverride,
                  "rank_override " + std::to_string(r) + " outside [1, " + std::to_string(full) + "]");
    }
    return r;
  }
  if (full == 0 || spectrum.total_energy() == 0.0) return 1;

  std::size_t k = full;
  for (std::size_t i = 0; i < full; ++i) {
    if (spectrum.variance_profile[i] >= config.variance_threshold - kThresholdSlack) {
      k = i + 1;
      break;
    }
  }
  const std::size_t cap = config.rank_cap.value_or(rows > 1 ? rows - 1 : 1);
  return std::max<std::size_t>(1, std::min({k, cap, full}));
}

DecompositionOutput decompose_svd(const EmbeddingMatrix& matrix, const DecompositionConfig& config) {
  config.validate();
  Prepared prep = prepare(matrix, config);

  Svd svd(prep.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "singular value iteration did not converge");
  }

  DecompositionOutput out;
  out.method = Method::Svd;
  out.spectrum = SingularSpectrum::from_values(to_vector(svd.singularValues()));
  out.rank = select_rank(out.spectrum, config, matrix.rows());

  const auto r = static_cast<Eigen::Index>(out.rank);
  SvdFactors f{svd.matrixU().leftCols(r), svd.singularValues().head(r), svd.matrixV().leftCols(r)};
  out.consensus = f.u * f.sigma.asDiagonal() * f.v.transpose();
  out.residual = prep.matrix - out.consensus;
  out.factors = std::move(f);
  out.input = std::move(prep.matrix);
  out.zero_rows = std::move(prep.zero_rows);
  flag_degenerate(out);
  return out;
}

DecompositionOutput decompose_rpca(const EmbeddingMatrix& matrix, const DecompositionConfig& config) {
  config.validate();
  Prepared prep = prepare(matrix, config);
  const Eigen::MatrixXd& m = prep.matrix;
  const Eigen::Index n = m.rows();
  const Eigen::Index d = m.cols();

  DecompositionOutput out;
  out.method = Method::Rpca;
  out.spectrum = singular_spectrum(m);

  RpcaDiagnostics diag;
  diag.lambda = config.rpca_lambda.value_or(1.0 / std::sqrt(static_cast<double>(std::max(n, d))));

  const double norm_fro = m.norm();
  Eigen::MatrixXd low = Eigen::MatrixXd::Zero(n, d);
  Eigen::MatrixXd sparse = Eigen::MatrixXd::Zero(n, d);
  std::vector<double> low_sigma;

  if (norm_fro == 0.0) {
    diag.iterations = 1;
    diag.converged = true;
  } else {
    const double norm_two = out.spectrum.values.front();
    const double norm_inf = m.cwiseAbs().maxCoeff() / diag.lambda;
    Eigen::MatrixXd dual = m / std::max(norm_two, norm_inf);
    double mu = 1.25 / norm_two;
    const double mu_max = mu * 1e7;
    constexpr double kPenaltyGrowth = 1.5;

    for (int it = 1; it <= config.rpca_max_iterations; ++it) {
      // Singular value thresholding for the low-rank part.
      Svd svd(m - sparse + dual / mu, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXd& s = svd.singularValues();
      Eigen::Index keep = 0;
      while (keep < s.size() && s(keep) > 1.0 / mu) ++keep;
      Eigen::VectorXd shrunk = s.head(keep).array() - 1.0 / mu;
      low = svd.matrixU().leftCols(keep) * shrunk.asDiagonal() *
            svd.matrixV().leftCols(keep).transpose();
      low_sigma = to_vector(shrunk);

      // Entrywise soft thresholding for the sparse part.
      const Eigen::MatrixXd target = m - low + dual / mu;
      const double t = diag.lambda / mu;
      sparse = target.unaryExpr([t](double x) { return soft_threshold(x, t); });

      const Eigen::MatrixXd gap = m - low - sparse;
      dual += mu * gap;
      mu = std::min(mu * kPenaltyGrowth, mu_max);

      diag.iterations = it;
      diag.feasibility_gap = gap.norm() / norm_fro;
      if (diag.feasibility_gap < config.rpca_tolerance) {
        diag.converged = true;
        break;
      }
    }
    if (!diag.converged) {
      out.warnings.emplace_back("NotConverged: feasibility gap " +
                                std::to_string(diag.feasibility_gap) + " after " +
                                std::to_string(diag.iterations) + " iterations");
    }
  }

  std::size_t rank = 0;
  if (!low_sigma.empty()) {
    for (double v : low_sigma) {
      if (v > kRpcaRankCutoff * low_sigma.front()) ++rank;
    }
  }
  out.rank = std::max<std::size_t>(rank, 1);
  out.consensus = std::move(low);
  out.residual = std::move(sparse);
  out.rpca = diag;
  out.input = std::move(prep.matrix);
  out.zero_rows = std::move(prep.zero_rows);
  flag_degenerate(out);
  return out;
}

DecompositionOutput decompose(const EmbeddingMatrix& matrix, const DecompositionConfig& config) {
  return config.method == Method::Svd ? decompose_svd(matrix, config)
                                      : decompose_rpca(matrix, config);
}

}  // namespace caprank
