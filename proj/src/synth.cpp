#include "caprank/synth.hpp"

#include "caprank/error.hpp"
#include "caprank/parallel.hpp"
#include "caprank/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace caprank {

namespace {

constexpr double kSpikeFraction = 0.05;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, Eigen::Index size, double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = normal(rng);
  return v;
}

// Unit vector drawn uniformly from the orthogonal complement of `basis`.
Eigen::VectorXd orthogonal_direction(std::mt19937_64& rng, const Eigen::MatrixXd& basis) {
  for (;;) {
    Eigen::VectorXd v = gaussian_vector(rng, basis.rows());
    v -= basis * (basis.transpose() * v);
    const double norm = v.norm();
    if (norm > 1e-8) return v / norm;
  }
}

std::vector<std::size_t> choose_distinct(std::mt19937_64& rng, std::size_t population,
                                         std::size_t count) {
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

struct TrialOutcome {
  bool inlier_selected = false;
  std::optional<double> rho;
  std::optional<double> precision;
};

}  // namespace

std::string_view outlier_mode_name(OutlierMode mode) noexcept {
  return mode == OutlierMode::DenseShift ? "dense_shift" : "sparse_spike";
}

std::optional<OutlierMode> parse_outlier_mode(std::string_view name) noexcept {
  if (name == "dense_shift") return OutlierMode::DenseShift;
  if (name == "sparse_spike") return OutlierMode::SparseSpike;
  return std::nullopt;
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (captions < 1) fail("captions must be >= 1");
  if (outlier_count >= captions) fail("outlier_count must be smaller than captions");
  if (consensus_rank < 1 || consensus_rank >= captions) fail("consensus_rank must lie in [1, captions)");
  if (consensus_rank >= dims) fail("consensus_rank must be smaller than dims");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma must be >= 0");
  if (!(outlier_strength >= 0.0) || !std::isfinite(outlier_strength)) fail("outlier_strength must be >= 0");
  if (!(consensus_scale > 0.0) || !std::isfinite(consensus_scale)) fail("consensus_scale must be positive");
  if (!(noise_spread >= 0.0 && noise_spread <= 1.0)) fail("noise_spread must lie in [0, 1]");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

PlantedScene generate_scene(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const auto n = static_cast<Eigen::Index>(config.captions);
  const auto d = static_cast<Eigen::Index>(config.dims);
  const auto r = static_cast<Eigen::Index>(config.consensus_rank);

  Eigen::MatrixXd draw(d, r);
  for (Eigen::Index j = 0; j < r; ++j) draw.col(j) = gaussian_vector(rng, d);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(draw);
  Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(d, r);

  std::uniform_real_distribution<double> spread(1.0 - config.noise_spread, 1.0 + config.noise_spread);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd coeff = gaussian_vector(rng, r);
    while (coeff.norm() == 0.0) coeff = gaussian_vector(rng, r);
    coeff *= config.consensus_scale / coeff.norm();
    const double row_sigma = config.noise_sigma * spread(rng);
    m.row(i) = (basis * coeff + gaussian_vector(rng, d, row_sigma)).transpose();
  }

  std::vector<bool> flags(config.captions, false);
  std::vector<std::size_t> outliers = choose_distinct(rng, config.captions, config.outlier_count);
  std::sort(outliers.begin(), outliers.end());
  std::vector<std::pair<std::size_t, std::size_t>> spikes;
  const auto spike_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(kSpikeFraction * static_cast<double>(config.dims))));
  std::bernoulli_distribution coin(0.5);
  for (std::size_t row : outliers) {
    flags[row] = true;
    const auto i = static_cast<Eigen::Index>(row);
    if (config.mode == OutlierMode::DenseShift) {
      m.row(i) += config.outlier_strength * orthogonal_direction(rng, basis).transpose();
    } else {
      auto cols = choose_distinct(rng, config.dims, spike_count);
      std::sort(cols.begin(), cols.end());
      for (std::size_t c : cols) {
        m(i, static_cast<Eigen::Index>(c)) += coin(rng) ? config.outlier_strength : -config.outlier_strength;
        spikes.emplace_back(row, c);
      }
    }
  }

  if (config.normalize_rows) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = m.row(i).norm();
      if (norm > 0.0) m.row(i) /= norm;
    }
  }

  std::vector<double> deviation(config.captions);
  std::vector<std::vector<SentenceLabel>> labels(config.captions);
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = m.row(i).transpose();
    deviation[static_cast<std::size_t>(i)] = (row - basis * (basis.transpose() * row)).norm();
    const bool outlier = flags[static_cast<std::size_t>(i)];
    labels[static_cast<std::size_t>(i)].push_back(
        {outlier ? "Planted outlier caption." : "Planted consensus caption.", outlier});
    ids.push_back("c" + std::to_string(i));
  }

  return PlantedScene{EmbeddingMatrix(std::move(m), std::move(ids)), std::move(flags),
                      std::move(deviation), std::move(labels), std::move(basis), std::move(spikes)};
}

double spike_precision(const Eigen::MatrixXd& residual,
                       const std::vector<std::pair<std::size_t, std::size_t>>& spikes) {
  if (spikes.empty()) return 0.0;
  const auto cols = static_cast<std::size_t>(residual.cols());
  const std::size_t total = static_cast<std::size_t>(residual.size());
  const std::size_t k = std::min(spikes.size(), total);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto value = [&](std::size_t flat) {
    return std::abs(residual(static_cast<Eigen::Index>(flat / cols), static_cast<Eigen::Index>(flat % cols)));
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double va = value(a), vb = value(b);
                      return va != vb ? va > vb : a < b;
                    });
  std::set<std::size_t> planted;
  for (const auto& [row, col] : spikes) planted.insert(row * cols + col);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += planted.count(order[i]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::vector<BenchmarkCell> run_benchmark(const BenchmarkGrid& grid) {
  if (grid.trials == 0) throw Error(ErrorCode::InvalidConfig, "benchmark needs at least one trial");
  if (grid.modes.empty() || grid.deltas.empty() || grid.sigmas.empty() || grid.methods.empty()) {
    throw Error(ErrorCode::InvalidConfig, "benchmark grid has an empty axis");
  }
  grid.decomposition.validate();

  struct SceneCell {
    OutlierMode mode;
    double delta;
    double sigma;
  };
  std::vector<SceneCell> scene_cells;
  for (auto mode : grid.modes)
    for (double delta : grid.deltas)
      for (double sigma : grid.sigmas) scene_cells.push_back({mode, delta, sigma});
  for (const auto& cell : scene_cells) {
    SynthConfig probe = grid.base;
    probe.mode = cell.mode;
    probe.outlier_strength = cell.delta;
    probe.noise_sigma = cell.sigma;
    probe.validate();
  }

  const std::size_t methods = grid.methods.size();
  const std::size_t jobs = scene_cells.size() * grid.trials;
  std::vector<TrialOutcome> outcomes(jobs * methods);

  parallel_for(jobs, grid.workers, [&](std::size_t job) {
    const std::size_t cell_index = job / grid.trials;
    const std::size_t trial = job % grid.trials;
    const SceneCell& cell = scene_cells[cell_index];
    SynthConfig cfg = grid.base;
    cfg.mode = cell.mode;
    cfg.outlier_strength = cell.delta;
    cfg.noise_sigma = cell.sigma;
    cfg.seed = derive_seed(grid.seed, cell_index, trial);
    const PlantedScene scene = generate_scene(cfg);

    for (std::size_t mi = 0; mi < methods; ++mi) {
      DecompositionConfig dc = grid.decomposition;
      dc.method = grid.methods[mi];
      const DecompositionOutput dec = decompose(scene.matrix, dc);
      const ScoreVector scores = hallucination_scores(dec);
      const RankingResult ranking = rank_and_select(scores);
      TrialOutcome& out = outcomes[job * methods + mi];
      out.inlier_selected = !scene.outlier_flags[ranking.selected];
      if (scores.scores.size() >= 2) out.rho = spearman_rho(scores.scores, scene.deviation_magnitudes);
      if (cell.mode == OutlierMode::SparseSpike && !scene.spike_positions.empty()) {
        out.precision = spike_precision(dec.residual, scene.spike_positions);
      }
    }
  });

  std::vector<BenchmarkCell> cells;
  for (std::size_t ci = 0; ci < scene_cells.size(); ++ci) {
    for (std::size_t mi = 0; mi < methods; ++mi) {
      BenchmarkCell cell;
      cell.mode = scene_cells[ci].mode;
      cell.delta = scene_cells[ci].delta;
      cell.sigma = scene_cells[ci].sigma;
      cell.method = grid.methods[mi];
      cell.trials = grid.trials;
      cell.seed = grid.seed;
      std::size_t selected_inliers = 0;
      std::size_t defined = 0;
      double rho_sum = 0.0;
      double precision_sum = 0.0;
      std::size_t precision_count = 0;
      for (std::size_t t = 0; t < grid.trials; ++t) {
        const TrialOutcome& o = outcomes[(ci * grid.trials + t) * methods + mi];
        if (o.inlier_selected) ++selected_inliers;
        if (o.rho) {
          rho_sum += *o.rho;
          ++defined;
        }
        if (o.precision) {
          precision_sum += *o.precision;
          ++precision_count;
        }
      }
      cell.selection_rate = static_cast<double>(selected_inliers) / static_cast<double>(grid.trials);
      cell.undefined_rho = grid.trials - defined;
      cell.mean_rho = defined ? rho_sum / static_cast<double>(defined) : 0.0;
      if (precision_count) cell.spike_precision = precision_sum / static_cast<double>(precision_count);
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace caprank
