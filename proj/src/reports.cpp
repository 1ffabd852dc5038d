#include "caprank/reports.hpp"

#include "caprank/error.hpp"
#include "caprank/numfmt.hpp"
#include "caprank/records.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace caprank {

namespace {

constexpr std::array<double, 3> kMarkers{0.80, 0.90, 0.95};

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

std::string hex_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + 200 * t));
  const int b = static_cast<int>(std::lround(240 - 200 * t));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, 60, b);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string spectrum_csv(const DecompositionOutput& decomposition) {
  const auto& sigma = decomposition.spectrum.values;
  std::vector<double> lowrank(sigma.size(), 0.0);
  if (decomposition.method == Method::Svd) {
    for (std::size_t k = 0; k < std::min(decomposition.rank, sigma.size()); ++k) lowrank[k] = sigma[k];
  } else {
    const auto r_values = singular_spectrum(decomposition.consensus).values;
    for (std::size_t k = 0; k < std::min(r_values.size(), lowrank.size()); ++k) lowrank[k] = r_values[k];
  }
  std::string out = "k,sigma_original,sigma_lowrank\n";
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    out += std::to_string(k + 1) + "," + csv_number(sigma[k]) + "," + csv_number(lowrank[k]) + "\n";
  }
  return out;
}

std::string heatmap_csv(const DecompositionOutput& decomposition, std::size_t max_columns) {
  const Eigen::Index cols = std::min<Eigen::Index>(decomposition.input.cols(),
                                                   static_cast<Eigen::Index>(max_columns));
  std::string out = "matrix,row,col,value\n";
  const std::array<std::pair<const char*, const Eigen::MatrixXd*>, 3> parts{
      {{"M", &decomposition.input}, {"R", &decomposition.consensus}, {"E", &decomposition.residual}}};
  for (const auto& [tag, m] : parts) {
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        out += tag;
        out += "," + std::to_string(i) + "," + std::to_string(j) + "," + csv_number((*m)(i, j)) + "\n";
      }
    }
  }
  return out;
}

std::string sensitivity_csv(const SingularSpectrum& spectrum) {
  std::string out = "kind,k,captured_norm,residual_norm,cumulative_ratio,threshold\n";
  const double total = spectrum.total_energy();
  const std::size_t n = spectrum.values.size();
  for (std::size_t k = 1; k <= n; ++k) {
    const double tail = spectrum.tail_energy(k);
    const double captured = std::max(0.0, total - tail);
    out += "component," + std::to_string(k) + "," + csv_number(std::sqrt(captured)) + "," +
           csv_number(std::sqrt(tail)) + "," + csv_number(spectrum.variance_profile[k - 1]) + ",\n";
  }
  for (double tau : kMarkers) {
    std::size_t hit = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (spectrum.variance_profile[k - 1] >= tau) {
        hit = k;
        break;
      }
    }
    if (hit == 0) {
      out += "threshold,,,,," + csv_number(tau) + "\n";
      continue;
    }
    const double tail = spectrum.tail_energy(hit);
    out += "threshold," + std::to_string(hit) + "," + csv_number(std::sqrt(std::max(0.0, total - tail))) +
           "," + csv_number(std::sqrt(tail)) + "," + csv_number(spectrum.variance_profile[hit - 1]) + "," +
           csv_number(tau) + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> emit_decomposition_reports(const DecompositionOutput& decomposition,
                                                              const std::filesystem::path& dir,
                                                              const std::string& prefix) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create report directory '" + dir.string() + "'");
  std::vector<std::filesystem::path> paths{dir / (prefix + "spectrum.csv"), dir / (prefix + "heatmap.csv"),
                                           dir / (prefix + "sensitivity.csv")};
  write_file_atomic(paths[0], spectrum_csv(decomposition));
  write_file_atomic(paths[1], heatmap_csv(decomposition));
  write_file_atomic(paths[2], sensitivity_csv(decomposition.spectrum));
  return paths;
}

std::vector<ProjectedPoint> projection_rows(const EmbeddingMatrix& matrix, std::span<const double> scores) {
  if (matrix.rows() < 3) throw Error(ErrorCode::TooFew, "projection needs at least 3 captions");
  if (scores.size() != matrix.rows()) {
    throw Error(ErrorCode::LengthMismatch, "projection got " + std::to_string(scores.size()) +
                                               " scores for " + std::to_string(matrix.rows()) + " captions");
  }
  const Eigen::MatrixXd& m = matrix.data();
  const Eigen::MatrixXd centered = m.rowwise() - m.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::MatrixXd& v = svd.matrixV();
  std::vector<ProjectedPoint> points;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ProjectedPoint p;
    p.caption_id = matrix.row_ids()[static_cast<std::size_t>(i)];
    if (v.cols() > 0) p.pc1 = centered.row(i).dot(v.col(0));
    if (v.cols() > 1) p.pc2 = centered.row(i).dot(v.col(1));
    p.score = scores[static_cast<std::size_t>(i)];
    points.push_back(std::move(p));
  }
  return points;
}

std::string projection_csv(std::span<const ProjectedPoint> points) {
  std::string out =
      "# rows mean-centered before projection; the decomposition itself works on uncentered data\n"
      "caption_id,pc1,pc2,score\n";
  for (const auto& p : points) {
    std::string id = p.caption_id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : id) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      id = quoted + "\"";
    }
    out += id + "," + csv_number(p.pc1) + "," + csv_number(p.pc2) + "," + csv_number(p.score) + "\n";
  }
  return out;
}

std::string projection_svg(std::span<const ProjectedPoint> points) {
  constexpr double size = 400.0, pad = 30.0;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0, s0 = 0, s1 = 0;
  if (!points.empty()) {
    x0 = x1 = points[0].pc1;
    y0 = y1 = points[0].pc2;
    s0 = s1 = points[0].score;
  }
  for (const auto& p : points) {
    x0 = std::min(x0, p.pc1), x1 = std::max(x1, p.pc1);
    y0 = std::min(y0, p.pc2), y1 = std::max(y1, p.pc2);
    s0 = std::min(s0, p.score), s1 = std::max(s1, p.score);
  }
  auto scale = [&](double v, double lo, double hi) {
    return hi > lo ? (v - lo) / (hi - lo) : 0.5;
  };
  char buf[256];
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  out += "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
  out += "<text x=\"200\" y=\"392\" font-size=\"11\" text-anchor=\"middle\">pc1</text>\n";
  out += "<text x=\"10\" y=\"200\" font-size=\"11\" transform=\"rotate(-90 10 200)\">pc2</text>\n";
  for (const auto& p : points) {
    const double cx = pad + scale(p.pc1, x0, x1) * (size - 2 * pad);
    const double cy = size - pad - scale(p.pc2, y0, y1) * (size - 2 * pad);
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"5\" fill=\"%s\">", cx, cy,
                  hex_color(scale(p.score, s0, s1)).c_str());
    out += buf;
    out += "<title>" + xml_escape(p.caption_id) + " " + csv_number(p.score) + "</title></circle>\n";
  }
  out += "</svg>\n";
  return out;
}

std::vector<std::filesystem::path> emit_projection_report(const EmbeddingMatrix& matrix,
                                                          std::span<const double> scores,
                                                          const std::filesystem::path& dir,
                                                          const std::string& prefix, bool svg) {
  const auto points = projection_rows(matrix, scores);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create report directory '" + dir.string() + "'");
  std::vector<std::filesystem::path> paths{dir / (prefix + "projection.csv")};
  write_file_atomic(paths[0], projection_csv(points));
  if (svg) {
    paths.push_back(dir / (prefix + "projection.svg"));
    write_file_atomic(paths[1], projection_svg(points));
  }
  return paths;
}

std::string benchmark_csv(std::span<const BenchmarkCell> cells) {
  std::string out = "mode,delta,sigma,method,trials,selection_rate,mean_rho,undefined_rho,spike_precision,seed\n";
  for (const auto& c : cells) {
    out += std::string(outlier_mode_name(c.mode)) + "," + csv_number(c.delta) + "," + csv_number(c.sigma) + "," +
           std::string(method_name(c.method)) + "," + std::to_string(c.trials) + "," +
           csv_number(c.selection_rate) + "," + csv_number(c.mean_rho) + "," + std::to_string(c.undefined_rho) +
           "," + (c.spike_precision ? csv_number(*c.spike_precision) : std::string()) + "," +
           std::to_string(c.seed) + "\n";
  }
  return out;
}

}  // namespace caprank
