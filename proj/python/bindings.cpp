#include "caprank/cli.hpp"
#include "caprank/decomposition.hpp"
#include "caprank/error.hpp"
#include "caprank/metrics.hpp"
#include "caprank/scoring.hpp"
#include "caprank/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace caprank;

namespace {

DecompositionConfig make_config(const std::string& method, double variance_threshold,
                                std::optional<std::size_t> rank_cap, std::optional<std::size_t> rank_override,
                                bool normalize_rows) {
  auto m = parse_method(method);
  if (!m) throw Error(ErrorCode::InvalidConfig, "unknown method '" + method + "'");
  DecompositionConfig c;
  c.method = *m;
  c.variance_threshold = variance_threshold;
  c.rank_cap = rank_cap;
  c.rank_override = rank_override;
  c.normalize_rows = normalize_rows;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low-rank consensus ranking of candidate captions";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&]() { return py::exception<Error>(m, "Error", PyExc_ValueError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type.get_stored(), (std::string(error_name(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def(
      "decompose",
      [](const Eigen::MatrixXd& matrix, const std::string& method, double variance_threshold,
         std::optional<std::size_t> rank_cap, std::optional<std::size_t> rank_override, bool normalize_rows) {
        const DecompositionOutput out = decompose(EmbeddingMatrix(matrix),
                                                  make_config(method, variance_threshold, rank_cap,
                                                              rank_override, normalize_rows));
        py::dict d;
        d["method"] = std::string(method_name(out.method));
        d["rank"] = out.rank;
        d["singular_values"] = out.spectrum.values;
        d["variance_profile"] = out.spectrum.variance_profile;
        d["consensus"] = out.consensus;
        d["residual"] = out.residual;
        d["scores"] = hallucination_scores(out).scores;
        d["degenerate_residual"] = out.degenerate_residual;
        if (out.rpca) {
          d["iterations"] = out.rpca->iterations;
          d["converged"] = out.rpca->converged;
        }
        return d;
      },
      py::arg("matrix"), py::arg("method") = "svd", py::arg("variance_threshold") = 0.95,
      py::arg("rank_cap") = py::none(), py::arg("rank_override") = py::none(), py::arg("normalize_rows") = false);

  m.def(
      "rank_captions",
      [](const Eigen::MatrixXd& matrix, const std::string& method, double variance_threshold,
         std::optional<std::size_t> rank_override) {
        const auto out = decompose(EmbeddingMatrix(matrix),
                                   make_config(method, variance_threshold, std::nullopt, rank_override, false));
        const ScoreVector scores = hallucination_scores(out);
        const RankingResult r = rank_and_select(scores);
        return py::make_tuple(scores.scores, r.ordering, r.selected);
      },
      py::arg("matrix"), py::arg("method") = "svd", py::arg("variance_threshold") = 0.95,
      py::arg("rank_override") = py::none(), "Returns (scores, ordering, selected).");

  m.def(
      "singular_values", [](const Eigen::MatrixXd& matrix) { return singular_spectrum(matrix).values; },
      py::arg("matrix"));

  m.def(
      "spearman_rho",
      [](const std::vector<double>& a, const std::vector<double>& b) { return spearman_rho(a, b); },
      py::arg("scores"), py::arg("gt_scores"), "None when either ranking is constant.");

  m.def("split_sentences", &split_sentences, py::arg("text"));

  m.def(
      "gt_caption_score",
      [](const std::vector<bool>& flags) {
        std::vector<SentenceLabel> labels;
        for (bool f : flags) labels.push_back({"", f});
        return gt_caption_score(labels);
      },
      py::arg("flags"));

  m.def(
      "generate_scene",
      [](std::size_t captions, std::size_t dims, double noise_sigma, double outlier_strength,
         const std::string& mode, std::uint64_t seed) {
        SynthConfig cfg;
        cfg.captions = captions;
        cfg.dims = dims;
        cfg.noise_sigma = noise_sigma;
        cfg.outlier_strength = outlier_strength;
        auto parsed = parse_outlier_mode(mode);
        if (!parsed) throw Error(ErrorCode::InvalidConfig, "unknown mode '" + mode + "'");
        cfg.mode = *parsed;
        cfg.seed = seed;
        const PlantedScene s = generate_scene(cfg);
        return py::make_tuple(s.matrix.data(), s.outlier_flags, s.deviation_magnitudes);
      },
      py::arg("captions") = 10, py::arg("dims") = 64, py::arg("noise_sigma") = 0.05,
      py::arg("outlier_strength") = 1.0, py::arg("mode") = "dense_shift", py::arg("seed") = 0,
      "Returns (matrix, outlier_flags, deviation_magnitudes).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int status = run_cli(args, out, err);
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("args"), "Returns (exit_status, stdout, stderr).");
}
