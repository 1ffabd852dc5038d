#include "caprank/cli.hpp"

#include "caprank/error.hpp"
#include "caprank/parallel.hpp"
#include "caprank/pipeline.hpp"
#include "caprank/reports.hpp"
#include "caprank/scoring.hpp"

#include "CLI11.hpp"

#include <cctype>
#include <ostream>

namespace caprank {

namespace {

struct DecompositionFlags {
  std::string method = "svd";
  double variance_threshold = 0.95;
  std::optional<std::size_t> rank_cap;
  std::optional<std::size_t> rank_override;
  bool normalize_rows = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--method", method, "svd or rpca")->check(CLI::IsMember({"svd", "rpca"}));
    cmd->add_option("--variance-threshold", variance_threshold, "Explained-variance target in (0, 1]");
    cmd->add_option("--rank-cap", rank_cap, "Upper bound on the consensus rank");
    cmd->add_option("--rank-override", rank_override, "Fixed consensus rank");
    cmd->add_flag("--normalize-rows", normalize_rows, "Scale each embedding to unit length first");
  }

  DecompositionConfig build() const {
    DecompositionConfig c;
    c.method = *parse_method(method);
    c.variance_threshold = variance_threshold;
    c.rank_cap = rank_cap;
    c.rank_override = rank_override;
    c.normalize_rows = normalize_rows;
    c.validate();
    return c;
  }
};

struct ProviderFlags {
  std::string url;
  std::string model;
  std::string cache_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("--provider-url", url, "Embedding endpoint for captions without vectors");
    cmd->add_option("--provider-model", model, "Model identifier sent to the endpoint");
    cmd->add_option("--cache-dir", cache_dir, "On-disk embedding cache");
  }

  std::optional<ProviderConfig> build() const {
    if (url.empty()) {
      if (!model.empty() || !cache_dir.empty()) {
        throw Error(ErrorCode::InvalidConfig, "--provider-model/--cache-dir need --provider-url");
      }
      return std::nullopt;
    }
    ProviderConfig p;
    p.url = url;
    p.model = model;
    p.cache_dir = cache_dir;
    p.validate();
    return p;
  }
};

template <typename T, typename Parse>
std::vector<T> parse_list(const std::vector<std::string>& names, Parse parse, const char* what) {
  std::vector<T> out;
  for (const auto& n : names) {
    auto v = parse(n);
    if (!v) throw Error(ErrorCode::InvalidConfig, std::string("unknown ") + what + " '" + n + "'");
    out.push_back(*v);
  }
  return out;
}

void print_summary(std::ostream& out, const RankingFile& file, const std::string& path) {
  out << "ranked " << file.summary.ranked << "/" << file.summary.scenes << " scenes";
  if (file.summary.failed) out << ", " << file.summary.failed << " failed";
  out << " -> " << path << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consensus ranking of candidate captions by low-rank residuals", "caprank"};
  app.require_subcommand(1);

  std::size_t workers = default_workers();
  std::uint64_t seed = 0;

  // rank
  auto* rank = app.add_subcommand("rank", "Score and rank every scene's captions");
  std::string rank_input, rank_output, rank_report_dir;
  bool rank_emit = false, rank_timing = false;
  DecompositionFlags rank_dec;
  ProviderFlags rank_provider;
  rank->add_option("--input", rank_input, "Scene records (JSONL)")->required();
  rank->add_option("--output", rank_output, "Ranking file (JSONL)")->required();
  rank_dec.attach(rank);
  rank_provider.attach(rank);
  rank->add_option("--workers", workers, "Scenes processed in parallel")->check(CLI::PositiveNumber);
  rank->add_option("--seed", seed, "Accepted for symmetry; ranking draws no random numbers");
  rank->add_flag("--emit-reports", rank_emit, "Write per-scene decomposition reports");
  rank->add_option("--report-dir", rank_report_dir, "Directory for --emit-reports (default: reports)");
  rank->add_flag("--timing", rank_timing, "Add latency fields to the summary line");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score selections against sentence labels");
  std::string eval_input, eval_output, eval_rankings;
  DecompositionFlags eval_dec;
  ProviderFlags eval_provider;
  evaluate->add_option("--input", eval_input, "Labeled scene records (JSONL)")->required();
  evaluate->add_option("--output", eval_output, "Evaluation report (JSONL)")->required();
  evaluate->add_option("--rankings", eval_rankings, "Existing ranking file; ranks in-process when omitted");
  eval_dec.attach(evaluate);
  eval_provider.attach(evaluate);
  evaluate->add_option("--workers", workers, "Scenes processed in parallel")->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", seed, "Accepted for symmetry; evaluation draws no random numbers");

  // synth
  auto* synth = app.add_subcommand("synth", "Planted-outlier benchmark and synthetic corpora");
  std::string synth_output, synth_scenes_output;
  std::size_t trials = 200, scene_count = 0;
  std::vector<double> deltas{0.1, 0.3, 1.0}, sigmas{0.02, 0.05};
  std::vector<std::string> modes{"dense_shift", "sparse_spike"}, methods{"svd", "rpca"};
  SynthConfig base;
  bool no_normalize = false;
  DecompositionFlags synth_dec;
  synth->add_option("--output", synth_output, "Benchmark CSV");
  synth->add_option("--scenes-output", synth_scenes_output, "Also write a planted corpus (JSONL)");
  synth->add_option("--scene-count", scene_count, "Scenes in --scenes-output");
  synth->add_option("--trials", trials, "Trials per grid cell")->check(CLI::PositiveNumber);
  synth->add_option("--deltas", deltas, "Outlier strengths")->delimiter(',');
  synth->add_option("--sigmas", sigmas, "Noise levels")->delimiter(',');
  synth->add_option("--modes", modes, "dense_shift, sparse_spike")->delimiter(',');
  synth->add_option("--methods", methods, "svd, rpca")->delimiter(',');
  synth->add_option("--captions", base.captions, "Captions per scene");
  synth->add_option("--dims", base.dims, "Embedding dimension");
  synth->add_option("--consensus-rank", base.consensus_rank, "Planted subspace dimension");
  synth->add_option("--outliers", base.outlier_count, "Outlier captions per scene");
  synth->add_option("--noise-sigma", base.noise_sigma, "Noise level for --scenes-output");
  synth->add_option("--outlier-strength", base.outlier_strength, "Outlier strength for --scenes-output");
  synth->add_option("--mode", "dense_shift or sparse_spike for --scenes-output")
      ->each([&](const std::string& m) {
        if (auto parsed = parse_outlier_mode(m)) base.mode = *parsed;
        else throw CLI::ValidationError("--mode", "unknown mode " + m);
      });
  synth->add_flag("--no-normalize", no_normalize, "Keep raw row norms");
  synth_dec.attach(synth);
  synth->add_option("--workers", workers, "Trials run in parallel")->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "Base seed");

  // report
  auto* report = app.add_subcommand("report", "Decomposition and projection data for one or all scenes");
  std::string report_input, report_dir, report_scene;
  bool report_svg = false;
  DecompositionFlags report_dec;
  report->add_option("--input", report_input, "Scene records with embeddings (JSONL)")->required();
  report->add_option("--report-dir", report_dir, "Output directory")->required();
  report->add_option("--scene", report_scene, "Only this scene");
  report->add_flag("--svg", report_svg, "Also render the projection as SVG");
  report_dec.attach(report);

  std::vector<std::string> argv_store{"caprank"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "caprank: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (rank->parsed()) {
      RankOptions options;
      options.decomposition = rank_dec.build();
      options.provider = rank_provider.build();
      options.workers = workers;
      options.timing = rank_timing;
      if (rank_emit) options.report_dir = rank_report_dir.empty() ? "reports" : rank_report_dir;
      else if (!rank_report_dir.empty()) throw Error(ErrorCode::InvalidConfig, "--report-dir needs --emit-reports");
      const auto scenes = load_scenes(rank_input);
      const RankingFile file = rank_corpus(scenes, options);
      write_rankings(rank_output, file);
      for (const auto& f : file.failures) {
        err << "caprank: scene '" << f.scene_id << "' failed (" << error_name(f.code) << "): " << f.message << "\n";
      }
      if (rank_timing && file.summary.wall_seconds) {
        err << "timing: wall " << *file.summary.wall_seconds << " s, mean scene " << *file.summary.mean_scene_ms
            << " ms, max scene " << *file.summary.max_scene_ms << " ms\n";
      }
      print_summary(out, file, rank_output);
      return file.failures.empty() ? kExitOk : kExitSceneFailure;
    }

    if (evaluate->parsed()) {
      const auto scenes = load_scenes(eval_input);
      RankingFile rankings;
      if (!eval_rankings.empty()) {
        rankings = read_rankings(eval_rankings);
      } else {
        RankOptions options;
        options.decomposition = eval_dec.build();
        options.provider = eval_provider.build();
        options.workers = workers;
        rankings = rank_corpus(scenes, options);
      }
      const EvaluationResult result = evaluate_corpus(scenes, rankings);
      write_report(eval_output, result.evaluations, result.uncovered, result.failures, result.report);
      for (const auto& f : result.failures) {
        err << "caprank: scene '" << f.scene_id << "' failed (" << error_name(f.code) << "): " << f.message << "\n";
      }
      out << "evaluated " << result.report.evaluated << "/" << result.report.scenes << " scenes";
      if (result.report.evaluated) out << ", accuracy " << result.report.accuracy;
      if (result.report.uncovered) out << ", " << result.report.uncovered << " uncovered";
      out << " -> " << eval_output << "\n";
      return result.failures.empty() ? kExitOk : kExitSceneFailure;
    }

    if (synth->parsed()) {
      if (synth_output.empty() && synth_scenes_output.empty()) {
        throw Error(ErrorCode::InvalidConfig, "synth needs --output and/or --scenes-output");
      }
      if (!synth_scenes_output.empty() && scene_count == 0) {
        throw Error(ErrorCode::InvalidConfig, "--scenes-output needs --scene-count >= 1");
      }
      base.normalize_rows = !no_normalize;
      base.validate();
      if (!synth_scenes_output.empty()) {
        write_scenes(synth_scenes_output, synth_corpus(base, scene_count, seed));
        out << "wrote " << scene_count << " planted scenes -> " << synth_scenes_output << "\n";
      }
      if (!synth_output.empty()) {
        BenchmarkGrid grid;
        grid.base = base;
        grid.modes = parse_list<OutlierMode>(modes, parse_outlier_mode, "mode");
        grid.methods = parse_list<Method>(methods, parse_method, "method");
        grid.deltas = deltas;
        grid.sigmas = sigmas;
        grid.decomposition = synth_dec.build();
        grid.trials = trials;
        grid.seed = seed;
        grid.workers = workers;
        const auto cells = run_benchmark(grid);
        write_file_atomic(synth_output, benchmark_csv(cells));
        out << "benchmark: " << cells.size() << " cells x " << trials << " trials -> " << synth_output << "\n";
      }
      return kExitOk;
    }

    if (report->parsed()) {
      const DecompositionConfig config = report_dec.build();
      const auto scenes = load_scenes(report_input);
      bool found = false;
      int status = kExitOk;
      for (const auto& scene : scenes) {
        if (!report_scene.empty() && scene.scene_id != report_scene) continue;
        found = true;
        try {
          std::vector<std::vector<double>> rows;
          std::vector<std::string> ids;
          for (const auto& c : scene.captions) {
            if (!c.embedding) {
              throw Error(ErrorCode::MissingEmbeddings, "caption '" + c.caption_id + "' has no embedding");
            }
            rows.push_back(*c.embedding);
            ids.push_back(c.caption_id);
          }
          const EmbeddingMatrix m = build_matrix(rows, ids);
          const DecompositionOutput dec = decompose(m, config);
          const ScoreVector scores = hallucination_scores(dec);
          std::string prefix = scenes.size() == 1 || !report_scene.empty() ? "" : scene.scene_id + "_";
          for (char& c : prefix) {
            const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
            if (!ok) c = '_';
          }
          auto paths = emit_decomposition_reports(dec, report_dir, prefix);
          if (m.rows() >= 3) {
            auto more = emit_projection_report(m, scores.scores, report_dir, prefix, report_svg);
            paths.insert(paths.end(), more.begin(), more.end());
          }
          for (const auto& p : paths) out << p.string() << "\n";
        } catch (const Error& e) {
          err << "caprank: scene '" << scene.scene_id << "' failed (" << error_name(e.code()) << "): " << e.what()
              << "\n";
          status = kExitSceneFailure;
        }
      }
      if (!found) throw Error(ErrorCode::InvalidConfig, "no scene '" + report_scene + "' in " + report_input);
      return status;
    }
  } catch (const Error& e) {
    err << "caprank: " << error_name(e.code()) << ": " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace caprank
