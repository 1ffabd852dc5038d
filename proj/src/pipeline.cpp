#include "caprank/pipeline.hpp"

#include "caprank/error.hpp"
#include "caprank/matrix.hpp"
#include "caprank/parallel.hpp"
#include "caprank/reports.hpp"
#include "caprank/scoring.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>

namespace caprank {

namespace {

using Clock = std::chrono::steady_clock;

std::string file_prefix(const std::string& scene_id) {
  std::string out;
  for (char c : scene_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out + "_";
}

EmbeddingMatrix scene_matrix(const SceneRecord& scene) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> ids;
  for (const auto& c : scene.captions) {
    if (!c.embedding) {
      throw Error(ErrorCode::MissingEmbeddings,
                  "scene '" + scene.scene_id + "' caption '" + c.caption_id + "' has no embedding");
    }
    rows.push_back(*c.embedding);
    ids.push_back(c.caption_id);
  }
  return build_matrix(rows, ids);
}

SceneRanking to_ranking(const SceneRecord& scene, const ScoreVector& scores) {
  const RankingResult r = rank_and_select(scores);
  SceneRanking out;
  out.scene_id = scene.scene_id;
  out.method = std::string(method_name(scores.method));
  out.rank_used = scores.rank;
  out.degenerate = r.degenerate;
  for (std::size_t pos = 0; pos < r.ordering.size(); ++pos) {
    const std::size_t i = r.ordering[pos];
    out.captions.push_back({scene.captions[i].caption_id, i, scores.scores[i], pos + 1, pos == 0});
  }
  return out;
}

struct SceneOutcome {
  std::optional<SceneRanking> ranking;
  std::optional<SceneFailure> failure;
  double seconds = 0.0;
};

}  // namespace

SceneRanking rank_scene(const SceneRecord& scene, const DecompositionConfig& config) {
  const EmbeddingMatrix m = scene_matrix(scene);
  return to_ranking(scene, hallucination_scores(decompose(m, config)));
}

RankingFile rank_corpus(const std::vector<SceneRecord>& input, const RankOptions& options) {
  options.decomposition.validate();
  if (options.provider) options.provider->validate();
  const auto wall_start = Clock::now();

  std::vector<SceneRecord> scenes = input;
  std::vector<std::optional<SceneFailure>> prefailed(scenes.size());

  // Fill missing embeddings with one provider call for the whole corpus.
  if (options.provider) {
    std::vector<std::string> texts;
    std::vector<std::pair<std::size_t, std::size_t>> where;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
      for (std::size_t c = 0; c < scenes[s].captions.size(); ++c) {
        if (!scenes[s].captions[c].embedding) {
          texts.push_back(scenes[s].captions[c].text);
          where.emplace_back(s, c);
        }
      }
    }
    if (!texts.empty()) {
      try {
        auto vectors = fetch_embeddings(*options.provider, texts);
        for (std::size_t k = 0; k < where.size(); ++k) {
          scenes[where[k].first].captions[where[k].second].embedding = std::move(vectors[k]);
        }
      } catch (const Error& e) {
        for (const auto& [s, c] : where) {
          if (!prefailed[s]) prefailed[s] = SceneFailure{scenes[s].scene_id, e.code(), e.what()};
        }
      }
    }
  }

  std::vector<SceneOutcome> outcomes(scenes.size());
  parallel_for(scenes.size(), options.workers, [&](std::size_t s) {
    SceneOutcome& out = outcomes[s];
    if (prefailed[s]) {
      out.failure = prefailed[s];
      return;
    }
    try {
      const EmbeddingMatrix m = scene_matrix(scenes[s]);
      const auto t0 = Clock::now();
      const DecompositionOutput dec = decompose(m, options.decomposition);
      const ScoreVector scores = hallucination_scores(dec);
      out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      out.ranking = to_ranking(scenes[s], scores);
      if (options.report_dir) {
        const std::string prefix = file_prefix(scenes[s].scene_id);
        emit_decomposition_reports(dec, *options.report_dir, prefix);
        if (m.rows() >= 3) emit_projection_report(m, scores.scores, *options.report_dir, prefix, true);
      }
    } catch (const Error& e) {
      out.failure = SceneFailure{scenes[s].scene_id, e.code(), e.what()};
    }
  });

  RankingFile file;
  file.summary.scenes = scenes.size();
  double total_seconds = 0.0, max_seconds = 0.0;
  for (auto& o : outcomes) {
    if (o.ranking) {
      file.summary.captions += o.ranking->captions.size();
      if (o.ranking->degenerate) ++file.summary.degenerate;
      total_seconds += o.seconds;
      max_seconds = std::max(max_seconds, o.seconds);
      file.rankings.push_back(std::move(*o.ranking));
    } else {
      file.failures.push_back(std::move(*o.failure));
    }
  }
  file.summary.ranked = file.rankings.size();
  file.summary.failed = file.failures.size();
  std::stable_sort(file.rankings.begin(), file.rankings.end(),
                   [](const auto& a, const auto& b) { return a.scene_id < b.scene_id; });
  std::stable_sort(file.failures.begin(), file.failures.end(),
                   [](const auto& a, const auto& b) { return a.scene_id < b.scene_id; });
  if (options.timing) {
    file.summary.wall_seconds = std::chrono::duration<double>(Clock::now() - wall_start).count();
    file.summary.mean_scene_ms =
        file.rankings.empty() ? 0.0 : 1e3 * total_seconds / static_cast<double>(file.rankings.size());
    file.summary.max_scene_ms = 1e3 * max_seconds;
  }
  return file;
}

EvaluationResult evaluate_corpus(const std::vector<SceneRecord>& scenes, const RankingFile& rankings) {
  std::map<std::string, const SceneRanking*> ranked;
  for (const auto& r : rankings.rankings) ranked[r.scene_id] = &r;
  std::map<std::string, const SceneFailure*> failed;
  for (const auto& f : rankings.failures) failed[f.scene_id] = &f;

  EvaluationResult out;
  for (const auto& scene : scenes) {
    if (auto f = failed.find(scene.scene_id); f != failed.end()) {
      out.failures.push_back(*f->second);
      continue;
    }
    auto r = ranked.find(scene.scene_id);
    if (r == ranked.end()) {
      out.uncovered.push_back({scene.scene_id, "no ranking for scene"});
      continue;
    }
    if (!scene.has_all_labels()) {
      out.uncovered.push_back({scene.scene_id, "captions without sentence labels"});
      continue;
    }
    try {
      const SceneRanking& sr = *r->second;
      if (sr.captions.size() != scene.captions.size()) {
        throw Error(ErrorCode::LengthMismatch, "scene '" + scene.scene_id + "' has " +
                                                   std::to_string(scene.captions.size()) + " captions but " +
                                                   std::to_string(sr.captions.size()) + " ranked");
      }
      std::vector<double> scores(scene.captions.size());
      std::vector<bool> seen(scene.captions.size(), false);
      for (const auto& rc : sr.captions) {
        if (rc.index >= scene.captions.size() || seen[rc.index] ||
            scene.captions[rc.index].caption_id != rc.caption_id) {
          throw Error(ErrorCode::LengthMismatch,
                      "scene '" + scene.scene_id + "' ranking does not match caption '" + rc.caption_id + "'");
        }
        seen[rc.index] = true;
        scores[rc.index] = rc.score;
      }
      std::vector<std::vector<SentenceLabel>> labels;
      std::vector<std::string> ids;
      for (const auto& c : scene.captions) {
        labels.push_back(*c.sentences);
        ids.push_back(c.caption_id);
      }
      out.evaluations.push_back(evaluate_scene(scene.scene_id, scores, labels, ids));
    } catch (const Error& e) {
      out.failures.push_back({scene.scene_id, e.code(), e.what()});
    }
  }
  auto by_id = [](const auto& a, const auto& b) { return a.scene_id < b.scene_id; };
  std::stable_sort(out.evaluations.begin(), out.evaluations.end(), by_id);
  std::stable_sort(out.uncovered.begin(), out.uncovered.end(), by_id);
  std::stable_sort(out.failures.begin(), out.failures.end(), by_id);
  out.report = aggregate_corpus(out.evaluations, out.uncovered.size(), out.failures.size());
  return out;
}

std::vector<SceneRecord> synth_corpus(const SynthConfig& base, std::size_t count, std::uint64_t seed) {
  std::vector<SceneRecord> scenes;
  scenes.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    SynthConfig cfg = base;
    cfg.seed = derive_seed(seed, k);
    const PlantedScene planted = generate_scene(cfg);
    char id[32];
    std::snprintf(id, sizeof id, "scene-%06zu", k);
    SceneRecord scene{id, {}};
    const Eigen::MatrixXd& m = planted.matrix.data();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const auto row = static_cast<std::size_t>(i);
      CaptionRecord c;
      c.caption_id = planted.matrix.row_ids()[row];
      c.model = "synthetic";
      c.text = planted.gt_labels[row].front().text;
      c.embedding = std::vector<double>(m.row(i).begin(), m.row(i).end());
      c.sentences = planted.gt_labels[row];
      scene.captions.push_back(std::move(c));
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

}  // namespace caprank
