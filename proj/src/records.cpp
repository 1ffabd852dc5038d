#include "caprank/records.hpp"

#include "caprank/numfmt.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <unistd.h>

namespace caprank {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(std::string_view source, std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

const json& require(const json& obj, const char* key, std::string_view source, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(source, line, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::string_view source, std::size_t line,
                           bool allow_empty = false) {
  const json& v = require(obj, key, source, line);
  if (!v.is_string()) parse_fail(source, line, std::string("field '") + key + "' must be a string");
  std::string s = v.get<std::string>();
  if (s.empty() && !allow_empty) parse_fail(source, line, std::string("field '") + key + "' is empty");
  return s;
}

double require_number(const json& v, std::string_view what, std::string_view source, std::size_t line) {
  if (!v.is_number()) parse_fail(source, line, std::string(what) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::NonFiniteEntry, std::string(source) + ":" + std::to_string(line) + ": " +
                                               std::string(what) + " is not finite");
  }
  return x;
}

std::size_t require_count(const json& obj, const char* key, std::string_view source, std::size_t line) {
  const json& v = require(obj, key, source, line);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    parse_fail(source, line, std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool require_bool(const json& obj, const char* key, std::string_view source, std::size_t line) {
  const json& v = require(obj, key, source, line);
  if (!v.is_boolean()) parse_fail(source, line, std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

json parse_line(const std::string& text, std::string_view source, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(source, line, std::string("invalid JSON: ") + e.what());
  } catch (const json::out_of_range& e) {
    // Literals such as 1e400 overflow while parsing.
    throw Error(ErrorCode::NonFiniteEntry, std::string(source) + ":" + std::to_string(line) +
                                               ": number is not finite: " + e.what());
  }
  if (!obj.is_object()) parse_fail(source, line, "record must be a JSON object");
  return obj;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string number_array(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  out += ']';
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

bool SceneRecord::has_all_embeddings() const {
  return std::all_of(captions.begin(), captions.end(),
                     [](const CaptionRecord& c) { return c.embedding.has_value(); });
}

bool SceneRecord::has_all_labels() const {
  return !captions.empty() &&
         std::all_of(captions.begin(), captions.end(),
                     [](const CaptionRecord& c) { return c.sentences && !c.sentences->empty(); });
}

std::vector<SceneRecord> parse_scenes(std::istream& in, std::string_view source) {
  std::vector<SceneRecord> scenes;
  std::unordered_map<std::string, std::size_t> scene_index;
  std::vector<std::unordered_set<std::string>> caption_ids;
  std::vector<std::optional<std::pair<std::size_t, std::string>>> scene_dims;  // (d, first caption)

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const json obj = parse_line(text, source, line);

    CaptionRecord cap;
    const std::string scene_id = require_string(obj, "scene_id", source, line);
    cap.caption_id = require_string(obj, "caption_id", source, line);
    cap.model = require_string(obj, "model", source, line, true);
    cap.text = require_string(obj, "text", source, line, true);

    if (auto it = obj.find("embedding"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) parse_fail(source, line, "field 'embedding' must be an array of numbers");
      if (it->empty()) parse_fail(source, line, "field 'embedding' is empty");
      std::vector<double> emb;
      emb.reserve(it->size());
      for (const auto& v : *it) emb.push_back(require_number(v, "embedding entry", source, line));
      cap.embedding = std::move(emb);
    }
    if (auto it = obj.find("sentences"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) parse_fail(source, line, "field 'sentences' must be an array");
      if (it->empty()) parse_fail(source, line, "field 'sentences' is empty");
      std::vector<SentenceLabel> labels;
      for (const auto& s : *it) {
        if (!s.is_object()) parse_fail(source, line, "sentence entries must be objects");
        SentenceLabel label;
        label.text = require_string(s, "text", source, line, true);
        const json& flag = require(s, "hallucinated", source, line);
        if (!flag.is_number_integer() || (flag.get<long long>() != 0 && flag.get<long long>() != 1)) {
          parse_fail(source, line, "field 'hallucinated' must be 0 or 1");
        }
        label.hallucinated = flag.get<long long>() == 1;
        labels.push_back(std::move(label));
      }
      cap.sentences = std::move(labels);
    }

    auto [it, inserted] = scene_index.try_emplace(scene_id, scenes.size());
    if (inserted) {
      scenes.push_back({scene_id, {}});
      caption_ids.emplace_back();
      scene_dims.emplace_back();
    }
    const std::size_t si = it->second;
    if (!caption_ids[si].insert(cap.caption_id).second) {
      throw Error(ErrorCode::DuplicateId, std::string(source) + ":" + std::to_string(line) +
                                              ": duplicate caption_id '" + cap.caption_id +
                                              "' in scene '" + scene_id + "'");
    }
    if (cap.embedding) {
      auto& dims = scene_dims[si];
      if (!dims) {
        dims.emplace(cap.embedding->size(), cap.caption_id);
      } else if (dims->first != cap.embedding->size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(source) + ":" + std::to_string(line) + ": caption '" + cap.caption_id +
                        "' in scene '" + scene_id + "' has dimension " +
                        std::to_string(cap.embedding->size()) + ", caption '" + dims->second +
                        "' has " + std::to_string(dims->first));
      }
    }
    scenes[si].captions.push_back(std::move(cap));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read error in " + std::string(source));
  return scenes;
}

std::vector<SceneRecord> load_scenes(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_scenes(in, path.string());
}

std::string format_scenes(const std::vector<SceneRecord>& scenes) {
  std::string out;
  for (const auto& scene : scenes) {
    for (const auto& cap : scene.captions) {
      JsonLine line;
      line.field("scene_id", scene.scene_id)
          .field("caption_id", cap.caption_id)
          .field("model", cap.model)
          .field("text", cap.text);
      if (cap.embedding) line.raw_field("embedding", number_array(*cap.embedding));
      if (cap.sentences) {
        std::string arr = "[";
        for (std::size_t i = 0; i < cap.sentences->size(); ++i) {
          if (i) arr += ',';
          const auto& s = (*cap.sentences)[i];
          arr += JsonLine().field("text", s.text).field("hallucinated", s.hallucinated ? 1 : 0).str();
        }
        arr += ']';
        line.raw_field("sentences", arr);
      }
      out += line.str();
      out += '\n';
    }
  }
  return out;
}

void write_scenes(const std::filesystem::path& path, const std::vector<SceneRecord>& scenes) {
  write_file_atomic(path, format_scenes(scenes));
}

std::string format_rankings(const RankingFile& file) {
  std::vector<const SceneRanking*> sorted;
  for (const auto& r : file.rankings) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SceneRanking* a, const SceneRanking* b) { return a->scene_id < b->scene_id; });
  std::vector<const SceneFailure*> failures;
  for (const auto& f : file.failures) failures.push_back(&f);
  std::stable_sort(failures.begin(), failures.end(),
                   [](const SceneFailure* a, const SceneFailure* b) { return a->scene_id < b->scene_id; });

  std::string out;
  for (const SceneRanking* scene : sorted) {
    for (const auto& cap : scene->captions) {
      out += JsonLine()
                 .field("scene_id", scene->scene_id)
                 .field("caption_id", cap.caption_id)
                 .field("index", cap.index)
                 .field("score", cap.score)
                 .field("rank", cap.rank)
                 .field("selected", cap.selected)
                 .field("method", scene->method)
                 .field("rank_used", scene->rank_used)
                 .field("degenerate", scene->degenerate)
                 .str();
      out += '\n';
    }
  }
  for (const SceneFailure* f : failures) {
    out += JsonLine()
               .field("scene_id", f->scene_id)
               .field("error", error_name(f->code))
               .field("message", f->message)
               .str();
    out += '\n';
  }
  const RankingSummary& s = file.summary;
  JsonLine summary;
  summary.field("summary", true)
      .field("scenes", s.scenes)
      .field("ranked", s.ranked)
      .field("failed", s.failed)
      .field("captions", s.captions)
      .field("degenerate", s.degenerate);
  if (s.wall_seconds) summary.field("wall_seconds", *s.wall_seconds);
  if (s.mean_scene_ms) summary.field("mean_scene_ms", *s.mean_scene_ms);
  if (s.max_scene_ms) summary.field("max_scene_ms", *s.max_scene_ms);
  out += summary.str();
  out += '\n';
  return out;
}

void write_rankings(const std::filesystem::path& path, const RankingFile& file) {
  write_file_atomic(path, format_rankings(file));
}

RankingFile parse_rankings(std::istream& in, std::string_view source) {
  static const std::map<std::string, ErrorCode, std::less<>> codes = [] {
    std::map<std::string, ErrorCode, std::less<>> m;
    for (int c = 0; c <= static_cast<int>(ErrorCode::IoError); ++c) {
      m.emplace(std::string(error_name(static_cast<ErrorCode>(c))), static_cast<ErrorCode>(c));
    }
    return m;
  }();

  RankingFile file;
  std::unordered_map<std::string, std::size_t> index;
  bool have_summary = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const json obj = parse_line(text, source, line);
    if (obj.contains("summary")) {
      RankingSummary& s = file.summary;
      s.scenes = require_count(obj, "scenes", source, line);
      s.ranked = require_count(obj, "ranked", source, line);
      s.failed = require_count(obj, "failed", source, line);
      s.captions = require_count(obj, "captions", source, line);
      s.degenerate = require_count(obj, "degenerate", source, line);
      if (obj.contains("wall_seconds")) s.wall_seconds = require_number(obj["wall_seconds"], "wall_seconds", source, line);
      if (obj.contains("mean_scene_ms")) s.mean_scene_ms = require_number(obj["mean_scene_ms"], "mean_scene_ms", source, line);
      if (obj.contains("max_scene_ms")) s.max_scene_ms = require_number(obj["max_scene_ms"], "max_scene_ms", source, line);
      have_summary = true;
      continue;
    }
    const std::string scene_id = require_string(obj, "scene_id", source, line);
    if (obj.contains("error")) {
      SceneFailure f;
      f.scene_id = scene_id;
      const std::string name = require_string(obj, "error", source, line);
      auto it = codes.find(name);
      if (it == codes.end()) parse_fail(source, line, "unknown error class '" + name + "'");
      f.code = it->second;
      f.message = require_string(obj, "message", source, line, true);
      file.failures.push_back(std::move(f));
      continue;
    }
    RankedCaption cap;
    cap.caption_id = require_string(obj, "caption_id", source, line);
    cap.index = require_count(obj, "index", source, line);
    cap.score = require_number(require(obj, "score", source, line), "score", source, line);
    cap.rank = require_count(obj, "rank", source, line);
    cap.selected = require_bool(obj, "selected", source, line);
    const std::string method = require_string(obj, "method", source, line);
    const std::size_t rank_used = require_count(obj, "rank_used", source, line);
    const bool degenerate = require_bool(obj, "degenerate", source, line);

    auto [it, inserted] = index.try_emplace(scene_id, file.rankings.size());
    if (inserted) {
      file.rankings.push_back({scene_id, method, rank_used, degenerate, {}});
    }
    file.rankings[it->second].captions.push_back(std::move(cap));
  }
  if (!have_summary) parse_fail(source, line, "missing summary record");
  return file;
}

RankingFile read_rankings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_rankings(in, path.string());
}

std::string format_report(const std::vector<SceneEvaluation>& evaluations,
                          const std::vector<UncoveredScene>& uncovered,
                          const std::vector<SceneFailure>& failures, const CorpusReport& report) {
  std::vector<const SceneEvaluation*> sorted;
  for (const auto& e : evaluations) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(), [](const SceneEvaluation* a, const SceneEvaluation* b) {
    return a->scene_id < b->scene_id;
  });

  std::string out;
  for (const SceneEvaluation* ev : sorted) {
    JsonLine line;
    line.field("scene_id", ev->scene_id)
        .field("selected_index", ev->selected)
        .field("selected_caption", ev->selected_caption)
        .field("selected_fraction", ev->selected_fraction)
        .field("correct", ev->correct)
        .field("degenerate", ev->degenerate);
    if (ev->spearman_rho) {
      line.field("spearman_rho", *ev->spearman_rho).null_field("undefined_reason");
    } else {
      line.null_field("spearman_rho").field("undefined_reason", ev->undefined_reason.value_or(""));
    }
    line.raw_field("gt_scores", number_array(ev->gt_scores));
    out += line.str();
    out += '\n';
  }
  std::vector<const UncoveredScene*> unc;
  for (const auto& u : uncovered) unc.push_back(&u);
  std::stable_sort(unc.begin(), unc.end(),
                   [](const UncoveredScene* a, const UncoveredScene* b) { return a->scene_id < b->scene_id; });
  for (const UncoveredScene* u : unc) {
    out += JsonLine().field("scene_id", u->scene_id).field("uncovered", true).field("reason", u->reason).str();
    out += '\n';
  }
  std::vector<const SceneFailure*> fails;
  for (const auto& f : failures) fails.push_back(&f);
  std::stable_sort(fails.begin(), fails.end(),
                   [](const SceneFailure* a, const SceneFailure* b) { return a->scene_id < b->scene_id; });
  for (const SceneFailure* f : fails) {
    out += JsonLine()
               .field("scene_id", f->scene_id)
               .field("error", error_name(f->code))
               .field("message", f->message)
               .str();
    out += '\n';
  }
  const auto& c = report.correlation;
  out += JsonLine()
             .field("summary", true)
             .field("scenes", report.scenes)
             .field("evaluated", report.evaluated)
             .field("uncovered", report.uncovered)
             .field("failed", report.failed)
             .field("correct", report.correct)
             .field("accuracy", report.accuracy)
             .field("mean_selected_fraction", report.mean_selected_fraction)
             .field("degenerate", report.degenerate)
             .field("defined_rho", c.defined)
             .field("undefined_rho", c.undefined)
             .field("positive_rho_fraction", c.positive_fraction)
             .field("mean_rho", c.mean)
             .field("rho_variance", c.variance)
             .str();
  out += '\n';
  return out;
}

void write_report(const std::filesystem::path& path, const std::vector<SceneEvaluation>& evaluations,
                  const std::vector<UncoveredScene>& uncovered,
                  const std::vector<SceneFailure>& failures, const CorpusReport& report) {
  write_file_atomic(path, format_report(evaluations, uncovered, failures, report));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<unsigned long> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into '" + path.string() + "'");
  }
}

}  // namespace caprank
