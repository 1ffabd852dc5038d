#include "caprank/provider.hpp"

#include "caprank/error.hpp"
#include "caprank/numfmt.hpp"
#include "caprank/parallel.hpp"
#include "caprank/records.hpp"

#include "httplib.h"
#include "json.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <thread>

namespace caprank {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) {
    throw Error(ErrorCode::InvalidConfig, "provider URL must look like http(s)://host[:port][/path]");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::optional<std::vector<double>> read_cache(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    const json obj = json::parse(buf.str());
    std::vector<double> v;
    for (const auto& x : obj.at("embedding")) {
      if (!x.is_number()) return std::nullopt;
      v.push_back(x.get<double>());
    }
    if (v.empty()) return std::nullopt;
    return v;
  } catch (const json::exception&) {
    return std::nullopt;  // unreadable entry is treated as a miss
  }
}

void write_cache(const std::filesystem::path& file, const std::vector<double>& v) {
  std::string body = "{\"embedding\":[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) body += ',';
    body += format_double(v[i]);
  }
  body += "]}\n";
  write_file_atomic(file, body);
}

std::vector<std::vector<double>> parse_response(const std::string& body, std::size_t expected) {
  json obj;
  try {
    obj = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("provider response is not JSON: ") + e.what());
  }
  if (!obj.is_object() || !obj.contains("embeddings") || !obj["embeddings"].is_array()) {
    throw Error(ErrorCode::MalformedResponse, "provider response lacks an 'embeddings' array");
  }
  const json& arr = obj["embeddings"];
  if (arr.size() != expected) {
    throw Error(ErrorCode::MalformedResponse, "provider returned " + std::to_string(arr.size()) +
                                                  " embeddings for " + std::to_string(expected) + " texts");
  }
  std::vector<std::vector<double>> out;
  out.reserve(expected);
  for (const auto& row : arr) {
    if (!row.is_array() || row.empty()) {
      throw Error(ErrorCode::MalformedResponse, "embedding must be a non-empty array of numbers");
    }
    std::vector<double> v;
    v.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw Error(ErrorCode::MalformedResponse, "embedding entry is not a number");
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw Error(ErrorCode::MalformedResponse, "embedding entry is not finite");
      v.push_back(d);
    }
    if (!out.empty() && out.front().size() != v.size()) {
      throw Error(ErrorCode::DimensionDrift, "provider returned dimensions " +
                                                 std::to_string(out.front().size()) + " and " +
                                                 std::to_string(v.size()) + " in one batch");
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::vector<double>> post_batch(const ProviderConfig& provider, const Endpoint& endpoint,
                                            const std::vector<std::string>& texts, FetchStats* stats) {
  std::string body = json{{"model", provider.model}, {"texts", texts}}.dump();
  httplib::Headers headers;
  if (const char* token = std::getenv(provider.token_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const auto secs = static_cast<time_t>(provider.timeout_seconds);
  const auto usecs = static_cast<time_t>((provider.timeout_seconds - static_cast<double>(secs)) * 1e6);

  std::string last_problem;
  for (int attempt = 1; attempt <= provider.max_attempts; ++attempt) {
    if (attempt > 1) {
      const double wait = provider.backoff_base_seconds * std::pow(2.0, attempt - 2);
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    if (stats) ++stats->requests;
    auto res = client.Post(endpoint.path, headers, body, "application/json");
    if (!res) {
      last_problem = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_problem = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      throw Error(ErrorCode::ProviderUnavailable,
                  "provider rejected the request with status " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::MalformedResponse, "unexpected provider status " + std::to_string(res->status));
    }
    return parse_response(res->body, texts.size());
  }
  throw Error(ErrorCode::ProviderUnavailable, "provider unavailable after " +
                                                  std::to_string(provider.max_attempts) +
                                                  " attempts (" + last_problem + ")");
}

}  // namespace

void ProviderConfig::validate() const {
  if (url.empty()) throw Error(ErrorCode::InvalidConfig, "provider URL is empty");
  parse_endpoint(url);
  if (!(timeout_seconds > 0.0)) throw Error(ErrorCode::InvalidConfig, "provider timeout must be positive");
  if (max_in_flight < 1) throw Error(ErrorCode::InvalidConfig, "max_in_flight must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (max_attempts < 1) throw Error(ErrorCode::InvalidConfig, "max_attempts must be >= 1");
  if (!(backoff_base_seconds >= 0.0)) throw Error(ErrorCode::InvalidConfig, "backoff base must be >= 0");
}

std::string cache_key(std::string_view endpoint, std::string_view model, std::string_view text) {
  std::string material;
  for (std::string_view part : {endpoint, model, text}) {
    material += std::to_string(part.size());
    material += ':';
    material += part;
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

std::vector<std::vector<double>> fetch_embeddings(const ProviderConfig& provider,
                                                  std::span<const std::string> texts,
                                                  FetchStats* stats) {
  provider.validate();
  const Endpoint endpoint = parse_endpoint(provider.url);
  const bool caching = !provider.cache_dir.empty();
  if (caching) {
    std::error_code ec;
    std::filesystem::create_directories(provider.cache_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create cache directory '" + provider.cache_dir.string() + "'");
  }

  // Distinct texts in first-seen order.
  std::map<std::string, std::size_t, std::less<>> slot;
  std::vector<std::string> unique;
  for (const auto& t : texts) {
    if (slot.try_emplace(t, unique.size()).second) unique.push_back(t);
  }

  std::vector<std::vector<double>> vectors(unique.size());
  std::vector<std::string> keys(unique.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    keys[i] = cache_key(provider.url, provider.model, unique[i]);
    if (caching) {
      if (auto hit = read_cache(provider.cache_dir / (keys[i] + ".json"))) {
        vectors[i] = std::move(*hit);
        if (stats) ++stats->cache_hits;
        continue;
      }
    }
    missing.push_back(i);
  }

  const std::size_t batches = (missing.size() + provider.batch_size - 1) / provider.batch_size;
  parallel_for(batches, provider.max_in_flight, [&](std::size_t b) {
    const std::size_t begin = b * provider.batch_size;
    const std::size_t end = std::min(missing.size(), begin + provider.batch_size);
    std::vector<std::string> batch;
    for (std::size_t k = begin; k < end; ++k) batch.push_back(unique[missing[k]]);
    auto result = post_batch(provider, endpoint, batch, stats);
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i = missing[k];
      vectors[i] = std::move(result[k - begin]);
      if (caching) write_cache(provider.cache_dir / (keys[i] + ".json"), vectors[i]);
    }
  });

  for (const auto& v : vectors) {
    if (v.size() != vectors.front().size()) {
      throw Error(ErrorCode::DimensionDrift, "provider embeddings have inconsistent dimensions (" +
                                                 std::to_string(vectors.front().size()) + " vs " +
                                                 std::to_string(v.size()) + ")");
    }
  }

  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(vectors[slot.find(t)->second]);
  return out;
}

}  // namespace caprank
