#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace caprank {

/// External sentence-embedding service.
///
/// Wire contract: HTTP POST to `url` with body {"model": ..., "texts": [...]},
/// answered by {"embeddings": [[...], ...]} in request order. Status >= 500
/// and transport errors are retried with exponential backoff; 4xx is fatal.
/// If the environment variable named by `token_env` is set, its value goes
/// out as "Authorization: Bearer <token>". The token is never logged or
/// cached.
struct ProviderConfig {
  std::string url;
  std::string model;
  double timeout_seconds = 30.0;
  std::size_t max_in_flight = 8;
  std::size_t batch_size = 16;
  int max_attempts = 3;
  double backoff_base_seconds = 0.2;
  /// Empty disables the on-disk cache.
  std::filesystem::path cache_dir;
  std::string token_env = "CAPRANK_PROVIDER_TOKEN";

  /// Throws InvalidConfig.
  void validate() const;
};

struct FetchStats {
  std::atomic<std::size_t> requests{0};    // HTTP attempts, including retries
  std::atomic<std::size_t> cache_hits{0};  // distinct texts served from disk
};

/// Hex SHA-256 over (endpoint, model, text), length-prefixed.
std::string cache_key(std::string_view endpoint, std::string_view model, std::string_view text);

/// One vector per input text, all of one dimension. Identical texts are
/// fetched once. Safe to call concurrently; cache files are written to a
/// temporary name and renamed into place.
///
/// Throws ProviderUnavailable, MalformedResponse, DimensionDrift,
/// InvalidConfig.
std::vector<std::vector<double>> fetch_embeddings(const ProviderConfig& provider,
                                                  std::span<const std::string> texts,
                                                  FetchStats* stats = nullptr);

}  // namespace caprank
