#pragma once

#include <string>
#include <string_view>

namespace caprank {

/// Shortest decimal that parses back to the same double. Negative zero is
/// written "-0.0" so JSON readers keep it a float. Not for NaN or infinity.
std::string format_double(double value);

/// JSON string literal with escapes, including the quotes.
std::string json_quote(std::string_view text);

/// Builds one JSON object in insertion order, e.g. for line-delimited output.
class JsonLine {
 public:
  JsonLine& field(std::string_view key, std::string_view value);
  JsonLine& field(std::string_view key, const char* value) { return field(key, std::string_view(value)); }
  JsonLine& field(std::string_view key, double value);
  JsonLine& field(std::string_view key, long long value);
  JsonLine& field(std::string_view key, unsigned long long value);
  JsonLine& field(std::string_view key, std::size_t value) {
    return field(key, static_cast<unsigned long long>(value));
  }
  JsonLine& field(std::string_view key, int value) { return field(key, static_cast<long long>(value)); }
  JsonLine& field(std::string_view key, bool value);
  JsonLine& null_field(std::string_view key);
  /// `json` must already be valid JSON.
  JsonLine& raw_field(std::string_view key, std::string_view json);

  std::string str() const { return body_ + "}"; }

 private:
  void key(std::string_view k);
  std::string body_ = "{";
};

}  // namespace caprank
