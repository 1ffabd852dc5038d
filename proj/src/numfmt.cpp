#include "caprank/numfmt.hpp"

#include "json.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace caprank {

std::string format_double(double value) {
  if (value == 0.0 && std::signbit(value)) return "-0.0";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string json_quote(std::string_view text) {
  return nlohmann::json(std::string(text)).dump();
}

void JsonLine::key(std::string_view k) {
  if (body_.size() > 1) body_ += ',';
  body_ += json_quote(k);
  body_ += ':';
}

JsonLine& JsonLine::field(std::string_view k, std::string_view value) {
  key(k);
  body_ += json_quote(value);
  return *this;
}

JsonLine& JsonLine::field(std::string_view k, double value) {
  key(k);
  body_ += std::isfinite(value) ? format_double(value) : "null";
  return *this;
}

JsonLine& JsonLine::field(std::string_view k, long long value) {
  key(k);
  body_ += std::to_string(value);
  return *this;
}

JsonLine& JsonLine::field(std::string_view k, unsigned long long value) {
  key(k);
  body_ += std::to_string(value);
  return *this;
}

JsonLine& JsonLine::field(std::string_view k, bool value) {
  key(k);
  body_ += value ? "true" : "false";
  return *this;
}

JsonLine& JsonLine::null_field(std::string_view k) {
  key(k);
  body_ += "null";
  return *this;
}

JsonLine& JsonLine::raw_field(std::string_view k, std::string_view json) {
  key(k);
  body_ += json;
  return *this;
}

}  // namespace caprank
