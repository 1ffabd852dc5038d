#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace caprank {

enum class ErrorCode {
  EmptyInput,
  DimensionMismatch,
  NonFiniteEntry,
  DuplicateId,
  NumericalFailure,
  InvalidOverride,
  InvalidConfig,
  IndexOutOfRange,
  EmptyCaption,
  NoSentences,
  MissingLabels,
  EmptyCorpus,
  LengthMismatch,
  TooFew,
  ParseError,
  MissingEmbeddings,
  ProviderUnavailable,
  MalformedResponse,
  DimensionDrift,
  IoError,
};

/// Stable name of an error class, used in output records and the CLI.
std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace caprank
