#include "caprank/error.hpp"

namespace caprank {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::InvalidOverride: return "InvalidOverride";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyCaption: return "EmptyCaption";
    case ErrorCode::NoSentences: return "NoSentences";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFew: return "TooFew";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingEmbeddings: return "MissingEmbeddings";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::DimensionDrift: return "DimensionDrift";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace caprank
