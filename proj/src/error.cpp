#include "credo/error.hpp"

namespace credo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "syntax-error";
    case ErrorCode::UnknownAtom: return "unknown-atom";
    case ErrorCode::DuplicateAtom: return "duplicate-atom";
    case ErrorCode::MissingAtom: return "missing-atom";
    case ErrorCode::CapExceeded: return "cap-exceeded";
    case ErrorCode::Unrenderable: return "unrenderable-formula";
    case ErrorCode::NormalizationViolation: return "normalization-violation";
    case ErrorCode::UnscriptedContext: return "unscripted-context";
    case ErrorCode::Network: return "network-error";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::NonResponsive: return "non-responsive";
    case ErrorCode::InvalidLexicon: return "invalid-lexicon";
    case ErrorCode::MissingProbe: return "missing-probe";
    case ErrorCode::UndefinedCredence: return "undefined-credence";
    case ErrorCode::NotAPartition: return "not-a-partition";
    case ErrorCode::NoEntailment: return "no-entailment";
    case ErrorCode::MismatchedFormulaSets: return "mismatched-formula-sets";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::InconsistentTruth: return "inconsistent-truth-assignment";
    case ErrorCode::MissingValue: return "missing-value";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Io: return "io-error";
    case ErrorCode::Format: return "format-error";
  }
  return "unknown-error";
}

ErrorCode error_code_from_string(std::string_view name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::Format); ++c)
    if (to_string(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  return ErrorCode::Format;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

SyntaxError::SyntaxError(std::size_t offset, const std::string& message)
    : Error(ErrorCode::Syntax, message + " at offset " + std::to_string(offset)), offset_(offset) {}

}  // namespace credo
