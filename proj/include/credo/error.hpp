#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace credo {

enum class ErrorCode {
  Syntax,
  UnknownAtom,
  DuplicateAtom,
  MissingAtom,
  CapExceeded,
  Unrenderable,
  NormalizationViolation,
  UnscriptedContext,
  Network,
  Timeout,
  NonResponsive,
  InvalidLexicon,
  MissingProbe,
  UndefinedCredence,
  NotAPartition,
  NoEntailment,
  MismatchedFormulaSets,
  DimensionMismatch,
  NonConvergence,
  InconsistentTruth,
  MissingValue,
  EmptyInput,
  InvalidArgument,
  Io,
  Format,
};

std::string_view to_string(ErrorCode code);
// Inverse of to_string; unknown names map to Format.
ErrorCode error_code_from_string(std::string_view name);

// Base of every exception thrown by the library. `code()` is stable and is
// what callers branch on; `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& message);

  // Byte offset into the parsed text.
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace credo
