#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace bnforge {

enum class ErrorCode {
  // term-store
  NonGroundAssertion,
  DepthLimitExceeded,
  // rule-engine
  MalformedRule,
  UnknownState,
  // belief-graph
  DuplicateNode,
  CycleCreated,
  StateMismatch,
  ConflictingEvidence,
  // dist-builder
  MissingDeclaration,
  CombinerError,
  NonBooleanChild,
  MultiplePFormsForFullTable,
  IncompleteTable,
  AsymmetricTransmission,
  OutOfRange,
  UnknownFunction,
  DivisionByZero,
  // inference-engine
  TooLarge,
  MaxRoundsExceeded,
  // rules-dsl
  ParseError,
  UnknownFormHead,
  UnboundLabel,
  // cli
  UnknownOption,
  UnknownCommand,
  IoError,
};

struct SourceLoc {
  int line = 0;
  int column = 0;
};

const char* error_code_name(ErrorCode c);

/// Module the code belongs to, e.g. "term-store"; used for CLI diagnostics.
const char* error_code_module(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  Error(ErrorCode code, std::string message, SourceLoc loc)
      : std::runtime_error(std::move(message)), code_(code), loc_(loc) {}

  ErrorCode code() const { return code_; }
  const std::optional<SourceLoc>& location() const { return loc_; }

  /// "module/CodeName", e.g. "term-store/NonGroundAssertion".
  std::string qualified_code() const;

 private:
  ErrorCode code_;
  std::optional<SourceLoc> loc_;
};

}  // namespace bnforge
