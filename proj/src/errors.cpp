#include "bnforge/errors.hpp"

namespace bnforge {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonGroundAssertion: return "NonGroundAssertion";
    case ErrorCode::DepthLimitExceeded: return "DepthLimitExceeded";
    case ErrorCode::MalformedRule: return "MalformedRule";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::CycleCreated: return "CycleCreated";
    case ErrorCode::StateMismatch: return "StateMismatch";
    case ErrorCode::ConflictingEvidence: return "ConflictingEvidence";
    case ErrorCode::MissingDeclaration: return "MissingDeclaration";
    case ErrorCode::CombinerError: return "CombinerError";
    case ErrorCode::NonBooleanChild: return "NonBooleanChild";
    case ErrorCode::MultiplePFormsForFullTable: return "MultiplePFormsForFullTable";
    case ErrorCode::IncompleteTable: return "IncompleteTable";
    case ErrorCode::AsymmetricTransmission: return "AsymmetricTransmission";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::MaxRoundsExceeded: return "MaxRoundsExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownFormHead: return "UnknownFormHead";
    case ErrorCode::UnboundLabel: return "UnboundLabel";
    case ErrorCode::UnknownOption: return "UnknownOption";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

const char* error_code_module(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonGroundAssertion:
    case ErrorCode::DepthLimitExceeded:
      return "term-store";
    case ErrorCode::MalformedRule:
    case ErrorCode::UnknownState:
      return "rule-engine";
    case ErrorCode::DuplicateNode:
    case ErrorCode::CycleCreated:
    case ErrorCode::StateMismatch:
    case ErrorCode::ConflictingEvidence:
      return "belief-graph";
    case ErrorCode::MissingDeclaration:
    case ErrorCode::CombinerError:
    case ErrorCode::NonBooleanChild:
    case ErrorCode::MultiplePFormsForFullTable:
    case ErrorCode::IncompleteTable:
    case ErrorCode::AsymmetricTransmission:
    case ErrorCode::OutOfRange:
    case ErrorCode::UnknownFunction:
    case ErrorCode::DivisionByZero:
      return "dist-builder";
    case ErrorCode::TooLarge:
    case ErrorCode::MaxRoundsExceeded:
      return "inference-engine";
    case ErrorCode::ParseError:
    case ErrorCode::UnknownFormHead:
    case ErrorCode::UnboundLabel:
      return "rules-dsl";
    case ErrorCode::UnknownOption:
    case ErrorCode::UnknownCommand:
    case ErrorCode::IoError:
      return "cli";
  }
  return "bnforge";
}

std::string Error::qualified_code() const {
  return std::string(error_code_module(code_)) + "/" + error_code_name(code_);
}

}  // namespace bnforge
