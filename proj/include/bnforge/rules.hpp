#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bnforge/term.hpp"

namespace bnforge {

enum class RuleMode { Forward, Backward, Combined };

/// A statement pattern with an optional ":label ?VAR" naming the statement
/// it matches or asserts. Label variables bind to statement handles at fire
/// time so pforms can reference nodes.
struct LabeledPattern {
  Term pattern;
  std::optional<std::string> label;
};

struct EntryTemplate {
  std::string child_state;
  std::vector<std::string> parent_states;
  Term expr;  // number, :p, or a closed expression; variables substituted at fire time
};

struct PFormTemplate {
  std::vector<std::string> parent_labels;
  std::string child_label;
  std::vector<std::string> active_states;  // empty: default (state 0 of each parent)
  std::vector<EntryTemplate> entries;
};

struct Rule {
  RuleMode mode = RuleMode::Forward;
  // Forward / Combined
  LabeledPattern trigger;
  std::vector<LabeledPattern> antecedents;  // Combined only (conjunction)
  std::vector<LabeledPattern> consequents;  // conjunction, asserted in order
  std::vector<PFormTemplate> pforms;
  // Backward
  Term head;
  std::vector<Term> body;
};

/// Checks the structural invariants: pform labels declared, backward rules
/// without pforms, entry vector lengths. Throws MalformedRule.
void validate_rule(const Rule& r);

struct Fact {
  Term term;
};
struct IndexForm {
  Term pattern;
};
struct FnSpec {
  std::string name;
  std::vector<Term> args;
};
struct DistDeclaration {
  std::string predicate;
  std::optional<FnSpec> prior;
  std::optional<FnSpec> posterior;
};
struct StatesDeclaration {
  std::string predicate;
  std::vector<std::string> states;
};
struct AssertActionBinding {
  std::string predicate;
  std::string action;
};
struct PriorParam {
  std::string name;
  double value = 0.0;
};

using RulesetItem = std::variant<Rule, Fact, DistDeclaration, StatesDeclaration,
                                 IndexForm, AssertActionBinding, PriorParam>;

}  // namespace bnforge
