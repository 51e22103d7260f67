#pragma once

#include <string>
#include <vector>

#include "bnforge/rules.hpp"

namespace bnforge {

/// Parses ruleset text into items. Throws Error(ParseError) with the source
/// location of the offending token, or UnknownFormHead for a top-level list
/// whose head is no known form and which is not a ground fact.
std::vector<RulesetItem> parse_ruleset(const std::string& text);

/// Canonical text form. parse(serialize(parse(x))) == parse(x); serializing
/// the re-parse reproduces the same text, so round-trip tests compare text.
std::string serialize(const std::vector<RulesetItem>& items);
std::string serialize(const RulesetItem& item);

/// Parses exactly one form into a term (variables permitted).
Term parse_term(const std::string& text);

/// Parses every top-level form into a term.
std::vector<Term> parse_terms(const std::string& text);

}  // namespace bnforge
