#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bnforge/errors.hpp"

namespace bnforge {

/// Raw parenthesized form as read from a .bnr file. Atoms carry their
/// classification; lists carry their elements. Every node remembers where
/// it started, so later passes can report located errors.
struct SExpr {
  enum class Kind { Symbol, Number, String, List };

  Kind kind = Kind::List;
  std::string text;          // Symbol name / String contents
  double number = 0.0;       // Number value
  std::vector<SExpr> items;  // List elements
  SourceLoc loc;

  bool is_symbol() const { return kind == Kind::Symbol; }
  bool is_symbol(std::string_view name) const {
    return kind == Kind::Symbol && text == name;
  }
  bool is_number() const { return kind == Kind::Number; }
  bool is_list() const { return kind == Kind::List; }

  /// Head symbol of a list, or "" when not a symbol-headed list.
  std::string_view head() const {
    if (kind != Kind::List || items.empty()) return {};
    if (items[0].kind != Kind::Symbol) return {};
    return items[0].text;
  }
};

/// Reads every top-level form. '|' is a standalone token; ';' starts a line
/// comment. Throws ParseError with location on malformed input.
std::vector<SExpr> read_forms(std::string_view text);

}  // namespace bnforge
