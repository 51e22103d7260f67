#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "bnforge/term.hpp"

namespace bnforge {

using StatementId = std::uint32_t;

struct Statement {
  StatementId id = 0;
  Term term;
  /// True once the statement has a belief-network node. Indexed-only
  /// statements and plain relational facts stay false.
  bool network_linked = false;
  /// Entered via index (never triggers rules, may be non-ground).
  bool indexed_only = false;
};

struct StoredMatch {
  const Statement* stmt;
  Substitution subst;
};

/// First-order logic database. Statements are discriminated by
/// (functor, arity); within a bucket, order is assertion order, which makes
/// retrieval deterministic. Structural identity: at most one statement per
/// distinct term, for asserted and indexed entries alike.
class Database {
 public:
  /// Ground assertion. Returns the statement plus whether it is new;
  /// re-assertion is a no-op that returns the existing handle.
  std::pair<const Statement*, bool> assert_ground(const Term& t);

  /// Adds a statement (possibly a non-ground pattern) without linking it
  /// into any belief network. Idempotent.
  StatementId index_pattern(const Term& t);

  /// Stored-statement unification only; backward rules live in the
  /// rule engine. Results in assertion order.
  std::vector<StoredMatch> match(const Term& pattern) const;

  const Statement* find(const Term& t) const;
  const Statement& at(StatementId id) const { return stored_.at(id); }
  Statement& at_mutable(StatementId id) { return stored_.at(id); }
  std::size_t size() const { return stored_.size(); }
  const std::vector<Statement>& statements() const { return stored_; }

 private:
  StatementId insert(const Term& t, bool indexed_only);

  std::vector<Statement> stored_;
  std::unordered_map<Term, StatementId, TermHash> by_term_;
  std::map<std::pair<std::string, int>, std::vector<StatementId>> buckets_;
};

}  // namespace bnforge
