#include "bnforge/database.hpp"

#include "bnforge/errors.hpp"

namespace bnforge {

StatementId Database::insert(const Term& t, bool indexed_only) {
  StatementId id = static_cast<StatementId>(stored_.size());
  stored_.push_back(Statement{id, t, false, indexed_only});
  by_term_.emplace(t, id);
  buckets_[t.predicate_key()].push_back(id);
  return id;
}

std::pair<const Statement*, bool> Database::assert_ground(const Term& t) {
  if (!t.is_ground())
    throw Error(ErrorCode::NonGroundAssertion,
                "cannot assert non-ground statement " + t.text());
  auto it = by_term_.find(t);
  if (it != by_term_.end()) return {&stored_[it->second], false};
  StatementId id = insert(t, false);
  return {&stored_[id], true};
}

StatementId Database::index_pattern(const Term& t) {
  auto it = by_term_.find(t);
  if (it != by_term_.end()) return it->second;
  return insert(t, true);
}

const Statement* Database::find(const Term& t) const {
  auto it = by_term_.find(t);
  return it == by_term_.end() ? nullptr : &stored_[it->second];
}

std::vector<StoredMatch> Database::match(const Term& pattern) const {
  std::vector<StoredMatch> out;
  auto try_stmt = [&](const Statement& s) {
    Term candidate = s.term;
    if (!candidate.is_ground()) candidate = standardize_apart(candidate);
    if (auto sub = unify(pattern, candidate)) out.push_back({&s, std::move(*sub)});
  };
  if (pattern.is_variable()) {
    for (const Statement& s : stored_) try_stmt(s);
    return out;
  }
  auto it = buckets_.find(pattern.predicate_key());
  if (it == buckets_.end()) return out;
  for (StatementId id : it->second) try_stmt(stored_[id]);
  return out;
}

}  // namespace bnforge
