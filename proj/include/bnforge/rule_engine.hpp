#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bnforge/belief_graph.hpp"
#include "bnforge/database.hpp"
#include "bnforge/declarations.hpp"
#include "bnforge/rules.hpp"

namespace bnforge {

/// What one assertion (or rule load, or construction round) did to the
/// database and graph. The inference loop turns this into its changed set.
struct Effect {
  std::vector<StatementId> new_statements;
  std::vector<NodeId> new_nodes;
  std::vector<NodeId> touched_nodes;  // gained a pform or had a CPT invalidated
  std::vector<NodeId> new_evidence;

  bool any() const {
    return !new_statements.empty() || !new_nodes.empty() || !touched_nodes.empty() ||
           !new_evidence.empty();
  }
  void merge(const Effect& o);
};

/// Executes the three rule modes against the database and belief graph.
/// Forward/combined rules fire on newly asserted statements through a FIFO
/// agenda (breadth-first); a statement fires each rule at most once per
/// trigger binding. Combined-mode retrieval re-runs in construction rounds,
/// firing only answers not seen before.
class RuleEngine {
 public:
  RuleEngine(Database& db, BeliefGraph& graph, DeclarationTable& decls);

  void set_depth_limit(std::size_t n) { depth_limit_ = n; }
  std::size_t depth_limit() const { return depth_limit_; }

  /// Registers the rule and retro-fires it against statements already
  /// asserted, so rule-load order and fact order commute.
  std::size_t load_rule(Rule r, Effect* eff = nullptr);

  /// Asserts a ground term, dispatching assert-actions and firing rules to
  /// quiescence. Re-assertion of an existing statement is a silent no-op.
  Effect assert_fact(const Term& ground);

  /// Applies one parsed ruleset item (rule, fact, declaration, index form).
  Effect apply_item(const RulesetItem& item);

  void index_statement(const Term& pattern);

  /// SLD resolution over backward rules plus stored statements; answers are
  /// deduplicated projections onto the pattern's variables, in assertion
  /// order. Throws DepthLimitExceeded past the configured bound.
  std::vector<Substitution> answer_query(const Term& pattern) const;

  /// Runs the assert-action registered for the term's predicate instead of
  /// asserting it. Built-in: instantiate-observation.
  Effect run_assert_action(const Term& s);

  /// Re-runs every combined rule's retrieval against the current database,
  /// firing answers not fired before. Returns the accumulated effects.
  Effect construction_round();

  const std::vector<Rule>& rules() const { return rules_; }
  std::vector<std::string>& warnings() { return warnings_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct GoalAnswer {
    Substitution subst;
    std::optional<StatementId> source;  // stored statement, if not rule-derived
  };
  struct ConjAnswer {
    Substitution subst;
    std::vector<std::optional<StatementId>> sources;
  };
  /// A rule instantiated for one firing: variables standardized apart.
  struct FreshRule {
    LabeledPattern trigger;
    std::vector<LabeledPattern> antecedents;
    std::vector<LabeledPattern> consequents;
    std::vector<PFormTemplate> pforms;
  };

  Effect drain();
  void fire_all_for(const Statement& s, Effect& eff);
  void fire_one(std::size_t rule_ix, const Statement& s, Effect& eff);
  void fire_combined(std::size_t rule_ix, const Statement& trigger, Effect& eff);
  void apply_firing(const FreshRule& fr, Substitution sigma,
                    std::map<std::string, StatementId> labels, Effect& eff);
  const Statement* assert_internal(const Term& t, Effect& eff);
  Effect dispatch_action(const std::string& action, const Term& s);
  NodeId ensure_node(const Statement& s, Effect& eff);
  bool rejected(StatementId stmt) const;  // node committed to boolean false
  FreshRule freshen(const Rule& r) const;

  std::vector<GoalAnswer> solve_goal(const Term& goal, std::size_t depth) const;
  std::vector<ConjAnswer> solve_goals(const std::vector<Term>& goals, const Substitution& seed,
                                      std::size_t depth) const;

  Database& db_;
  BeliefGraph& graph_;
  DeclarationTable& decls_;
  std::vector<Rule> rules_;
  std::set<std::pair<std::size_t, StatementId>> fired_;
  std::vector<std::pair<std::size_t, StatementId>> combined_triggers_;
  std::set<std::string> combined_done_;  // rule index + trigger + answer key
  std::deque<StatementId> agenda_;
  std::size_t depth_limit_ = 64;
  mutable std::vector<std::string> warnings_;
};

}  // namespace bnforge
