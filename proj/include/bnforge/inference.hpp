#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "bnforge/belief_graph.hpp"
#include "bnforge/declarations.hpp"
#include "bnforge/dist_builder.hpp"
#include "bnforge/rule_engine.hpp"

namespace bnforge {

/// Brute-force oracle: sums the full joint (product of CPT lookups, evidence
/// rows selected) with no factor machinery. Joint state count is bounded,
/// default 1e6; beyond it throws TooLarge. Empty targets = all nodes.
std::map<NodeId, std::vector<double>> enumerate_marginals(const BeliefGraph& g,
                                                          std::vector<NodeId> targets = {},
                                                          std::size_t bound = 1000000);

/// Exact posteriors by variable elimination, min-fill order with node-id tie
/// breaking. Empty targets = all nodes.
std::map<NodeId, std::vector<double>> variable_elimination(const BeliefGraph& g,
                                                           std::vector<NodeId> targets = {});

/// Exact posteriors for every node by junction-tree propagation
/// (moralize, min-fill triangulation, max-weight spanning tree,
/// Shafer-Shenoy two-pass). Handles forests of disconnected components.
std::map<NodeId, std::vector<double>> junction_tree_evaluate(const BeliefGraph& g);

/// Same, restricted to an ancestrally closed subset of the nodes.
std::map<NodeId, std::vector<double>> junction_tree_evaluate(const BeliefGraph& g,
                                                             const std::set<NodeId>& subset);

struct SessionOptions {
  double tau_accept = 0.99;
  double tau_reject = 0.01;
  int commit_delay_rounds = 2;
  int max_rounds = 100;
  std::size_t depth_limit = 64;

  /// tau_reject sits in [0, tau_accept); tau_accept above 1 switches
  /// acceptance off. Bad combinations throw OutOfRange.
  void validate() const;
};

struct CommitEvent {
  NodeId node = kNoNode;
  Term statement;
  std::size_t state = 0;
  std::string state_name;
  bool rejected = false;
  int round = 0;
};

struct RunResult {
  std::map<NodeId, std::vector<double>> marginals;
  std::vector<CommitEvent> commits;
  int rounds = 0;
};

/// The construct-evaluate-commit loop plus incremental re-evaluation. Holds
/// the marginal cache: evaluate_affected refreshes exactly the d-connected
/// region of a change and leaves the rest untouched.
class Session {
 public:
  Session(Database& db, BeliefGraph& graph, DeclarationTable& decls, RuleEngine& engine,
          const FunctionRegistry& fns);

  SessionOptions& options() { return opts_; }
  const SessionOptions& options() const { return opts_; }
  void set_option(const std::string& name, const std::string& value);

  void rebuild_cpts();

  /// Full-graph evaluation; replaces the cache.
  std::map<NodeId, std::vector<double>> evaluate_all();

  /// Evaluates the subgraph that the changed nodes can influence:
  /// A = d_connected(changed, evidence minus changed), evaluated over the
  /// ancestral closure of A plus evidence, reported (and cached) for A only.
  std::map<NodeId, std::vector<double>> evaluate_affected(const std::set<NodeId>& changed);

  /// Asserts one fact and fires rules to quiescence, including re-running
  /// pending combined-rule retrievals; no evaluation happens.
  Effect assert_and_fire(const Term& input);

  /// Re-runs pending combined-rule retrievals until nothing new fires.
  Effect construction_fixpoint();

  /// Per input: assert, fire to quiescence, evaluate affected, apply the
  /// commit policy, and repeat evaluation while commitments keep changing
  /// the graph. Throws MaxRoundsExceeded past options().max_rounds.
  RunResult run_loop(const std::vector<Term>& inputs);

  std::set<NodeId> changed_from(const Effect& eff) const;

  const std::map<NodeId, std::vector<double>>& cached_marginals() const { return cache_; }
  const std::vector<CommitEvent>& commit_log() const { return log_; }
  std::vector<std::string>& warnings() { return warnings_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  bool apply_commit_policy(const std::map<NodeId, std::vector<double>>& fresh, int round,
                           std::set<NodeId>& changed_out);

  Database& db_;
  BeliefGraph& graph_;
  DeclarationTable& decls_;
  RuleEngine& engine_;
  const FunctionRegistry& fns_;
  SessionOptions opts_;
  std::map<NodeId, std::vector<double>> cache_;
  std::map<NodeId, int> accept_age_;
  std::vector<CommitEvent> log_;
  std::vector<std::string> warnings_;
};

}  // namespace bnforge
