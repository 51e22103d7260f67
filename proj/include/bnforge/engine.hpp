#pragma once

#include <string>
#include <vector>

#include "bnforge/belief_graph.hpp"
#include "bnforge/database.hpp"
#include "bnforge/declarations.hpp"
#include "bnforge/dist_builder.hpp"
#include "bnforge/inference.hpp"
#include "bnforge/parser.hpp"
#include "bnforge/rule_engine.hpp"

namespace bnforge {

/// Everything wired together: the term database, belief graph, declaration
/// table, rule engine, scalar-function registry, and evaluation session.
class Engine {
 public:
  Engine();
  // The rule engine and session hold references into this object.
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  Database& database() { return db_; }
  BeliefGraph& graph() { return graph_; }
  const BeliefGraph& graph() const { return graph_; }
  DeclarationTable& declarations() { return decls_; }
  FunctionRegistry& functions() { return fns_; }
  RuleEngine& rules() { return engine_; }
  Session& session() { return session_; }

  /// Parses the entire text before applying anything, so a parse error
  /// loads nothing. Afterwards fires rules to quiescence.
  Effect load_ruleset_text(const std::string& text);
  Effect load_ruleset_file(const std::string& path);

  /// Asserts one ground fact and fires rules to quiescence (no evaluation).
  Effect assert_fact(const Term& fact);

  /// Structured dump of the network plus freshly evaluated marginals.
  std::string export_json();

  std::string export_dot() const { return graph_.to_dot(); }

  /// Collected non-fatal diagnostics from the engine and session, cleared
  /// on read.
  std::vector<std::string> drain_warnings();

 private:
  Database db_;
  DeclarationTable decls_;
  BeliefGraph graph_;
  FunctionRegistry fns_;
  RuleEngine engine_;
  Session session_;
};

}  // namespace bnforge
