#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bnforge/database.hpp"
#include "bnforge/term.hpp"

namespace bnforge {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

/// One conditional entry: P(child=child_state | parents=parent_states) =
/// expr. States are indices into the owning nodes' state spaces; expr stays
/// symbolic until CPT build.
struct PFormEntry {
  std::size_t child_state = 0;
  std::vector<std::size_t> parent_states;
  Term expr;
};

/// A hyperedge from a set of parent nodes into one child node.
struct PForm {
  std::vector<NodeId> parents;
  NodeId child = kNoNode;
  std::vector<std::size_t> active_states;  // per parent; "satisfied" assignment
  std::vector<PFormEntry> entries;
};

bool same_pform(const PForm& a, const PForm& b);

struct Node {
  NodeId id = kNoNode;
  StatementId stmt = 0;
  Term term;
  std::string predicate;
  std::vector<std::string> states;
  std::optional<std::size_t> evidence;   // observed state
  std::optional<std::size_t> committed;  // accepted state (also observed)
  std::vector<NodeId> parents;           // union of pform parents, attach order
  std::vector<NodeId> children;
  std::vector<PForm> pforms;
  // CPT over (parents, states): row per parent assignment with the first
  // parent varying slowest; each row holds one value per child state.
  std::vector<double> cpt;
  bool cpt_dirty = true;

  std::size_t arity() const { return states.size(); }
  std::optional<std::size_t> state_index(const std::string& name) const;
  bool is_root() const { return parents.empty(); }
};

/// The belief network: a DAG over statement-backed random variables, built
/// incrementally by attaching pform hyperedges. Every mutation preserves
/// acyclicity or throws and leaves the graph unchanged.
class BeliefGraph {
 public:
  NodeId add_node(const Statement& s, std::vector<std::string> states);
  bool has_node(StatementId stmt) const { return by_stmt_.count(stmt) != 0; }
  NodeId node_for(StatementId stmt) const;
  Node& at(NodeId id);
  const Node& at(NodeId id) const;

  /// Resolves state names to indices against the member nodes.
  /// Throws StateMismatch for a name outside the node's space.
  PForm resolve_pform(NodeId child, const std::vector<NodeId>& parents,
                      const std::vector<std::string>& active_states,
                      const std::vector<std::pair<std::string, std::vector<std::string>>>& entry_states,
                      const std::vector<Term>& entry_exprs) const;

  /// Returns false (and does nothing) when a structurally identical pform is
  /// already attached. Throws CycleCreated before mutating anything.
  bool attach_pform(const PForm& pf);

  void add_evidence(NodeId id, const std::string& state);
  void add_evidence(NodeId id, std::size_t state);
  void commit(NodeId id, std::size_t state);

  /// Bayes-ball reachability: every node an active path can reach from
  /// `sources` given `observed`. Sources are always included; an observed
  /// node entered by the ball is included (it bounces, never passes).
  std::set<NodeId> d_connected_set(const std::set<NodeId>& sources,
                                   const std::set<NodeId>& observed) const;

  std::set<NodeId> ancestral_closure(const std::set<NodeId>& seed) const;
  std::set<NodeId> descendants_of(NodeId id) const;  // excludes id
  std::vector<NodeId> topo_order() const;            // deterministic (id tiebreak)

  /// Deletes the nodes and every pform that references them; adjacency is
  /// rebuilt and affected children marked for CPT rebuild.
  void remove_nodes(const std::set<NodeId>& victims);

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  std::string to_dot() const;

 private:
  bool reaches(NodeId from, NodeId to) const;  // along child edges
  void add_arcs_for(const PForm& pf);

  std::map<NodeId, Node> nodes_;
  std::map<StatementId, NodeId> by_stmt_;
  NodeId next_id_ = 0;
};

}  // namespace bnforge
