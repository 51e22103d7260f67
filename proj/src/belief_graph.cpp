#include "bnforge/belief_graph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "bnforge/errors.hpp"

namespace bnforge {

std::optional<std::size_t> Node::state_index(const std::string& name) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == name) return i;
  return std::nullopt;
}

bool same_pform(const PForm& a, const PForm& b) {
  if (a.child != b.child || a.parents != b.parents || a.active_states != b.active_states)
    return false;
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const PFormEntry& x = a.entries[i];
    const PFormEntry& y = b.entries[i];
    if (x.child_state != y.child_state || x.parent_states != y.parent_states ||
        !(x.expr == y.expr))
      return false;
  }
  return true;
}

NodeId BeliefGraph::add_node(const Statement& s, std::vector<std::string> states) {
  if (by_stmt_.count(s.id))
    throw Error(ErrorCode::DuplicateNode, "statement already has a node: " + s.term.text());
  if (states.size() < 2)
    throw Error(ErrorCode::StateMismatch, "node needs at least two states: " + s.term.text());
  NodeId id = next_id_++;
  Node n;
  n.id = id;
  n.stmt = s.id;
  n.term = s.term;
  n.predicate = s.term.predicate();
  n.states = std::move(states);
  by_stmt_[s.id] = id;
  nodes_.emplace(id, std::move(n));
  return id;
}

NodeId BeliefGraph::node_for(StatementId stmt) const {
  auto it = by_stmt_.find(stmt);
  return it == by_stmt_.end() ? kNoNode : it->second;
}

Node& BeliefGraph::at(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::StateMismatch, "no such node id");
  return it->second;
}

const Node& BeliefGraph::at(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::StateMismatch, "no such node id");
  return it->second;
}

PForm BeliefGraph::resolve_pform(
    NodeId child, const std::vector<NodeId>& parents,
    const std::vector<std::string>& active_states,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& entry_states,
    const std::vector<Term>& entry_exprs) const {
  const Node& c = at(child);
  PForm pf;
  pf.child = child;
  pf.parents = parents;

  auto resolve = [](const Node& n, const std::string& name) -> std::size_t {
    auto ix = n.state_index(name);
    if (!ix)
      throw Error(ErrorCode::StateMismatch,
                  "state '" + name + "' not in the space of " + n.term.text());
    return *ix;
  };

  if (active_states.empty()) {
    pf.active_states.assign(parents.size(), 0);  // default: first state of each parent
  } else {
    if (active_states.size() != parents.size())
      throw Error(ErrorCode::StateMismatch, ":active list length does not match parents");
    for (std::size_t i = 0; i < parents.size(); ++i)
      pf.active_states.push_back(resolve(at(parents[i]), active_states[i]));
  }

  for (std::size_t e = 0; e < entry_states.size(); ++e) {
    const auto& [child_state, parent_states] = entry_states[e];
    PFormEntry pe;
    pe.child_state = resolve(c, child_state);
    if (parent_states.size() != parents.size())
      throw Error(ErrorCode::StateMismatch, "entry parent-state count does not match parents");
    for (std::size_t i = 0; i < parents.size(); ++i)
      pe.parent_states.push_back(resolve(at(parents[i]), parent_states[i]));
    pe.expr = entry_exprs.at(e);
    pf.entries.push_back(std::move(pe));
  }
  return pf;
}

bool BeliefGraph::reaches(NodeId from, NodeId to) const {
  if (from == to) return true;
  std::deque<NodeId> queue{from};
  std::set<NodeId> seen{from};
  while (!queue.empty()) {
    NodeId x = queue.front();
    queue.pop_front();
    for (NodeId c : at(x).children) {
      if (c == to) return true;
      if (seen.insert(c).second) queue.push_back(c);
    }
  }
  return false;
}

void BeliefGraph::add_arcs_for(const PForm& pf) {
  Node& c = at(pf.child);
  for (NodeId p : pf.parents) {
    if (std::find(c.parents.begin(), c.parents.end(), p) == c.parents.end())
      c.parents.push_back(p);
    Node& pn = at(p);
    if (std::find(pn.children.begin(), pn.children.end(), pf.child) == pn.children.end())
      pn.children.push_back(pf.child);
  }
}

bool BeliefGraph::attach_pform(const PForm& pf) {
  Node& c = at(pf.child);
  if (pf.active_states.size() != pf.parents.size())
    throw Error(ErrorCode::StateMismatch, "pform active-state vector length mismatch");
  for (std::size_t i = 0; i < pf.parents.size(); ++i) {
    const Node& pn = at(pf.parents[i]);
    if (pf.active_states[i] >= pn.arity())
      throw Error(ErrorCode::StateMismatch, "active state out of range for " + pn.term.text());
  }
  std::set<std::pair<std::size_t, std::vector<std::size_t>>> seen_entries;
  for (const PFormEntry& e : pf.entries) {
    if (e.child_state >= c.arity())
      throw Error(ErrorCode::StateMismatch, "entry child state out of range for " + c.term.text());
    if (e.parent_states.size() != pf.parents.size())
      throw Error(ErrorCode::StateMismatch, "entry parent-state vector length mismatch");
    for (std::size_t i = 0; i < pf.parents.size(); ++i)
      if (e.parent_states[i] >= at(pf.parents[i]).arity())
        throw Error(ErrorCode::StateMismatch, "entry parent state out of range");
    if (!seen_entries.emplace(e.child_state, e.parent_states).second)
      throw Error(ErrorCode::StateMismatch,
                  "duplicate entry for one conditioning case in a pform into " + c.term.text());
  }
  for (const PForm& existing : c.pforms)
    if (same_pform(existing, pf)) return false;

  // Cycle test before any mutation: a new arc p -> child closes a cycle iff
  // the child already reaches p along existing arcs (or p is the child).
  for (NodeId p : pf.parents)
    if (reaches(pf.child, p))
      throw Error(ErrorCode::CycleCreated,
                  "pform into " + c.term.text() + " would create a directed cycle");

  c.pforms.push_back(pf);
  add_arcs_for(pf);
  c.cpt_dirty = true;
  return true;
}

void BeliefGraph::add_evidence(NodeId id, const std::string& state) {
  const Node& n = at(id);
  auto ix = n.state_index(state);
  if (!ix)
    throw Error(ErrorCode::UnknownState,
                "state '" + state + "' not in the space of " + n.term.text());
  add_evidence(id, *ix);
}

void BeliefGraph::add_evidence(NodeId id, std::size_t state) {
  Node& n = at(id);
  if (state >= n.arity()) throw Error(ErrorCode::UnknownState, "state index out of range");
  if (n.evidence && *n.evidence != state)
    throw Error(ErrorCode::ConflictingEvidence,
                n.term.text() + " already observed at " + n.states[*n.evidence]);
  n.evidence = state;
}

void BeliefGraph::commit(NodeId id, std::size_t state) {
  add_evidence(id, state);  // conflicting commitment surfaces as ConflictingEvidence
  at(id).committed = state;
}

std::set<NodeId> BeliefGraph::d_connected_set(const std::set<NodeId>& sources,
                                              const std::set<NodeId>& observed) const {
  // Bayes-ball. Visits are (node, arrived-from-child?) pairs; sources start
  // as if the ball came up from a child, so they pass in both directions.
  std::set<NodeId> entered;
  std::set<NodeId> marked_top, marked_bottom;
  std::deque<std::pair<NodeId, bool>> queue;
  for (NodeId s : sources) queue.emplace_back(s, true);

  while (!queue.empty()) {
    auto [x, from_child] = queue.front();
    queue.pop_front();
    entered.insert(x);
    const Node& n = at(x);
    bool obs = observed.count(x) != 0;
    if (from_child) {
      if (obs) continue;  // blocked
      if (marked_top.insert(x).second)
        for (NodeId p : n.parents) queue.emplace_back(p, true);
      if (marked_bottom.insert(x).second)
        for (NodeId c : n.children) queue.emplace_back(c, false);
    } else {
      if (obs) {
        // Observed collider: the ball bounces back up to the parents.
        if (marked_top.insert(x).second)
          for (NodeId p : n.parents) queue.emplace_back(p, true);
      } else {
        if (marked_bottom.insert(x).second)
          for (NodeId c : n.children) queue.emplace_back(c, false);
      }
    }
  }
  return entered;
}

std::set<NodeId> BeliefGraph::ancestral_closure(const std::set<NodeId>& seed) const {
  std::set<NodeId> out = seed;
  std::deque<NodeId> queue(seed.begin(), seed.end());
  while (!queue.empty()) {
    NodeId x = queue.front();
    queue.pop_front();
    for (NodeId p : at(x).parents)
      if (out.insert(p).second) queue.push_back(p);
  }
  return out;
}

std::set<NodeId> BeliefGraph::descendants_of(NodeId id) const {
  std::set<NodeId> out;
  std::deque<NodeId> queue{id};
  while (!queue.empty()) {
    NodeId x = queue.front();
    queue.pop_front();
    for (NodeId c : at(x).children)
      if (out.insert(c).second) queue.push_back(c);
  }
  return out;
}

std::vector<NodeId> BeliefGraph::topo_order() const {
  std::map<NodeId, std::size_t> pending;
  std::set<NodeId> ready;
  for (const auto& [id, n] : nodes_) {
    pending[id] = n.parents.size();
    if (n.parents.empty()) ready.insert(id);
  }
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  while (!ready.empty()) {
    NodeId x = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(x);
    for (NodeId c : at(x).children)
      if (--pending[c] == 0) ready.insert(c);
  }
  if (order.size() != nodes_.size())
    throw Error(ErrorCode::CycleCreated, "graph is not acyclic");  // unreachable by contract
  return order;
}

void BeliefGraph::remove_nodes(const std::set<NodeId>& victims) {
  if (victims.empty()) return;
  for (NodeId v : victims) {
    auto it = nodes_.find(v);
    if (it == nodes_.end()) continue;
    by_stmt_.erase(it->second.stmt);
    nodes_.erase(it);
  }
  // Drop every pform referencing a victim, then rebuild adjacency whole.
  for (auto& [id, n] : nodes_) {
    auto gone = [&](const PForm& pf) {
      for (NodeId p : pf.parents)
        if (victims.count(p)) return true;
      return false;
    };
    std::size_t before = n.pforms.size();
    n.pforms.erase(std::remove_if(n.pforms.begin(), n.pforms.end(), gone), n.pforms.end());
    if (n.pforms.size() != before) n.cpt_dirty = true;
    n.parents.clear();
    n.children.clear();
  }
  for (auto& [id, n] : nodes_)
    for (const PForm& pf : n.pforms) add_arcs_for(pf);
}

std::string BeliefGraph::to_dot() const {
  std::ostringstream os;
  os << "digraph belief_network {\n  rankdir=TB;\n  node [shape=ellipse, fontname=\"Helvetica\"];\n";
  for (const auto& [id, n] : nodes_) {
    os << "  n" << id << " [label=\"" << n.term.text() << "\"";
    if (n.committed)
      os << ", style=filled, fillcolor=\"gray70\", peripheries=2";
    else if (n.evidence)
      os << ", style=filled, fillcolor=\"gray85\"";
    os << "];\n";
  }
  for (const auto& [id, n] : nodes_)
    for (NodeId p : n.parents) os << "  n" << p << " -> n" << id << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace bnforge
