#pragma once

#include <cstddef>
#include <vector>

#include "bnforge/belief_graph.hpp"

namespace bnforge {

/// Dense table over an ordered variable scope; the first scope variable
/// varies slowest. The currency of variable elimination and junction-tree
/// propagation.
struct Factor {
  std::vector<NodeId> scope;
  std::vector<std::size_t> card;  // state count per scope variable
  std::vector<double> values;     // size = product of card

  static Factor unit() { return Factor{{}, {}, {1.0}}; }

  /// CPT of n as a factor over (parents..., n).
  static Factor from_cpt(const BeliefGraph& g, const Node& n);

  /// 1 at the observed state, 0 elsewhere.
  static Factor indicator(const Node& n, std::size_t state);

  std::size_t index_of(const std::vector<std::size_t>& assignment) const;
  bool mentions(NodeId v) const;

  Factor multiply(const Factor& other) const;
  Factor sum_out(NodeId v) const;
  Factor marginalize_onto(const std::vector<NodeId>& keep) const;
  void normalize();  // no-op on an all-zero table
};

}  // namespace bnforge
