#include "bnforge/inference.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <utility>

#include "bnforge/errors.hpp"
#include "bnforge/factor.hpp"

namespace bnforge {

namespace {

void require_fresh_cpts(const BeliefGraph& g, const std::set<NodeId>* subset) {
  for (const auto& [id, n] : g.nodes()) {
    if (subset && !subset->count(id)) continue;
    if (n.cpt_dirty)
      throw Error(ErrorCode::CombinerError,
                  "cannot evaluate while '" + n.term.text() + "' has a stale table");
  }
}

[[noreturn]] void throw_zero_mass(const Node& n) {
  throw Error(ErrorCode::DivisionByZero,
              "posterior of '" + n.term.text() + "' has zero total mass under the evidence");
}

}  // namespace

std::map<NodeId, std::vector<double>> enumerate_marginals(const BeliefGraph& g,
                                                          std::vector<NodeId> targets,
                                                          std::size_t bound) {
  require_fresh_cpts(g, nullptr);
  if (targets.empty())
    for (const auto& [id, n] : g.nodes()) targets.push_back(id);
  if (g.nodes().empty()) return {};

  std::vector<const Node*> order;
  std::map<NodeId, std::size_t> pos;
  std::size_t joint = 1;
  for (const auto& [id, n] : g.nodes()) {
    pos[id] = order.size();
    order.push_back(&n);
    joint *= n.arity();
    if (joint > bound)
      throw Error(ErrorCode::TooLarge, "joint state space exceeds " + std::to_string(bound) +
                                           " assignments; enumeration refused");
  }

  std::map<NodeId, std::vector<double>> acc;
  for (NodeId t : targets) acc[t] = std::vector<double>(g.at(t).arity(), 0.0);

  std::vector<std::size_t> a(order.size(), 0);
  for (;;) {
    double w = 1.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Node& n = *order[i];
      if (n.evidence && *n.evidence != a[i]) {
        w = 0.0;
        break;
      }
      std::size_t row = 0;
      for (NodeId p : n.parents) row = row * order[pos.at(p)]->arity() + a[pos.at(p)];
      w *= n.cpt[row * n.arity() + a[i]];
      if (w == 0.0) break;
    }
    if (w > 0.0)
      for (auto& [t, dist] : acc) dist[a[pos.at(t)]] += w;

    // advance the odometer, last node fastest
    std::size_t k = order.size();
    while (k > 0) {
      --k;
      if (++a[k] < order[k]->arity()) break;
      a[k] = 0;
      if (k == 0) goto exhausted;
    }
  }
exhausted:

  for (auto& [t, dist] : acc) {
    double total = 0.0;
    for (double v : dist) total += v;
    if (total <= 0.0) throw_zero_mass(g.at(t));
    for (double& v : dist) v /= total;
  }
  return acc;
}

namespace {

using AdjacencyMap = std::map<NodeId, std::set<NodeId>>;

// Fill-in cost of eliminating v: pairs of its current neighbours that are
// not yet adjacent.
std::size_t fill_cost(const AdjacencyMap& adj, NodeId v) {
  const auto& nb = adj.at(v);
  std::size_t cost = 0;
  for (auto it = nb.begin(); it != nb.end(); ++it)
    for (auto jt = std::next(it); jt != nb.end(); ++jt)
      if (!adj.at(*it).count(*jt)) ++cost;
  return cost;
}

NodeId pick_min_fill(const AdjacencyMap& adj, const std::set<NodeId>& remaining) {
  NodeId best = kNoNode;
  std::size_t best_cost = 0;
  for (NodeId v : remaining) {
    std::size_t c = fill_cost(adj, v);
    if (best == kNoNode || c < best_cost) {
      best = v;
      best_cost = c;
    }
  }
  return best;  // std::set iteration gives the smallest id among ties
}

void eliminate_from(AdjacencyMap& adj, NodeId v) {
  const std::set<NodeId> nb = adj.at(v);
  for (auto it = nb.begin(); it != nb.end(); ++it)
    for (auto jt = std::next(it); jt != nb.end(); ++jt) {
      adj.at(*it).insert(*jt);
      adj.at(*jt).insert(*it);
    }
  for (NodeId u : nb) adj.at(u).erase(v);
  adj.erase(v);
}

std::vector<double> ve_single(const BeliefGraph& g, NodeId target) {
  std::vector<Factor> factors;
  AdjacencyMap adj;
  std::set<NodeId> to_eliminate;
  for (const auto& [id, n] : g.nodes()) {
    adj[id];
    if (id != target) to_eliminate.insert(id);
    factors.push_back(Factor::from_cpt(g, n));
    if (n.evidence) factors.push_back(Factor::indicator(n, *n.evidence));
  }
  for (const Factor& f : factors)
    for (std::size_t i = 0; i < f.scope.size(); ++i)
      for (std::size_t j = i + 1; j < f.scope.size(); ++j) {
        adj[f.scope[i]].insert(f.scope[j]);
        adj[f.scope[j]].insert(f.scope[i]);
      }

  while (!to_eliminate.empty()) {
    NodeId v = pick_min_fill(adj, to_eliminate);
    std::vector<Factor> rest;
    Factor prod = Factor::unit();
    for (Factor& f : factors) {
      if (f.mentions(v))
        prod = prod.multiply(f);
      else
        rest.push_back(std::move(f));
    }
    rest.push_back(prod.sum_out(v));
    factors = std::move(rest);
    eliminate_from(adj, v);
    to_eliminate.erase(v);
  }

  Factor result = Factor::unit();
  for (const Factor& f : factors) result = result.multiply(f);
  result = result.marginalize_onto({target});

  double total = 0.0;
  for (double v : result.values) total += v;
  if (total <= 0.0) throw_zero_mass(g.at(target));
  for (double& v : result.values) v /= total;
  return result.values;
}

}  // namespace

std::map<NodeId, std::vector<double>> variable_elimination(const BeliefGraph& g,
                                                           std::vector<NodeId> targets) {
  require_fresh_cpts(g, nullptr);
  if (targets.empty())
    for (const auto& [id, n] : g.nodes()) targets.push_back(id);
  std::map<NodeId, std::vector<double>> out;
  for (NodeId t : targets) out[t] = ve_single(g, t);
  return out;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

std::vector<NodeId> sorted_intersection(const std::vector<NodeId>& a,
                                        const std::vector<NodeId>& b) {
  std::vector<NodeId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::map<NodeId, std::vector<double>> jt_evaluate_nodes(const BeliefGraph& g,
                                                        const std::set<NodeId>& member) {
  if (member.empty()) return {};
  for (NodeId id : member) {
    const Node& n = g.at(id);
    for (NodeId p : n.parents)
      if (!member.count(p))
        throw Error(ErrorCode::StateMismatch,
                    "evaluation subset is not closed under parents at '" + n.term.text() + "'");
  }

  // Moral graph over the member set.
  AdjacencyMap moral;
  for (NodeId id : member) {
    moral[id];
    const Node& n = g.at(id);
    for (NodeId p : n.parents) {
      moral[id].insert(p);
      moral[p].insert(id);
    }
    for (std::size_t i = 0; i < n.parents.size(); ++i)
      for (std::size_t j = i + 1; j < n.parents.size(); ++j) {
        moral[n.parents[i]].insert(n.parents[j]);
        moral[n.parents[j]].insert(n.parents[i]);
      }
  }

  // Min-fill triangulation, recording one clique per elimination step.
  std::vector<std::vector<NodeId>> elim_cliques;
  {
    AdjacencyMap work = moral;
    std::set<NodeId> remaining = member;
    while (!remaining.empty()) {
      NodeId v = pick_min_fill(work, remaining);
      std::vector<NodeId> clique(work.at(v).begin(), work.at(v).end());
      clique.push_back(v);
      std::sort(clique.begin(), clique.end());
      elim_cliques.push_back(std::move(clique));
      eliminate_from(work, v);
      remaining.erase(v);
    }
  }

  // Keep the maximal cliques: largest first, dropping any clique contained in
  // one already kept. Ordering is deterministic (size, then lexicographic).
  std::stable_sort(elim_cliques.begin(), elim_cliques.end(),
                   [](const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
                     if (a.size() != b.size()) return a.size() > b.size();
                     return a < b;
                   });
  std::vector<std::vector<NodeId>> cliques;
  for (auto& c : elim_cliques) {
    bool contained = false;
    for (const auto& kept : cliques)
      if (std::includes(kept.begin(), kept.end(), c.begin(), c.end())) {
        contained = true;
        break;
      }
    if (!contained) cliques.push_back(std::move(c));
  }

  // Maximum-weight spanning forest over pairwise separator sizes (Kruskal).
  struct Edge {
    std::size_t a, b;
    std::vector<NodeId> sep;
  };
  std::vector<Edge> candidates;
  for (std::size_t i = 0; i < cliques.size(); ++i)
    for (std::size_t j = i + 1; j < cliques.size(); ++j) {
      auto sep = sorted_intersection(cliques[i], cliques[j]);
      if (!sep.empty()) candidates.push_back({i, j, std::move(sep)});
    }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Edge& x, const Edge& y) {
    if (x.sep.size() != y.sep.size()) return x.sep.size() > y.sep.size();
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  std::vector<Edge> edges;
  {
    UnionFind uf(cliques.size());
    for (Edge& e : candidates)
      if (uf.unite(e.a, e.b)) edges.push_back(std::move(e));
  }
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> nbrs(cliques.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    nbrs[edges[e].a].push_back({edges[e].b, e});
    nbrs[edges[e].b].push_back({edges[e].a, e});
  }

  // Attach each member CPT (and evidence indicator) to the first clique
  // covering its family.
  auto first_covering = [&](const std::vector<NodeId>& family) {
    for (std::size_t i = 0; i < cliques.size(); ++i)
      if (std::includes(cliques[i].begin(), cliques[i].end(), family.begin(), family.end()))
        return i;
    throw Error(ErrorCode::StateMismatch, "no clique covers a node family");
  };
  std::vector<Factor> potential(cliques.size(), Factor::unit());
  std::map<NodeId, std::size_t> home;
  for (NodeId id : member) {
    const Node& n = g.at(id);
    std::vector<NodeId> family = n.parents;
    family.push_back(id);
    std::sort(family.begin(), family.end());
    std::size_t at = first_covering(family);
    potential[at] = potential[at].multiply(Factor::from_cpt(g, n));
    if (n.evidence) potential[at] = potential[at].multiply(Factor::indicator(n, *n.evidence));
    home[id] = first_covering({id});
  }

  // Shafer-Shenoy: each directed message is the sending clique's potential
  // times all other incoming messages, marginalized onto the separator.
  std::map<std::pair<std::size_t, std::size_t>, Factor> messages;
  std::function<const Factor&(std::size_t, std::size_t)> message =
      [&](std::size_t from, std::size_t to) -> const Factor& {
    auto key = std::make_pair(from, to);
    auto it = messages.find(key);
    if (it != messages.end()) return it->second;
    Factor prod = potential[from];
    std::size_t sep_edge = 0;
    bool found = false;
    for (auto [nb, e] : nbrs[from]) {
      if (nb == to) {
        sep_edge = e;
        found = true;
      } else {
        prod = prod.multiply(message(nb, from));
      }
    }
    if (!found) throw Error(ErrorCode::StateMismatch, "message along a non-edge");
    Factor m = prod.marginalize_onto(edges[sep_edge].sep);
    return messages.emplace(key, std::move(m)).first->second;
  };

  std::vector<Factor> belief(cliques.size());
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    belief[i] = potential[i];
    for (auto [nb, e] : nbrs[i]) belief[i] = belief[i].multiply(message(nb, i));
  }

  std::map<NodeId, std::vector<double>> out;
  for (NodeId id : member) {
    Factor m = belief[home.at(id)].marginalize_onto({id});
    double total = 0.0;
    for (double v : m.values) total += v;
    if (total <= 0.0) throw_zero_mass(g.at(id));
    for (double& v : m.values) v /= total;
    out[id] = std::move(m.values);
  }
  return out;
}

}  // namespace

std::map<NodeId, std::vector<double>> junction_tree_evaluate(const BeliefGraph& g) {
  require_fresh_cpts(g, nullptr);
  std::set<NodeId> all;
  for (const auto& [id, n] : g.nodes()) all.insert(id);
  return jt_evaluate_nodes(g, all);
}

std::map<NodeId, std::vector<double>> junction_tree_evaluate(const BeliefGraph& g,
                                                             const std::set<NodeId>& subset) {
  require_fresh_cpts(g, &subset);
  return jt_evaluate_nodes(g, subset);
}

void SessionOptions::validate() const {
  if (!(tau_reject >= 0.0))
    throw Error(ErrorCode::OutOfRange, "tau_reject must be at least 0");
  if (!(tau_reject < tau_accept))
    throw Error(ErrorCode::OutOfRange, "tau_reject must sit strictly below tau_accept");
  if (commit_delay_rounds < 1)
    throw Error(ErrorCode::OutOfRange, "commit_delay_rounds must be at least 1");
  if (max_rounds < 1) throw Error(ErrorCode::OutOfRange, "max_rounds must be at least 1");
  if (depth_limit < 1) throw Error(ErrorCode::OutOfRange, "depth_limit must be at least 1");
}

Session::Session(Database& db, BeliefGraph& graph, DeclarationTable& decls, RuleEngine& engine,
                 const FunctionRegistry& fns)
    : db_(db), graph_(graph), decls_(decls), engine_(engine), fns_(fns) {}

void Session::set_option(const std::string& name, const std::string& value) {
  std::string key = name;
  std::replace(key.begin(), key.end(), '-', '_');
  auto as_double = [&]() {
    try {
      std::size_t used = 0;
      double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::OutOfRange, "option " + name + " needs a number, got '" + value + "'");
    }
  };
  auto as_int = [&]() {
    int v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
      throw Error(ErrorCode::OutOfRange,
                  "option " + name + " needs an integer, got '" + value + "'");
    return v;
  };
  SessionOptions next = opts_;
  if (key == "tau_accept")
    next.tau_accept = as_double();
  else if (key == "tau_reject")
    next.tau_reject = as_double();
  else if (key == "commit_delay_rounds")
    next.commit_delay_rounds = as_int();
  else if (key == "max_rounds")
    next.max_rounds = as_int();
  else if (key == "depth_limit") {
    int v = as_int();
    if (v < 1) throw Error(ErrorCode::OutOfRange, "depth_limit must be at least 1");
    next.depth_limit = static_cast<std::size_t>(v);
  } else {
    throw Error(ErrorCode::UnknownOption, "unknown option '" + name + "'");
  }
  next.validate();
  opts_ = next;
  engine_.set_depth_limit(opts_.depth_limit);
}

void Session::rebuild_cpts() { build_all_cpts(graph_, decls_, fns_, db_, &warnings_); }

std::map<NodeId, std::vector<double>> Session::evaluate_all() {
  rebuild_cpts();
  cache_ = junction_tree_evaluate(graph_);
  return cache_;
}

std::map<NodeId, std::vector<double>> Session::evaluate_affected(const std::set<NodeId>& changed) {
  rebuild_cpts();
  for (auto it = cache_.begin(); it != cache_.end();)
    it = graph_.nodes().count(it->first) ? std::next(it) : cache_.erase(it);

  std::set<NodeId> live;
  for (NodeId c : changed)
    if (graph_.nodes().count(c)) live.insert(c);
  if (live.empty()) return {};

  std::set<NodeId> evidence;
  for (const auto& [id, n] : graph_.nodes())
    if (n.evidence) evidence.insert(id);
  std::set<NodeId> observed;
  for (NodeId e : evidence)
    if (!live.count(e)) observed.insert(e);

  std::set<NodeId> affected = graph_.d_connected_set(live, observed);
  std::set<NodeId> region = affected;
  region.insert(evidence.begin(), evidence.end());
  std::set<NodeId> closure = graph_.ancestral_closure(region);

  auto evaluated = junction_tree_evaluate(graph_, closure);
  std::map<NodeId, std::vector<double>> out;
  for (NodeId a : affected) {
    auto it = evaluated.find(a);
    if (it == evaluated.end()) continue;
    cache_[a] = it->second;
    out[a] = std::move(it->second);
  }
  return out;
}

std::set<NodeId> Session::changed_from(const Effect& eff) const {
  std::set<NodeId> out;
  auto add = [&](const std::vector<NodeId>& ids) {
    for (NodeId id : ids)
      if (graph_.nodes().count(id)) out.insert(id);
  };
  add(eff.new_nodes);
  add(eff.touched_nodes);
  add(eff.new_evidence);
  return out;
}

bool Session::apply_commit_policy(const std::map<NodeId, std::vector<double>>& fresh, int round,
                                  std::set<NodeId>& changed_out) {
  bool any = false;
  for (const auto& [id, dist] : fresh) {
    if (!graph_.nodes().count(id)) continue;  // pruned earlier in this sweep
    {
      const Node& n = graph_.at(id);
      if (n.evidence || n.committed) {
        accept_age_.erase(id);
        continue;
      }
    }

    // Rejection: a boolean hypothesis whose truth probability has collapsed
    // is clamped false at once, and its now-pointless descendants dropped.
    if (dist.size() == 2 && dist[0] <= opts_.tau_reject) {
      const Node& n = graph_.at(id);
      CommitEvent ev{id, n.term, 1, n.states[1], true, round};
      graph_.commit(id, 1);
      log_.push_back(std::move(ev));
      changed_out.insert(id);
      accept_age_.erase(id);
      any = true;

      std::set<NodeId> victims;
      for (NodeId d : graph_.descendants_of(id)) {
        const Node& dn = graph_.at(d);
        if (dn.evidence || dn.committed) continue;
        bool keep = false;
        for (NodeId dd : graph_.descendants_of(d)) {
          const Node& x = graph_.at(dd);
          if (x.evidence || x.committed) {
            keep = true;
            break;
          }
        }
        if (!keep) victims.insert(d);
      }
      if (!victims.empty()) {
        graph_.remove_nodes(victims);
        for (NodeId v : victims) {
          cache_.erase(v);
          accept_age_.erase(v);
          changed_out.erase(v);
        }
        for (const auto& [nid, n2] : graph_.nodes())
          if (n2.cpt_dirty) changed_out.insert(nid);
      }
      continue;
    }

    // Acceptance: commit once the leading state has stayed past tau_accept
    // for commit_delay_rounds consecutive evaluations.
    std::size_t best = 0;
    for (std::size_t s = 1; s < dist.size(); ++s)
      if (dist[s] > dist[best]) best = s;
    if (dist[best] >= opts_.tau_accept) {
      if (++accept_age_[id] >= opts_.commit_delay_rounds) {
        const Node& n = graph_.at(id);
        CommitEvent ev{id, n.term, best, n.states[best], false, round};
        graph_.commit(id, best);
        log_.push_back(std::move(ev));
        changed_out.insert(id);
        accept_age_.erase(id);
        any = true;
      }
    } else {
      accept_age_.erase(id);
    }
  }
  return any;
}

Effect Session::construction_fixpoint() {
  Effect all;
  for (int i = 0;; ++i) {
    if (i >= 1000)
      throw Error(ErrorCode::MaxRoundsExceeded, "rule firing failed to reach quiescence");
    Effect step = engine_.construction_round();
    if (!step.any()) break;
    all.merge(step);
  }
  return all;
}

Effect Session::assert_and_fire(const Term& input) {
  engine_.set_depth_limit(opts_.depth_limit);
  Effect eff = engine_.assert_fact(input);
  eff.merge(construction_fixpoint());
  return eff;
}

RunResult Session::run_loop(const std::vector<Term>& inputs) {
  opts_.validate();
  engine_.set_depth_limit(opts_.depth_limit);
  RunResult res;
  const std::size_t log_start = log_.size();
  int round = 0;

  for (const Term& input : inputs) {
    std::set<NodeId> changed = changed_from(assert_and_fire(input));
    while (!changed.empty()) {
      if (round >= opts_.max_rounds)
        throw Error(ErrorCode::MaxRoundsExceeded,
                    "evaluation loop passed " + std::to_string(opts_.max_rounds) + " rounds");
      ++round;
      auto fresh = evaluate_affected(changed);
      std::set<NodeId> next;
      if (!apply_commit_policy(fresh, round, next)) break;
      std::set<NodeId> extra = changed_from(construction_fixpoint());
      next.insert(extra.begin(), extra.end());
      changed = std::move(next);
    }
  }

  res.marginals = cache_;
  res.commits.assign(log_.begin() + static_cast<std::ptrdiff_t>(log_start), log_.end());
  res.rounds = round;
  return res;
}

}  // namespace bnforge
