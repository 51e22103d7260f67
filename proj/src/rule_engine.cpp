#include "bnforge/rule_engine.hpp"

#include <algorithm>
#include <functional>

#include "bnforge/errors.hpp"

namespace bnforge {
namespace {

Term stmt_handle(StatementId id) {
  return Term::compound("#stmt", {Term::number(static_cast<double>(id))});
}

std::optional<StatementId> handle_id(const Term& t) {
  if (t.is_compound() && t.name() == "#stmt" && t.args().size() == 1 && t.args()[0].is_number())
    return static_cast<StatementId>(t.args()[0].value());
  return std::nullopt;
}

/// Text of terms with variables renamed ?#0, ?#1... in traversal order, so
/// two alpha-equivalent answers produce one key.
void canonical_text(const Term& t, std::map<std::string, std::string>& rn, std::string& out) {
  switch (t.kind()) {
    case TermKind::Variable: {
      auto [it, fresh] = rn.emplace(t.name(), "?#" + std::to_string(rn.size()));
      out += it->second;
      return;
    }
    case TermKind::Symbol:
      out += t.name();
      return;
    case TermKind::Number:
      out += format_number(t.value());
      return;
    case TermKind::Compound:
      out += '(';
      out += t.name();
      for (const Term& a : t.args()) {
        out += ' ';
        canonical_text(a, rn, out);
      }
      out += ')';
      return;
  }
}

std::string canonical_key(const std::vector<Term>& ts) {
  std::map<std::string, std::string> rn;
  std::string out;
  for (const Term& t : ts) {
    canonical_text(t, rn, out);
    out += ';';
  }
  return out;
}

}  // namespace

void Effect::merge(const Effect& o) {
  new_statements.insert(new_statements.end(), o.new_statements.begin(), o.new_statements.end());
  new_nodes.insert(new_nodes.end(), o.new_nodes.begin(), o.new_nodes.end());
  touched_nodes.insert(touched_nodes.end(), o.touched_nodes.begin(), o.touched_nodes.end());
  new_evidence.insert(new_evidence.end(), o.new_evidence.begin(), o.new_evidence.end());
}

RuleEngine::RuleEngine(Database& db, BeliefGraph& graph, DeclarationTable& decls)
    : db_(db), graph_(graph), decls_(decls) {}

RuleEngine::FreshRule RuleEngine::freshen(const Rule& r) const {
  std::map<std::string, std::string> rn;
  auto fresh_label = [&rn](const std::optional<std::string>& l) -> std::optional<std::string> {
    if (!l) return std::nullopt;
    auto it = rn.find(*l);
    if (it == rn.end()) it = rn.emplace(*l, fresh_variable_name(*l)).first;
    return it->second;
  };
  auto fresh_lp = [&](const LabeledPattern& lp) {
    LabeledPattern out;
    out.pattern = standardize_apart(lp.pattern, rn);
    out.label = fresh_label(lp.label);
    return out;
  };
  FreshRule fr;
  fr.trigger = fresh_lp(r.trigger);
  for (const LabeledPattern& lp : r.antecedents) fr.antecedents.push_back(fresh_lp(lp));
  for (const LabeledPattern& lp : r.consequents) fr.consequents.push_back(fresh_lp(lp));
  for (const PFormTemplate& pf : r.pforms) {
    PFormTemplate out;
    for (const std::string& l : pf.parent_labels) out.parent_labels.push_back(*fresh_label(l));
    out.child_label = *fresh_label(pf.child_label);
    out.active_states = pf.active_states;
    for (const EntryTemplate& e : pf.entries) {
      EntryTemplate fe = e;
      fe.expr = standardize_apart(e.expr, rn);
      out.entries.push_back(std::move(fe));
    }
    fr.pforms.push_back(std::move(out));
  }
  return fr;
}

std::size_t RuleEngine::load_rule(Rule r, Effect* eff) {
  validate_rule(r);
  rules_.push_back(std::move(r));
  std::size_t ix = rules_.size() - 1;
  Effect local;
  if (rules_[ix].mode != RuleMode::Backward) {
    std::vector<StatementId> existing;  // snapshot: firing extends the store
    for (const Statement& s : db_.statements())
      if (!s.indexed_only) existing.push_back(s.id);
    for (StatementId id : existing) {
      Statement s = db_.at(id);
      fire_one(ix, s, local);
    }
    local.merge(drain());
  }
  if (eff) eff->merge(local);
  return ix;
}

Effect RuleEngine::assert_fact(const Term& ground) {
  Effect eff;
  assert_internal(ground, eff);
  eff.merge(drain());
  return eff;
}

void RuleEngine::index_statement(const Term& pattern) { db_.index_pattern(pattern); }

Effect RuleEngine::apply_item(const RulesetItem& item) {
  Effect eff;
  struct Visitor {
    RuleEngine& e;
    Effect& eff;
    void invalidate_all() {
      for (const auto& [id, n] : e.graph_.nodes()) {
        e.graph_.at(id).cpt_dirty = true;
        eff.touched_nodes.push_back(id);
      }
    }
    void operator()(const Rule& r) { e.load_rule(r, &eff); }
    void operator()(const Fact& f) { eff.merge(e.assert_fact(f.term)); }
    void operator()(const IndexForm& ix) { e.index_statement(ix.pattern); }
    void operator()(const DistDeclaration& d) {
      e.decls_.apply(d);
      invalidate_all();
    }
    void operator()(const StatesDeclaration& s) { e.decls_.apply(s); }
    void operator()(const PriorParam& p) {
      e.decls_.apply(p);
      invalidate_all();
    }
    void operator()(const AssertActionBinding& b) { e.decls_.apply(b); }
  } v{*this, eff};
  std::visit(v, item);
  return eff;
}

Effect RuleEngine::drain() {
  Effect eff;
  while (!agenda_.empty()) {
    StatementId id = agenda_.front();
    agenda_.pop_front();
    Statement s = db_.at(id);  // copy: the store may grow while firing
    fire_all_for(s, eff);
  }
  return eff;
}

void RuleEngine::fire_all_for(const Statement& s, Effect& eff) {
  for (std::size_t ix = 0; ix < rules_.size(); ++ix) fire_one(ix, s, eff);
}

void RuleEngine::fire_one(std::size_t ix, const Statement& s, Effect& eff) {
  const Rule& r = rules_[ix];
  if (r.mode == RuleMode::Backward) return;
  if (fired_.count({ix, s.id})) return;
  if (rejected(s.id)) return;  // committed-false statements expand nothing
  FreshRule fr = freshen(r);
  auto sigma = unify(fr.trigger.pattern, s.term);
  if (!sigma) return;
  fired_.insert({ix, s.id});
  if (r.mode == RuleMode::Combined) {
    combined_triggers_.emplace_back(ix, s.id);
    fire_combined(ix, s, eff);
    return;
  }
  Substitution sg = *sigma;
  std::map<std::string, StatementId> labels;
  if (fr.trigger.label) {
    labels[*fr.trigger.label] = s.id;
    sg.bind(*fr.trigger.label, stmt_handle(s.id));
  }
  apply_firing(fr, std::move(sg), std::move(labels), eff);
}

void RuleEngine::fire_combined(std::size_t rule_ix, const Statement& trigger, Effect& eff) {
  if (rejected(trigger.id)) return;  // a dead hypothesis expands nothing
  FreshRule fr = freshen(rules_[rule_ix]);
  auto sigma = unify(fr.trigger.pattern, trigger.term);
  if (!sigma) return;
  Substitution sg = *sigma;
  std::map<std::string, StatementId> labels;
  if (fr.trigger.label) {
    labels[*fr.trigger.label] = trigger.id;
    sg.bind(*fr.trigger.label, stmt_handle(trigger.id));
  }
  std::vector<Term> goals;
  goals.reserve(fr.antecedents.size());
  for (const LabeledPattern& lp : fr.antecedents) goals.push_back(lp.pattern);

  for (const ConjAnswer& ans : solve_goals(goals, sg, depth_limit_)) {
    std::vector<Term> applied;
    applied.reserve(goals.size());
    for (const Term& g : goals) applied.push_back(ans.subst.apply(g));
    std::string key = std::to_string(rule_ix) + "|" + std::to_string(trigger.id) + "|" +
                      canonical_key(applied);
    if (combined_done_.count(key)) continue;

    bool suppressed = false;
    for (const auto& src : ans.sources)
      if (src && rejected(*src)) suppressed = true;
    if (suppressed) continue;  // rejection is permanent; never record or fire

    auto lbls = labels;
    Substitution sg2 = ans.subst;
    bool skip = false;
    for (std::size_t i = 0; i < fr.antecedents.size(); ++i) {
      const auto& label = fr.antecedents[i].label;
      if (!label) continue;
      if (!ans.sources[i]) {
        warnings_.push_back("combined answer " + applied[i].text() +
                            " is rule-derived, not stored; skipping a firing that labels it");
        skip = true;
        break;
      }
      lbls[*label] = *ans.sources[i];
      sg2.bind(*label, stmt_handle(*ans.sources[i]));
    }
    if (skip) continue;
    combined_done_.insert(key);
    apply_firing(fr, std::move(sg2), std::move(lbls), eff);
  }
}

void RuleEngine::apply_firing(const FreshRule& fr, Substitution sigma,
                              std::map<std::string, StatementId> labels, Effect& eff) {
  for (const LabeledPattern& lp : fr.consequents) {
    Term t = sigma.apply(lp.pattern);
    if (!t.is_ground())
      throw Error(ErrorCode::NonGroundAssertion, "rule consequent is not ground: " + t.text());
    const Statement* st = assert_internal(t, eff);
    if (lp.label) {
      if (st) {
        labels[*lp.label] = st->id;
        sigma.bind(*lp.label, stmt_handle(st->id));
      } else {
        warnings_.push_back("label " + *lp.label +
                            " names an action-intercepted consequent; pforms using it are skipped");
      }
    }
  }
  for (const PFormTemplate& pf : fr.pforms) {
    auto node_of = [&](const std::string& label) -> std::optional<NodeId> {
      auto it = labels.find(label);
      if (it == labels.end()) return std::nullopt;
      Statement s = db_.at(it->second);
      return ensure_node(s, eff);
    };
    std::vector<NodeId> parents;
    bool ok = true;
    for (const std::string& l : pf.parent_labels) {
      auto n = node_of(l);
      if (!n) {
        ok = false;
        break;
      }
      parents.push_back(*n);
    }
    auto child = node_of(pf.child_label);
    if (!ok || !child) {
      warnings_.push_back("pform skipped: a label resolved to no statement");
      continue;
    }
    std::vector<std::pair<std::string, std::vector<std::string>>> entry_states;
    std::vector<Term> exprs;
    for (const EntryTemplate& e : pf.entries) {
      entry_states.emplace_back(e.child_state, e.parent_states);
      exprs.push_back(sigma.apply(e.expr));
    }
    PForm rpf = graph_.resolve_pform(*child, parents, pf.active_states, entry_states, exprs);
    if (graph_.attach_pform(rpf)) eff.touched_nodes.push_back(*child);
  }
}

const Statement* RuleEngine::assert_internal(const Term& t, Effect& eff) {
  const std::string& pred = t.predicate();
  if (auto action = decls_.assert_action(pred)) {
    eff.merge(dispatch_action(*action, t));
    return nullptr;
  }
  auto [stp, is_new] = db_.assert_ground(t);
  StatementId id = stp->id;
  if (is_new) {
    eff.new_statements.push_back(id);
    if (decls_.declared(pred)) {
      Statement s = db_.at(id);
      ensure_node(s, eff);
    }
    agenda_.push_back(id);
  }
  return &db_.at(id);
}

Effect RuleEngine::run_assert_action(const Term& s) {
  auto action = decls_.assert_action(s.predicate());
  if (!action)
    throw Error(ErrorCode::MissingDeclaration,
                "no assert action registered for predicate " + s.predicate());
  return dispatch_action(*action, s);
}

Effect RuleEngine::dispatch_action(const std::string& action, const Term& t) {
  if (action != "instantiate-observation")
    throw Error(ErrorCode::UnknownFunction, "no assert action named " + action);
  Effect eff;
  if (!t.is_compound() || t.args().size() != 2)
    throw Error(ErrorCode::MalformedRule,
                "instantiate-observation takes a statement and a state: " + t.text());
  const Term& h = t.args()[0];
  const Term& state = t.args()[1];
  StatementId target;
  if (auto id = handle_id(h)) {
    target = *id;
    if (target >= db_.size())
      throw Error(ErrorCode::MalformedRule, "dangling statement handle in " + t.text());
  } else if (h.is_ground()) {
    if (const Statement* f = db_.find(h)) {
      target = f->id;
    } else {
      auto [np, is_new] = db_.assert_ground(h);
      target = np->id;
      if (is_new) eff.new_statements.push_back(target);
    }
  } else {
    throw Error(ErrorCode::MalformedRule, "instantiate-observation needs a statement handle");
  }
  Statement st = db_.at(target);
  NodeId node = ensure_node(st, eff);
  if (!state.is_symbol())
    throw Error(ErrorCode::UnknownState, "observed state must be a symbol: " + state.text());
  const Node& n = graph_.at(node);
  std::string name = state.name();
  auto ix = n.state_index(name);
  if (!ix && name.size() > 1 && name[0] == ':') ix = n.state_index(name.substr(1));
  if (!ix)
    throw Error(ErrorCode::UnknownState,
                "state '" + name + "' not in the space of " + n.term.text());
  bool had = n.evidence.has_value();
  graph_.add_evidence(node, *ix);
  if (!had) eff.new_evidence.push_back(node);
  return eff;
}

NodeId RuleEngine::ensure_node(const Statement& s, Effect& eff) {
  NodeId id = graph_.node_for(s.id);
  if (id != kNoNode) return id;
  id = graph_.add_node(s, decls_.states_for(s.term.predicate()));
  db_.at_mutable(s.id).network_linked = true;
  eff.new_nodes.push_back(id);
  return id;
}

bool RuleEngine::rejected(StatementId stmt) const {
  NodeId id = graph_.node_for(stmt);
  if (id == kNoNode) return false;
  const Node& n = graph_.at(id);
  return n.committed && n.arity() == 2 && *n.committed == 1;
}

std::vector<RuleEngine::GoalAnswer> RuleEngine::solve_goal(const Term& goal,
                                                           std::size_t depth) const {
  std::vector<GoalAnswer> out;
  for (const StoredMatch& m : db_.match(goal)) out.push_back({m.subst, m.stmt->id});
  for (const Rule& r : rules_) {
    if (r.mode != RuleMode::Backward) continue;
    std::map<std::string, std::string> rn;
    Term head = standardize_apart(r.head, rn);
    auto sigma = unify(goal, head);
    if (!sigma) continue;
    if (depth == 0)
      throw Error(ErrorCode::DepthLimitExceeded,
                  "backward chaining exceeded depth answering " + goal.text());
    std::vector<Term> body;
    body.reserve(r.body.size());
    for (const Term& b : r.body) body.push_back(standardize_apart(b, rn));
    for (const ConjAnswer& ca : solve_goals(body, *sigma, depth - 1))
      out.push_back({ca.subst, std::nullopt});
  }
  return out;
}

std::vector<RuleEngine::ConjAnswer> RuleEngine::solve_goals(const std::vector<Term>& goals,
                                                            const Substitution& seed,
                                                            std::size_t depth) const {
  std::vector<ConjAnswer> out;
  std::vector<std::optional<StatementId>> sources;
  std::function<void(std::size_t, const Substitution&)> step = [&](std::size_t i,
                                                                   const Substitution& sigma) {
    if (i == goals.size()) {
      out.push_back({sigma, sources});
      return;
    }
    Term g = sigma.apply(goals[i]);
    for (const GoalAnswer& a : solve_goal(g, depth)) {
      Substitution merged = sigma;
      for (const auto& [v, t] : a.subst.bindings()) merged.bind(v, t);
      sources.push_back(a.source);
      step(i + 1, merged);
      sources.pop_back();
    }
  };
  step(0, seed);
  return out;
}

std::vector<Substitution> RuleEngine::answer_query(const Term& pattern) const {
  std::vector<std::string> all_vars;
  pattern.collect_variables(all_vars);
  std::vector<std::string> vars;
  for (const std::string& v : all_vars)
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);

  std::vector<Substitution> out;
  std::set<std::string> seen;
  for (const ConjAnswer& a : solve_goals({pattern}, Substitution{}, depth_limit_)) {
    Term applied = a.subst.apply(pattern);
    std::string key = canonical_key({applied});
    if (!seen.insert(key).second) continue;
    Substitution proj;
    for (const std::string& v : vars) {
      Term tv = a.subst.apply(Term::variable(v));
      if (!(tv.is_variable() && tv.name() == v)) proj.bind(v, tv);
    }
    out.push_back(std::move(proj));
  }
  return out;
}

Effect RuleEngine::construction_round() {
  Effect eff;
  auto triggers = combined_triggers_;  // snapshot: firing may register more
  for (const auto& [ix, sid] : triggers) {
    Statement s = db_.at(sid);
    fire_combined(ix, s, eff);
  }
  eff.merge(drain());
  return eff;
}

}  // namespace bnforge
