#include "bnforge/engine.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bnforge/errors.hpp"

namespace bnforge {

Engine::Engine()
    : fns_(FunctionRegistry::with_builtins()),
      engine_(db_, graph_, decls_),
      session_(db_, graph_, decls_, engine_, fns_) {
  if (const char* env = std::getenv("BNFORGE_DEPTH_LIMIT")) {
    const std::string raw = env;
    int v = 0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec == std::errc() && p == raw.data() + raw.size() && v >= 1) {
      session_.options().depth_limit = static_cast<std::size_t>(v);
      engine_.set_depth_limit(static_cast<std::size_t>(v));
    } else {
      session_.warnings().push_back("ignoring unusable BNFORGE_DEPTH_LIMIT value '" +
                                    std::string(env) + "'");
    }
  }
}

Effect Engine::load_ruleset_text(const std::string& text) {
  std::vector<RulesetItem> items = parse_ruleset(text);
  Effect eff;
  for (const RulesetItem& item : items) eff.merge(engine_.apply_item(item));
  eff.merge(session_.construction_fixpoint());
  return eff;
}

Effect Engine::load_ruleset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_ruleset_text(buf.str());
}

Effect Engine::assert_fact(const Term& fact) { return session_.assert_and_fire(fact); }

std::string Engine::export_json() {
  using json = nlohmann::ordered_json;
  auto marginals = session_.evaluate_all();

  json doc;
  doc["nodes"] = json::array();
  doc["pforms"] = json::array();
  doc["cpts"] = json::array();
  doc["marginals"] = json::array();

  auto state_or_null = [&](const Node& n, const std::optional<std::size_t>& s) {
    return s ? json(n.states[*s]) : json(nullptr);
  };

  for (const auto& [id, n] : graph_.nodes()) {
    doc["nodes"].push_back({{"id", id},
                            {"statement", n.term.text()},
                            {"states", n.states},
                            {"evidence", state_or_null(n, n.evidence)},
                            {"committed", state_or_null(n, n.committed)}});

    for (const PForm& pf : n.pforms) {
      json entries = json::array();
      for (const PFormEntry& e : pf.entries) {
        json parent_states = json::array();
        for (std::size_t i = 0; i < e.parent_states.size(); ++i)
          parent_states.push_back(graph_.at(pf.parents[i]).states[e.parent_states[i]]);
        entries.push_back({{"child_state", n.states[e.child_state]},
                           {"parent_states", parent_states},
                           {"expr", e.expr.text()}});
      }
      json parents = json::array();
      json active = json::array();
      for (std::size_t i = 0; i < pf.parents.size(); ++i) {
        const Node& p = graph_.at(pf.parents[i]);
        parents.push_back(p.term.text());
        active.push_back(p.states[pf.active_states[i]]);
      }
      doc["pforms"].push_back({{"parents", parents},
                               {"child", n.term.text()},
                               {"active_states", active},
                               {"entries", entries}});
    }

    json parent_order = json::array();
    for (NodeId p : n.parents) parent_order.push_back(graph_.at(p).term.text());
    json rows = json::array();
    const std::size_t arity = n.arity();
    for (std::size_t r = 0; r * arity < n.cpt.size(); ++r) {
      json row = json::array();
      for (std::size_t s = 0; s < arity; ++s) row.push_back(n.cpt[r * arity + s]);
      rows.push_back(row);
    }
    doc["cpts"].push_back(
        {{"child", n.term.text()}, {"parent_order", parent_order}, {"rows", rows}});

    json dist = json::object();
    const std::vector<double>& m = marginals.at(id);
    for (std::size_t s = 0; s < arity; ++s) dist[n.states[s]] = m[s];
    doc["marginals"].push_back({{"statement", n.term.text()}, {"distribution", dist}});
  }

  return doc.dump(2) + "\n";
}

std::vector<std::string> Engine::drain_warnings() {
  std::vector<std::string> out;
  out.swap(engine_.warnings());
  for (std::string& w : session_.warnings()) out.push_back(std::move(w));
  session_.warnings().clear();
  return out;
}

}  // namespace bnforge
