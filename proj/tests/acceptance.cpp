// Acceptance gate for the engine: nine end-to-end checks, one line each.
// Exit status is the number of failing checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bnforge/engine.hpp"
#include "bnforge/errors.hpp"
#include "bnforge/inference.hpp"
#include "bnforge/parser.hpp"
#include "random_networks.hpp"

using namespace bnforge;

namespace {

const std::string kRulesetDir = BNFORGE_RULESET_DIR;

const char* kPedigreeFacts[] = {
    "(child C A B)",
    "(child D B F)",
    "(child E C D)",
    "(observed-phenotype E present)",
};

struct Failure {
  std::string what;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

NodeId node_by_text(const BeliefGraph& g, const std::string& text) {
  for (const auto& [id, n] : g.nodes())
    if (n.term.text() == text) return id;
  throw Failure{"no node for " + text};
}

void setup_pedigree(Engine& e, double allele_frequency) {
  e.load_ruleset_file(kRulesetDir + "/genetics.bnr");
  if (allele_frequency != 0.5) {
    std::ostringstream overlay;
    overlay << "(prior-param allele-frequency " << allele_frequency << ")";
    e.load_ruleset_text(overlay.str());
  }
  for (const char* fact : kPedigreeFacts) e.assert_fact(parse_term(fact));
}

void expect_dist(const std::string& label, const std::vector<double>& got,
                 const std::vector<double>& want, double tol) {
  expect(got.size() == want.size(), label + ": state count mismatch");
  for (std::size_t i = 0; i < want.size(); ++i)
    expect(std::fabs(got[i] - want[i]) <= tol,
           label + ": state " + std::to_string(i) + " off by " +
               std::to_string(std::fabs(got[i] - want[i])));
}

// ---------------------------------------------------------------- 1 --------

void check_pedigree_structure() {
  Engine e;
  setup_pedigree(e, 0.5);
  const BeliefGraph& g = e.graph();
  expect(g.size() == 7, "expected 7 nodes, got " + std::to_string(g.size()));

  int genotypes = 0, phenotypes = 0;
  std::set<std::pair<std::string, std::string>> arcs;
  for (const auto& [id, n] : g.nodes()) {
    if (n.predicate == "genotype") ++genotypes;
    if (n.predicate == "phenotype") ++phenotypes;
    for (NodeId p : n.parents) arcs.insert({g.at(p).term.text(), n.term.text()});
  }
  expect(genotypes == 6, "expected 6 genotype nodes");
  expect(phenotypes == 1, "expected 1 phenotype node");

  std::set<std::pair<std::string, std::string>> want = {
      {"(genotype A)", "(genotype C)"}, {"(genotype B)", "(genotype C)"},
      {"(genotype B)", "(genotype D)"}, {"(genotype F)", "(genotype D)"},
      {"(genotype C)", "(genotype E)"}, {"(genotype D)", "(genotype E)"},
      {"(genotype E)", "(phenotype E)"},
  };
  expect(arcs == want, "arc set differs from the family structure");
}

// ---------------------------------------------------------------- 2 --------

void check_pedigree_posteriors() {
  struct Expected {
    double allele_frequency;
    std::map<std::string, std::vector<double>> dists;
  };
  const std::vector<Expected> cases = {
      {0.5,
       {{"(genotype A)", {0.3611111111111111, 0.5, 0.1388888888888889}},
        {"(genotype F)", {0.3611111111111111, 0.5, 0.1388888888888889}},
        {"(genotype B)", {0.5, 0.44444444444444442, 0.055555555555555552}},
        {"(genotype C)", {0.55555555555555558, 0.44444444444444442, 0.0}},
        {"(genotype D)", {0.55555555555555558, 0.44444444444444442, 0.0}},
        {"(genotype E)", {1.0, 0.0, 0.0}},
        {"(phenotype E)", {1.0, 0.0}}}},
      {0.01,
       {{"(genotype A)", {0.00047009345794392523, 0.056069158878504673, 0.94346074766355137}},
        {"(genotype F)", {0.00047009345794392523, 0.056069158878504673, 0.94346074766355137}},
        {"(genotype B)", {0.019067289719626169, 0.96261308411214952, 0.018319626168224298}},
        {"(genotype C)", {0.019252336448598129, 0.98074766355140186, 0.0}},
        {"(genotype D)", {0.019252336448598129, 0.98074766355140186, 0.0}},
        {"(genotype E)", {1.0, 0.0, 0.0}},
        {"(phenotype E)", {1.0, 0.0}}}},
  };

  for (const Expected& c : cases) {
    Engine e;
    setup_pedigree(e, c.allele_frequency);
    auto evaluated = e.session().evaluate_all();
    auto brute = enumerate_marginals(e.graph());
    for (const auto& [text, want] : c.dists) {
      NodeId id = node_by_text(e.graph(), text);
      std::string label = text + " @ " + std::to_string(c.allele_frequency);
      expect_dist(label + " (propagated)", evaluated.at(id), want, 1e-9);
      expect_dist(label + " (enumerated)", brute.at(id), want, 1e-9);
    }
  }
}

// ---------------------------------------------------------------- 3 --------

void check_founder_priors() {
  for (double p : {0.5, 0.01, 0.3}) {
    // The family structure without any phenotype observation: no evidence
    // anywhere, so founder marginals must equal their declared priors.
    Engine e;
    e.load_ruleset_file(kRulesetDir + "/genetics.bnr");
    {
      std::ostringstream overlay;
      overlay << "(prior-param allele-frequency " << p << ")";
      e.load_ruleset_text(overlay.str());
    }
    for (int i = 0; i < 3; ++i) e.assert_fact(parse_term(kPedigreeFacts[i]));

    auto marginals = e.session().evaluate_all();
    const double q = 1.0 - p;
    const std::vector<double> want = {p * p, 2.0 * p * q, q * q};
    for (const char* founder : {"(genotype A)", "(genotype B)", "(genotype F)"}) {
      NodeId id = node_by_text(e.graph(), founder);
      expect(e.graph().at(id).parents.empty(), std::string(founder) + " should be a root");
      expect_dist(std::string(founder) + " marginal", marginals.at(id), want, 1e-12);
      expect_dist(std::string(founder) + " table", e.graph().at(id).cpt, want, 1e-12);
    }
  }
}

// ---------------------------------------------------------------- 4 --------

// Independent transcription of the xor-combination table: with all pforms
// active-at-t over boolean parents, the child is true iff exactly one pform
// is satisfied (using its activation entry when present), falling back to
// the first all-parents-inactive entry when none is.
void check_xor_tables() {
  struct Spec {
    std::vector<double> activation;  // one per pform; NaN = no entries at all
    double leak;                     // NaN = no leak entry on the first pform
  };
  const double none = std::nan("");
  const std::vector<Spec> specs = {
      {{none}, none},          {{none, none}, none},    {{none, none, none}, none},
      {{0.9}, 0.05},           {{0.9, 0.1}, 0.001},     {{0.7, 0.6, 0.5}, 0.02},
  };

  for (const Spec& spec : specs) {
    const std::size_t np = spec.activation.size();
    Database db;
    DeclarationTable decls;
    BeliefGraph graph;
    FunctionRegistry fns = FunctionRegistry::with_builtins();
    decls.apply(DistDeclaration{"w", {}, FnSpec{"xor-dist", {}}});

    NodeId child = graph.add_node(
        *db.assert_ground(Term::compound("w", {Term::symbol("x")})).first, {"t", "f"});
    std::vector<NodeId> parents;
    for (std::size_t i = 0; i < np; ++i)
      parents.push_back(graph.add_node(
          *db.assert_ground(Term::compound("s", {Term::number(double(i))})).first,
          {"t", "f"}));

    for (std::size_t i = 0; i < np; ++i) {
      std::vector<std::pair<std::string, std::vector<std::string>>> entries;
      std::vector<Term> exprs;
      if (!std::isnan(spec.activation[i])) {
        entries.push_back({"t", {"t"}});
        exprs.push_back(Term::number(spec.activation[i]));
      }
      if (i == 0 && !std::isnan(spec.leak)) {
        entries.push_back({"t", {"f"}});
        exprs.push_back(Term::number(spec.leak));
      }
      graph.attach_pform(graph.resolve_pform(child, {parents[i]}, {}, entries, exprs));
    }

    const Node& n = graph.at(child);
    std::vector<double> cpt = build_cpt(graph, n, decls, fns, db, nullptr);

    // Every conditioning case; parent i's bit, first parent slowest.
    for (std::size_t row = 0; row < (std::size_t(1) << np); ++row) {
      std::size_t satisfied = 0, which = 0;
      for (std::size_t i = 0; i < np; ++i) {
        bool at_t = ((row >> (np - 1 - i)) & 1u) == 0;  // state 0 is t
        if (at_t) {
          ++satisfied;
          which = i;
        }
      }
      double pt;
      if (satisfied == 1)
        pt = std::isnan(spec.activation[which]) ? 1.0 : spec.activation[which];
      else if (satisfied == 0)
        pt = std::isnan(spec.leak) ? 0.0 : spec.leak;
      else
        pt = 0.0;

      std::ostringstream label;
      label << np << "-pform table row " << row;
      expect(std::fabs(cpt[row * 2 + 0] - pt) <= 1e-12, label.str() + ": P(t) differs");
      expect(std::fabs(cpt[row * 2 + 1] - (1.0 - pt)) <= 1e-12, label.str() + ": P(f) differs");
    }
  }
}

// ---------------------------------------------------------------- 5 --------

void check_evaluator_agreement() {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    RandomCase rc;
    build_random_case(rng, rc);
    auto brute = enumerate_marginals(rc.graph);
    auto ve = variable_elimination(rc.graph);
    auto jt = junction_tree_evaluate(rc.graph);
    expect(ve.size() == brute.size() && jt.size() == brute.size(),
           "trial " + std::to_string(trial) + ": marginal count mismatch");
    for (const auto& [id, want] : brute) {
      std::string label = "trial " + std::to_string(trial) + " node " + std::to_string(id);
      expect_dist(label + " (elimination)", ve.at(id), want, 1e-9);
      expect_dist(label + " (tree)", jt.at(id), want, 1e-9);
    }
  }
}

// ---------------------------------------------------------------- 6 --------

void check_order_independence() {
  struct Snapshot {
    std::map<std::string, std::string> structure;  // statement -> signature
    std::map<std::string, std::vector<double>> marginals;
  };

  auto run_permutation = [](const std::vector<int>& order) {
    Engine e;
    e.load_ruleset_file(kRulesetDir + "/genetics.bnr");
    e.session().set_option("tau-accept", "1.01");  // no acceptance commitments
    std::vector<Term> inputs;
    for (int ix : order) inputs.push_back(parse_term(kPedigreeFacts[ix]));
    RunResult res = e.session().run_loop(inputs);

    Snapshot snap;
    for (const auto& [id, n] : e.graph().nodes()) {
      std::ostringstream sig;
      sig << "states=(";
      for (const std::string& s : n.states) sig << " " << s;
      sig << " ) parents=(";
      std::vector<std::string> ps;
      for (NodeId p : n.parents) ps.push_back(e.graph().at(p).term.text());
      std::sort(ps.begin(), ps.end());
      for (const std::string& p : ps) sig << " " << p;
      sig << " ) evidence=" << (n.evidence ? n.states[*n.evidence] : "-");
      snap.structure[n.term.text()] = sig.str();
      snap.marginals[n.term.text()] = res.marginals.at(id);
    }
    return snap;
  };

  std::vector<int> order = {0, 1, 2, 3};
  Snapshot reference = run_permutation(order);
  expect(reference.structure.size() == 7, "reference run built the wrong node count");
  int checked = 0;
  while (std::next_permutation(order.begin(), order.end())) {
    Snapshot got = run_permutation(order);
    expect(got.structure == reference.structure,
           "permutation " + std::to_string(checked) + " built a different graph");
    expect(got.marginals.size() == reference.marginals.size(),
           "permutation " + std::to_string(checked) + " evaluated a different node set");
    for (const auto& [text, want] : reference.marginals)
      expect_dist("permutation " + std::to_string(checked) + " " + text,
                  got.marginals.at(text), want, 1e-9);
    ++checked;
  }
  expect(checked == 23, "expected 23 non-identity permutations");
}

// ---------------------------------------------------------------- 7 --------

void check_incremental_reevaluation() {
  std::mt19937 rng(2718);
  for (int trial = 0; trial < 30; ++trial) {
    RandomCase rc;
    build_random_case(rng, rc);
    RuleEngine engine(rc.db, rc.graph, rc.decls);
    FunctionRegistry fns = FunctionRegistry::with_builtins();
    Session session(rc.db, rc.graph, rc.decls, engine, fns);
    session.evaluate_all();

    NodeId changed = kNoNode;
    for (const auto& [id, n] : rc.graph.nodes())
      if (!n.evidence) {
        changed = id;
        break;
      }
    if (changed == kNoNode) continue;

    auto before = enumerate_marginals(rc.graph);
    rc.graph.add_evidence(changed, std::size_t{0});
    auto fresh = session.evaluate_affected({changed});
    auto after = enumerate_marginals(rc.graph);

    for (const auto& [id, dist] : after) {
      std::string label = "trial " + std::to_string(trial) + " node " + std::to_string(id);
      if (fresh.count(id)) {
        expect_dist(label + " (re-evaluated)", fresh.at(id), dist, 1e-9);
      } else {
        // excluded from re-evaluation, so the change must not have moved it
        expect_dist(label + " (excluded)", before.at(id), dist, 1e-9);
      }
    }
  }
}

// ---------------------------------------------------------------- 8 --------

void check_word_sense_posteriors() {
  Engine e;
  e.load_ruleset_file(kRulesetDir + "/word_senses.bnr");
  e.assert_fact(parse_term("(observed-word 1 went)"));

  auto evaluated = e.session().evaluate_all();
  auto brute = enumerate_marginals(e.graph());

  NodeId word = node_by_text(e.graph(), "(word-inst 1 went)");
  expect(e.graph().at(word).evidence == std::size_t{0}, "the word instance must be observed");

  const std::map<std::string, std::vector<double>> want = {
      {"(inst 1 go1)", {0.89991000899910012, 0.10008999100089988}},
      {"(inst 1 die1)", {0.099990000999900006, 0.90000999900009995}},
      {"(word-inst 1 went)", {1.0, 0.0}},
  };
  for (const auto& [text, dist] : want) {
    NodeId id = node_by_text(e.graph(), text);
    expect_dist(text + " (propagated)", evaluated.at(id), dist, 1e-9);
    expect_dist(text + " (enumerated)", brute.at(id), dist, 1e-9);
  }
}

// ---------------------------------------------------------------- 9 --------

void check_ruleset_round_trip() {
  for (const char* name : {"genetics.bnr", "word_senses.bnr", "pronouns.bnr",
                           "conditions.bnr"}) {
    Engine probe;
    Effect loaded = probe.load_ruleset_file(kRulesetDir + "/" + name);
    (void)loaded;

    std::ifstream in(kRulesetDir + "/" + name, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto items1 = parse_ruleset(buf.str());
    std::string canon1 = serialize(items1);
    auto items2 = parse_ruleset(canon1);
    std::string canon2 = serialize(items2);
    expect(canon1 == canon2,
           std::string(name) + ": canonical text changed across a re-parse");
    expect(items1.size() == items2.size(),
           std::string(name) + ": item count changed across a re-parse");
  }

  const char* broken[] = {
      "(-> (a ?x)",                       // unbalanced
      "(defpreddist)",                    // missing everything
      "(-> (a ?x) :label 5 (b ?x))",      // label must be a variable
      "((t | t) .9)",                     // an entry is not a top-level form
  };
  for (const char* text : broken) {
    Engine e;
    bool threw = false;
    try {
      e.load_ruleset_text(text);
    } catch (const Error& err) {
      threw = true;
      expect(err.code() == ErrorCode::ParseError,
             std::string("'") + text + "' raised " + err.qualified_code());
      expect(err.location().has_value(),
             std::string("'") + text + "' lost its source location");
    }
    expect(threw, std::string("'") + text + "' was accepted");
    expect(e.graph().size() == 0 && e.rules().rules().empty(),
           std::string("'") + text + "' left state behind");
  }
}

// ----------------------------------------------------------------------------

int failures = 0;

void run(int number, const char* name, const std::function<void()>& fn, double budget_ms = 0) {
  auto t0 = std::chrono::steady_clock::now();
  std::string problem;
  try {
    fn();
  } catch (const Failure& f) {
    problem = f.what;
  } catch (const Error& e) {
    problem = e.qualified_code() + ": " + e.what();
  } catch (const std::exception& e) {
    problem = e.what();
  }
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
  if (problem.empty() && budget_ms > 0 && ms > budget_ms) {
    std::ostringstream os;
    os << "took " << ms << " ms, budget " << budget_ms << " ms";
    problem = os.str();
  }
  if (problem.empty()) {
    std::printf("PASS  %d  %-26s (%.0f ms)\n", number, name, ms);
  } else {
    std::printf("FAIL  %d  %-26s %s\n", number, name, problem.c_str());
    ++failures;
  }
}

}  // namespace

int main() {
  run(1, "pedigree-structure", check_pedigree_structure, 1000);
  run(2, "pedigree-posteriors", check_pedigree_posteriors, 1000);
  run(3, "founder-priors", check_founder_priors);
  run(4, "xor-dist-tables", check_xor_tables);
  run(5, "evaluator-agreement", check_evaluator_agreement, 30000);
  run(6, "order-independence", check_order_independence);
  run(7, "incremental-reevaluation", check_incremental_reevaluation);
  run(8, "word-sense-posteriors", check_word_sense_posteriors);
  run(9, "ruleset-round-trip", check_ruleset_round_trip);
  return failures;
}
