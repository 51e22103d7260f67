#include <doctest.h>

#include <cmath>
#include <random>

#include "bnforge/errors.hpp"
#include "bnforge/inference.hpp"
#include "bnforge/parser.hpp"
#include "random_networks.hpp"

using namespace bnforge;

namespace {

constexpr double kTol = 1e-9;

bool close(double a, double b, double tol = kTol) { return std::fabs(a - b) < tol; }

/// rain -> wet with P(rain)=0.3, P(wet|rain)=0.9, P(wet|~rain)=0.2.
struct RainRig {
  Database db;
  DeclarationTable decls;
  BeliefGraph graph;
  FunctionRegistry fns = FunctionRegistry::with_builtins();
  NodeId rain, wet;

  RainRig() {
    decls.apply(DistDeclaration{"rain", FnSpec{"bernoulli", {Term::number(0.3)}}, {}});
    decls.apply(DistDeclaration{"wet", {}, FnSpec{"simple-pform", {}}});
    rain = graph.add_node(*db.assert_ground(Term::compound("rain", {Term::symbol("x")})).first,
                          {"t", "f"});
    wet = graph.add_node(*db.assert_ground(Term::compound("wet", {Term::symbol("x")})).first,
                         {"t", "f"});
    graph.attach_pform(graph.resolve_pform(
        wet, {rain}, {}, {{"t", {"t"}}, {"t", {"f"}}},
        {Term::number(0.9), Term::number(0.2)}));
    build_all_cpts(graph, decls, fns, db, nullptr);
  }
};

struct SessionRig {
  Database db;
  BeliefGraph graph;
  DeclarationTable decls;
  RuleEngine engine{db, graph, decls};
  FunctionRegistry fns = FunctionRegistry::with_builtins();
  Session session{db, graph, decls, engine, fns};

  void load(const std::string& text) {
    for (const RulesetItem& item : parse_ruleset(text)) engine.apply_item(item);
  }
  NodeId id_of(const std::string& text) {
    const Statement* s = db.find(parse_term(text));
    REQUIRE(s != nullptr);
    NodeId id = graph.node_for(s->id);
    REQUIRE(id != kNoNode);
    return id;
  }
  bool node_exists(const std::string& text) {
    const Statement* s = db.find(parse_term(text));
    return s && graph.node_for(s->id) != kNoNode;
  }
};

}  // namespace

TEST_CASE("all three evaluators reproduce a hand-worked posterior") {
  RainRig rig;

  SUBCASE("prior marginal of the child") {
    for (auto method : {0, 1, 2}) {
      auto m = method == 0   ? enumerate_marginals(rig.graph)
               : method == 1 ? variable_elimination(rig.graph)
                             : junction_tree_evaluate(rig.graph);
      CHECK(close(m.at(rig.rain)[0], 0.3));
      CHECK(close(m.at(rig.wet)[0], 0.3 * 0.9 + 0.7 * 0.2));
    }
  }
  SUBCASE("diagnostic reasoning against the arc direction") {
    rig.graph.add_evidence(rig.wet, std::size_t{0});
    double expected = 0.27 / 0.41;  // Bayes: P(rain | wet)
    CHECK(close(enumerate_marginals(rig.graph).at(rig.rain)[0], expected));
    CHECK(close(variable_elimination(rig.graph).at(rig.rain)[0], expected));
    CHECK(close(junction_tree_evaluate(rig.graph).at(rig.rain)[0], expected));
  }
  SUBCASE("evidence nodes report a point mass") {
    rig.graph.add_evidence(rig.rain, std::size_t{1});
    auto m = junction_tree_evaluate(rig.graph);
    CHECK(close(m.at(rig.rain)[0], 0.0));
    CHECK(close(m.at(rig.rain)[1], 1.0));
    CHECK(close(m.at(rig.wet)[0], 0.2));
  }
}

TEST_CASE("the three evaluators agree on random networks") {
  std::mt19937 rng(2026);
  for (int trial = 0; trial < 20; ++trial) {
    RandomCase rc;
    build_random_case(rng, rc);
    auto brute = enumerate_marginals(rc.graph);
    auto ve = variable_elimination(rc.graph);
    auto jt = junction_tree_evaluate(rc.graph);
    REQUIRE(ve.size() == brute.size());
    REQUIRE(jt.size() == brute.size());
    for (const auto& [id, dist] : brute) {
      for (std::size_t s = 0; s < dist.size(); ++s) {
        CHECK(close(ve.at(id)[s], dist[s]));
        CHECK(close(jt.at(id)[s], dist[s]));
      }
    }
  }
}

TEST_CASE("enumeration refuses joint spaces past its bound") {
  std::mt19937 rng(7);
  RandomCase rc;
  build_random_case(rng, rc);
  try {
    enumerate_marginals(rc.graph, {}, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("subtree evaluation requires an ancestrally closed subset") {
  RainRig rig;
  std::set<NodeId> closed{rig.rain};
  CHECK(close(junction_tree_evaluate(rig.graph, closed).at(rig.rain)[0], 0.3));

  std::set<NodeId> open{rig.wet};  // missing the parent
  CHECK_THROWS_AS(junction_tree_evaluate(rig.graph, open), Error);
}

TEST_CASE("evidence with zero likelihood is reported, not normalized away") {
  Database db;
  DeclarationTable decls;
  BeliefGraph graph;
  FunctionRegistry fns = FunctionRegistry::with_builtins();
  decls.apply(DistDeclaration{"sure", FnSpec{"bernoulli", {Term::number(1)}}, {}});
  NodeId n = graph.add_node(*db.assert_ground(Term::compound("sure", {Term::symbol("x")})).first,
                            {"t", "f"});
  graph.add_evidence(n, std::size_t{1});
  build_all_cpts(graph, decls, fns, db, nullptr);
  try {
    junction_tree_evaluate(graph);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivisionByZero);
  }
}

TEST_CASE("option setting validates names and values") {
  SessionRig rig;
  rig.session.set_option("tau-accept", "0.95");
  CHECK(rig.session.options().tau_accept == 0.95);
  rig.session.set_option("commit_delay_rounds", "3");
  CHECK(rig.session.options().commit_delay_rounds == 3);

  CHECK_THROWS_AS(rig.session.set_option("tau_acept", "0.9"), Error);
  CHECK_THROWS_AS(rig.session.set_option("tau_accept", "almost"), Error);
  CHECK_THROWS_AS(rig.session.set_option("max_rounds", "0"), Error);
  // tau_reject must stay strictly below tau_accept
  CHECK_THROWS_AS(rig.session.set_option("tau_reject", "0.96"), Error);
  // a failed set leaves the previous options alone
  CHECK(rig.session.options().tau_reject == 0.01);
}

TEST_CASE("evaluate_affected refreshes only the d-connected region") {
  SessionRig rig;
  rig.load(R"((defpreddist a (bernoulli 0.3) nil)
(defpreddist b nil simple-pform)
(defpreddist c (bernoulli 0.6) nil)
(-> (a ?x) :label ?A (b ?x) :label ?B
    :prob ((?A -> ?B) ((t | t) .9) ((t | f) .2))))");
  rig.session.assert_and_fire(parse_term("(a x)"));
  rig.session.assert_and_fire(parse_term("(c y)"));  // disconnected island
  rig.session.evaluate_all();
  NodeId a = rig.id_of("(a x)");
  NodeId b = rig.id_of("(b x)");
  NodeId c = rig.id_of("(c y)");

  auto before_c = rig.session.cached_marginals().at(c);
  rig.graph.add_evidence(b, std::size_t{0});
  auto fresh = rig.session.evaluate_affected({b});

  CHECK(fresh.count(a) == 1);
  CHECK(fresh.count(b) == 1);
  CHECK(fresh.count(c) == 0);  // untouched island is not re-evaluated
  CHECK(close(fresh.at(a)[0], 0.27 / 0.41));
  CHECK(close(rig.session.cached_marginals().at(a)[0], 0.27 / 0.41));
  CHECK(rig.session.cached_marginals().at(c) == before_c);
}

TEST_CASE("run_loop accepts hypotheses that stay past tau-accept") {
  SessionRig rig;
  rig.load(R"((defpreddist ping nil simple-pform)
(defpreddist hub (bernoulli 0.995) nil)
(-> (ping ?n) :label ?P (hub k) :label ?H
    :prob ((?H -> ?P) ((t | t) 1) ((t | f) 0))))");
  auto res = rig.session.run_loop({parse_term("(ping 1)"), parse_term("(ping 2)")});

  NodeId hub = rig.id_of("(hub k)");
  REQUIRE(!res.commits.empty());
  bool hub_accepted = false;
  for (const CommitEvent& ev : res.commits)
    if (ev.node == hub) {
      hub_accepted = true;
      CHECK_FALSE(ev.rejected);
      CHECK(ev.state_name == "t");
    }
  CHECK(hub_accepted);
  CHECK(rig.graph.at(hub).committed == std::size_t{0});
  // the commit waited for the configured number of evaluation rounds
  CHECK(res.rounds >= rig.session.options().commit_delay_rounds);
}

TEST_CASE("run_loop rejects collapsed hypotheses and prunes their support") {
  SessionRig rig;
  rig.load(R"((defstates sick (low mid high))
(defpreddist sick nil simple-pform)
(defpreddist bad (bernoulli 0.001) nil)
(defpreddist alarm nil simple-pform)
(assert-function instantiate-observation)
(-> (sick ?x) :label ?S
    (and (bad k) :label ?B (alarm k) :label ?A (instantiate-observation ?A t))
    :prob ((?B -> ?S) ((low | t) 1) ((low | f) 1))
          ((?B -> ?A) ((t | t) 1) ((t | f) .5))))");
  auto res = rig.session.run_loop({parse_term("(sick u)")});

  REQUIRE(res.commits.size() == 1);
  CHECK(res.commits[0].rejected);
  CHECK(res.commits[0].state_name == "f");
  NodeId bad = rig.id_of("(bad k)");
  CHECK(rig.graph.at(bad).committed == std::size_t{1});
  // the unsupported descendant went away; the observed one stayed
  CHECK_FALSE(rig.node_exists("(sick u)"));
  CHECK(rig.node_exists("(alarm k)"));
}

TEST_CASE("run_loop gives up past max_rounds") {
  SessionRig rig;
  rig.load(R"((defpreddist ping nil simple-pform)
(defpreddist hub (bernoulli 0.9999) nil)
(-> (ping ?n) :label ?P (hub ?n) :label ?H
    :prob ((?H -> ?P) ((t | t) 1) ((t | f) 0))))");
  rig.session.set_option("max_rounds", "1");
  rig.session.set_option("commit_delay_rounds", "1");
  // round 1 commits both nodes of the first input, which queues another
  // evaluation round; the second input then needs a round it cannot have
  CHECK_THROWS_AS(
      rig.session.run_loop({parse_term("(ping 1)"), parse_term("(ping 2)")}), Error);
}

TEST_CASE("a quiet run reports its marginals without commitments") {
  SessionRig rig;
  rig.load("(defpreddist coin (bernoulli 0.5) nil)");
  auto res = rig.session.run_loop({parse_term("(coin flip)")});
  CHECK(res.commits.empty());
  CHECK(res.rounds == 1);
  NodeId coin = rig.id_of("(coin flip)");
  CHECK(close(res.marginals.at(coin)[0], 0.5));
}
