#include "random_networks.hpp"

#include <algorithm>
#include <string>

namespace bnforge {

void build_random_case(std::mt19937& rng, RandomCase& out) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto frac = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  const int count = pick(3, 12);
  for (int i = 0; i < count; ++i) {
    const std::string pred = "v" + std::to_string(i);
    const std::size_t arity = static_cast<std::size_t>(pick(2, 3));

    std::vector<std::string> states;
    for (std::size_t s = 0; s < arity; ++s) states.push_back("s" + std::to_string(s));
    out.decls.apply(StatesDeclaration{pred, states});

    auto [stmt, fresh] = out.db.assert_ground(Term::compound(pred, {Term::symbol("x")}));
    NodeId id = out.graph.add_node(*stmt, states);
    out.ids.push_back(id);

    // Parents come from already-created nodes, at most three.
    std::vector<NodeId> parents;
    if (i > 0) {
      std::vector<NodeId> pool = out.ids;
      pool.pop_back();
      std::shuffle(pool.begin(), pool.end(), rng);
      const int want = std::min<int>(pick(0, 3), static_cast<int>(pool.size()));
      parents.assign(pool.begin(), pool.begin() + want);
      std::sort(parents.begin(), parents.end());
    }

    if (parents.empty()) {
      // Random positive prior, declared as explicit categorical weights.
      std::vector<double> w(arity);
      double total = 0.0;
      for (double& v : w) total += (v = frac(0.05, 1.0));
      std::vector<Term> args;
      for (double v : w) args.push_back(Term::number(v / total));
      out.decls.apply(DistDeclaration{pred, FnSpec{"categorical", args}, std::nullopt});
      continue;
    }

    out.decls.apply(
        DistDeclaration{pred, std::nullopt, FnSpec{"simple-pform", {}}});

    // One full-table pform: every row gets explicit entries for all states
    // but the last, whose value the table completion supplies.
    std::size_t rows = 1;
    for (NodeId p : parents) rows *= out.graph.at(p).arity();

    std::vector<std::pair<std::string, std::vector<std::string>>> entry_states;
    std::vector<Term> entry_exprs;
    std::vector<std::size_t> digits(parents.size(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> row(arity);
      double total = 0.0;
      for (double& v : row) total += (v = frac(0.05, 1.0));

      std::vector<std::string> parent_names;
      for (std::size_t d = 0; d < parents.size(); ++d)
        parent_names.push_back(out.graph.at(parents[d]).states[digits[d]]);
      for (std::size_t s = 0; s + 1 < arity; ++s) {
        entry_states.push_back({states[s], parent_names});
        entry_exprs.push_back(Term::number(row[s] / total));
      }

      for (std::size_t d = digits.size(); d-- > 0;) {
        if (++digits[d] < out.graph.at(parents[d]).arity()) break;
        digits[d] = 0;
      }
    }

    PForm pf = out.graph.resolve_pform(id, parents, {}, entry_states, entry_exprs);
    out.graph.attach_pform(pf);
  }

  // Sometimes clamp one or two nodes.
  const int clamps = pick(0, 2);
  for (int c = 0; c < clamps; ++c) {
    NodeId id = out.ids[static_cast<std::size_t>(pick(0, count - 1))];
    const Node& n = out.graph.at(id);
    if (n.evidence) continue;
    out.graph.add_evidence(id, static_cast<std::size_t>(pick(0, static_cast<int>(n.arity()) - 1)));
  }

  FunctionRegistry fns = FunctionRegistry::with_builtins();
  build_all_cpts(out.graph, out.decls, fns, out.db, nullptr);
}

}  // namespace bnforge
