#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bnforge/belief_graph.hpp"
#include "bnforge/database.hpp"
#include "bnforge/declarations.hpp"

namespace bnforge {

/// Context for evaluating one node's probability expressions: the node's
/// prior value bound to :p, registered scalar functions, and the database
/// (functions may consult stored facts).
struct EvalContext {
  double p = 0.01;
  const class FunctionRegistry* fns = nullptr;
  const Database* db = nullptr;
  std::vector<std::string>* warnings = nullptr;

  void warn(const std::string& msg) const {
    if (warnings) warnings->push_back(msg);
  }
};

using ScalarFn = std::function<double(const std::vector<Term>&, const Database&)>;

/// Plug-in point for scalar functions callable from pform entries, e.g.
/// (ref-prob go1 went). All registered functions must be pure.
class FunctionRegistry {
 public:
  static FunctionRegistry with_builtins();

  void register_scalar(const std::string& name, ScalarFn fn);
  bool has_scalar(const std::string& name) const;
  double call_scalar(const std::string& name, const std::vector<Term>& args,
                     const Database& db) const;

 private:
  std::map<std::string, ScalarFn> scalars_;
};

/// Evaluates number | :p | (+ - * / e e) | (fn arg...), clamping the result
/// into [0,1] (out-of-range values are clamped with a warning).
double eval_prob_expr(const Term& expr, const EvalContext& ctx);

/// (p^2, 2p(1-p), (1-p)^2). Throws OutOfRange outside [0,1].
std::vector<double> hardy_weinberg(double p);

/// A conditioning case assigns a state index to every parent of a node.
using ConditioningCase = std::map<NodeId, std::size_t>;

/// True iff every parent of pf sits at its designated active state in cc.
bool pform_satisfied(const PForm& pf, const ConditioningCase& cc);

// Posterior combinators. Each returns a distribution over the child states
// for one conditioning case over the child's full parent set.
std::vector<double> xor_dist(const Node& n, const std::vector<PForm>& pforms,
                             const ConditioningCase& cc, const EvalContext& ctx);
std::vector<double> noisy_or(const Node& n, const std::vector<PForm>& pforms,
                             const ConditioningCase& cc, const EvalContext& ctx);
std::vector<double> noisy_and(const Node& n, const std::vector<PForm>& pforms,
                              const ConditioningCase& cc, const EvalContext& ctx);
std::vector<double> full_table(const Node& n, const std::vector<PForm>& pforms,
                               const ConditioningCase& cc, const EvalContext& ctx);

// CPT layout helpers: rows enumerate parent assignments with the first
// parent varying slowest; each row is one value per child state.
std::vector<std::size_t> parent_arities(const BeliefGraph& g, const Node& n);
std::size_t mixed_radix_index(const std::vector<std::size_t>& radices,
                              const std::vector<std::size_t>& digits);

/// Builds the node's complete CPT from its pforms and declarations.
/// Nodes without pforms take the prior path (MissingDeclaration when no
/// prior_fn is declared); nodes with pforms take the posterior path
/// (default combinator: xor-dist).
std::vector<double> build_cpt(const BeliefGraph& g, const Node& n, const DeclarationTable& decls,
                              const FunctionRegistry& fns, const Database& db,
                              std::vector<std::string>* warnings = nullptr);

/// Rebuilds every dirty CPT in topological order and clears the dirty bits.
void build_all_cpts(BeliefGraph& g, const DeclarationTable& decls, const FunctionRegistry& fns,
                    const Database& db, std::vector<std::string>* warnings = nullptr);

}  // namespace bnforge
