#include "bnforge/dist_builder.hpp"

#include <algorithm>
#include <cmath>

#include "bnforge/errors.hpp"

namespace bnforge {
namespace {

constexpr double kRowTolerance = 1e-9;

bool contains_p(const Term& t) {
  if (t.kind() == TermKind::Symbol && t.name() == ":p") return true;
  if (t.kind() == TermKind::Compound)
    for (const Term& a : t.args())
      if (contains_p(a)) return true;
  return false;
}

double eval_raw(const Term& expr, const EvalContext& ctx) {
  switch (expr.kind()) {
    case TermKind::Number:
      return expr.value();
    case TermKind::Symbol:
      if (expr.name() == ":p") return ctx.p;
      throw Error(ErrorCode::UnknownFunction,
                  "'" + expr.name() + "' is not a probability expression");
    case TermKind::Variable:
      throw Error(ErrorCode::CombinerError,
                  "unbound variable " + expr.name() + " in probability expression");
    case TermKind::Compound: {
      const std::string& op = expr.name();
      if (op == "+" || op == "-" || op == "*" || op == "/") {
        if (expr.args().size() != 2)
          throw Error(ErrorCode::CombinerError, "operator " + op + " takes two arguments");
        double a = eval_raw(expr.args()[0], ctx);
        double b = eval_raw(expr.args()[1], ctx);
        if (op == "+") return a + b;
        if (op == "-") return a - b;
        if (op == "*") return a * b;
        if (b == 0.0) throw Error(ErrorCode::DivisionByZero, "division by zero in " + expr.text());
        return a / b;
      }
      if (!ctx.fns || !ctx.db)
        throw Error(ErrorCode::UnknownFunction, "no function registry for " + expr.text());
      for (const Term& a : expr.args())
        if (!a.is_ground())
          throw Error(ErrorCode::CombinerError, "non-ground argument in " + expr.text());
      return ctx.fns->call_scalar(op, expr.args(), *ctx.db);
    }
  }
  throw Error(ErrorCode::CombinerError, "unreachable expression kind");
}

/// The (child=first-state | all parents active) entry of a pform, if given.
const PFormEntry* activation_entry(const PForm& pf) {
  for (const PFormEntry& e : pf.entries)
    if (e.child_state == 0 && e.parent_states == pf.active_states) return &e;
  return nullptr;
}

/// The (child=first-state | every parent away from its active state) entry.
const PFormEntry* all_inactive_entry(const PForm& pf) {
  for (const PFormEntry& e : pf.entries) {
    if (e.child_state != 0) continue;
    bool inactive = true;
    for (std::size_t i = 0; i < e.parent_states.size(); ++i)
      if (e.parent_states[i] == pf.active_states[i]) {
        inactive = false;
        break;
      }
    if (inactive && !e.parent_states.empty()) return &e;
  }
  return nullptr;
}

void require_boolean(const Node& n, const char* combinator) {
  if (n.arity() != 2)
    throw Error(ErrorCode::NonBooleanChild,
                std::string(combinator) + " needs a two-state child, got " + n.term.text());
}

std::optional<double> number_or_param(const std::vector<Term>& args, std::size_t i,
                                      const DeclarationTable& decls) {
  if (i >= args.size()) return std::nullopt;
  const Term& a = args[i];
  if (a.kind() == TermKind::Number) return a.value();
  if (a.kind() == TermKind::Symbol) {
    auto v = decls.param(a.name());
    if (!v)
      throw Error(ErrorCode::MissingDeclaration, "no prior-param named " + a.name());
    return v;
  }
  throw Error(ErrorCode::CombinerError, "prior function argument must be a number or a name");
}

std::vector<double> evaluate_prior(const FnSpec& fn, const Node& n,
                                   const DeclarationTable& decls) {
  if (fn.name == "hardy-weinberg") {
    auto p = number_or_param(fn.args, 0, decls);
    if (!p) p = decls.param("allele-frequency");
    if (!p)
      throw Error(ErrorCode::MissingDeclaration,
                  "hardy-weinberg needs an argument or the allele-frequency prior-param");
    if (n.arity() != 3)
      throw Error(ErrorCode::CombinerError,
                  "hardy-weinberg needs a three-state space, got " + n.term.text());
    return hardy_weinberg(*p);
  }
  if (fn.name == "bernoulli") {
    auto q = number_or_param(fn.args, 0, decls);
    double v = q ? *q : 0.5;
    if (v < 0.0 || v > 1.0)
      throw Error(ErrorCode::OutOfRange, "bernoulli parameter outside [0,1]");
    if (n.arity() != 2)
      throw Error(ErrorCode::CombinerError, "bernoulli needs a two-state space");
    return {v, 1.0 - v};
  }
  if (fn.name == "categorical") {
    if (fn.args.size() != n.arity())
      throw Error(ErrorCode::CombinerError, "categorical needs one weight per state");
    std::vector<double> out;
    double sum = 0.0;
    for (std::size_t i = 0; i < fn.args.size(); ++i) {
      auto v = number_or_param(fn.args, i, decls);
      if (*v < 0.0 || *v > 1.0) throw Error(ErrorCode::OutOfRange, "categorical weight outside [0,1]");
      out.push_back(*v);
      sum += *v;
    }
    if (std::abs(sum - 1.0) > kRowTolerance)
      throw Error(ErrorCode::OutOfRange, "categorical weights do not sum to 1");
    return out;
  }
  if (fn.name == "uniform") {
    return std::vector<double>(n.arity(), 1.0 / static_cast<double>(n.arity()));
  }
  throw Error(ErrorCode::UnknownFunction, "unknown prior function " + fn.name);
}

using PosteriorFn = std::vector<double> (*)(const Node&, const std::vector<PForm>&,
                                            const ConditioningCase&, const EvalContext&);

PosteriorFn posterior_by_name(const std::string& name) {
  if (name == "xor-dist") return &xor_dist;
  if (name == "noisy-or") return &noisy_or;
  if (name == "noisy-and") return &noisy_and;
  if (name == "simple-pform" || name == "transmission") return &full_table;
  throw Error(ErrorCode::UnknownFunction, "unknown posterior function " + name);
}

}  // namespace

FunctionRegistry FunctionRegistry::with_builtins() {
  FunctionRegistry r;
  // (ref-prob ARGS...) reads a stored fact (ref-prob ARGS... NUMBER).
  r.register_scalar("ref-prob", [](const std::vector<Term>& args, const Database& db) {
    std::vector<Term> pattern_args = args;
    pattern_args.push_back(Term::variable("?value"));
    Term pattern = Term::compound("ref-prob", std::move(pattern_args));
    for (const StoredMatch& m : db.match(pattern)) {
      const Term& v = m.stmt->term.args().back();
      if (v.kind() == TermKind::Number) return v.value();
    }
    throw Error(ErrorCode::CombinerError, "no stored fact matches " + pattern.text());
  });
  return r;
}

void FunctionRegistry::register_scalar(const std::string& name, ScalarFn fn) {
  scalars_[name] = std::move(fn);
}

bool FunctionRegistry::has_scalar(const std::string& name) const {
  return scalars_.count(name) != 0;
}

double FunctionRegistry::call_scalar(const std::string& name, const std::vector<Term>& args,
                                     const Database& db) const {
  auto it = scalars_.find(name);
  if (it == scalars_.end())
    throw Error(ErrorCode::UnknownFunction, "unknown function " + name);
  return it->second(args, db);
}

double eval_prob_expr(const Term& expr, const EvalContext& ctx) {
  double v = eval_raw(expr, ctx);
  if (v < 0.0 || v > 1.0) {
    ctx.warn("probability expression " + expr.text() + " evaluated to " + format_number(v) +
             "; clamped into [0,1]");
    v = std::clamp(v, 0.0, 1.0);
  }
  return v;
}

std::vector<double> hardy_weinberg(double p) {
  if (p < 0.0 || p > 1.0)
    throw Error(ErrorCode::OutOfRange, "allele frequency outside [0,1]: " + format_number(p));
  double q = 1.0 - p;
  return {p * p, 2.0 * p * q, q * q};
}

bool pform_satisfied(const PForm& pf, const ConditioningCase& cc) {
  for (std::size_t i = 0; i < pf.parents.size(); ++i)
    if (cc.at(pf.parents[i]) != pf.active_states[i]) return false;
  return true;
}

std::vector<double> xor_dist(const Node& n, const std::vector<PForm>& pforms,
                             const ConditioningCase& cc, const EvalContext& ctx) {
  require_boolean(n, "xor-dist");
  const PForm* satisfied = nullptr;
  std::size_t k = 0;
  for (const PForm& pf : pforms)
    if (pform_satisfied(pf, cc)) {
      ++k;
      satisfied = &pf;
    }
  double pt = 0.0;
  if (k == 1) {
    const PFormEntry* e = activation_entry(*satisfied);
    pt = e ? eval_prob_expr(e->expr, ctx) : 1.0;
  } else if (k == 0) {
    for (const PForm& pf : pforms)
      if (const PFormEntry* e = all_inactive_entry(pf)) {
        pt = eval_prob_expr(e->expr, ctx);
        break;
      }
  }  // two or more satisfied pforms contradict each other: probability 0
  return {pt, 1.0 - pt};
}

std::vector<double> noisy_or(const Node& n, const std::vector<PForm>& pforms,
                             const ConditioningCase& cc, const EvalContext& ctx) {
  require_boolean(n, "noisy-or");
  double leak = 0.0;
  for (const PForm& pf : pforms)
    if (const PFormEntry* e = all_inactive_entry(pf)) {
      leak = eval_prob_expr(e->expr, ctx);
      break;
    }
  double pf_all = 1.0 - leak;
  for (const PForm& pf : pforms) {
    if (!pform_satisfied(pf, cc)) continue;
    const PFormEntry* e = activation_entry(pf);
    double q = e ? eval_prob_expr(e->expr, ctx) : 1.0;
    pf_all *= 1.0 - q;
  }
  return {1.0 - pf_all, pf_all};
}

std::vector<double> noisy_and(const Node& n, const std::vector<PForm>& pforms,
                              const ConditioningCase& cc, const EvalContext& ctx) {
  require_boolean(n, "noisy-and");
  double pt = 1.0;
  for (const PForm& pf : pforms) {
    if (pform_satisfied(pf, cc)) {
      const PFormEntry* e = activation_entry(pf);
      pt *= e ? eval_prob_expr(e->expr, ctx) : 1.0;
    } else {
      const PFormEntry* e = all_inactive_entry(pf);
      pt *= e ? eval_prob_expr(e->expr, ctx) : 0.0;
    }
  }
  return {pt, 1.0 - pt};
}

std::vector<double> full_table(const Node& n, const std::vector<PForm>& pforms,
                               const ConditioningCase& cc, const EvalContext& ctx) {
  if (pforms.size() != 1)
    throw Error(ErrorCode::MultiplePFormsForFullTable,
                n.term.text() + " has " + std::to_string(pforms.size()) +
                    " pforms; a full-table combinator takes exactly one");
  const PForm& pf = pforms.front();
  std::vector<std::size_t> want;
  want.reserve(pf.parents.size());
  for (NodeId p : pf.parents) want.push_back(cc.at(p));

  std::vector<double> dist(n.arity(), -1.0);
  std::size_t specified = 0;
  double sum = 0.0;
  for (const PFormEntry& e : pf.entries) {
    if (e.parent_states != want) continue;
    double v = eval_prob_expr(e.expr, ctx);
    dist[e.child_state] = v;
    ++specified;
    sum += v;
  }
  if (specified == 0)
    throw Error(ErrorCode::IncompleteTable,
                "no entry covers a conditioning case of " + n.term.text());
  std::size_t unspecified = n.arity() - specified;
  if (unspecified == 0) {
    if (std::abs(sum - 1.0) > kRowTolerance)
      throw Error(ErrorCode::IncompleteTable,
                  "a fully specified row of " + n.term.text() + " does not sum to 1");
  } else if (unspecified == 1) {
    if (sum > 1.0 + kRowTolerance)
      throw Error(ErrorCode::IncompleteTable,
                  "a row of " + n.term.text() + " exceeds probability 1");
    for (double& v : dist)
      if (v < 0.0) v = std::max(0.0, 1.0 - sum);
  } else {
    if (std::abs(sum - 1.0) > kRowTolerance)
      throw Error(ErrorCode::IncompleteTable,
                  "a row of " + n.term.text() + " leaves multiple states unspecified");
    for (double& v : dist)
      if (v < 0.0) v = 0.0;
  }
  return dist;
}

std::vector<std::size_t> parent_arities(const BeliefGraph& g, const Node& n) {
  std::vector<std::size_t> out;
  out.reserve(n.parents.size());
  for (NodeId p : n.parents) out.push_back(g.at(p).arity());
  return out;
}

std::size_t mixed_radix_index(const std::vector<std::size_t>& radices,
                              const std::vector<std::size_t>& digits) {
  std::size_t ix = 0;
  for (std::size_t i = 0; i < radices.size(); ++i) ix = ix * radices[i] + digits[i];
  return ix;
}

std::vector<double> build_cpt(const BeliefGraph& g, const Node& n, const DeclarationTable& decls,
                              const FunctionRegistry& fns, const Database& db,
                              std::vector<std::string>* warnings) {
  EvalContext ctx;
  ctx.fns = &fns;
  ctx.db = &db;
  ctx.warnings = warnings;

  auto prior = decls.prior_fn(n.predicate);

  if (n.pforms.empty()) {
    if (!prior)
      throw Error(ErrorCode::MissingDeclaration,
                  n.term.text() + " is a root node with no prior function declared");
    std::vector<double> dist = evaluate_prior(*prior, n, decls);
    if (dist.size() != n.arity())
      throw Error(ErrorCode::CombinerError, "prior length mismatch for " + n.term.text());
    return dist;
  }

  // :p is the prior of the child's first state, computed as if it were a
  // root; compute it only when some entry actually references :p.
  bool needs_p = false;
  for (const PForm& pf : n.pforms)
    for (const PFormEntry& e : pf.entries)
      if (contains_p(e.expr)) needs_p = true;
  if (needs_p)
    ctx.p = prior ? evaluate_prior(*prior, n, decls).at(0)
                  : decls.param_or("default-prior", 0.01);

  auto post = decls.posterior_fn(n.predicate);
  const std::string post_name = post ? post->name : "xor-dist";
  PosteriorFn combine = posterior_by_name(post_name);

  std::vector<std::size_t> radices = parent_arities(g, n);
  std::size_t rows = 1;
  for (std::size_t r : radices) rows *= r;

  std::vector<double> table(rows * n.arity(), 0.0);
  std::vector<std::size_t> digits(radices.size(), 0);
  for (std::size_t row = 0; row < rows; ++row) {
    ConditioningCase cc;
    for (std::size_t i = 0; i < n.parents.size(); ++i) cc[n.parents[i]] = digits[i];
    std::vector<double> dist = combine(n, n.pforms, cc, ctx);
    if (dist.size() != n.arity())
      throw Error(ErrorCode::CombinerError, "combinator row length mismatch for " + n.term.text());
    double sum = 0.0;
    for (double v : dist) sum += v;
    if (std::abs(sum - 1.0) > kRowTolerance)
      throw Error(ErrorCode::CombinerError, "combinator row for " + n.term.text() +
                                                " does not sum to 1");
    std::copy(dist.begin(), dist.end(), table.begin() + static_cast<std::ptrdiff_t>(row * n.arity()));
    for (std::size_t i = radices.size(); i-- > 0;) {
      if (++digits[i] < radices[i]) break;
      digits[i] = 0;
    }
  }

  if (post_name == "transmission") {
    if (n.parents.size() != 2 || radices[0] != 3 || radices[1] != 3)
      throw Error(ErrorCode::CombinerError,
                  "transmission needs exactly two three-state parents");
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = a + 1; b < 3; ++b) {
        std::size_t r1 = mixed_radix_index(radices, {a, b});
        std::size_t r2 = mixed_radix_index(radices, {b, a});
        for (std::size_t s = 0; s < n.arity(); ++s)
          if (std::abs(table[r1 * n.arity() + s] - table[r2 * n.arity() + s]) > kRowTolerance)
            throw Error(ErrorCode::AsymmetricTransmission,
                        "transmission table for " + n.term.text() +
                            " is not symmetric in its parents");
      }
  }
  return table;
}

void build_all_cpts(BeliefGraph& g, const DeclarationTable& decls, const FunctionRegistry& fns,
                    const Database& db, std::vector<std::string>* warnings) {
  for (NodeId id : g.topo_order()) {
    Node& n = g.at(id);
    if (!n.cpt_dirty) continue;
    n.cpt = build_cpt(g, n, decls, fns, db, warnings);
    n.cpt_dirty = false;
  }
}

}  // namespace bnforge
