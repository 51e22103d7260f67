#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bnforge {

enum class TermKind { Symbol, Variable, Number, Compound };

/// Immutable first-order term with structural sharing. Copies are cheap
/// handles; equality and hashing are structural. Keywords (":p", ":label")
/// are symbols whose name begins with ':'. Variables begin with '?'.
class Term {
 public:
  Term() : Term(symbol("nil")) {}

  static Term symbol(std::string name);
  static Term variable(std::string name);
  static Term number(double value);
  static Term compound(std::string functor, std::vector<Term> args);

  TermKind kind() const { return data_->kind; }
  bool is_symbol() const { return kind() == TermKind::Symbol; }
  bool is_variable() const { return kind() == TermKind::Variable; }
  bool is_number() const { return kind() == TermKind::Number; }
  bool is_compound() const { return kind() == TermKind::Compound; }
  bool is_keyword() const;

  /// Symbol or Variable name; Compound functor.
  const std::string& name() const { return data_->text; }
  double value() const { return data_->number; }
  const std::vector<Term>& args() const { return data_->args; }

  bool is_ground() const;
  void collect_variables(std::vector<std::string>& out) const;
  bool contains_variable(const std::string& var) const;

  /// (functor, arity) for compounds, (name, 0) for symbols. Used as the
  /// database discrimination key. Variables/numbers get a sentinel key.
  std::pair<std::string, int> predicate_key() const;

  /// Head predicate name: functor of a compound, else the symbol name.
  const std::string& predicate() const;

  /// Canonical text, e.g. "(child C A B)". Numbers use shortest
  /// round-trip formatting so parse(text()) == *this.
  std::string text() const;

  std::size_t hash() const;
  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  struct Data {
    TermKind kind;
    std::string text;
    double number = 0.0;
    std::vector<Term> args;
  };
  explicit Term(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

/// Formats a double exactly as Term::text does (shortest round-trip).
std::string format_number(double v);

/// Idempotent variable bindings: every right-hand side is fully resolved,
/// so apply(apply(t)) == apply(t) by construction.
class Substitution {
 public:
  bool empty() const { return bindings_.size() == 0; }
  std::size_t size() const { return bindings_.size(); }
  const Term* lookup(const std::string& var) const;

  /// Composes {var -> term} into the substitution. `term` is resolved
  /// against the current bindings first; existing bindings mentioning
  /// `var` are rewritten. Throws on occurs-check violation.
  void bind(const std::string& var, const Term& term);

  Term apply(const Term& t) const;

  const std::map<std::string, Term>& bindings() const { return bindings_; }
  std::string text() const;

 private:
  std::map<std::string, Term> bindings_;
};

/// Most-general unifier with occurs-check; failure is a value, not an error.
std::optional<Substitution> unify(const Term& a, const Term& b);
std::optional<Substitution> unify(const Term& a, const Term& b, Substitution seed);

/// Renames every variable in `t` to a fresh "?name~N" (one rename per
/// distinct source variable).
Term standardize_apart(const Term& t);
Term standardize_apart(const Term& t, std::map<std::string, std::string>& renames);

/// Fresh internal variable name, never produced by the reader.
std::string fresh_variable_name(const std::string& base);

}  // namespace bnforge
