#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bnforge/rules.hpp"

namespace bnforge {

/// Per-predicate knowledge that turns statements into random variables:
/// state spaces, prior/posterior function choices, named prior parameters,
/// and assert-action bindings. A statement gets a network node iff its
/// predicate is declared here (or a pform references it, which declares it
/// implicitly with the boolean default).
class DeclarationTable {
 public:
  void apply(const DistDeclaration& d);
  void apply(const StatesDeclaration& s);
  void apply(const PriorParam& p);
  void apply(const AssertActionBinding& b);

  /// True when the predicate was named by defpreddist or defstates.
  bool declared(const std::string& predicate) const;

  const std::vector<std::string>& states_for(const std::string& predicate) const;
  std::optional<FnSpec> prior_fn(const std::string& predicate) const;
  std::optional<FnSpec> posterior_fn(const std::string& predicate) const;

  std::optional<double> param(const std::string& name) const;
  double param_or(const std::string& name, double fallback) const;

  std::optional<std::string> assert_action(const std::string& predicate) const;

  static const std::vector<std::string>& boolean_states();  // (t f)

 private:
  struct Entry {
    std::optional<std::vector<std::string>> states;
    std::optional<FnSpec> prior;
    std::optional<FnSpec> posterior;
    bool seen = false;
  };
  std::map<std::string, Entry> preds_;
  std::map<std::string, double> params_;
  std::map<std::string, std::string> actions_;
};

}  // namespace bnforge
