#include "bnforge/declarations.hpp"

namespace bnforge {

void DeclarationTable::apply(const DistDeclaration& d) {
  Entry& e = preds_[d.predicate];
  e.seen = true;
  e.prior = d.prior;
  e.posterior = d.posterior;
}

void DeclarationTable::apply(const StatesDeclaration& s) {
  Entry& e = preds_[s.predicate];
  e.seen = true;
  e.states = s.states;
}

void DeclarationTable::apply(const PriorParam& p) { params_[p.name] = p.value; }

void DeclarationTable::apply(const AssertActionBinding& b) { actions_[b.predicate] = b.action; }

bool DeclarationTable::declared(const std::string& predicate) const {
  auto it = preds_.find(predicate);
  return it != preds_.end() && it->second.seen;
}

const std::vector<std::string>& DeclarationTable::states_for(const std::string& predicate) const {
  auto it = preds_.find(predicate);
  if (it != preds_.end() && it->second.states) return *it->second.states;
  return boolean_states();
}

std::optional<FnSpec> DeclarationTable::prior_fn(const std::string& predicate) const {
  auto it = preds_.find(predicate);
  return it == preds_.end() ? std::nullopt : it->second.prior;
}

std::optional<FnSpec> DeclarationTable::posterior_fn(const std::string& predicate) const {
  auto it = preds_.find(predicate);
  return it == preds_.end() ? std::nullopt : it->second.posterior;
}

std::optional<double> DeclarationTable::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) return std::nullopt;
  return it->second;
}

double DeclarationTable::param_or(const std::string& name, double fallback) const {
  auto v = param(name);
  return v ? *v : fallback;
}

std::optional<std::string> DeclarationTable::assert_action(const std::string& predicate) const {
  auto it = actions_.find(predicate);
  if (it == actions_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& DeclarationTable::boolean_states() {
  static const std::vector<std::string> kBool{"t", "f"};
  return kBool;
}

}  // namespace bnforge
