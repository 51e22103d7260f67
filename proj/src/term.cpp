#include "bnforge/term.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bnforge {

Term Term::symbol(std::string name) {
  auto d = std::make_shared<Data>();
  d->kind = TermKind::Symbol;
  d->text = std::move(name);
  return Term(std::move(d));
}

Term Term::variable(std::string name) {
  auto d = std::make_shared<Data>();
  d->kind = TermKind::Variable;
  d->text = std::move(name);
  return Term(std::move(d));
}

Term Term::number(double value) {
  auto d = std::make_shared<Data>();
  d->kind = TermKind::Number;
  d->number = value;
  return Term(std::move(d));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (args.empty()) throw std::logic_error("compound term needs at least one argument");
  auto d = std::make_shared<Data>();
  d->kind = TermKind::Compound;
  d->text = std::move(functor);
  d->args = std::move(args);
  return Term(std::move(d));
}

bool Term::is_keyword() const {
  return is_symbol() && !data_->text.empty() && data_->text[0] == ':';
}

bool Term::is_ground() const {
  switch (kind()) {
    case TermKind::Variable: return false;
    case TermKind::Symbol:
    case TermKind::Number: return true;
    case TermKind::Compound:
      for (const Term& a : data_->args)
        if (!a.is_ground()) return false;
      return true;
  }
  return true;
}

void Term::collect_variables(std::vector<std::string>& out) const {
  switch (kind()) {
    case TermKind::Variable: {
      for (const auto& v : out)
        if (v == data_->text) return;
      out.push_back(data_->text);
      return;
    }
    case TermKind::Compound:
      for (const Term& a : data_->args) a.collect_variables(out);
      return;
    default: return;
  }
}

bool Term::contains_variable(const std::string& var) const {
  switch (kind()) {
    case TermKind::Variable: return data_->text == var;
    case TermKind::Compound:
      for (const Term& a : data_->args)
        if (a.contains_variable(var)) return true;
      return false;
    default: return false;
  }
}

std::pair<std::string, int> Term::predicate_key() const {
  switch (kind()) {
    case TermKind::Compound: return {data_->text, static_cast<int>(data_->args.size())};
    case TermKind::Symbol: return {data_->text, 0};
    case TermKind::Number: return {"#number", -1};
    case TermKind::Variable: return {"#variable", -1};
  }
  return {"#unknown", -1};
}

const std::string& Term::predicate() const { return data_->text; }

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "0";
  return std::string(buf, ptr);
}

std::string Term::text() const {
  switch (kind()) {
    case TermKind::Symbol:
    case TermKind::Variable:
      return data_->text;
    case TermKind::Number:
      return format_number(data_->number);
    case TermKind::Compound: {
      std::string out = "(" + data_->text;
      for (const Term& a : data_->args) {
        out += ' ';
        out += a.text();
      }
      out += ')';
      return out;
    }
  }
  return "";
}

std::size_t Term::hash() const {
  std::size_t h = static_cast<std::size_t>(kind()) * 0x9e3779b97f4a7c15ull;
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  switch (kind()) {
    case TermKind::Number:
      mix(std::hash<double>{}(data_->number));
      break;
    default:
      mix(std::hash<std::string>{}(data_->text));
      for (const Term& a : data_->args) mix(a.hash());
  }
  return h;
}

bool operator==(const Term& a, const Term& b) {
  if (a.data_ == b.data_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TermKind::Number:
      return a.data_->number == b.data_->number;
    case TermKind::Symbol:
    case TermKind::Variable:
      return a.data_->text == b.data_->text;
    case TermKind::Compound: {
      if (a.data_->text != b.data_->text) return false;
      if (a.data_->args.size() != b.data_->args.size()) return false;
      for (std::size_t i = 0; i < a.data_->args.size(); ++i)
        if (!(a.data_->args[i] == b.data_->args[i])) return false;
      return true;
    }
  }
  return false;
}

const Term* Substitution::lookup(const std::string& var) const {
  auto it = bindings_.find(var);
  return it == bindings_.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& t) const {
  switch (t.kind()) {
    case TermKind::Variable: {
      const Term* b = lookup(t.name());
      return b ? *b : t;
    }
    case TermKind::Compound: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      bool changed = false;
      for (const Term& a : t.args()) {
        Term a2 = apply(a);
        if (!(a2 == a)) changed = true;
        args.push_back(std::move(a2));
      }
      if (!changed) return t;
      return Term::compound(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

void Substitution::bind(const std::string& var, const Term& term) {
  Term resolved = apply(term);
  if (resolved.contains_variable(var))
    throw std::logic_error("substitution bind would violate occurs-check: " + var);
  // Rewrite existing right-hand sides so the map stays idempotent.
  Substitution single;
  single.bindings_.emplace(var, resolved);
  for (auto& [v, rhs] : bindings_) rhs = single.apply(rhs);
  bindings_.insert_or_assign(var, std::move(resolved));
}

std::string Substitution::text() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [v, t] : bindings_) {
    if (!first) out += ", ";
    first = false;
    out += v + " -> " + t.text();
  }
  out += "}";
  return out;
}

namespace {

bool unify_into(const Term& a, const Term& b, Substitution& s) {
  Term x = s.apply(a);
  Term y = s.apply(b);
  if (x == y) return true;
  if (x.is_variable()) {
    if (y.contains_variable(x.name())) return false;  // occurs-check
    s.bind(x.name(), y);
    return true;
  }
  if (y.is_variable()) {
    if (x.contains_variable(y.name())) return false;
    s.bind(y.name(), x);
    return true;
  }
  if (x.kind() != y.kind()) return false;
  if (x.is_compound()) {
    if (x.name() != y.name() || x.args().size() != y.args().size()) return false;
    for (std::size_t i = 0; i < x.args().size(); ++i)
      if (!unify_into(x.args()[i], y.args()[i], s)) return false;
    return true;
  }
  return false;  // distinct symbols/numbers
}

}  // namespace

std::optional<Substitution> unify(const Term& a, const Term& b, Substitution seed) {
  if (unify_into(a, b, seed)) return seed;
  return std::nullopt;
}

std::optional<Substitution> unify(const Term& a, const Term& b) {
  return unify(a, b, Substitution{});
}

std::string fresh_variable_name(const std::string& base) {
  static std::atomic<unsigned long long> counter{0};
  return base + "~" + std::to_string(counter.fetch_add(1));
}

Term standardize_apart(const Term& t, std::map<std::string, std::string>& renames) {
  switch (t.kind()) {
    case TermKind::Variable: {
      auto it = renames.find(t.name());
      if (it == renames.end())
        it = renames.emplace(t.name(), fresh_variable_name(t.name())).first;
      return Term::variable(it->second);
    }
    case TermKind::Compound: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(standardize_apart(a, renames));
      return Term::compound(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

Term standardize_apart(const Term& t) {
  std::map<std::string, std::string> renames;
  return standardize_apart(t, renames);
}

}  // namespace bnforge
