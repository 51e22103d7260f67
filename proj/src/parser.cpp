#include "bnforge/parser.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "bnforge/errors.hpp"
#include "bnforge/sexpr.hpp"

namespace bnforge {
namespace {

[[noreturn]] void fail(const SExpr& at, const std::string& msg) {
  throw Error(ErrorCode::ParseError, msg, SourceLoc{at.loc.line, at.loc.column});
}

bool is_keyword(const SExpr& e) { return e.is_symbol() && !e.text.empty() && e.text[0] == ':'; }
bool is_variable_token(const SExpr& e) { return e.is_symbol() && !e.text.empty() && e.text[0] == '?'; }

/// SExpr → Term for statement patterns and probability expressions.
/// "?_" is anonymous: every occurrence becomes a distinct fresh variable.
Term to_term(const SExpr& e) {
  switch (e.kind) {
    case SExpr::Kind::Number:
      return Term::number(e.number);
    case SExpr::Kind::String:
      return Term::symbol(e.text);
    case SExpr::Kind::Symbol:
      if (e.text == "?_") return Term::variable(fresh_variable_name("?_"));
      if (e.text[0] == '?') return Term::variable(e.text);
      return Term::symbol(e.text);
    case SExpr::Kind::List: {
      if (e.items.empty()) fail(e, "empty list in term position");
      const SExpr& h = e.items.front();
      if (!h.is_symbol() || h.text[0] == '?' || h.text[0] == ':')
        fail(h, "list in term position must start with a plain symbol");
      std::vector<Term> args;
      args.reserve(e.items.size() - 1);
      for (size_t i = 1; i < e.items.size(); ++i) args.push_back(to_term(e.items[i]));
      return Term::compound(h.text, std::move(args));
    }
  }
  fail(e, "unreachable term kind");
}

std::string state_symbol(const SExpr& e) {
  if (!e.is_symbol() || e.text[0] == '?' || e.text[0] == ':')
    fail(e, "expected a state symbol");
  return e.text;
}

/// Forward cursor over the items of one list form.
struct Cursor {
  const std::vector<SExpr>& items;
  size_t pos = 0;

  bool done() const { return pos >= items.size(); }
  const SExpr& peek() const { return items[pos]; }
  const SExpr& next() { return items[pos++]; }
  bool at_keyword(const char* kw) const { return !done() && peek().is_symbol() && peek().text == kw; }
};

std::optional<std::string> read_label(Cursor& c, const SExpr& parent) {
  if (!c.at_keyword(":label")) return std::nullopt;
  c.next();
  if (c.done() || !is_variable_token(c.peek()))
    fail(c.done() ? parent : c.peek(), ":label needs a ?variable");
  return c.next().text;
}

/// Reads "pattern [:label ?V]" pairs until the cursor hits a keyword other
/// than :label, or runs out.
std::vector<LabeledPattern> read_conjuncts(Cursor& c, const SExpr& parent) {
  std::vector<LabeledPattern> out;
  while (!c.done() && !is_keyword(c.peek())) {
    LabeledPattern lp;
    lp.pattern = to_term(c.next());
    lp.label = read_label(c, parent);
    out.push_back(std::move(lp));
  }
  return out;
}

/// A conjunct position: either a single pattern or an (and ...) splice.
std::vector<LabeledPattern> read_conj_form(Cursor& c, const SExpr& parent) {
  if (c.done()) fail(parent, "expected a statement pattern");
  const SExpr& form = c.peek();
  if (form.is_list() && form.head() == "and") {
    c.next();
    Cursor inner{form.items, 1};
    auto out = read_conjuncts(inner, form);
    if (!inner.done()) fail(inner.peek(), "unexpected token inside (and ...)");
    if (out.empty()) fail(form, "(and) needs at least one conjunct");
    return out;
  }
  LabeledPattern lp;
  lp.pattern = to_term(c.next());
  lp.label = read_label(c, parent);
  return {std::move(lp)};
}

/// Arc spec "(?P1 ?P2 -> ?C)": labels left of ->, one label right of it.
void read_arc_spec(const SExpr& spec, PFormTemplate& pf) {
  if (!spec.is_list() || spec.items.empty()) fail(spec, "pform needs (LABELS -> LABEL) first");
  size_t arrow = spec.items.size();
  for (size_t i = 0; i < spec.items.size(); ++i)
    if (spec.items[i].is_symbol() && spec.items[i].text == "->") {
      arrow = i;
      break;
    }
  if (arrow == spec.items.size()) fail(spec, "pform arc spec is missing ->");
  if (arrow + 2 != spec.items.size()) fail(spec, "pform arc spec needs exactly one child label");
  for (size_t i = 0; i < arrow; ++i) {
    if (!is_variable_token(spec.items[i])) fail(spec.items[i], "arc spec labels are ?variables");
    pf.parent_labels.push_back(spec.items[i].text);
  }
  if (!is_variable_token(spec.items[arrow + 1]))
    fail(spec.items[arrow + 1], "arc spec labels are ?variables");
  pf.child_label = spec.items[arrow + 1].text;
}

/// "((s | s1 s2) expr)" — child states left of |, parent states right.
EntryTemplate read_entry(const SExpr& e) {
  if (!e.is_list() || e.items.size() != 2)
    fail(e, "pform entry is ((STATE | STATES...) EXPR)");
  const SExpr& cond = e.items[0];
  if (!cond.is_list() || cond.items.empty()) fail(e.items[0], "entry condition must be a list");
  size_t bar = cond.items.size();
  for (size_t i = 0; i < cond.items.size(); ++i)
    if (cond.items[i].is_symbol() && cond.items[i].text == "|") {
      bar = i;
      break;
    }
  EntryTemplate et;
  if (bar == cond.items.size()) {
    // No parents: "((s) expr)" also allowed with a bar and nothing after.
    if (cond.items.size() != 1) fail(cond, "entry condition needs | between child and parent states");
    et.child_state = state_symbol(cond.items[0]);
  } else {
    if (bar != 1) fail(cond, "entry condition has exactly one child state before |");
    et.child_state = state_symbol(cond.items[0]);
    for (size_t i = bar + 1; i < cond.items.size(); ++i)
      et.parent_states.push_back(state_symbol(cond.items[i]));
  }
  et.expr = to_term(e.items[1]);
  return et;
}

PFormTemplate read_pform_group(const SExpr& g) {
  if (!g.is_list() || g.items.empty()) fail(g, "pform group must be a list");
  PFormTemplate pf;
  read_arc_spec(g.items.front(), pf);
  Cursor c{g.items, 1};
  if (c.at_keyword(":active")) {
    c.next();
    if (c.done() || !c.peek().is_list()) fail(g, ":active needs a (STATES...) list");
    for (const SExpr& s : c.next().items) pf.active_states.push_back(state_symbol(s));
  }
  while (!c.done()) pf.entries.push_back(read_entry(c.next()));
  return pf;
}

Rule read_forward_rule(const SExpr& form) {
  Rule r;
  Cursor c{form.items, 1};
  if (c.done()) fail(form, "-> needs a trigger pattern");
  r.trigger.pattern = to_term(c.next());
  r.trigger.label = read_label(c, form);

  if (c.done()) fail(form, "-> needs a consequent");
  const SExpr& cons = c.peek();
  if (cons.is_list() && cons.head() == "-><-") {
    r.mode = RuleMode::Combined;
    c.next();
    Cursor inner{cons.items, 1};
    if (inner.done()) fail(cons, "-><- needs antecedent and consequent parts");
    r.antecedents = read_conj_form(inner, cons);
    if (inner.done()) fail(cons, "-><- needs a consequent part");
    r.consequents = read_conj_form(inner, cons);
    if (!inner.done()) fail(inner.peek(), "unexpected token inside -><-");
  } else {
    r.mode = RuleMode::Forward;
    r.consequents = read_conj_form(c, form);
  }

  if (c.at_keyword(":prob")) {
    c.next();
    if (c.done()) fail(form, ":prob needs at least one pform group");
    while (!c.done()) r.pforms.push_back(read_pform_group(c.next()));
  }
  if (!c.done()) fail(c.peek(), "unexpected token after rule body");
  return r;
}

Rule read_backward_rule(const SExpr& form) {
  Rule r;
  r.mode = RuleMode::Backward;
  Cursor c{form.items, 1};
  if (c.done()) fail(form, "<- needs a head pattern");
  r.head = to_term(c.next());
  while (!c.done()) {
    const SExpr& e = c.peek();
    if (is_keyword(e)) fail(e, "backward rules take no keywords");
    if (e.is_list() && e.head() == "and") {
      c.next();
      for (size_t i = 1; i < e.items.size(); ++i) r.body.push_back(to_term(e.items[i]));
    } else {
      r.body.push_back(to_term(c.next()));
    }
  }
  return r;
}

std::optional<FnSpec> read_fn_spec(const SExpr& e) {
  if (e.is_symbol()) {
    if (e.text == "nil") return std::nullopt;
    if (e.text[0] == '?' || e.text[0] == ':') fail(e, "expected a function name or nil");
    return FnSpec{e.text, {}};
  }
  if (e.is_list() && !e.items.empty() && e.items.front().is_symbol()) {
    FnSpec fs{e.items.front().text, {}};
    for (size_t i = 1; i < e.items.size(); ++i) fs.args.push_back(to_term(e.items[i]));
    return fs;
  }
  fail(e, "expected a function name, (name args...), or nil");
}

void read_toplevel(const SExpr& form, std::vector<RulesetItem>& out);

void read_list_form(const SExpr& form, std::vector<RulesetItem>& out) {
  const std::string_view head = form.head();
  if (head == "->") {
    Rule r = read_forward_rule(form);
    validate_rule(r);
    out.push_back(std::move(r));
    return;
  }
  if (head == "<-") {
    Rule r = read_backward_rule(form);
    validate_rule(r);
    out.push_back(std::move(r));
    return;
  }
  if (head == "and") {
    for (size_t i = 1; i < form.items.size(); ++i) read_toplevel(form.items[i], out);
    return;
  }
  if (head == "defpreddist" || head == "defpredist") {
    if (form.items.size() != 4) fail(form, "defpreddist takes PRED PRIOR POSTERIOR");
    DistDeclaration d;
    if (!form.items[1].is_symbol()) fail(form.items[1], "predicate must be a symbol");
    d.predicate = form.items[1].text;
    d.prior = read_fn_spec(form.items[2]);
    d.posterior = read_fn_spec(form.items[3]);
    out.push_back(std::move(d));
    return;
  }
  if (head == "defstates") {
    if (form.items.size() != 3 || !form.items[1].is_symbol() || !form.items[2].is_list())
      fail(form, "defstates takes PRED (STATES...)");
    StatesDeclaration s;
    s.predicate = form.items[1].text;
    for (const SExpr& st : form.items[2].items) s.states.push_back(state_symbol(st));
    if (s.states.empty()) fail(form.items[2], "defstates needs at least one state");
    out.push_back(std::move(s));
    return;
  }
  if (head == "index") {
    if (form.items.size() != 2) fail(form, "index takes one pattern");
    out.push_back(IndexForm{to_term(form.items[1])});
    return;
  }
  if (head == "assert-function") {
    if (form.items.size() != 2 && form.items.size() != 3)
      fail(form, "assert-function takes PRED [ACTION]");
    if (!form.items[1].is_symbol()) fail(form.items[1], "predicate must be a symbol");
    AssertActionBinding b;
    b.predicate = form.items[1].text;
    if (form.items.size() == 3) {
      if (!form.items[2].is_symbol()) fail(form.items[2], "action must be a symbol");
      b.action = form.items[2].text;
    } else {
      b.action = b.predicate;
    }
    out.push_back(std::move(b));
    return;
  }
  if (head == "prior-param") {
    if (form.items.size() != 3 || !form.items[1].is_symbol() ||
        form.items[2].kind != SExpr::Kind::Number)
      fail(form, "prior-param takes NAME NUMBER");
    out.push_back(PriorParam{form.items[1].text, form.items[2].number});
    return;
  }
  // Anything else: a ground fact, or an error naming the unknown head.
  Term t = to_term(form);
  if (!t.is_ground())
    throw Error(ErrorCode::UnknownFormHead,
                "unknown form head '" + std::string(head) + "' (top-level facts must be ground)",
                SourceLoc{form.loc.line, form.loc.column});
  out.push_back(Fact{std::move(t)});
}

void read_toplevel(const SExpr& form, std::vector<RulesetItem>& out) {
  if (form.is_list()) {
    if (form.items.empty()) fail(form, "empty top-level form");
    if (!form.items.front().is_symbol())
      fail(form.items.front(), "top-level form must start with a symbol");
    read_list_form(form, out);
    return;
  }
  if (form.is_symbol() && form.text[0] != '?' && form.text[0] != ':') {
    out.push_back(Fact{Term::symbol(form.text)});
    return;
  }
  fail(form, "expected a top-level form");
}

// ---------------------------------------------------------------- serialize

void write_term(std::ostream& os, const Term& t) { os << t.text(); }

void write_labeled(std::ostream& os, const LabeledPattern& lp) {
  write_term(os, lp.pattern);
  if (lp.label) os << " :label " << *lp.label;
}

void write_conj(std::ostream& os, const std::vector<LabeledPattern>& ps, const char* indent) {
  if (ps.size() == 1) {
    write_labeled(os, ps.front());
    return;
  }
  os << "(and";
  for (const LabeledPattern& lp : ps) {
    os << "\n" << indent << "  ";
    write_labeled(os, lp);
  }
  os << ")";
}

void write_pform(std::ostream& os, const PFormTemplate& pf, const char* indent) {
  os << "((";
  for (size_t i = 0; i < pf.parent_labels.size(); ++i) os << pf.parent_labels[i] << " ";
  os << "-> " << pf.child_label << ")";
  if (!pf.active_states.empty()) {
    os << " :active (";
    for (size_t i = 0; i < pf.active_states.size(); ++i)
      os << (i ? " " : "") << pf.active_states[i];
    os << ")";
  }
  for (const EntryTemplate& e : pf.entries) {
    os << "\n" << indent << "  ((" << e.child_state << " |";
    for (const std::string& s : e.parent_states) os << " " << s;
    os << ") ";
    write_term(os, e.expr);
    os << ")";
  }
  os << ")";
}

void write_rule(std::ostream& os, const Rule& r) {
  if (r.mode == RuleMode::Backward) {
    os << "(<- ";
    write_term(os, r.head);
    if (r.body.size() == 1) {
      os << " ";
      write_term(os, r.body.front());
    } else if (!r.body.empty()) {
      os << "\n    (and";
      for (const Term& t : r.body) {
        os << "\n      ";
        write_term(os, t);
      }
      os << ")";
    }
    os << ")";
    return;
  }
  os << "(-> ";
  write_labeled(os, r.trigger);
  os << "\n    ";
  if (r.mode == RuleMode::Combined) {
    os << "(-><- ";
    write_conj(os, r.antecedents, "     ");
    os << "\n     ";
    write_conj(os, r.consequents, "     ");
    os << ")";
  } else {
    write_conj(os, r.consequents, "    ");
  }
  if (!r.pforms.empty()) {
    os << "\n    :prob";
    for (const PFormTemplate& pf : r.pforms) {
      os << "\n    ";
      write_pform(os, pf, "    ");
    }
  }
  os << ")";
}

void write_fn_spec(std::ostream& os, const std::optional<FnSpec>& fs) {
  if (!fs) {
    os << "nil";
    return;
  }
  if (fs->args.empty()) {
    os << fs->name;
    return;
  }
  os << "(" << fs->name;
  for (const Term& a : fs->args) {
    os << " ";
    write_term(os, a);
  }
  os << ")";
}

struct ItemWriter {
  std::ostream& os;
  void operator()(const Rule& r) { write_rule(os, r); }
  void operator()(const Fact& f) { write_term(os, f.term); }
  void operator()(const DistDeclaration& d) {
    os << "(defpreddist " << d.predicate << " ";
    write_fn_spec(os, d.prior);
    os << " ";
    write_fn_spec(os, d.posterior);
    os << ")";
  }
  void operator()(const StatesDeclaration& s) {
    os << "(defstates " << s.predicate << " (";
    for (size_t i = 0; i < s.states.size(); ++i) os << (i ? " " : "") << s.states[i];
    os << "))";
  }
  void operator()(const IndexForm& ix) {
    os << "(index ";
    write_term(os, ix.pattern);
    os << ")";
  }
  void operator()(const AssertActionBinding& b) {
    os << "(assert-function " << b.predicate;
    if (b.action != b.predicate) os << " " << b.action;
    os << ")";
  }
  void operator()(const PriorParam& p) {
    os << "(prior-param " << p.name << " " << format_number(p.value) << ")";
  }
};

}  // namespace

std::vector<RulesetItem> parse_ruleset(const std::string& text) {
  std::vector<RulesetItem> out;
  for (const SExpr& form : read_forms(text)) read_toplevel(form, out);
  return out;
}

Term parse_term(const std::string& text) {
  std::vector<SExpr> forms = read_forms(text);
  if (forms.size() != 1)
    throw Error(ErrorCode::ParseError,
                "expected exactly one form, got " + std::to_string(forms.size()),
                forms.empty() ? SourceLoc{1, 1} : forms[1].loc);
  return to_term(forms[0]);
}

std::vector<Term> parse_terms(const std::string& text) {
  std::vector<Term> out;
  for (const SExpr& form : read_forms(text)) out.push_back(to_term(form));
  return out;
}

std::string serialize(const RulesetItem& item) {
  std::ostringstream os;
  std::visit(ItemWriter{os}, item);
  return os.str();
}

std::string serialize(const std::vector<RulesetItem>& items) {
  std::ostringstream os;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) os << "\n\n";
    std::visit(ItemWriter{os}, items[i]);
  }
  os << "\n";
  return os.str();
}

void validate_rule(const Rule& r) {
  auto malformed = [](const std::string& msg) { throw Error(ErrorCode::MalformedRule, msg); };
  if (r.mode == RuleMode::Backward) {
    if (!r.pforms.empty()) malformed("backward rules carry no pform templates");
    if (r.head.kind() == TermKind::Variable) malformed("backward rule head must be a statement");
    return;
  }
  if (r.consequents.empty()) malformed("rule has no consequents");
  if (r.mode == RuleMode::Forward && !r.antecedents.empty())
    malformed("forward rules have no antecedent part");
  // Every pform label must be declared by the trigger, an antecedent, or a
  // consequent of this rule.
  std::set<std::string> labels;
  if (r.trigger.label) labels.insert(*r.trigger.label);
  for (const auto& lp : r.antecedents)
    if (lp.label && !labels.insert(*lp.label).second)
      malformed("duplicate :label " + *lp.label);
  for (const auto& lp : r.consequents)
    if (lp.label && !labels.insert(*lp.label).second)
      malformed("duplicate :label " + *lp.label);
  for (const PFormTemplate& pf : r.pforms) {
    auto check = [&](const std::string& l) {
      if (!labels.count(l))
        throw Error(ErrorCode::UnboundLabel, "pform references undeclared label " + l);
    };
    for (const std::string& l : pf.parent_labels) check(l);
    check(pf.child_label);
    if (pf.entries.empty()) malformed("pform has no entries");
    for (const EntryTemplate& e : pf.entries)
      if (e.parent_states.size() != pf.parent_labels.size())
        malformed("entry parent-state count does not match parent labels");
  }
}

}  // namespace bnforge
