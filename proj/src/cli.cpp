#include "bnforge/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "bnforge/errors.hpp"

namespace bnforge {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits "verb rest-of-line" at the first whitespace run.
std::pair<std::string, std::string> split_verb(const std::string& line) {
  std::size_t sp = line.find_first_of(" \t");
  if (sp == std::string::npos) return {line, ""};
  return {line.substr(0, sp), trim(line.substr(sp + 1))};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string format_probability(double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9f", value);
  return buf;
}

CommandInterpreter::CommandInterpreter(Engine& engine, std::ostream& out, std::ostream& err)
    : engine_(engine), out_(out), err_(err) {}

bool CommandInterpreter::execute(const std::string& line) {
  std::string body = trim(line);
  if (body.empty() || body[0] == ';') return true;
  auto [verb, rest] = split_verb(body);
  int before = errors_;
  try {
    dispatch(verb, rest);
  } catch (const Error& e) {
    err_ << "error[" << e.qualified_code() << "]: " << e.what() << "\n";
    ++errors_;
  } catch (const std::exception& e) {
    err_ << "error[cli/IoError]: " << e.what() << "\n";
    ++errors_;
  }
  flush_warnings();
  return errors_ == before;
}

bool CommandInterpreter::execute_script(const std::string& text) {
  int before = errors_;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) execute(line);
  return errors_ == before;
}

void CommandInterpreter::dispatch(const std::string& verb, const std::string& rest) {
  if (verb == "load")
    cmd_load(rest);
  else if (verb == "assert")
    cmd_assert(rest);
  else if (verb == "query")
    cmd_query(rest);
  else if (verb == "marginals")
    cmd_marginals(rest);
  else if (verb == "run")
    cmd_run(rest);
  else if (verb == "export")
    cmd_export(rest);
  else if (verb == "set")
    cmd_set(rest);
  else if (verb == "show")
    cmd_show(rest);
  else
    throw Error(ErrorCode::UnknownCommand, "unknown command '" + verb + "'");
}

void CommandInterpreter::cmd_load(const std::string& rest) {
  if (rest.empty()) throw Error(ErrorCode::UnknownCommand, "load needs a file path");
  engine_.load_ruleset_file(rest);
}

void CommandInterpreter::cmd_assert(const std::string& rest) {
  if (rest.empty()) throw Error(ErrorCode::UnknownCommand, "assert needs a form");
  engine_.assert_fact(parse_term(rest));
}

void CommandInterpreter::cmd_query(const std::string& rest) {
  if (rest.empty()) throw Error(ErrorCode::UnknownCommand, "query needs a pattern");
  Term pattern = parse_term(rest);
  for (const Substitution& answer : engine_.rules().answer_query(pattern))
    out_ << answer.apply(pattern).text() << "\n";
}

void CommandInterpreter::cmd_marginals(const std::string& rest) {
  std::optional<Term> pattern;
  if (!rest.empty() && rest != "all") pattern = parse_term(rest);
  auto marginals = engine_.session().evaluate_all();
  for (const auto& [id, n] : engine_.graph().nodes()) {
    if (pattern && !unify(*pattern, n.term)) continue;
    print_marginal(n, marginals.at(id));
  }
}

void CommandInterpreter::cmd_run(const std::string& rest) {
  if (rest.empty()) throw Error(ErrorCode::UnknownCommand, "run needs a file path");
  std::vector<Term> inputs = parse_terms(read_text_file(rest));
  RunResult result = engine_.session().run_loop(inputs);
  for (const CommitEvent& ev : result.commits) {
    if (ev.rejected)
      out_ << "rejected " << ev.statement.text() << " (round " << ev.round << ")\n";
    else
      out_ << "committed " << ev.statement.text() << " = " << ev.state_name << " (round "
           << ev.round << ")\n";
  }
}

void CommandInterpreter::cmd_export(const std::string& rest) {
  auto [fmt, path] = split_verb(rest);
  if (std::size_t colon = fmt.find(':'); colon != std::string::npos && path.empty()) {
    path = fmt.substr(colon + 1);
    fmt = fmt.substr(0, colon);
  }
  if (fmt.empty() || path.empty())
    throw Error(ErrorCode::UnknownCommand, "export needs a format (dot or json) and a path");
  std::string body;
  if (fmt == "dot")
    body = engine_.export_dot();
  else if (fmt == "json")
    body = engine_.export_json();
  else
    throw Error(ErrorCode::UnknownCommand, "export format must be dot or json, got '" + fmt + "'");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << body;
}

void CommandInterpreter::cmd_set(const std::string& rest) {
  auto [name, value] = split_verb(rest);
  if (std::size_t eq = name.find('='); eq != std::string::npos && value.empty()) {
    value = name.substr(eq + 1);
    name = name.substr(0, eq);
  }
  if (name.empty() || value.empty())
    throw Error(ErrorCode::UnknownOption, "set needs an option name and a value");
  engine_.session().set_option(name, value);
}

void CommandInterpreter::cmd_show(const std::string& rest) {
  if (rest == "rules") {
    const auto& rules = engine_.rules().rules();
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (i) out_ << "\n";
      out_ << serialize(RulesetItem{rules[i]}) << "\n";
    }
    return;
  }
  if (rest == "nodes") {
    for (const auto& [id, n] : engine_.graph().nodes()) {
      out_ << "[" << id << "] " << n.term.text() << " states=(";
      for (std::size_t s = 0; s < n.states.size(); ++s) out_ << (s ? " " : "") << n.states[s];
      out_ << ")";
      if (n.evidence) out_ << " evidence=" << n.states[*n.evidence];
      if (n.committed) out_ << " committed=" << n.states[*n.committed];
      out_ << "\n";
    }
    return;
  }
  if (rest == "cpts") {
    engine_.session().rebuild_cpts();
    for (const auto& [id, n] : engine_.graph().nodes()) {
      out_ << n.term.text();
      if (!n.parents.empty()) {
        out_ << " |";
        for (NodeId p : n.parents) out_ << " " << engine_.graph().at(p).term.text();
      }
      out_ << "\n";
      const std::size_t arity = n.arity();
      for (std::size_t r = 0; r * arity < n.cpt.size(); ++r) {
        out_ << " ";
        for (std::size_t s = 0; s < arity; ++s)
          out_ << " " << format_probability(n.cpt[r * arity + s]);
        out_ << "\n";
      }
    }
    return;
  }
  throw Error(ErrorCode::UnknownCommand, "show takes rules, nodes, or cpts");
}

void CommandInterpreter::print_marginal(const Node& n, const std::vector<double>& dist) {
  out_ << n.term.text() << " ::";
  for (std::size_t s = 0; s < n.states.size(); ++s)
    out_ << " " << n.states[s] << "=" << format_probability(dist[s]);
  out_ << "\n";
}

void CommandInterpreter::flush_warnings() {
  for (const std::string& w : engine_.drain_warnings()) err_ << "warning: " << w << "\n";
}

}  // namespace bnforge
