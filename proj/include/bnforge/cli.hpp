#pragma once

#include <iosfwd>
#include <string>

#include "bnforge/engine.hpp"

namespace bnforge {

/// The textual command set shared by batch scripts and the interactive
/// prompt: load, assert, query, marginals, run, export, set, show.
/// Results go to `out`; every failure prints one line
///   error[module/Code]: message
/// to `err` and is counted, so callers exit non-zero iff error_count() > 0.
class CommandInterpreter {
 public:
  CommandInterpreter(Engine& engine, std::ostream& out, std::ostream& err);

  /// Executes one command line. Blank lines and `;` comments are no-ops.
  /// Returns false iff the command produced an error.
  bool execute(const std::string& line);

  /// Executes every line of a command script in order, continuing past
  /// failures. Returns false iff any line produced an error.
  bool execute_script(const std::string& text);

  int error_count() const { return errors_; }

 private:
  void dispatch(const std::string& verb, const std::string& rest);
  void cmd_load(const std::string& rest);
  void cmd_assert(const std::string& rest);
  void cmd_query(const std::string& rest);
  void cmd_marginals(const std::string& rest);
  void cmd_run(const std::string& rest);
  void cmd_export(const std::string& rest);
  void cmd_set(const std::string& rest);
  void cmd_show(const std::string& rest);
  void print_marginal(const Node& n, const std::vector<double>& dist);
  void flush_warnings();

  Engine& engine_;
  std::ostream& out_;
  std::ostream& err_;
  int errors_ = 0;
};

/// "0.123456789" — fixed point, nine decimal places, as printed in marginal
/// lines.
std::string format_probability(double value);

}  // namespace bnforge
