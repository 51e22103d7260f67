#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bnforge/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bnforge: builds belief networks from chaining rules and answers marginal queries"};

  std::vector<std::string> rule_files;
  std::vector<std::string> option_sets;
  std::vector<std::string> eval_commands;
  std::string script_path;
  std::string export_spec;
  long long seed = 0;

  app.add_option("--rules", rule_files, "ruleset file to load (repeatable)");
  app.add_option("--script", script_path, "command script to execute");
  app.add_option("--eval", eval_commands, "command to execute (repeatable)");
  app.add_option("--export", export_spec, "write the network on exit, as <fmt>:<path> with fmt dot or json");
  app.add_option("--set", option_sets, "session option as <opt>=<val> (repeatable)");
  app.add_option("--seed", seed, "random seed (reserved for test generators)");

  CLI11_PARSE(app, argc, argv);
  (void)seed;

  bnforge::Engine engine;
  bnforge::CommandInterpreter interp(engine, std::cout, std::cerr);

  for (const std::string& opt : option_sets) interp.execute("set " + opt);
  for (const std::string& path : rule_files) interp.execute("load " + path);

  if (!script_path.empty()) {
    std::ifstream in(script_path, std::ios::binary);
    if (!in) {
      std::cerr << "error[cli/IoError]: cannot open '" << script_path << "'\n";
      return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    interp.execute_script(buf.str());
  }

  for (const std::string& cmd : eval_commands) interp.execute(cmd);

  // With no script, nothing to evaluate, and no export, read commands from
  // stdin until end of input (this is the interactive prompt).
  if (script_path.empty() && eval_commands.empty() && export_spec.empty()) {
    std::string line;
    while (std::getline(std::cin, line)) interp.execute(line);
  }

  if (!export_spec.empty()) interp.execute("export " + export_spec);

  return interp.error_count() ? 1 : 0;
}
