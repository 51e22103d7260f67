#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bnforge/cli.hpp"

using namespace bnforge;

namespace {

struct CliRig {
  Engine engine;
  std::ostringstream out, err;
  CommandInterpreter cli{engine, out, err};
};

const std::string kGenetics = std::string(BNFORGE_RULESET_DIR) + "/genetics.bnr";

const char* kPedigreeScript =
    "assert (child C A B)\n"
    "assert (child D B F)\n"
    "assert (child E C D)\n"
    "assert (observed-phenotype E present)\n";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("the pedigree session prints nine-place marginals") {
  CliRig rig;
  REQUIRE(rig.cli.execute("load " + kGenetics));
  REQUIRE(rig.cli.execute_script(kPedigreeScript));
  REQUIRE(rig.cli.execute("marginals"));

  std::string text = rig.out.str();
  CHECK(text.find("(genotype A) :: a1a1=0.361111111 a1a2=0.500000000 a2a2=0.138888889") !=
        std::string::npos);
  CHECK(text.find("(genotype C) :: a1a1=0.555555556 a1a2=0.444444444 a2a2=0.000000000") !=
        std::string::npos);
  CHECK(text.find("(genotype B) :: a1a1=0.500000000 a1a2=0.444444444 a2a2=0.055555556") !=
        std::string::npos);
  CHECK(text.find("(phenotype E) :: present=1.000000000 absent=0.000000000") !=
        std::string::npos);
  CHECK(rig.err.str().empty());
  CHECK(rig.cli.error_count() == 0);
}

TEST_CASE("a marginal pattern narrows the report") {
  CliRig rig;
  rig.cli.execute("load " + kGenetics);
  rig.cli.execute_script(kPedigreeScript);
  rig.out.str("");
  REQUIRE(rig.cli.execute("marginals (genotype A)"));
  std::istringstream lines(rig.out.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 1);
}

TEST_CASE("queries print one line per binding") {
  CliRig rig;
  std::string path = "/tmp/bnforge_test_query.bnr";
  {
    std::ofstream f(path);
    f << "(<- (grandparent-of ?g ?c) (child ?p ?g ?o) (child ?c ?p ?q))\n";
  }
  rig.cli.execute("load " + path);
  rig.cli.execute_script("assert (child C A B)\nassert (child E C D)\n");
  rig.out.str("");
  REQUIRE(rig.cli.execute("query (grandparent-of ?g E)"));
  CHECK(rig.out.str() == "(grandparent-of A E)\n");
  std::remove(path.c_str());
}

TEST_CASE("failures print one located error line and count") {
  CliRig rig;

  SUBCASE("parse errors name the dsl module") {
    CHECK_FALSE(rig.cli.execute("assert (broken"));
    CHECK(rig.err.str().rfind("error[rules-dsl/ParseError]:", 0) == 0);
    CHECK(rig.cli.error_count() == 1);
  }
  SUBCASE("unknown commands") {
    CHECK_FALSE(rig.cli.execute("frobnicate x"));
    CHECK(rig.err.str() == "error[cli/UnknownCommand]: unknown command 'frobnicate'\n");
  }
  SUBCASE("unknown options") {
    CHECK_FALSE(rig.cli.execute("set bogus 3"));
    CHECK(rig.err.str() == "error[cli/UnknownOption]: unknown option 'bogus'\n");
  }
  SUBCASE("missing files") {
    CHECK_FALSE(rig.cli.execute("load /no/such/file.bnr"));
    CHECK(rig.err.str() == "error[cli/IoError]: cannot open '/no/such/file.bnr'\n");
  }
  SUBCASE("a script keeps going past a failure") {
    CHECK_FALSE(rig.cli.execute_script("set bogus 3\nset tau-accept 0.95\n"));
    CHECK(rig.cli.error_count() == 1);
    CHECK(rig.engine.session().options().tau_accept == 0.95);
  }
}

TEST_CASE("set accepts both name=value and name value") {
  CliRig rig;
  REQUIRE(rig.cli.execute("set tau-accept=0.9"));
  CHECK(rig.engine.session().options().tau_accept == 0.9);
  REQUIRE(rig.cli.execute("set max_rounds 7"));
  CHECK(rig.engine.session().options().max_rounds == 7);
}

TEST_CASE("exports land in the named files in both spellings") {
  CliRig rig;
  rig.cli.execute("load " + kGenetics);
  rig.cli.execute_script(kPedigreeScript);

  std::string dot_path = "/tmp/bnforge_test_export.dot";
  std::string json_path = "/tmp/bnforge_test_export.json";
  REQUIRE(rig.cli.execute("export dot:" + dot_path));
  REQUIRE(rig.cli.execute("export json " + json_path));

  std::string dot = slurp(dot_path);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("(genotype E)") != std::string::npos);

  auto doc = nlohmann::json::parse(slurp(json_path));
  CHECK(doc["nodes"].size() == 7);
  CHECK(doc["marginals"].size() == 7);
  std::remove(dot_path.c_str());
  std::remove(json_path.c_str());
}

TEST_CASE("show lists nodes with their markings") {
  CliRig rig;
  rig.cli.execute("load " + kGenetics);
  rig.cli.execute_script(kPedigreeScript);
  rig.out.str("");
  REQUIRE(rig.cli.execute("show nodes"));
  std::string text = rig.out.str();
  CHECK(text.find("(genotype C) states=(a1a1 a1a2 a2a2)") != std::string::npos);
  CHECK(text.find("(phenotype E) states=(present absent) evidence=present") !=
        std::string::npos);
}

TEST_CASE("comments and blank lines are no-ops") {
  CliRig rig;
  REQUIRE(rig.cli.execute("; a comment"));
  REQUIRE(rig.cli.execute("   "));
  CHECK(rig.out.str().empty());
  CHECK(rig.cli.error_count() == 0);
}

TEST_CASE("the same script replays byte-identically") {
  auto transcript = [](const std::string& script) {
    CliRig rig;
    rig.cli.execute_script(script);
    return rig.out.str() + "\x1f" + rig.err.str();
  };
  std::string script = "load " + kGenetics + "\n" + kPedigreeScript +
                       "marginals\nshow nodes\nshow cpts\nquery (genotype ?w)\n";
  std::string first = transcript(script);
  CHECK(first == transcript(script));
  CHECK(!first.empty());
}
