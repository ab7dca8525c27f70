#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rouleau/errors.hpp"
#include "rouleau/output.hpp"
#include "rouleau/pipeline.hpp"
#include "rouleau/scenario.hpp"
#include "rouleau/toml_lite.hpp"
#include "rouleau/verify.hpp"

using namespace rouleau;
namespace fs = std::filesystem;

namespace {

struct Proc {
  int code = -1;
  std::string out;
};

// runs the CLI through the shell, stdout captured, stderr dropped
Proc cli(const std::string& args) {
  Proc p;
  std::string cmd = std::string("\"") + ROULEAU_CLI + "\" " + args + " 2>/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  REQUIRE(f);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) p.out.append(buf.data(), n);
  int st = pclose(f);
  p.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return p;
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("rouleau_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall = R"(name = "small"
alpha = [0.0, 0.0, 1.0]
[initial]
family = "monodisperse"
c = 2
a = 3
[lattice]
R = 32
[checkpoints]
count = 10
tau_max = 1.0
)";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("toml subset") {
  auto j = parse_toml(R"(
# comment
name = "x"   # trailing
n = 3
v = -1.5e-3
flag = true
list = [1, 2,
        3]
pts = [[2, 2, 1.0], [5, 2, 0.5]]
inl = { a = 1, b = "two" }
[tab.sub]
"quoted key" = "lit"
)");
  CHECK(j["name"] == "x");
  CHECK(j["n"].is_number_integer());
  CHECK(j["v"].get<double>() == -1.5e-3);
  CHECK(j["flag"] == true);
  CHECK(j["list"].size() == 3);
  CHECK(j["pts"][1][0] == 5);
  CHECK(j["inl"]["b"] == "two");
  CHECK(j["tab"]["sub"]["quoted key"] == "lit");
  CHECK_THROWS_AS(parse_toml("x = "), ConfigError);
  CHECK_THROWS_AS(parse_toml("x = 1\nx = 2"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml_file("/nonexistent/file.toml"), ConfigError);
}

TEST_CASE("scenario validation names the field") {
  auto cfg = parse_toml(R"(name = "bad"
alpha = [1.0, 0.0, 0.0]
[initial]
family = "points"
points = [[2, 1, 1.0]]
)");
  try {
    scenario_from_json(cfg);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "initial.points[0].a: must be >= 2 (got 1)");
  }
  auto c2 = parse_toml(kSmall);
  c2["alpha"] = nlohmann::ordered_json::array({0.0, 0.0, 0.0});
  CHECK_THROWS_AS(scenario_from_json(c2), ConfigError);
  auto c3 = parse_toml(kSmall);
  c3["bogus"] = 1;
  CHECK_THROWS_AS(scenario_from_json(c3), ConfigError);
}

TEST_CASE("bundled scenarios load") {
  for (const char* n : {"case3_delta23", "nogel_line_a2", "reference_gelling"}) {
    Scenario s = load_scenario(std::string(ROULEAU_SOURCE_DIR) + "/scenarios/" + n + ".toml");
    CHECK(s.name == n);
    CHECK(s.hash().size() == 16);
  }
}

TEST_CASE("hash is stable and follows overrides") {
  Scenario a = scenario_from_json(parse_toml(kSmall)), b = scenario_from_json(parse_toml(kSmall));
  CHECK(a.hash() == b.hash());
  override_tau_max(b, 2.0);
  CHECK(b.tau_max == 2.0);
  CHECK(a.hash() != b.hash());
  Scenario c = a;
  override_truncation(c, 64);
  CHECK(c.R == 64);
  CHECK(c.hash() != a.hash());
  CHECK(c.hash() != b.hash());
}

TEST_CASE("csv writer") {
  fs::path d = scratch("csv");
  fs::path p = d / "t.csv";
  {
    CsvWriter w(p.string(), {{"scenario_hash", "abc"}, {"code_version", "9"}}, {"name", "x", "n"});
    w.row({std::string("plain"), 0.1, 3L});
    w.row({std::string("with, comma"), 1e-300, -2L});
    w.row({std::string("quote \"q\""), 2.5, 0L});
    CHECK_THROWS(w.row({1.0}));
    w.close();
  }
  std::string raw = slurp(p);
  CHECK(raw.rfind("# scenario_hash: abc\r\n# code_version: 9\r\nname,x,n\r\n", 0) == 0);
  CHECK(raw.find("\"with, comma\"") != std::string::npos);
  CHECK(raw.find("\"quote \"\"q\"\"\"") != std::string::npos);
  CHECK(raw.find("\n\n") == std::string::npos);
  CsvTable t = read_csv(p.string());
  CHECK(t.meta.size() == 2);
  CHECK(t.meta[0].second == "abc");
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[1][0] == "with, comma");
  CHECK(t.rows[2][0] == "quote \"q\"");
  CHECK(std::stod(t.rows[0][1]) == 0.1);
  CHECK(std::stod(t.rows[1][1]) == 1e-300);
  CHECK(csv_quote("a\nb") == "\"a\nb\"");
  CHECK(csv_quote("ab") == "ab");
}

TEST_CASE("numbers round trip") {
  for (double x : {0.1, 1.0 / 3, 6.02e23, -2.5e-300, 0.0})
    CHECK(std::stod(format_number(x)) == x);
  CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("json keeps insertion order") {
  fs::path d = scratch("json");
  nlohmann::ordered_json j;
  j["zeta"] = 1;
  j["alpha"] = 2;
  j["mid"] = {{"b", 1}, {"a", 2}};
  write_json((d / "o.json").string(), j);
  std::string s = slurp(d / "o.json");
  CHECK(s.find("zeta") < s.find("alpha"));
  CHECK(s.find("\"b\"") < s.find("\"a\""));
  CHECK(nlohmann::ordered_json::parse(s) == j);
}

TEST_CASE("verify suites") {
  CHECK(suite_criteria("oracles").size() == 6);
  CHECK(suite_criteria("all").size() == 11);
  CHECK_THROWS_AS(suite_criteria("bogus"), ConfigError);
  VerifyOptions o;
  o.thresholds[11] = -1.0;
  Verifier v(o, nullptr);
  CheckRow r = v.run(11);
  CHECK_FALSE(r.pass);
  CHECK(r.value >= 0.0);
  CheckRow r1 = v.run(1);
  CHECK(r1.pass);
  auto j = rows_json({r1, r});
  CHECK(j.size() == 2);
  CHECK(j[0].begin().key() == "id");
}

TEST_CASE("command line: exit codes") {
  CHECK(cli("--help").code == 0);
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("verify bogus").code == 2);
  CHECK(cli("run /nonexistent.toml").code == 2);
  CHECK(cli("run " + std::string(ROULEAU_SOURCE_DIR) + "/scenarios/case3_delta23.toml --threads 0").code == 2);
  fs::path d = scratch("badcfg");
  write_file(d / "bad.toml", "name = \"bad\"\nalpha = [1.0, 0.0, 0.0]\n[initial]\nfamily = \"points\"\n"
                             "points = [[2, 1, 1.0]]\n");
  CHECK(cli("run " + (d / "bad.toml").string()).code == 2);
  CHECK(cli("report " + (d / "empty").string()).code == 2);
}

TEST_CASE("command line: verify oracles") {
  Proc p = cli("verify oracles");
  CHECK(p.code == 0);
  CHECK(p.out.find("PASS") != std::string::npos);
  CHECK(p.out.find("FAIL") == std::string::npos);
}

TEST_CASE("command line: run and report") {
  fs::path d = scratch("run");
  std::string cfg = kSmall;
  cfg += "[output]\ndir = \"" + (d / "out").string() + "\"\n";
  write_file(d / "small.toml", cfg);
  Proc p = cli("run " + (d / "small.toml").string());
  REQUIRE(p.code == 0);
  auto rep = nlohmann::ordered_json::parse(slurp(d / "out" / "gelation_report.json"));
  CHECK(rep["gelates"] == true);
  CHECK(rep["t_star"].get<double>() == doctest::Approx(1.0 / 3).epsilon(1e-6));
  CHECK(rep["theta"][0].get<double>() == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(rep["theta"][1].get<double>() == doctest::Approx(1.0).epsilon(1e-5));
  Scenario s = load_scenario((d / "small.toml").string());
  CHECK(rep["scenario_hash"] == s.hash());
  CHECK(rep.begin().key() == "scenario");
  for (const char* f : {"moments.csv", "selfsim.csv", "laplace.csv", "support.csv"}) {
    REQUIRE(fs::exists(d / "out" / f));
    CsvTable t = read_csv((d / "out" / f).string());
    CHECK(t.meta.at(1).first == "scenario_hash");
    CHECK(t.meta.at(1).second == s.hash());
    CHECK_FALSE(t.rows.empty());
  }
  Proc r = cli("report " + (d / "out").string());
  CHECK(r.code == 0);
  CHECK(r.out.find(s.hash()) != std::string::npos);

  // an override is reflected in the hash written to the outputs
  Proc p2 = cli("run " + (d / "small.toml").string() + " --tau-max 0.5");
  REQUIRE(p2.code == 0);
  auto rep2 = nlohmann::ordered_json::parse(slurp(d / "out" / "gelation_report.json"));
  CHECK(rep2["scenario_hash"] != s.hash());
}

TEST_CASE("command line: non-gelling scenario") {
  fs::path d = scratch("nogel");
  write_file(d / "ng.toml", "name = \"ng\"\nalpha = [0.0, 0.0, 1.0]\n[initial]\nfamily = \"points\"\n"
                            "points = [[2, 2, 1.0], [5, 2, 1.0]]\n[lattice]\nR = 128\n[checkpoints]\n"
                            "count = 5\nt_end = 2.0\n[output]\ndir = \"" +
                                (d / "out").string() + "\"\n");
  REQUIRE(cli("run " + (d / "ng.toml").string()).code == 0);
  auto rep = nlohmann::ordered_json::parse(slurp(d / "out" / "gelation_report.json"));
  CHECK(rep["gelates"] == false);
  CHECK(rep["t_star"].is_null());
  CHECK(rep["branch"] == "no_gel");
}

}
