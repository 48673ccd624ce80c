#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "gri/spacefile.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(GRI_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string example(const std::string& name) {
  return std::string(GRI_EXAMPLES_DIR) + "/" + name;
}

std::string temp_file(const std::string& name, const std::string& content) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << content;
  return p.string();
}

}  // namespace

TEST_CASE("tensors on the sphere example") {
  RunResult r = run_cli("tensors --input " + example("sphere.json") +
                        " --point 1.2,0.3");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j["dimension"] == 2);
  REQUIRE(j["tensors"].size() == 1);
  double c212 = j["tensors"][0]["christoffel"][1][0][1].get<double>();
  CHECK(c212 == doctest::Approx(std::cos(1.2) / std::sin(1.2)).epsilon(1e-10));
  double c122 = j["tensors"][0]["christoffel"][0][1][1].get<double>();
  CHECK(c122 ==
        doctest::Approx(-std::sin(1.2) * std::cos(1.2)).epsilon(1e-10));
  // scalar curvature of the unit sphere in this sign convention
  CHECK(j["tensors"][0]["scalar"].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("thomas invariants on the bundled torsion space") {
  RunResult r = run_cli("thomas --input " + example("flat_with_torsion.json") +
                        " --r all");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j["invariants"].size() == 32);
  CHECK(j["points"].size() == 10);
}

TEST_CASE("selector parse failures exit with the usage code") {
  CHECK(run_cli("thomas --input " + example("sphere.json") + " --r 13121")
            .exit_code == 2);
  CHECK(run_cli("thomas --input " + example("sphere.json") + " --r 121")
            .exit_code == 2);
  CHECK(run_cli("weyl --input " + example("flat_with_torsion.json") +
                " --rho random:0")
            .exit_code == 2);
}

TEST_CASE("missing or malformed inputs exit with the usage code") {
  CHECK(run_cli("tensors --input /nonexistent.json").exit_code == 2);
  CHECK(run_cli("nosuchcommand").exit_code == 2);
  CHECK(run_cli("tensors").exit_code == 2);  // --input is required
  std::string bad = temp_file("gri_bad.json", "{ not json");
  CHECK(run_cli("tensors --input " + bad).exit_code == 2);
  std::string nopts = temp_file(
      "gri_nopts.json",
      R"json({"dimension":2,"coords":["x1","x2"],"metric":[["1","0"],["0","1"]]})json");
  CHECK(run_cli("tensors --input " + nopts).exit_code == 2);
}

TEST_CASE("math failures exit with the math code") {
  // two-dimensional space has no conformal curvature
  CHECK(run_cli("weyl --input " + example("sphere.json")).exit_code == 3);
  // singular symmetric part at the sampled point
  std::string sing = temp_file(
      "gri_sing.json",
      R"json({"dimension":2,"coords":["x1","x2"],"metric":[["x1","0"],["0","1"]],
          "points":[[0.0, 0.1]]})json");
  CHECK(run_cli("tensors --input " + sing).exit_code == 3);
}

TEST_CASE("weyl family output is deterministic for a fixed seed") {
  std::string args = "weyl --input " + example("flat_with_torsion.json") +
                     " --rho random:3 --seed 5 --params 0.3,-0.2,0.1,0.4,-0.1";
  RunResult a = run_cli(args);
  RunResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  json j = json::parse(a.out);
  CHECK(j["invariants"].size() == 3);
}

TEST_CASE("verify reports known failures and honors overrides") {
  std::string base = "verify --seed 3 --dim 3 --points 4";
  RunResult r = run_cli(base);
  CHECK(r.exit_code == 1);
  json j = json::parse(r.out);
  CHECK(j["all_pass"] == false);
  int fails = 0;
  for (const auto& c : j["checks"])
    if (c["verdict"] == "fail") ++fails;
  CHECK(fails == 2);

  RunResult again = run_cli(base);
  CHECK(again.out == r.out);

  RunResult loose = run_cli(
      base +
      " --tol weyl_type_covariant_invariance=1.0 --tol torsion_summand_rank=2");
  CHECK(loose.exit_code == 0);
}

TEST_CASE("detect distinguishes conformal pairs") {
  std::string a = temp_file(
      "gri_det_a.json",
      R"json({"dimension":3,"coords":["x1","x2","x3"],
          "metric":[["1","0.2*x3","0"],["-0.2*x3","1","0"],["0","0","1"]],
          "sampler":{"count":6,"seed":9,"box":[-0.5,0.5]}})json");
  std::string b = temp_file(
      "gri_det_b.json",
      R"json({"dimension":3,"coords":["x1","x2","x3"],
          "metric":[["exp(0.2*x1)","exp(0.2*x1)*0.2*x3","0"],
                    ["-exp(0.2*x1)*0.2*x3","exp(0.2*x1)","0"],
                    ["0","0","exp(0.2*x1)"]]})json");
  RunResult yes = run_cli("detect " + a + " " + b);
  CHECK(yes.exit_code == 0);
  json jy = json::parse(yes.out);
  CHECK(jy["conformal"] == true);
  CHECK(jy["thomas_invariants_equal"] == true);

  std::string c = temp_file(
      "gri_det_c.json",
      R"json({"dimension":3,"coords":["x1","x2","x3"],
          "metric":[["1+x1","0.2*x3","0"],["-0.2*x3","1","0"],["0","0","1"]]})json");
  RunResult no = run_cli("detect " + a + " " + c);
  CHECK(no.exit_code == 1);
  json jn = json::parse(no.out);
  CHECK(jn["conformal"] == false);
  CHECK(jn.contains("witness"));
}

TEST_CASE("space files round-trip through serialization") {
  gri::SpaceFile sf = gri::load_space_file(example("flat_with_torsion.json"));
  gri::ExprPool pool;
  gri::MetricField m = gri::to_metric(pool, sf);
  gri::SpaceFile back = gri::from_metric(m);
  gri::MetricField m2 = gri::to_metric(pool, back);
  for (size_t c = 0; c < m.G.components().size(); ++c)
    CHECK(m.G.components()[c] == m2.G.components()[c]);
  CHECK(m.psi == m2.psi);
}
