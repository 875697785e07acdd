#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "layerlq/cli.hpp"
#include "layerlq/report.hpp"

using namespace layerlq;
using json = nlohmann::json;

namespace {

const std::string kDir = LAYERLQ_SCENARIO_DIR;

struct CliRun {
  int status = 0;
  std::string out;
  std::string err;

  json report() const { return json::parse(out); }
  json error() const { return json::parse(err.substr(0, err.find('\n'))); }
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.status = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("layerlq_cli_test_" + name)).string();
}

}  // namespace

TEST(Cli, ComposeFlorentine) {
  const CliRun r = run({"compose", "--florentine", "2"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = r.report();
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["asserted"]["dim"], 120);
  EXPECT_EQ(j["asserted"]["layer_dims"], json::array({4, 15, 2}));
}

TEST(Cli, ComposeSingleLayerEchoesLayerOne) {
  const CliRun r = run({"compose", kDir + "/single_layer.json"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.report()["asserted"]["layer_dims"], json::array({2}));
  EXPECT_EQ(r.report()["asserted"]["dim"], 2);
}

TEST(Cli, ComposeWritesMatrices) {
  const std::string dir = temp_path("matrices");
  const CliRun r = run({"compose", kDir + "/two_layer.json", "--write-matrices", dir});
  ASSERT_EQ(r.status, 0) << r.err;
  std::ifstream a(dir + "/a_oplus.csv");
  int rows = 0;
  for (std::string line; std::getline(a, line);) ++rows;
  EXPECT_EQ(rows, 9);
  std::filesystem::remove_all(dir);
}

TEST(Cli, MalformedEdgeExitsTwoWithLine) {
  const CliRun r = run({"compose", kDir + "/malformed.json"});
  EXPECT_EQ(r.status, 2);
  const json e = r.error();
  EXPECT_EQ(e["error"]["reason"], "parse");
  EXPECT_EQ(e["error"]["line"], 3);
}

TEST(Cli, DimensionErrorExitsThree) {
  const std::string path = temp_path("bad_dims.json");
  std::ofstream(path) << R"({"layers": [{"nodes": 2, "edges": [[0, 1, 1]], "input_nodes": [[0, 1]]}],
                             "q1": {"diagonal": [1, 2, 3]}})";
  const CliRun r = run({"compose", path});
  EXPECT_EQ(r.status, 3);
  EXPECT_EQ(r.error()["error"]["reason"], "dimension");
  std::remove(path.c_str());
}

TEST(Cli, SynthesizeFlorentine) {
  const std::string report = temp_path("synth.json");
  const CliRun r = run({"synthesize", "--florentine", "1", "--report", report});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = r.report();
  EXPECT_TRUE(j["asserted"]["passed"]);
  const double residual = j["asserted"]["generalized_are"]["residual"];
  const double tolerance = j["asserted"]["generalized_are"]["tolerance"];
  EXPECT_LE(residual, tolerance);
  EXPECT_EQ(j["asserted"]["rank"]["controllability"], 60);
  EXPECT_EQ(j["asserted"]["rank"]["observability"], 60);
  std::ifstream file(report);
  std::stringstream buffer;
  buffer << file.rdbuf();
  EXPECT_EQ(buffer.str(), r.out);
  std::remove(report.c_str());
}

TEST(Cli, StrictCertificatesExitFour) {
  const CliRun r = run({"synthesize", "--strict-certificates", kDir + "/strict_uncertain.json"});
  EXPECT_EQ(r.status, 4);
  EXPECT_EQ(r.error()["error"]["reason"], "check_failed");
  EXPECT_EQ(r.error()["error"]["layer"], 2);
  EXPECT_FALSE(r.report()["asserted"]["passed"]);
  EXPECT_EQ(run({"synthesize", kDir + "/strict_uncertain.json"}).status, 0);
}

TEST(Cli, UncontrollableExitsFourWithRanks) {
  const CliRun r = run({"synthesize", kDir + "/uncontrollable.json"});
  EXPECT_EQ(r.status, 4);
  const json j = r.report();
  EXPECT_EQ(j["asserted"]["rank"]["layer1_controllability"], 0);
  EXPECT_FALSE(j["asserted"]["rank"]["controllable"]);
  EXPECT_EQ(r.error()["error"]["code"], 4);
}

TEST(Cli, SimulateControllers) {
  const std::string trace = temp_path("trace.csv");
  const CliRun g = run({"simulate", "--florentine", "1", "--controller", "guaranteed", "--trace", trace, "--stride", "50"});
  ASSERT_EQ(g.status, 0) << g.err;
  EXPECT_TRUE(g.report()["asserted"]["bound_satisfied"]);
  EXPECT_GE(g.report()["diagnostic"]["margin"].get<double>(), 0.0);
  std::ifstream csv(trace);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.substr(0, 8), "t,x_0,x_");
  EXPECT_EQ(header.substr(header.size() - 2), ",J");
  std::remove(trace.c_str());

  const CliRun b = run({"simulate", "--florentine", "1", "--controller", "baseline"});
  ASSERT_EQ(b.status, 0);
  EXPECT_TRUE(b.report()["asserted"]["divergent"]);
  EXPECT_GT(b.report()["asserted"]["spectral_abscissa"].get<double>(), 0.0);

  const CliRun n = run({"simulate", "--florentine", "1", "--controller", "baseline", "--weights", "0"});
  ASSERT_EQ(n.status, 0);
  EXPECT_FALSE(n.report()["asserted"]["divergent"]);
  EXPECT_LT(n.report()["asserted"]["spectral_abscissa"].get<double>(), 0.0);
}

TEST(Cli, CaseStudy) {
  const CliRun r = run({"casestudy", "florentine", "--provinces", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = r.report();
  EXPECT_TRUE(j["asserted"]["baseline"]["divergent"]);
  EXPECT_TRUE(j["asserted"]["guaranteed"]["bound_satisfied"]);
  EXPECT_EQ(run({"casestudy", "florentine", "--provinces", "7"}).status, 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).status, 1);
  EXPECT_EQ(run({"frobnicate"}).status, 1);
  EXPECT_EQ(run({"compose"}).status, 1);
  EXPECT_EQ(run({"compose", "--florentine", "1", kDir + "/single_layer.json"}).status, 1);
  const CliRun bench = run({"bench", "0"});
  EXPECT_EQ(bench.status, 1);
  EXPECT_EQ(bench.error()["error"]["reason"], "usage");
  EXPECT_EQ(run({"simulate", "--florentine", "1", "--controller", "lqg"}).status, 1);
  EXPECT_EQ(run({"simulate", "--florentine", "1", "--weights", "1,2"}).status, 3);
  EXPECT_EQ(run({"simulate", "--florentine", "1", "--weights", "9"}).status, 3);
  EXPECT_EQ(run({"--help"}).status, 0);
}

TEST(Cli, ReportsAreDeterministic) {
  const CliRun a = run({"synthesize", kDir + "/two_layer.json", "--seed", "5"});
  const CliRun b = run({"synthesize", kDir + "/two_layer.json", "--seed", "5"});
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(strip_diagnostics(a.report()).dump(), strip_diagnostics(b.report()).dump());
  const CliRun c = run({"simulate", kDir + "/two_layer.json", "--seed", "5"});
  const CliRun d = run({"simulate", kDir + "/two_layer.json", "--seed", "5"});
  EXPECT_EQ(c.out, d.out);
  const CliRun e = run({"synthesize", kDir + "/two_layer.json", "--seed", "6"});
  EXPECT_NE(strip_diagnostics(a.report()).dump(), strip_diagnostics(e.report()).dump());
}
