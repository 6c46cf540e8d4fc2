#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace hvf;

namespace {

RunConfig config(RunMode mode, const std::string& model, const std::string& field = "e3") {
  RunConfig c;
  c.mode = mode;
  c.model = parse_model_arg(model);
  c.field = parse_field_arg(field);
  return c;
}

const Json* residual(const Json& rep, const std::string& name) {
  for (const auto& r : rep["residuals"])
    if (r["name"] == name) return &r;
  return nullptr;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  std::string cmd = std::string(HVF_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return -1;
  std::string text;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) text.append(buf, n);
  int status = pclose(p);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(CliReport, AnalyzeHopf) {
  auto rep = run(config(RunMode::Analyze, "hopf"));
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.json["verdict"], "pass");
  EXPECT_EQ(rep.json["kernel"], "exact");
  EXPECT_EQ(rep.json["classification"]["kind"], "KillingSasakianRescale");
  for (const auto& r : rep.json["residuals"]) EXPECT_TRUE(r.contains("anchor"));
  EXPECT_NE(rep.markdown.find("## Ricci"), std::string::npos);
}

TEST(CliReport, ClassifyUnimodular) {
  auto rep = run(config(RunMode::Classify, "unimodular:1,2,3"));
  EXPECT_TRUE(rep.pass);
  const auto& c = rep.json["classification"];
  EXPECT_EQ(c["emitted_brackets"], Json::array({"2", "3", "-1"}));
  EXPECT_EQ(c["milnor_input"], "SL2R");
  EXPECT_EQ(c["milnor_emitted"], "SL2R");
  EXPECT_EQ(c["b"], "1/2");
}

TEST(CliReport, NonHarmonicFieldIsInformational) {
  auto rep = run(config(RunMode::Analyze, "unimodular:1,2,3", "1,1,1"));
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.json["kernel"], "float");
  EXPECT_TRUE(rep.json.contains("fallback"));
  const Json* r = residual(rep.json, "unit_harmonic");
  ASSERT_NE(r, nullptr);
  EXPECT_FALSE((*r)["asserted"].get<bool>());
  EXPECT_GT(std::stod((*r)["value"].get<std::string>()), 0.0);
  EXPECT_EQ(rep.json["classification"]["kind"], "HypothesisFailed");
}

TEST(CliReport, ExactUnitFieldStaysExact) {
  auto rep = run(config(RunMode::Analyze, "unimodular:1,2,3", "3/5,4/5,0"));
  EXPECT_EQ(rep.json["kernel"], "exact");
}

TEST(CliReport, ChartVerify) {
  auto rep = run(config(RunMode::ChartVerify, "hyperbolic-torus"));
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.json["chart"]["points"], 27);
}

TEST(CliReport, FindHyperbolicTorus) {
  auto rep = run(config(RunMode::Find, "hyperbolic-torus"));
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.json["finder"]["directions"].size(), 1u);
  EXPECT_EQ(rep.json["finder"]["families"].size(), 1u);
}

TEST(CliReport, SweepDeterministic) {
  RunConfig c;
  c.mode = RunMode::Sweep;
  c.sweep.count = 12;
  c.sweep.seed = 5;
  c.workers = 1;
  auto a = run(c);
  c.workers = 3;
  auto b = run(c);
  EXPECT_TRUE(a.pass);
  EXPECT_EQ(a.json.dump(), b.json.dump());
  EXPECT_EQ(a.markdown, b.markdown);
  EXPECT_EQ(a.json["sweep"]["passed"], 12);
}

TEST(CliReport, CatalogListing) {
  RunConfig c;
  c.mode = RunMode::Catalog;
  auto rep = run(c);
  EXPECT_EQ(rep.json["catalog"].size(), catalog_names().size());
}

TEST(CliReport, ConfigErrorsCarryPaths) {
  try {
    parse_config(Json::parse(R"({"mode":"analyze","model":{"type":"unimodular","alpha":1,"beta":"x","gamma":3}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "model.beta");
  }
  try {
    parse_config(Json::parse(R"({"mode":"analyze","tolerances":{"algebra":1}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "tolerances.algebra");
  }
  EXPECT_THROW(parse_field(Json::array({0, 0, 0})), ConfigError);
  EXPECT_THROW(run(config(RunMode::Analyze, "round-sphere")), ConfigError);
  EXPECT_THROW(resolve_model(parse_model_arg("nope")), ConfigError);
}

TEST(CliReport, FrameModelSpec) {
  Json j = Json::parse(R"({"mode":"classify","field":"e3","model":{"type":"frame","c":[
    [[0,0,0],[0,0,1],[0,2,0]],
    [[0,0,-1],[0,0,0],[3,0,0]],
    [[0,-2,0],[-3,0,0],[0,0,0]]]}})");
  auto rep = run(parse_config(j));
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.json["classification"]["lambda"], "-12");
}

TEST(CliReport, ExitCodes) {
  std::string out;
  EXPECT_EQ(run_cli("analyze --model hopf --field e3", &out), 0);
  EXPECT_NE(out.find("\"verdict\": \"pass\""), std::string::npos);
  EXPECT_EQ(run_cli("analyze --model nope"), 2);
  EXPECT_EQ(run_cli("analyze --model unimodular:1,2,3 --field 0,0,0"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  // a tolerance too tight for the FD cross-validation fails the verdict
  EXPECT_EQ(run_cli("chart-verify --model hyperbolic-torus --config " + std::string(HVF_CONFIG_DIR) +
                    "/chart_verify_strict.json"),
            1);
}

TEST(CliReport, ConfigFilesRun) {
  const std::pair<const char*, const char*> runs[] = {
      {"analyze", "analyze_hopf.json"}, {"classify", "classify_unimodular.json"}, {"sweep", "sweep_random.json"},
      {"find", "find_hyperbolic_torus.json"}, {"chart-verify", "chart_verify_hyperbolic_torus.json"}};
  for (const auto& [mode, file] : runs)
    EXPECT_EQ(run_cli(std::string(mode) + " --config " + HVF_CONFIG_DIR + "/" + file + " --json /dev/null"), 0) << file;
}
