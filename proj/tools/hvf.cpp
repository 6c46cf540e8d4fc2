// Command-line front end: hvf <mode> [--config PATH] [overrides]
// Exit status: 0 verdict pass, 1 verdict fail, 2 config or usage error.

#include "hvf/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct Overrides {
  std::string config_path;
  std::string model;
  std::string field;
  std::optional<double> tol;
  std::optional<double> fd_step;
  std::string json_path;
  std::string md_path;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::string kernel;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON run configuration");
  sub->add_option("--model", o.model, "model: catalog name, unimodular:a,b,c, chart:name or a JSON object");
  sub->add_option("--field", o.field, "field: e1, e2, e3 or x,y,z");
  sub->add_option("--tol", o.tol, "algebraic tolerance");
  sub->add_option("--fd-step", o.fd_step, "finite-difference step");
  sub->add_option("--json", o.json_path, "write the JSON report here ('-' for stdout)");
  sub->add_option("--md", o.md_path, "write the Markdown report here ('-' for stdout)");
  sub->add_option("--workers", o.workers, "worker threads for find and sweep");
  sub->add_option("--seed", o.seed, "sweep seed");
  sub->add_option("--kernel", o.kernel, "auto, exact or float");
}

hvf::RunConfig load(const std::string& mode, const Overrides& o) {
  hvf::Json j = hvf::Json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw hvf::ConfigError("--config", "cannot open '" + o.config_path + "'");
    try {
      j = hvf::Json::parse(in);
    } catch (const std::exception& e) {
      throw hvf::ConfigError("--config", e.what());
    }
  }
  if (j.contains("mode") && j["mode"].is_string() && j["mode"].get<std::string>() != mode)
    throw hvf::ConfigError("mode", "config says '" + j["mode"].get<std::string>() + "' but subcommand is '" + mode + "'");
  j["mode"] = mode;
  auto cfg = hvf::parse_config(j);
  if (!o.model.empty()) cfg.model = hvf::parse_model_arg(o.model);
  if (!o.field.empty()) cfg.field = hvf::parse_field_arg(o.field);
  if (o.tol) cfg.tolerances.algebraic = *o.tol;
  if (o.fd_step) cfg.tolerances.fd_step = *o.fd_step;
  if (!o.json_path.empty()) cfg.output.json_path = o.json_path;
  if (!o.md_path.empty()) cfg.output.markdown_path = o.md_path;
  if (o.workers) cfg.workers = *o.workers;
  if (o.seed) cfg.sweep.seed = *o.seed;
  if (!o.kernel.empty()) cfg.kernel = o.kernel;
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hvf::ConfigError("output", "cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification and classification of harmonic unit vector fields on 3-dimensional frame models"};
  app.require_subcommand(1);
  Overrides o;
  for (const char* mode : {"analyze", "classify", "find", "chart-verify", "sweep", "catalog"}) add_common(app.add_subcommand(mode), o);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  std::string mode = app.get_subcommands().front()->get_name();
  try {
    auto cfg = load(mode, o);
    auto rep = hvf::run(cfg);
    std::string json = rep.json.dump(2) + "\n";
    if (cfg.output.json_path.empty() && cfg.output.markdown_path.empty()) {
      std::cout << json;
    } else {
      if (!cfg.output.json_path.empty()) emit(cfg.output.json_path, json);
      if (!cfg.output.markdown_path.empty()) emit(cfg.output.markdown_path, rep.markdown);
    }
    std::cerr << "verdict: " << (rep.pass ? "pass" : "fail") << "\n";
    return rep.pass ? 0 : 1;
  } catch (const hvf::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
