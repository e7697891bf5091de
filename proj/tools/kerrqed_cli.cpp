// kerrqed: scenario runner for the two-mode Kerr cavity model.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kerrqed/error.hpp"
#include "kerrqed/scenario.hpp"

namespace {

using nlohmann::json;
using namespace kerrqed;

struct Overrides {
  std::vector<int> truncation;
  std::optional<double> t_max;
  std::optional<int> points;
};

void apply(ScenarioConfig& c, const Overrides& o) {
  if (!o.truncation.empty()) c.truncation = std::make_pair(o.truncation[0], o.truncation[1]);
  if (o.t_max) c.t_max = *o.t_max;
  if (o.points) c.n_points = *o.points;
  validate(c);
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
    case ErrorKind::invalid_input:
      return 2;
    case ErrorKind::resource_cap:
      return 4;
    default:
      return 3;
  }
}

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-mode Kerr cavity QED scenario runner"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir;
  if (const char* env = std::getenv(kOutDirEnv)) out_dir = env;
  if (out_dir.empty()) out_dir = "out";
  int threads = 1;
  Overrides ov;

  app.add_option("--out-dir", out_dir, std::string("Output directory (env ") + kOutDirEnv + ")");
  app.add_option("--threads", threads, "Worker threads for time-grid evaluation")->check(CLI::PositiveNumber);
  app.add_option("--truncation", ov.truncation, "Fock dimensions N1 N2")->expected(2);
  app.add_option("--t-max", ov.t_max, "Final scaled time lambda1 t");
  app.add_option("--points", ov.points, "Number of grid points");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a scenario config");
  run->add_option("config", config_path, "Scenario JSON")->required();
  auto* cmp = app.add_subcommand("compare", "Analytic vs oracle discrepancy");
  cmp->add_option("config", config_path, "Scenario JSON")->required();
  int figure = 0;
  auto* fig = app.add_subcommand("figures", "Bundled figure presets");
  fig->add_option("n", figure, "Figure number 1-4")->required()->check(CLI::Range(1, 4));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", e.what(), 2);
  }

  try {
    json summary = {{"out_dir", out_dir}, {"files", json::array()}};
    auto emit = [&](const ScenarioResult& r) {
      for (const auto& f : write_outputs(r, out_dir)) summary["files"].push_back(f);
    };
    if (*run) {
      ScenarioConfig c = load_config(config_path);
      apply(c, ov);
      emit(run_scenario(c, threads));
    } else if (*cmp) {
      ScenarioConfig c = load_config(config_path);
      apply(c, ov);
      const CompareResult cr = compare(c, threads);
      emit(cr.result);
      const std::string name = c.name + "_compare.json";
      write_atomic(std::filesystem::path(out_dir) / name, cr.report.dump(2) + "\n");
      summary["files"].push_back(name);
      summary["discrepancy"] = cr.report["discrepancy"];
    } else {
      for (ScenarioConfig c : figure_preset(figure)) {
        apply(c, ov);
        emit(run_scenario(c, threads));
      }
    }
    std::cout << summary.dump(2) << "\n";
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error("io", e.what(), 3);
  }
  return 0;
}
