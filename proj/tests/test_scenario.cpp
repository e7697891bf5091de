#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kerrqed/error.hpp"
#include "kerrqed/scenario.hpp"

using namespace kerrqed;
using nlohmann::json;

namespace {

json base_json() {
  return json::parse(R"({
    "schema": "kerrqed-scenario/1",
    "name": "t",
    "params": {"omega1": 0.2, "omega2": 0.1, "lambda2": 0.1},
    "chi_over_lambda1": 0.01,
    "delta_override": 0.0,
    "initial_state": {"kind": "mixed_01", "gamma": 0.5},
    "grid": {"t_max": 10.0, "n_points": 101},
    "observables": ["concurrence"],
    "detectors": ["sudden_death"]
  })");
}

ErrorKind kind_of(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a config error");
  return ErrorKind::numeric_failure;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(parse_config(base_json()));
  json j = base_json();
  j["extra"] = 1;
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["params"]["omega3"] = 1;
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["schema"] = "other/2";
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["observables"] = json::array();
  j["detectors"] = json::array();
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["grid"]["n_points"] = 1;
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["grid"]["t_max"] = 0.0;
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["initial_state"]["gamma"] = 1.5;
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["initial_state"] = {{"kind", "coherent"}, {"alpha1", 1.0}, {"alpha2", 1.0}};
  CHECK(kind_of(j) == ErrorKind::config);  // concurrence needs the four-level states
  j = base_json();
  j["frame"] = "original";
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["detectors"] = {"revival"};
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["name"] = "../escape";
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["params"]["lambda1"] = 2.0;
  CHECK(kind_of(j) == ErrorKind::config);
  j = base_json();
  j["params"]["lambda2"] = 1.0;
  CHECK(kind_of(j) == ErrorKind::config);
}

TEST_CASE("config round trips through json") {
  for (int f = 1; f <= 4; ++f)
    for (const auto& c : figure_preset(f)) {
      const json j = to_json(c);
      CHECK(to_json(parse_config(j)) == j);
    }
  CHECK_THROWS_AS(figure_preset(5), Error);
}

TEST_CASE("resolution follows the overrides") {
  ScenarioConfig c = parse_config(base_json());
  ResolvedModel m = resolve(c);
  CHECK(m.params.Delta == 0.0);
  CHECK(std::abs(m.params.mu1) < 1e-12);
  CHECK(m.raw.omega0 == doctest::Approx(m.params.Omega2));
  CHECK(m.raw.chi_bar == doctest::Approx(0.02));
  CHECK(m.dims == Dims{3, 3});

  c.delta_override.reset();
  c.omega0 = 0.05;
  m = resolve(c);
  CHECK(m.params.Delta == doctest::Approx(m.params.Omega2 - 0.05).epsilon(1e-14));

  c.lambda = 0.3;  // mode 1 no longer decoupled
  CHECK_THROWS_AS(resolve(c), Error);
  c.engine = Engine::oracle;
  CHECK_NOTHROW(resolve(c));
}

TEST_CASE("time grid and csv format") {
  const auto t = time_grid(1.0, 5);
  REQUIRE(t.size() == 5);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 1.0);
  CHECK_THROWS_AS(time_grid(1.0, 1), Error);

  const TimeSeries s{{0.0, 0.1}, {1.0 / 3.0, -0.25}, "x"};
  CHECK(format_csv(s) == "t_lambda1,value\n0,0.33333333333333331\n0.10000000000000001,-0.25\n");
}

TEST_CASE("run_scenario writes one csv per observable and engine") {
  json j = base_json();
  j["engine"] = "both";
  j["observables"] = {"concurrence", "inversion", "linear_entropy"};
  const ScenarioConfig c = parse_config(j);
  const auto r = run_scenario(c, 2);
  REQUIRE(r.runs.size() == 2);
  const auto dir = std::filesystem::temp_directory_path() / "kerrqed_test_out";
  std::filesystem::remove_all(dir);
  const auto files = write_outputs(r, dir);
  CHECK(files.size() == 7);
  for (const auto& f : files) CHECK(std::filesystem::exists(dir / f));
  const std::string csv = slurp(dir / "t_concurrence_oracle.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 102);
  CHECK(csv.rfind("t_lambda1,value\n", 0) == 0);
  const json rep = json::parse(slurp(dir / "t_report.json"));
  CHECK(rep["schema"] == kReportSchema);
  CHECK(rep["formulas"]["sudden_death_time"].get<double>() == doctest::Approx(78.5448).epsilon(1e-5));
  CHECK(rep["detectors"].contains("analytic"));
  CHECK(rep["outputs"].size() == 6);
  std::filesystem::remove_all(dir);
}

TEST_CASE("determinism, including across thread counts") {
  const ScenarioConfig c = figure_preset(4).at(1);
  const auto a = run_scenario(c, 1), b = run_scenario(c, 3);
  CHECK(format_csv(a.runs[0].series.at(Observable::concurrence)) ==
        format_csv(b.runs[0].series.at(Observable::concurrence)));
  CHECK(a.report == b.report);
}

TEST_CASE("compare: exact regime and identical engines") {
  json j = base_json();
  j["initial_state"] = {{"kind", "fock"}, {"m1", 2}, {"m2", 3}, {"atom", "excited"}};
  j["observables"] = {"inversion", "linear_entropy"};
  j["detectors"] = json::array();
  j["grid"] = {{"t_max", 50.0}, {"n_points", 201}};
  const CompareResult cr = compare(parse_config(j), 1);
  REQUIRE(cr.items.size() == 2);
  for (const auto& d : cr.items) {
    CHECK(d.max_abs < 1e-8);
    CHECK(d.short_max_abs <= d.max_abs);
    CHECK(d.rms <= d.max_abs);
  }
  const auto& run = cr.result.runs[0];
  for (const auto& d : discrepancies(run, run, 10.0)) CHECK(d.max_abs == 0.0);
}

TEST_CASE("oracle refuses boxes above the memory cap") {
  json j = base_json();
  j["engine"] = "oracle";
  j["truncation"] = {200, 200};
  j["options"] = {{"memory_cap_mb", 1.0}};
  try {
    run_scenario(parse_config(j));
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resource_cap);
    CHECK(std::string(e.what()).find("suggested truncation") != std::string::npos);
  }
}

TEST_CASE("coherent inputs are robust to doubling the truncation") {
  json j = base_json();
  j["initial_state"] = {{"kind", "coherent"}, {"alpha1", std::sqrt(10.0)}, {"alpha2", std::sqrt(10.0)},
                        {"atom", "superposition"}};
  j["observables"] = {"inversion", "linear_entropy"};
  j["detectors"] = json::array();
  j["grid"] = {{"t_max", 30.0}, {"n_points", 31}};
  ScenarioConfig c = parse_config(j);
  const auto base = run_scenario(c, 1);
  const Dims d = base.model.dims;
  c.truncation = std::make_pair(2 * d.n1, 2 * d.n2);
  const auto doubled = run_scenario(c, 1);
  for (const auto& d2 : discrepancies(base.runs[0], doubled.runs[0], 10.0)) CHECK(d2.max_abs < 1e-6);
}
