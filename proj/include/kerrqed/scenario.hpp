#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "kerrqed/analysis.hpp"
#include "kerrqed/hilbert.hpp"
#include "kerrqed/model.hpp"
#include "kerrqed/oracle.hpp"

namespace kerrqed {

inline constexpr const char* kScenarioSchema = "kerrqed-scenario/1";
inline constexpr const char* kReportSchema = "kerrqed-report/1";
inline constexpr const char* kCompareSchema = "kerrqed-compare/1";
inline constexpr const char* kOutDirEnv = "KERRQED_OUT_DIR";

enum class Engine { analytic, oracle, both };
enum class Observable { inversion, linear_entropy, concurrence };
enum class Detector { revival, sudden_death };
enum class AtomPrep { excited, ground, superposition };

const char* to_string(Engine e);
const char* to_string(Observable o);
const char* to_string(Detector d);
const char* to_string(Frame f);

/// alpha_i = |alpha_i| exp(i phi)
struct CoherentInit {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double phi = 0.0;
  AtomPrep atom = AtomPrep::excited;
};
struct FockInit {
  int m1 = 0;
  int m2 = 0;
  AtomPrep atom = AtomPrep::excited;
};
/// gamma |0,1;e><0,1;e| + (1 - gamma) |0,1;g><0,1;g|
struct Mixed01Init {
  double gamma = 0.5;
};
using InitialState = std::variant<CoherentInit, FockInit, Mixed01Init>;

struct ScenarioOptions {
  double esd_eps = 1e-4;
  double esd_dwell = 5.0;
  double t_short = 10.0;
  double memory_cap_mb = 4096.0;
  std::optional<double> revival_window;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double omega1 = 0.0;
  double omega2 = 0.0;
  double lambda2 = 0.0;
  std::optional<double> lambda;  // absent: balanced value
  std::optional<double> omega0;  // absent: Omega2 - Delta
  std::optional<double> delta_override;
  double chi_over_lambda1 = 0.0;
  FrequencyForm frequency_form = FrequencyForm::linear;
  InitialState initial = FockInit{};
  Frame frame = Frame::transformed;
  Engine engine = Engine::analytic;
  double t_max = 1.0;
  int n_points = 2;
  std::vector<Observable> observables;
  std::vector<Detector> detectors;
  std::optional<std::pair<int, int>> truncation;
  std::uint64_t seed = 0;
  ScenarioOptions options;
};

/// Strict parse (unknown keys rejected) followed by validate(). Throws
/// Error{config}.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioConfig& c);
void validate(const ScenarioConfig& c);

/// Fully resolved physical model for a config.
struct ResolvedModel {
  RawParams raw;          // lambda and omega0 filled in
  TransformedParams params;  // Delta from the override when given
  Dims dims;
  double discarded_mass1 = 0.0;
  double discarded_mass2 = 0.0;
  double mean_n1 = 0.0;  // rotated-frame occupations of the initial state
  double mean_n2 = 0.0;
};

ResolvedModel resolve(const ScenarioConfig& c);

/// Initial ensemble expressed in the rotated (b) frame.
Ensemble initial_rotated(const ScenarioConfig& c, const ResolvedModel& m);
/// Initial ensemble in the frame the oracle propagates in.
Ensemble initial_for_oracle(const ScenarioConfig& c, const ResolvedModel& m);

std::vector<double> time_grid(double t_max, int n_points);

struct EngineRun {
  Engine engine;  // analytic or oracle
  std::map<Observable, TimeSeries> series;
  nlohmann::json detectors = nlohmann::json::object();
};

struct ScenarioResult {
  ScenarioConfig config;
  ResolvedModel model;
  std::vector<EngineRun> runs;
  nlohmann::json report;
};

ScenarioResult run_scenario(const ScenarioConfig& c, int threads = 1);

struct Discrepancy {
  Observable observable;
  double max_abs = 0.0;
  double rms = 0.0;
  double short_max_abs = 0.0;  // restricted to t <= t_short
};

/// Pairwise discrepancy between two runs over a shared grid.
std::vector<Discrepancy> discrepancies(const EngineRun& a, const EngineRun& b, double t_short);

struct CompareResult {
  ScenarioResult result;  // engine forced to both
  std::vector<Discrepancy> items;
  nlohmann::json report;
};

CompareResult compare(const ScenarioConfig& c, int threads = 1);

/// "t_lambda1,value" header, 17 significant digits, LF endings.
std::string format_csv(const TimeSeries& s);

/// Writes via a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// Writes CSVs and the JSON report; returns the written file names.
std::vector<std::string> write_outputs(const ScenarioResult& r, const std::filesystem::path& dir);

/// Bundled parameter sets for figures 1-4.
std::vector<ScenarioConfig> figure_preset(int figure);

}  // namespace kerrqed
