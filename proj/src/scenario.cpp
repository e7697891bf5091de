#include "kerrqed/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>
#include <system_error>
#include <thread>

#include "kerrqed/propagator.hpp"

namespace kerrqed {

using json = nlohmann::json;

const char* to_string(Engine e) {
  switch (e) {
    case Engine::analytic: return "analytic";
    case Engine::oracle: return "oracle";
    case Engine::both: return "both";
  }
  return "?";
}

const char* to_string(Observable o) {
  switch (o) {
    case Observable::inversion: return "inversion";
    case Observable::linear_entropy: return "linear_entropy";
    case Observable::concurrence: return "concurrence";
  }
  return "?";
}

const char* to_string(Detector d) {
  switch (d) {
    case Detector::revival: return "revival";
    case Detector::sudden_death: return "sudden_death";
  }
  return "?";
}

const char* to_string(Frame f) { return f == Frame::original ? "original" : "transformed"; }

namespace {

const char* to_string(AtomPrep a) {
  switch (a) {
    case AtomPrep::excited: return "excited";
    case AtomPrep::ground: return "ground";
    case AtomPrep::superposition: return "superposition";
  }
  return "?";
}

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::config, what); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where + ": expected an object");
  for (const auto& [k, _] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
    if (!ok) config_error(where + ": unknown key '" + k + "'");
  }
}

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) config_error(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) config_error(what + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_error(what + ": must be finite");
  return x;
}

int as_int(const json& v, const std::string& what) {
  if (!v.is_number_integer()) config_error(what + ": expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& what) {
  if (!v.is_string()) config_error(what + ": expected a string");
  return v.get<std::string>();
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return as_number(obj.at(key), where + "." + key);
}

template <class E, std::size_t N>
E parse_enum(const json& v, const std::array<std::pair<const char*, E>, N>& table, const std::string& what) {
  const std::string s = as_string(v, what);
  for (const auto& [name, e] : table)
    if (s == name) return e;
  config_error(what + ": unknown value '" + s + "'");
}

constexpr std::array<std::pair<const char*, AtomPrep>, 3> kAtomNames{{
    {"excited", AtomPrep::excited}, {"ground", AtomPrep::ground}, {"superposition", AtomPrep::superposition}}};
constexpr std::array<std::pair<const char*, Frame>, 2> kFrameNames{{
    {"original", Frame::original}, {"transformed", Frame::transformed}}};
constexpr std::array<std::pair<const char*, Engine>, 3> kEngineNames{{
    {"analytic", Engine::analytic}, {"oracle", Engine::oracle}, {"both", Engine::both}}};
constexpr std::array<std::pair<const char*, Observable>, 3> kObservableNames{{
    {"inversion", Observable::inversion},
    {"linear_entropy", Observable::linear_entropy},
    {"concurrence", Observable::concurrence}}};
constexpr std::array<std::pair<const char*, Detector>, 2> kDetectorNames{{
    {"revival", Detector::revival}, {"sudden_death", Detector::sudden_death}}};
constexpr std::array<std::pair<const char*, FrequencyForm>, 2> kFormNames{{
    {"linear", FrequencyForm::linear}, {"printed_sqrt", FrequencyForm::printed_sqrt}}};

InitialState parse_initial(const json& j) {
  const std::string where = "initial_state";
  if (!j.is_object()) config_error(where + ": expected an object");
  const std::string kind = as_string(need(j, "kind", where), where + ".kind");
  if (kind == "coherent") {
    check_keys(j, {"kind", "alpha1", "alpha2", "phi", "atom"}, where);
    CoherentInit c;
    c.alpha1 = as_number(need(j, "alpha1", where), where + ".alpha1");
    c.alpha2 = as_number(need(j, "alpha2", where), where + ".alpha2");
    c.phi = optional_number(j, "phi", where).value_or(0.0);
    if (j.contains("atom")) c.atom = parse_enum(j.at("atom"), kAtomNames, where + ".atom");
    return c;
  }
  if (kind == "fock") {
    check_keys(j, {"kind", "m1", "m2", "atom"}, where);
    FockInit f;
    f.m1 = as_int(need(j, "m1", where), where + ".m1");
    f.m2 = as_int(need(j, "m2", where), where + ".m2");
    if (j.contains("atom")) f.atom = parse_enum(j.at("atom"), kAtomNames, where + ".atom");
    return f;
  }
  if (kind == "mixed_01") {
    check_keys(j, {"kind", "gamma"}, where);
    return Mixed01Init{as_number(need(j, "gamma", where), where + ".gamma")};
  }
  config_error(where + ".kind: unknown value '" + kind + "'");
}

json initial_to_json(const InitialState& s) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CoherentInit>)
          return {{"kind", "coherent"}, {"alpha1", v.alpha1}, {"alpha2", v.alpha2},
                  {"phi", v.phi}, {"atom", to_string(v.atom)}};
        else if constexpr (std::is_same_v<T, FockInit>)
          return {{"kind", "fock"}, {"m1", v.m1}, {"m2", v.m2}, {"atom", to_string(v.atom)}};
        else
          return {{"kind", "mixed_01"}, {"gamma", v.gamma}};
      },
      s);
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

bool has(const std::vector<Observable>& v, Observable o) {
  return std::find(v.begin(), v.end(), o) != v.end();
}
bool has(const std::vector<Detector>& v, Detector d) {
  return std::find(v.begin(), v.end(), d) != v.end();
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
  check_keys(j, {"schema", "name", "params", "chi_over_lambda1", "delta_override", "frequency_form",
                 "initial_state", "frame", "engine", "grid", "observables", "detectors",
                 "truncation", "seed", "options"},
             "config");
  const std::string schema = as_string(need(j, "schema", "config"), "schema");
  if (schema != kScenarioSchema)
    config_error("schema: expected '" + std::string(kScenarioSchema) + "', got '" + schema + "'");

  ScenarioConfig c;
  if (j.contains("name")) c.name = as_string(j.at("name"), "name");

  const json& p = need(j, "params", "config");
  check_keys(p, {"omega1", "omega2", "omega0", "lambda", "lambda1", "lambda2"}, "params");
  c.omega1 = as_number(need(p, "omega1", "params"), "params.omega1");
  c.omega2 = as_number(need(p, "omega2", "params"), "params.omega2");
  c.lambda2 = as_number(need(p, "lambda2", "params"), "params.lambda2");
  c.omega0 = optional_number(p, "omega0", "params");
  c.lambda = optional_number(p, "lambda", "params");
  if (auto l1 = optional_number(p, "lambda1", "params"); l1 && *l1 != 1.0)
    config_error("params.lambda1: all quantities are in units of lambda1, so it must be 1");

  c.chi_over_lambda1 = as_number(need(j, "chi_over_lambda1", "config"), "chi_over_lambda1");
  c.delta_override = optional_number(j, "delta_override", "config");
  if (j.contains("frequency_form"))
    c.frequency_form = parse_enum(j.at("frequency_form"), kFormNames, "frequency_form");
  c.initial = parse_initial(need(j, "initial_state", "config"));
  if (j.contains("frame")) c.frame = parse_enum(j.at("frame"), kFrameNames, "frame");
  if (j.contains("engine")) c.engine = parse_enum(j.at("engine"), kEngineNames, "engine");

  const json& g = need(j, "grid", "config");
  check_keys(g, {"t_max", "n_points"}, "grid");
  c.t_max = as_number(need(g, "t_max", "grid"), "grid.t_max");
  c.n_points = as_int(need(g, "n_points", "grid"), "grid.n_points");

  const json& obs = need(j, "observables", "config");
  if (!obs.is_array()) config_error("observables: expected an array");
  for (const auto& o : obs) c.observables.push_back(parse_enum(o, kObservableNames, "observables[]"));
  if (j.contains("detectors")) {
    const json& det = j.at("detectors");
    if (!det.is_array()) config_error("detectors: expected an array");
    for (const auto& d : det) c.detectors.push_back(parse_enum(d, kDetectorNames, "detectors[]"));
  }
  if (j.contains("truncation") && !j.at("truncation").is_null()) {
    const json& t = j.at("truncation");
    if (!t.is_array() || t.size() != 2) config_error("truncation: expected [n1_dim, n2_dim]");
    c.truncation = std::make_pair(as_int(t[0], "truncation[0]"), as_int(t[1], "truncation[1]"));
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) config_error("seed: expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("options")) {
    const json& o = j.at("options");
    check_keys(o, {"esd_eps", "esd_dwell", "t_short", "memory_cap_mb", "revival_window"}, "options");
    auto& opt_ = c.options;
    opt_.esd_eps = optional_number(o, "esd_eps", "options").value_or(opt_.esd_eps);
    opt_.esd_dwell = optional_number(o, "esd_dwell", "options").value_or(opt_.esd_dwell);
    opt_.t_short = optional_number(o, "t_short", "options").value_or(opt_.t_short);
    opt_.memory_cap_mb = optional_number(o, "memory_cap_mb", "options").value_or(opt_.memory_cap_mb);
    opt_.revival_window = optional_number(o, "revival_window", "options");
  }
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

json to_json(const ScenarioConfig& c) {
  json params = {{"omega1", c.omega1}, {"omega2", c.omega2}, {"lambda2", c.lambda2}};
  if (c.omega0) params["omega0"] = *c.omega0;
  if (c.lambda) params["lambda"] = *c.lambda;
  json j = {{"schema", kScenarioSchema},
            {"name", c.name},
            {"params", params},
            {"chi_over_lambda1", c.chi_over_lambda1},
            {"delta_override", opt(c.delta_override)},
            {"frequency_form", c.frequency_form == FrequencyForm::linear ? "linear" : "printed_sqrt"},
            {"initial_state", initial_to_json(c.initial)},
            {"frame", to_string(c.frame)},
            {"engine", to_string(c.engine)},
            {"grid", {{"t_max", c.t_max}, {"n_points", c.n_points}}},
            {"seed", c.seed}};
  j["observables"] = json::array();
  for (auto o : c.observables) j["observables"].push_back(to_string(o));
  j["detectors"] = json::array();
  for (auto d : c.detectors) j["detectors"].push_back(to_string(d));
  j["truncation"] = c.truncation ? json::array({c.truncation->first, c.truncation->second}) : json(nullptr);
  j["options"] = {{"esd_eps", c.options.esd_eps},
                  {"esd_dwell", c.options.esd_dwell},
                  {"t_short", c.options.t_short},
                  {"memory_cap_mb", c.options.memory_cap_mb},
                  {"revival_window", opt(c.options.revival_window)}};
  return j;
}

void validate(const ScenarioConfig& c) {
  static const std::regex name_re("[A-Za-z0-9_.-]+");
  if (!std::regex_match(c.name, name_re)) config_error("name: only [A-Za-z0-9_.-] allowed");
  if (!(c.t_max > 0.0)) config_error("grid.t_max must be > 0");
  if (c.n_points < 2) config_error("grid.n_points must be >= 2");
  if (c.observables.empty()) config_error("observables: at least one observable is required");
  if (std::set<Observable>(c.observables.begin(), c.observables.end()).size() != c.observables.size())
    config_error("observables: duplicates");
  if (std::set<Detector>(c.detectors.begin(), c.detectors.end()).size() != c.detectors.size())
    config_error("detectors: duplicates");
  if (c.lambda2 < 0.0) config_error("params.lambda2 must be >= 0");
  if (!c.lambda && c.lambda2 == 1.0)
    config_error("params: balanced coupling is singular for lambda2 == lambda1");

  if (const auto* m = std::get_if<Mixed01Init>(&c.initial))
    if (!(m->gamma >= 0.0 && m->gamma <= 1.0)) config_error("initial_state.gamma must lie in [0, 1]");
  if (const auto* f = std::get_if<FockInit>(&c.initial))
    if (f->m1 < 0 || f->m2 < 0) config_error("initial_state: Fock indices must be >= 0");
  if (const auto* co = std::get_if<CoherentInit>(&c.initial))
    if (co->alpha1 < 0.0 || co->alpha2 < 0.0)
      config_error("initial_state: coherent magnitudes must be >= 0");

  if (has(c.observables, Observable::concurrence)) {
    const auto* f = std::get_if<FockInit>(&c.initial);
    const bool fock01 = f && f->m1 == 0 && f->m2 == 1 && f->atom != AtomPrep::superposition;
    if (!fock01 && !std::holds_alternative<Mixed01Init>(c.initial))
      config_error("concurrence needs a mixed_01 or fock(0, 1, e|g) initial state");
    if (c.frame != Frame::transformed)
      config_error("concurrence is defined on the rotated-frame four-level subspace; use frame 'transformed'");
  }
  if (has(c.detectors, Detector::revival) && !has(c.observables, Observable::inversion))
    config_error("revival detector needs the inversion observable");
  if (has(c.detectors, Detector::sudden_death) && !has(c.observables, Observable::concurrence))
    config_error("sudden_death detector needs the concurrence observable");
  if (c.truncation && (c.truncation->first < 2 || c.truncation->second < 2))
    config_error("truncation: each mode needs at least 2 levels");
  if (c.truncation && has(c.observables, Observable::concurrence) && c.truncation->second < 3)
    config_error("truncation: concurrence needs at least 3 levels in mode 2");
  if (!(c.options.esd_eps > 0.0) || c.options.esd_dwell < 0.0)
    config_error("options: esd_eps must be > 0 and esd_dwell >= 0");
  if (!(c.options.memory_cap_mb > 0.0)) config_error("options.memory_cap_mb must be > 0");
  if (c.options.revival_window && !(*c.options.revival_window > 0.0))
    config_error("options.revival_window must be > 0");
}

namespace {

RawParams raw_from(const ScenarioConfig& c) {
  RawParams raw;
  raw.omega1 = c.omega1;
  raw.omega2 = c.omega2;
  raw.lambda1 = 1.0;
  raw.lambda2 = c.lambda2;
  raw.chi1 = raw.chi2 = c.chi_over_lambda1;
  raw.chi_bar = 2.0 * c.chi_over_lambda1;
  return raw;
}

std::array<cplx, 2> atom_amplitudes(AtomPrep a) {
  const double r = 1.0 / std::numbers::sqrt2;
  switch (a) {
    case AtomPrep::excited: return {1.0, 0.0};
    case AtomPrep::ground: return {0.0, 1.0};
    case AtomPrep::superposition: return {r, r};
  }
  return {1.0, 0.0};
}

PureState with_atom(const Dims& d, AtomPrep atom, const CVector& f1, const CVector& f2) {
  const auto a = atom_amplitudes(atom);
  CVector v(static_cast<Eigen::Index>(d.size()));
  for (int l = 0; l < 2; ++l)
    for (int m1 = 0; m1 < d.n1; ++m1)
      for (int m2 = 0; m2 < d.n2; ++m2)
        v[static_cast<Eigen::Index>(d.index(static_cast<AtomLevel>(l), m1, m2))] =
            a[static_cast<std::size_t>(l)] * f1[m1] * f2[m2];
  return PureState(d, std::move(v));
}

PureState fock_with_atom(const Dims& d, AtomPrep atom, int m1, int m2) {
  require(m1 < d.n1 && m2 < d.n2, ErrorKind::config,
          "initial Fock state does not fit the truncation");
  CVector f1 = CVector::Zero(d.n1), f2 = CVector::Zero(d.n2);
  f1[m1] = 1.0;
  f2[m2] = 1.0;
  return with_atom(d, atom, f1, f2);
}

std::pair<cplx, cplx> alphas(const CoherentInit& c) {
  const cplx ph = std::polar(1.0, c.phi);
  return {c.alpha1 * ph, c.alpha2 * ph};
}

struct CoherentProduct {
  PureState state;
  double mass1, mass2;
};

CoherentProduct coherent_product(const Dims& d, AtomPrep atom, cplx a1, cplx a2) {
  const auto c1 = coherent_amplitudes(a1, d.n1 - 1);
  const auto c2 = coherent_amplitudes(a2, d.n2 - 1);
  return {with_atom(d, atom, c1.amps, c2.amps), c1.truncated_mass, c2.truncated_mass};
}

double mode_mean(const Ensemble& ens, int mode) {
  double acc = 0.0;
  for (const auto& [w, psi] : ens) {
    const Dims d = psi.dims();
    for (int a = 0; a < 2; ++a)
      for (int m1 = 0; m1 < d.n1; ++m1)
        for (int m2 = 0; m2 < d.n2; ++m2)
          acc += w * std::norm(psi.amp(static_cast<AtomLevel>(a), m1, m2)) * (mode == 1 ? m1 : m2);
  }
  return acc;
}

}  // namespace

ResolvedModel resolve(const ScenarioConfig& c) {
  ResolvedModel m;
  RawParams raw = raw_from(c);
  raw.lambda = c.lambda ? *c.lambda : balanced_lambda(raw);
  const double theta = mixing_angle(raw, AngleBranch::decouple_mode1);
  // Provisional omega0 so transform_params yields Omega2; Delta fixed below.
  TransformedParams p = transform_params(raw, theta, c.frequency_form);
  const double delta = c.delta_override ? *c.delta_override
                       : c.omega0      ? p.Omega2 - *c.omega0
                                       : 0.0;
  raw.omega0 = c.omega0 ? *c.omega0 : p.Omega2 - delta;
  p = with_detuning(transform_params(raw, theta, c.frequency_form), delta);
  m.raw = raw;
  m.params = p;

  if (c.truncation) {
    m.dims = {c.truncation->first, c.truncation->second};
  } else if (const auto* co = std::get_if<CoherentInit>(&c.initial)) {
    const auto [a1, a2] = alphas(*co);
    const auto [b1, b2] = coherent_frame_change(a1, a2, theta);
    const double nbar = std::max({std::norm(a1), std::norm(a2), std::norm(b1), std::norm(b2)});
    const int n = default_coherent_cutoff(nbar) + 1;
    m.dims = {n, n};
  } else if (const auto* f = std::get_if<FockInit>(&c.initial)) {
    const int n = f->m1 + f->m2 + 2;
    m.dims = {n, n};
  } else {
    m.dims = {3, 3};
  }
  if (c.engine != Engine::oracle)
    require(std::abs(p.mu1) <= 1e-9, ErrorKind::config,
            "analytic engine needs mode 1 decoupled; omit params.lambda to use the balanced value");

  const Ensemble init = initial_rotated(c, m);
  m.mean_n1 = mode_mean(init, 1);
  m.mean_n2 = mode_mean(init, 2);
  if (const auto* co = std::get_if<CoherentInit>(&c.initial)) {
    auto [a1, a2] = alphas(*co);
    if (c.frame == Frame::original) std::tie(a1, a2) = coherent_frame_change(a1, a2, theta);
    m.discarded_mass1 = coherent_amplitudes(a1, m.dims.n1 - 1).truncated_mass;
    m.discarded_mass2 = coherent_amplitudes(a2, m.dims.n2 - 1).truncated_mass;
  }
  return m;
}

namespace {

Ensemble initial_in(const ScenarioConfig& c, const ResolvedModel& m, bool rotated) {
  const Dims d = m.dims;
  const double theta = m.params.theta;
  // Fock-type states are given in c.frame; rotate when the caller wants the
  // other frame.
  const bool convert = rotated && c.frame == Frame::original;
  auto to_frame = [&](PureState s) {
    return convert ? fock_frame_change(s, theta, FrameDirection::a_to_b) : s;
  };
  if (const auto* co = std::get_if<CoherentInit>(&c.initial)) {
    auto [a1, a2] = alphas(*co);
    if (convert) std::tie(a1, a2) = coherent_frame_change(a1, a2, theta);
    return {{1.0, coherent_product(d, co->atom, a1, a2).state}};
  }
  if (const auto* f = std::get_if<FockInit>(&c.initial))
    return {{1.0, to_frame(fock_with_atom(d, f->atom, f->m1, f->m2))}};
  const double gamma = std::get<Mixed01Init>(c.initial).gamma;
  Ensemble e;
  if (gamma > 0.0) e.push_back({gamma, to_frame(fock_with_atom(d, AtomPrep::excited, 0, 1))});
  if (gamma < 1.0) e.push_back({1.0 - gamma, to_frame(fock_with_atom(d, AtomPrep::ground, 0, 1))});
  return e;
}

}  // namespace

Ensemble initial_rotated(const ScenarioConfig& c, const ResolvedModel& m) {
  return initial_in(c, m, true);
}

Ensemble initial_for_oracle(const ScenarioConfig& c, const ResolvedModel& m) {
  return initial_in(c, m, c.frame == Frame::transformed);
}

std::vector<double> time_grid(double t_max, int n_points) {
  require(t_max > 0.0 && n_points >= 2, ErrorKind::invalid_input, "invalid time grid");
  std::vector<double> t(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) t[static_cast<std::size_t>(i)] = t_max * i / (n_points - 1);
  return t;
}

namespace {

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, n);
  if (k <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(k);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < k; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * n / k; i < (w + 1) * n / k; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void record(const std::vector<Observable>& obs, const Ensemble& ens, std::size_t i,
            std::map<Observable, TimeSeries>& out) {
  for (auto o : obs) {
    double v = 0.0;
    switch (o) {
      case Observable::inversion: v = atomic_inversion(ens); break;
      case Observable::linear_entropy: v = linear_entropy_atom(ens); break;
      case Observable::concurrence: v = concurrence_x(four_level_from(ens)); break;
    }
    out[o].values[i] = v;
  }
}

std::map<Observable, TimeSeries> empty_series(const std::vector<Observable>& obs,
                                              const std::vector<double>& t) {
  std::map<Observable, TimeSeries> s;
  for (auto o : obs) s[o] = TimeSeries{t, std::vector<double>(t.size(), 0.0), to_string(o)};
  return s;
}

json detector_json(const ScenarioConfig& c, const ResolvedModel& m, const EngineRun& run) {
  json out = json::object();
  if (has(c.detectors, Detector::revival)) {
    RevivalOptions ro;
    ro.window = c.options.revival_window.value_or(
        default_revival_window(m.params, m.mean_n1, m.mean_n2));
    try {
      ro.formula_time = revival_time_formula(m.params, m.mean_n2, 1);
    } catch (const Error&) {
      ro.formula_time.reset();
    }
    const RevivalReport r = detect_revivals(run.series.at(Observable::inversion), ro);
    out["revival"] = {{"window", ro.window},
                      {"formula_time", opt(r.formula_time)},
                      {"collapse_time", opt(r.collapse_time)},
                      {"collapse_duration", r.collapse_duration},
                      {"detected_times", r.detected_times}};
  }
  if (has(c.detectors, Detector::sudden_death)) {
    const auto t = detect_sudden_death(run.series.at(Observable::concurrence),
                                       {c.options.esd_eps, c.options.esd_dwell});
    out["sudden_death"] = {{"eps", c.options.esd_eps},
                           {"dwell", c.options.esd_dwell},
                           {"detected_time", opt(t)}};
  }
  return out;
}

void check_memory(const ScenarioConfig& c, const Dims& d) {
  const double cap = c.options.memory_cap_mb * 1024.0 * 1024.0;
  const auto need_bytes = static_cast<double>(oracle_memory_estimate(d.n1, d.n2));
  if (need_bytes <= cap) return;
  int n = std::min(d.n1, d.n2);
  while (n > 2 && static_cast<double>(oracle_memory_estimate(n, n)) > cap) --n;
  std::ostringstream msg;
  msg << "oracle needs about " << static_cast<long long>(need_bytes / (1024.0 * 1024.0))
      << " MB for truncation " << d.n1 << "x" << d.n2 << ", above the cap of "
      << c.options.memory_cap_mb << " MB; suggested truncation " << n << " " << n;
  fail(ErrorKind::resource_cap, msg.str());
}

json transformed_json(const TransformedParams& p) {
  return {{"theta", p.theta}, {"Omega1", p.Omega1}, {"Omega2", p.Omega2}, {"mu1", p.mu1},
          {"mu2", p.mu2},     {"mu_bar", p.mu_bar}, {"Delta", p.Delta},   {"chi", p.chi},
          {"lambda", p.lambda}};
}

json raw_json(const RawParams& r) {
  return {{"omega1", r.omega1}, {"omega2", r.omega2}, {"omega0", r.omega0},
          {"chi1", r.chi1},     {"chi2", r.chi2},     {"chi_bar", r.chi_bar},
          {"lambda", r.lambda}, {"lambda1", r.lambda1}, {"lambda2", r.lambda2}};
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& c, int threads) {
  validate(c);
  ScenarioResult res;
  res.config = c;
  res.model = resolve(c);
  const ResolvedModel& m = res.model;
  const std::vector<double> t = time_grid(c.t_max, c.n_points);

  if (has(c.detectors, Detector::revival)) {
    const double w = c.options.revival_window.value_or(
        default_revival_window(m.params, m.mean_n1, m.mean_n2));
    if (c.t_max / (c.n_points - 1) > w / 16.0)
      config_error("grid too coarse for revival detection: need n_points >= " +
                   std::to_string(static_cast<long long>(std::ceil(16.0 * c.t_max / w)) + 1));
  }

  const bool want_analytic = c.engine != Engine::oracle;
  const bool want_oracle = c.engine != Engine::analytic;
  if (want_oracle) check_memory(c, m.dims);

  if (want_analytic) {
    EngineRun run{Engine::analytic, empty_series(c.observables, t)};
    const Ensemble init = initial_rotated(c, m);
    parallel_for(t.size(), threads, [&](std::size_t i) {
      Ensemble now;
      for (const auto& [w, psi] : init) now.push_back({w, evolve_pure(psi, t[i], m.params)});
      record(c.observables, now, i, run.series);
    });
    res.runs.push_back(std::move(run));
  }
  if (want_oracle) {
    EngineRun run{Engine::oracle, empty_series(c.observables, t)};
    const TruncatedHamiltonian h = c.frame == Frame::original
                                       ? build_original(m.raw, m.dims.n1, m.dims.n2)
                                       : build_transformed(m.params, m.dims.n1, m.dims.n2);
    const SpectralDecomposition dec = spectral(h);
    const Ensemble init = initial_for_oracle(c, m);
    parallel_for(t.size(), threads, [&](std::size_t i) {
      Ensemble now;
      for (const auto& [w, psi] : init) now.push_back({w, propagate(dec, psi, t[i])});
      record(c.observables, now, i, run.series);
    });
    res.runs.push_back(std::move(run));
  }
  for (auto& run : res.runs) run.detectors = detector_json(c, m, run);

  json formulas;
  try {
    formulas["revival_time"] = revival_time_formula(m.params, m.mean_n2, 1);
  } catch (const Error&) {
    formulas["revival_time"] = nullptr;
  }
  formulas["sudden_death_time"] = opt(sudden_death_formula(m.params, m.raw.lambda2));
  formulas["cnot_kerr"] = m.params.mu_bar <= 2.0 ? json(cnot_kerr(m.params)) : json(nullptr);

  json detectors = json::object();
  for (const auto& run : res.runs) detectors[to_string(run.engine)] = run.detectors;

  res.report = {{"schema", kReportSchema},
                {"name", c.name},
                {"config", to_json(c)},
                {"model", {{"raw", raw_json(m.raw)},
                           {"transformed", transformed_json(m.params)},
                           {"lambda_source", c.lambda ? "config" : "balanced"},
                           {"mean_n1_rotated", m.mean_n1},
                           {"mean_n2_rotated", m.mean_n2}}},
                {"truncation", {{"n1_dim", m.dims.n1},
                                {"n2_dim", m.dims.n2},
                                {"discarded_mass_mode1", m.discarded_mass1},
                                {"discarded_mass_mode2", m.discarded_mass2},
                                {"oracle_memory_bytes", want_oracle ? json(oracle_memory_estimate(m.dims.n1, m.dims.n2))
                                                                    : json(nullptr)}}},
                {"formulas", formulas},
                {"detectors", detectors}};
  return res;
}

std::vector<Discrepancy> discrepancies(const EngineRun& a, const EngineRun& b, double t_short) {
  std::vector<Discrepancy> out;
  for (const auto& [obs, sa] : a.series) {
    const auto it = b.series.find(obs);
    if (it == b.series.end()) continue;
    const TimeSeries& sb = it->second;
    require(sa.times == sb.times, ErrorKind::invalid_input, "discrepancy: grids differ");
    Discrepancy d{obs};
    double sq = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
      const double e = std::abs(sa.values[i] - sb.values[i]);
      d.max_abs = std::max(d.max_abs, e);
      sq += e * e;
      if (sa.times[i] <= t_short) d.short_max_abs = std::max(d.short_max_abs, e);
    }
    d.rms = std::sqrt(sq / static_cast<double>(sa.size()));
    out.push_back(d);
  }
  return out;
}

CompareResult compare(const ScenarioConfig& c, int threads) {
  ScenarioConfig both = c;
  both.engine = Engine::both;
  CompareResult cr{run_scenario(both, threads), {}, {}};
  const auto& runs = cr.result.runs;
  cr.items = discrepancies(runs.at(0), runs.at(1), c.options.t_short);
  json items = json::object();
  for (const auto& d : cr.items)
    items[to_string(d.observable)] = {{"max_abs", d.max_abs},
                                      {"rms", d.rms},
                                      {"short_max_abs", d.short_max_abs}};
  cr.report = {{"schema", kCompareSchema},
               {"name", c.name},
               {"t_short", c.options.t_short},
               {"frame", to_string(c.frame)},
               {"truncation", {cr.result.model.dims.n1, cr.result.model.dims.n2}},
               {"discrepancy", items}};
  return cr;
}

std::string format_csv(const TimeSeries& s) {
  s.validate();
  std::string out = "t_lambda1,value\n";
  char buf[64];
  auto put = [&](double x) {
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    out.append(buf, r.ptr);
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    put(s.times[i]);
    out.push_back(',');
    put(s.values[i]);
    out.push_back('\n');
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::vector<std::string> write_outputs(const ScenarioResult& r, const std::filesystem::path& dir) {
  std::vector<std::string> files;
  for (const auto& run : r.runs)
    for (const auto& [obs, series] : run.series) {
      const std::string name =
          r.config.name + "_" + to_string(obs) + "_" + to_string(run.engine) + ".csv";
      write_atomic(dir / name, format_csv(series));
      files.push_back(name);
    }
  json report = r.report;
  report["outputs"] = files;
  const std::string rep_name = r.config.name + "_report.json";
  write_atomic(dir / rep_name, report.dump(2) + "\n");
  files.push_back(rep_name);
  return files;
}

std::vector<ScenarioConfig> figure_preset(int figure) {
  auto base = [](std::string name, double lambda2, double chi) {
    ScenarioConfig c;
    c.name = std::move(name);
    c.omega1 = 0.2;
    c.omega2 = 0.1;
    c.lambda2 = lambda2;
    c.chi_over_lambda1 = chi;
    c.delta_override = 0.0;
    return c;
  };
  const double a = std::sqrt(10.0);
  std::vector<ScenarioConfig> out;
  switch (figure) {
    case 1:
      for (double chi : {0.001, 0.1}) {
        auto c = base(chi == 0.001 ? "fig1_chi0.001" : "fig1_chi0.1", 0.01, chi);
        c.initial = CoherentInit{a, a, 0.0, AtomPrep::excited};
        c.t_max = 80.0;
        c.n_points = 4001;
        c.observables = {Observable::inversion};
        c.detectors = {Detector::revival};
        c.truncation = std::make_pair(41, 41);
        out.push_back(c);
      }
      break;
    case 2: {
      auto c = base("fig2", 0.01, 0.01);
      // Atom resonant with bare mode 1; the analytic engine uses Delta = 0.
      c.omega0 = 0.2;
      c.initial = FockInit{5, 6, AtomPrep::excited};
      c.frame = Frame::original;
      c.engine = Engine::both;
      c.t_max = 20.0;
      c.n_points = 2001;
      c.observables = {Observable::inversion};
      out.push_back(c);
      break;
    }
    case 3:
      for (double chi : {0.001, 0.01}) {
        auto c = base(chi == 0.001 ? "fig3a_chi0.001" : "fig3b_chi0.01", 0.1, chi);
        c.initial = CoherentInit{a, a, 0.0, AtomPrep::superposition};
        c.t_max = 100.0;
        c.n_points = 2001;
        c.observables = {Observable::linear_entropy};
        c.truncation = std::make_pair(41, 41);
        out.push_back(c);
      }
      break;
    case 4:
      for (double chi : {0.001, 0.01}) {
        auto c = base(chi == 0.001 ? "fig4a_chi0.001" : "fig4b_chi0.01", 0.1, chi);
        c.initial = Mixed01Init{0.5};
        c.t_max = 50.0;
        c.n_points = 5001;
        c.observables = {Observable::concurrence};
        c.detectors = {Detector::sudden_death};
        out.push_back(c);
      }
      break;
    default:
      config_error("figures: expected 1, 2, 3 or 4");
  }
  for (const auto& c : out) validate(c);
  return out;
}

}  // namespace kerrqed
