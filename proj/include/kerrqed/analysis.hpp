#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kerrqed/hilbert.hpp"
#include "kerrqed/model.hpp"

namespace kerrqed {

/// (time, value) samples; times in units of 1/lambda1, strictly increasing.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::string label;

  /// Throws invalid_input unless lengths match and times strictly increase.
  void validate() const;
  std::size_t size() const { return times.size(); }
};

// Observables

/// Tr[rho sigma_z]; rho must contain an atom factor.
double atomic_inversion(const DensityMatrix& rho);
double atomic_inversion(const PureState& psi);
double atomic_inversion(const Ensemble& ensemble);

/// Reduced atomic state, basis (e, g).
Eigen::Matrix2cd atom_reduced(const PureState& psi);
Eigen::Matrix2cd atom_reduced(const Ensemble& ensemble);

/// Tr[rho_a (1 - rho_a)]. For a two-level atom this lies in [0, 1/2].
double linear_entropy_atom(const DensityMatrix& rho_full);
double linear_entropy_atom(const PureState& psi);
double linear_entropy_atom(const Ensemble& ensemble);

/// Wootters concurrence from the spin-flipped spectrum.
double concurrence_general(const DensityMatrix& rho);
double concurrence_general(const Eigen::Matrix4cd& rho);

/// Closed form for X-structured states:
/// 2 max{0, |r23| - sqrt(r11 r44), |r14| - sqrt(r22 r33)}.
double concurrence_x(const DensityMatrix& rho);
double concurrence_x(const Eigen::Matrix4cd& rho);

bool is_x_state(const Eigen::Matrix4cd& rho, double tol = 1e-10);

// Formulas

/// lambda1 t_d = acos(2 (D - 2k)^2 / ((D - 2k)^2 - 8 (1 + l2^2))) / (2k - D)
/// with D = Delta', k = chi'. Absent when 2k == D or the argument leaves
/// [-1, 1]. A negative result is returned as computed.
std::optional<double> sudden_death_formula(const TransformedParams& p, double lambda2_prime);

/// |lambda1 t_R| for the n-th revival. The closed form is negative in the
/// weak-Kerr limit; the magnitude is reported.
double revival_time_formula(const TransformedParams& p, double n_bar, int n);

/// chi = (lambda1 / 2) sqrt(4 - mu_bar^2); domain error for mu_bar > 2.
double cnot_kerr(const TransformedParams& p);

// Detectors

struct SuddenDeathOptions {
  double eps = 1e-4;
  double dwell = 5.0;
};

/// Earliest time from which the series stays below eps for `dwell`, or for
/// the whole record when it starts at the first sample.
std::optional<double> detect_sudden_death(const TimeSeries& series,
                                          const SuddenDeathOptions& opts = {});

struct RevivalOptions {
  double window = 0.0;             // envelope window; must be > 0
  double collapse_fraction = 0.5;  // collapse once envelope < fraction * initial
  double revival_fraction = 0.2;   // revival run once envelope > fraction * initial
  std::optional<double> formula_time;
};

/// 2 pi / rabi frequency of the block at the mean occupation.
double default_revival_window(const TransformedParams& p, double n1_bar, double n2_bar);

struct RevivalReport {
  std::optional<double> formula_time;
  std::optional<double> collapse_time;
  std::vector<double> detected_times;
  /// first revival (or end of record) minus collapse onset; 0 without collapse
  double collapse_duration = 0.0;
  TimeSeries envelope;
};

RevivalReport detect_revivals(const TimeSeries& series, const RevivalOptions& opts);

// Gate check

struct GateEntry {
  std::string label;
  double return_probability = 0.0;
  double phase = 0.0;  // interaction-picture phase of the diagonal amplitude
};

struct GateReport {
  double time = 0.0;
  std::vector<GateEntry> entries;
  double fidelity = 0.0;  // mean return probability over the entries
};

/// Checks |e,0,0> -> |e,0,0> and |g,0,1> -> |g,0,1> at lambda1 t = 2 n pi.
/// Requires Delta == 0 and chi == cnot_kerr(p).
GateReport gate_check(const TransformedParams& p, int n);

}  // namespace kerrqed
