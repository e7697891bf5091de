#include "kerrqed/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "kerrqed/propagator.hpp"

namespace kerrqed {

void TimeSeries::validate() const {
  require(times.size() == values.size(), ErrorKind::invalid_input,
          "time series: times and values differ in length");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], ErrorKind::invalid_input,
            "time series: times must be strictly increasing");
}

namespace {

Eigen::Matrix2cd atom_block(const DensityMatrix& rho) {
  const auto& f = rho.factors();
  const bool has_atom = std::any_of(f.begin(), f.end(),
                                    [](const Factor& x) { return x.label == Subsystem::atom; });
  require(has_atom, ErrorKind::invalid_input, "density matrix has no atom factor");
  if (f.size() == 1) return rho.matrix();
  return partial_trace(rho, {Subsystem::atom}).matrix();
}

}  // namespace

Eigen::Matrix2cd atom_reduced(const PureState& psi) {
  const Dims d = psi.dims();
  const auto half = static_cast<Eigen::Index>(d.size() / 2);
  const auto e = psi.amps().head(half);
  const auto g = psi.amps().tail(half);
  Eigen::Matrix2cd r;
  r(0, 0) = e.squaredNorm();
  r(1, 1) = g.squaredNorm();
  r(0, 1) = g.dot(e);  // sum_f e_f conj(g_f)
  r(1, 0) = std::conj(r(0, 1));
  return r;
}

Eigen::Matrix2cd atom_reduced(const Ensemble& ensemble) {
  Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
  for (const auto& [w, psi] : ensemble) r += w * atom_reduced(psi);
  return r;
}

double atomic_inversion(const DensityMatrix& rho) {
  const Eigen::Matrix2cd a = atom_block(rho);
  return (a(0, 0) - a(1, 1)).real();
}

double atomic_inversion(const PureState& psi) {
  const Eigen::Matrix2cd a = atom_reduced(psi);
  return (a(0, 0) - a(1, 1)).real();
}

double atomic_inversion(const Ensemble& ensemble) {
  const Eigen::Matrix2cd a = atom_reduced(ensemble);
  return (a(0, 0) - a(1, 1)).real();
}

namespace {

double idempotency_defect(const Eigen::Matrix2cd& r) {
  return std::max(0.0, 1.0 - r.squaredNorm());
}

}  // namespace

double linear_entropy_atom(const DensityMatrix& rho_full) {
  return idempotency_defect(atom_block(rho_full));
}

double linear_entropy_atom(const PureState& psi) {
  return idempotency_defect(atom_reduced(psi));
}

double linear_entropy_atom(const Ensemble& ensemble) {
  return idempotency_defect(atom_reduced(ensemble));
}

namespace {

Eigen::Matrix4cd as_two_qubit(const DensityMatrix& rho) {
  require(rho.dim() == 4 && rho.factors().size() == 2, ErrorKind::invalid_input,
          "concurrence needs a two-qubit density matrix");
  return rho.matrix();
}

}  // namespace

double concurrence_general(const Eigen::Matrix4cd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
  require(es.info() == Eigen::Success, ErrorKind::numeric_failure, "eigensolver failed");
  require(es.eigenvalues().minCoeff() >= -1e-8, ErrorKind::invalid_input,
          "concurrence: input is not positive semidefinite");
  // rho = W W', lambda_i = singular values of W^T Y W with Y = sigma_y (x) sigma_y.
  const Eigen::Vector4d sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix4cd w = es.eigenvectors() * sq.asDiagonal();
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Eigen::Matrix4cd tau = w.transpose() * yy * w;
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(tau);
  Eigen::Vector4d l = svd.singularValues();
  std::sort(l.data(), l.data() + 4, std::greater<>());
  return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

double concurrence_general(const DensityMatrix& rho) {
  return concurrence_general(as_two_qubit(rho));
}

bool is_x_state(const Eigen::Matrix4cd& rho, double tol) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const bool on_x = i == j || i + j == 3;
      if (!on_x && std::abs(rho(i, j)) > tol) return false;
    }
  return true;
}

double concurrence_x(const Eigen::Matrix4cd& rho) {
  require(is_x_state(rho), ErrorKind::invalid_input, "concurrence_x: input is not an X state");
  const double r11 = std::max(0.0, rho(0, 0).real());
  const double r22 = std::max(0.0, rho(1, 1).real());
  const double r33 = std::max(0.0, rho(2, 2).real());
  const double r44 = std::max(0.0, rho(3, 3).real());
  const double a = std::abs(rho(1, 2)) - std::sqrt(r11 * r44);
  const double b = std::abs(rho(0, 3)) - std::sqrt(r22 * r33);
  return 2.0 * std::max({0.0, a, b});
}

double concurrence_x(const DensityMatrix& rho) { return concurrence_x(as_two_qubit(rho)); }

std::optional<double> sudden_death_formula(const TransformedParams& p, double lambda2_prime) {
  const double prefactor = 2.0 * p.chi - p.Delta;
  if (prefactor == 0.0) return std::nullopt;
  const double s = (p.Delta - 2.0 * p.chi) * (p.Delta - 2.0 * p.chi);
  const double denom = s - 8.0 * (1.0 + lambda2_prime * lambda2_prime);
  const double arg = 2.0 * s / denom;
  if (!(arg >= -1.0 && arg <= 1.0)) return std::nullopt;
  return std::acos(arg) / prefactor;
}

double revival_time_formula(const TransformedParams& p, double n_bar, int n) {
  require(n >= 1, ErrorKind::invalid_input, "revival index must be positive");
  const double k = p.chi;
  const double d = p.Delta;
  const double mu2 = p.mu_bar * p.mu_bar;
  const double denom = p.lambda * d * k + k * k * (4.0 * n_bar - 3.0) - mu2;
  require(std::abs(denom) > 1e-14, ErrorKind::singular_parameters,
          "revival formula denominator vanishes");
  const double r1 = std::sqrt(std::pow(2.0 * k * (2.0 * n_bar - 1.0) + d, 2) + mu2 * (n_bar + 1.0));
  const double r2 = std::sqrt(std::pow(2.0 * k * (2.0 * n_bar - 2.0) + d, 2) + mu2 * n_bar);
  return std::abs(2.0 * n * std::numbers::pi / denom * 0.5 * (r1 + r2));
}

double cnot_kerr(const TransformedParams& p) {
  require(p.mu_bar <= 2.0, ErrorKind::domain, "C-NOT Kerr condition needs mu_bar <= 2");
  return 0.5 * std::sqrt(4.0 - p.mu_bar * p.mu_bar);
}

std::optional<double> detect_sudden_death(const TimeSeries& series,
                                          const SuddenDeathOptions& opts) {
  series.validate();
  require(opts.eps > 0.0 && opts.dwell >= 0.0, ErrorKind::invalid_input,
          "sudden death: eps must be > 0 and dwell >= 0");
  const std::size_t n = series.size();
  std::size_t i = 0;
  while (i < n) {
    if (!(series.values[i] < opts.eps)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && series.values[j + 1] < opts.eps) ++j;
    const bool long_enough = series.times[j] - series.times[i] >= opts.dwell;
    const bool whole_record = i == 0 && j + 1 == n;
    if (long_enough || whole_record) return series.times[i];
    i = j + 1;
  }
  return std::nullopt;
}

double default_revival_window(const TransformedParams& p, double n1_bar, double n2_bar) {
  const auto m1 = static_cast<int>(std::lround(std::max(0.0, n1_bar)));
  const auto m2 = static_cast<int>(std::lround(std::max(0.0, n2_bar)));
  const double w = block_frequencies(m1, m2, p).rabi;
  require(w > 0.0, ErrorKind::invalid_input, "revival window: vanishing Rabi frequency");
  return 2.0 * std::numbers::pi / w;
}

RevivalReport detect_revivals(const TimeSeries& series, const RevivalOptions& opts) {
  series.validate();
  require(opts.window > 0.0, ErrorKind::invalid_input, "revival window must be positive");
  const std::size_t n = series.size();
  require(n >= 3, ErrorKind::invalid_input, "revival detection needs at least 3 samples");
  double max_dt = 0.0;
  for (std::size_t i = 1; i < n; ++i) max_dt = std::max(max_dt, series.times[i] - series.times[i - 1]);
  require(max_dt <= opts.window / 16.0, ErrorKind::invalid_input,
          "grid under-resolves the oscillations (need >= 16 samples per window)");
  require(series.times.back() - series.times.front() >= 5.0 * opts.window,
          ErrorKind::invalid_input, "series spans fewer than ~10 oscillation periods");

  RevivalReport rep;
  rep.formula_time = opts.formula_time;
  rep.envelope.label = "envelope";
  rep.envelope.times = series.times;
  rep.envelope.values.resize(n);
  const double half = 0.5 * opts.window;
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (series.times[lo] < series.times[i] - half) ++lo;
    while (hi + 1 < n && series.times[hi + 1] <= series.times[i] + half) ++hi;
    const auto [mn, mx] = std::minmax_element(series.values.begin() + static_cast<std::ptrdiff_t>(lo),
                                              series.values.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    rep.envelope.values[i] = 0.5 * (*mx - *mn);
  }
  const auto& env = rep.envelope.values;
  const double env0 = env.front();
  if (env0 <= 0.0) return rep;

  std::size_t k = 0;
  while (k < n && env[k] >= opts.collapse_fraction * env0) ++k;
  if (k == n) return rep;
  rep.collapse_time = series.times[k];

  // Runs above the revival threshold, with hysteresis on the way down.
  const double up = opts.revival_fraction * env0;
  const double down = 0.75 * up;
  // Search only once the envelope has settled below the lower threshold.
  std::size_t i = k;
  while (i < n && env[i] > down) ++i;
  while (i < n) {
    if (env[i] <= up) {
      ++i;
      continue;
    }
    std::size_t best = i;
    std::size_t j = i;
    while (j < n && env[j] > down) {
      if (env[j] > env[best]) best = j;
      ++j;
    }
    if (best + 1 < n) rep.detected_times.push_back(series.times[best]);
    i = j;
  }
  const double end = rep.detected_times.empty() ? series.times.back() : rep.detected_times.front();
  rep.collapse_duration = end - *rep.collapse_time;
  return rep;
}

GateReport gate_check(const TransformedParams& p, int n) {
  require(n >= 0, ErrorKind::invalid_input, "gate_check: n must be >= 0");
  require(std::abs(p.Delta) <= 1e-12, ErrorKind::invalid_input, "gate_check: needs Delta == 0");
  require(std::abs(p.mu1) <= 1e-9, ErrorKind::invalid_input, "gate_check: needs mu1 == 0");
  const double chi = cnot_kerr(p);
  require(std::abs(p.chi - chi) <= 1e-9 * std::max(1.0, chi), ErrorKind::invalid_input,
          "gate_check: chi does not satisfy the C-NOT Kerr condition");
  GateReport rep;
  rep.time = 2.0 * std::numbers::pi * n;
  const Eigen::Matrix2cd u = block_u(0, 0, rep.time, p).u;
  rep.entries.push_back({"|e,0,0> -> |e,0,0>", std::norm(u(0, 0)), std::arg(u(0, 0))});
  rep.entries.push_back({"|g,0,1> -> |g,0,1>", std::norm(u(1, 1)), std::arg(u(1, 1))});
  double acc = 0.0;
  for (const auto& e : rep.entries) acc += e.return_probability;
  rep.fidelity = acc / static_cast<double>(rep.entries.size());
  return rep;
}

}  // namespace kerrqed
