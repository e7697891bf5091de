#include "kerrqed/model.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace kerrqed {

bool RawParams::codirectional(double tol) const {
  return std::abs(chi1 - chi2) <= tol && std::abs(chi1 - 0.5 * chi_bar) <= tol;
}

double balanced_lambda(const RawParams& raw) {
  const double denom = raw.lambda2 * raw.lambda2 - raw.lambda1 * raw.lambda1;
  require(denom != 0.0, ErrorKind::singular_parameters,
          "balanced coupling undefined for lambda1 == lambda2");
  return raw.lambda1 * raw.lambda2 * (raw.omega2 - raw.omega1) / denom;
}

namespace {

double principal_angle(const RawParams& raw) {
  const double dw = raw.omega2 - raw.omega1;
  if (dw == 0.0) return raw.lambda == 0.0 ? 0.0 : std::numbers::pi / 4.0;
  return 0.5 * std::atan(2.0 * raw.lambda / dw);
}

double mu1_at(const RawParams& raw, double theta) {
  return raw.lambda1 * std::cos(theta) - raw.lambda2 * std::sin(theta);
}

double mu2_at(const RawParams& raw, double theta) {
  return raw.lambda2 * std::cos(theta) + raw.lambda1 * std::sin(theta);
}

}  // namespace

double mixing_angle(const RawParams& raw, AngleBranch branch) {
  const double base = principal_angle(raw);
  if (branch == AngleBranch::principal) return base;

  // Shifts by multiples of pi/2 keep tan(2 theta) fixed. Pick the one that
  // minimizes |mu1|; between theta and theta + pi prefer mu2 >= 0.
  double best = base;
  double best_mu1 = std::numeric_limits<double>::infinity();
  double best_mu2 = -std::numeric_limits<double>::infinity();
  for (int k = -1; k <= 2; ++k) {
    const double th = base + k * std::numbers::pi / 2.0;
    const double m1 = std::abs(mu1_at(raw, th));
    const double m2 = mu2_at(raw, th);
    const double scale = std::max(std::abs(raw.lambda1), std::abs(raw.lambda2));
    const bool tie = std::abs(m1 - best_mu1) <= 1e-14 * scale;
    if ((!tie && m1 < best_mu1) || (tie && m2 > best_mu2)) {
      best = th;
      best_mu1 = m1;
      best_mu2 = m2;
    }
  }
  return best;
}

TransformedParams transform_params(const RawParams& raw, double theta,
                                   FrequencyForm form) {
  if (raw.kerr_active())
    require(raw.codirectional(), ErrorKind::invalid_input,
            "Kerr terms require chi1 == chi2 == chi_bar / 2");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double s2 = std::sin(2.0 * theta);

  TransformedParams p;
  p.theta = theta;
  p.Omega1 = raw.omega1 * c * c + raw.omega2 * s * s - raw.lambda * s2;
  p.Omega2 = raw.omega2 * c * c + raw.omega1 * s * s + raw.lambda * s2;
  if (form == FrequencyForm::printed_sqrt) {
    require(p.Omega1 >= 0.0 && p.Omega2 >= 0.0, ErrorKind::domain,
            "square-root frequency form needs non-negative combinations");
    p.Omega1 = std::sqrt(p.Omega1);
    p.Omega2 = std::sqrt(p.Omega2);
  }
  p.mu1 = raw.lambda1 * c - raw.lambda2 * s;
  p.mu2 = raw.lambda2 * c + raw.lambda1 * s;
  p.mu_bar = std::hypot(raw.lambda1, raw.lambda2);
  p.Delta = p.Omega2 - raw.omega0;
  p.chi = raw.chi1;
  p.lambda = raw.lambda;
  return p;
}

TransformedParams with_detuning(TransformedParams p, double delta) {
  p.Delta = delta;
  return p;
}

DecoupledModel decoupled_model(RawParams raw) {
  raw.lambda = balanced_lambda(raw);
  const double theta = mixing_angle(raw, AngleBranch::decouple_mode1);
  return {raw, transform_params(raw, theta)};
}

namespace {

// Normalized Fock expansion of (x b1' + y b2')^m / sqrt(m!) applied to a
// two-mode state with fixed total photon number. v[k] = amplitude of
// |k, N - k>.
void apply_creation(std::vector<double>& v, double x, double y, int times) {
  for (int step = 1; step <= times; ++step) {
    const int n = static_cast<int>(v.size()) - 1;  // photons before
    std::vector<double> out(v.size() + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
      out[static_cast<std::size_t>(k + 1)] += x * std::sqrt(k + 1.0) * v[static_cast<std::size_t>(k)];
      out[static_cast<std::size_t>(k)] += y * std::sqrt(n - k + 1.0) * v[static_cast<std::size_t>(k)];
    }
    const double inv = 1.0 / std::sqrt(static_cast<double>(step));
    for (auto& z : out) z *= inv;
    v = std::move(out);
  }
}

}  // namespace

PureState fock_frame_change(const PureState& state, double theta, FrameDirection dir) {
  const double th = dir == FrameDirection::a_to_b ? theta : -theta;
  const double c = std::cos(th);
  const double s = std::sin(th);
  const Dims dims = state.dims();
  const int n_max_total = dims.n1 + dims.n2 - 2;

  // Per atom level and total photon number, amplitudes over k = photons in
  // the first output mode (may exceed the box).
  std::array<std::vector<std::vector<cplx>>, 2> sectors;
  for (auto& sec : sectors) {
    sec.resize(static_cast<std::size_t>(n_max_total) + 1);
    for (int n = 0; n <= n_max_total; ++n)
      sec[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(n) + 1, 0.0);
  }

  for (int m1 = 0; m1 < dims.n1; ++m1) {
    for (int m2 = 0; m2 < dims.n2; ++m2) {
      const cplx ae = state.amp(AtomLevel::excited, m1, m2);
      const cplx ag = state.amp(AtomLevel::ground, m1, m2);
      if (ae == 0.0 && ag == 0.0) continue;
      // a1' = c b1' + s b2',  a2' = -s b1' + c b2'
      std::vector<double> v{1.0};
      apply_creation(v, c, s, m1);
      apply_creation(v, -s, c, m2);
      auto& se = sectors[0][static_cast<std::size_t>(m1 + m2)];
      auto& sg = sectors[1][static_cast<std::size_t>(m1 + m2)];
      for (std::size_t k = 0; k < v.size(); ++k) {
        se[k] += ae * v[k];
        sg[k] += ag * v[k];
      }
    }
  }

  CVector out = CVector::Zero(static_cast<Eigen::Index>(dims.size()));
  double dropped = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int n = 0; n <= n_max_total; ++n) {
      const auto& sec = sectors[static_cast<std::size_t>(a)][static_cast<std::size_t>(n)];
      for (int k = 0; k <= n; ++k) {
        const cplx z = sec[static_cast<std::size_t>(k)];
        if (k < dims.n1 && n - k < dims.n2)
          out[static_cast<Eigen::Index>(dims.index(static_cast<AtomLevel>(a), k, n - k))] = z;
        else
          dropped += std::norm(z);
      }
    }
  }
  require(dropped <= 1e-10, ErrorKind::truncation_overflow,
          "frame change pushes " + std::to_string(dropped) +
              " of the weight outside the truncation box");
  return PureState(dims, std::move(out));
}

std::pair<cplx, cplx> coherent_frame_change(cplx alpha1, cplx alpha2, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * alpha1 - s * alpha2, s * alpha1 + c * alpha2};
}

double mean_total_photons(const PureState& state) {
  const Dims d = state.dims();
  double acc = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int m1 = 0; m1 < d.n1; ++m1)
      for (int m2 = 0; m2 < d.n2; ++m2)
        acc += std::norm(state.amp(static_cast<AtomLevel>(a), m1, m2)) * (m1 + m2);
  return acc;
}

}  // namespace kerrqed
