#include "kerrqed/propagator.hpp"

#include <array>
#include <cmath>

namespace kerrqed {

namespace {

constexpr double kDecoupleTol = 1e-9;

void require_decoupled(const TransformedParams& p) {
  require(std::abs(p.mu1) <= kDecoupleTol, ErrorKind::invalid_input,
          "analytic propagation needs mu1 == 0 (balanced coupling, decouple_mode1 branch)");
}

}  // namespace

BlockFrequencies block_frequencies(int m1, int m2, const TransformedParams& p) {
  require(m1 >= 0 && m2 >= 0, ErrorKind::invalid_input, "Fock indices must be >= 0");
  BlockFrequencies f;
  f.m1 = m1;
  f.m2 = m2;
  const double mu2 = p.mu_bar * p.mu_bar;
  f.Gamma = p.Delta + 2.0 * p.chi * (m1 + m2 - 1);
  f.Gamma_prime = p.Delta + 2.0 * p.chi * (m1 + m2 - 2);
  f.delta_plus = std::sqrt(0.25 * f.Gamma * f.Gamma + mu2 * (m2 + 1));
  f.delta_minus = std::sqrt(0.25 * f.Gamma * f.Gamma + mu2 * m2);
  f.detuning = p.Delta + 2.0 * p.chi * (m1 + m2);
  f.rabi = std::sqrt(0.25 * f.detuning * f.detuning + mu2 * (m2 + 1));
  return f;
}

BlockPropagator block_u(int m1, int m2, double t, const TransformedParams& p) {
  const BlockFrequencies f = block_frequencies(m1, m2, p);
  const double g = p.mu_bar * std::sqrt(m2 + 1.0);
  const double d = f.detuning;
  const double w = f.rabi;
  const double cw = std::cos(w * t);
  // sin(w t) / w with the w -> 0 limit
  const double sw = w > 0.0 ? std::sin(w * t) / w : t;
  const cplx i{0.0, 1.0};
  const cplx lo = std::exp(-0.5 * i * d * t);
  const cplx hi = std::conj(lo);

  BlockPropagator b;
  b.t = t;
  b.u(0, 0) = lo * (cw + 0.5 * i * d * sw);
  b.u(0, 1) = lo * (-i * g * sw);
  b.u(1, 0) = hi * (-i * g * sw);
  b.u(1, 1) = hi * (cw - 0.5 * i * d * sw);
  return b;
}

PureState evolve_pure(const PureState& state, double t, const TransformedParams& p) {
  require_decoupled(p);
  const Dims d = state.dims();
  CVector out = state.amps();
  for (int m1 = 0; m1 < d.n1; ++m1) {
    for (int m2 = 0; m2 + 1 < d.n2; ++m2) {
      const auto ie = static_cast<Eigen::Index>(d.index(AtomLevel::excited, m1, m2));
      const auto ig = static_cast<Eigen::Index>(d.index(AtomLevel::ground, m1, m2 + 1));
      const cplx ae = out[ie];
      const cplx ag = out[ig];
      if (ae == 0.0 && ag == 0.0) continue;
      const Eigen::Matrix2cd u = block_u(m1, m2, t, p).u;
      out[ie] = u(0, 0) * ae + u(0, 1) * ag;
      out[ig] = u(1, 0) * ae + u(1, 1) * ag;
    }
  }
  return make_unit_state(d, std::move(out));
}

DensityMatrix evolve_density(const DensityMatrix& rho, double t, const TransformedParams& p) {
  require_decoupled(p);
  const auto& fac = rho.factors();
  require(fac.size() == 3 && fac[0].label == Subsystem::atom && fac[0].dim == 2 &&
              fac[1].label == Subsystem::mode1 && fac[2].label == Subsystem::mode2,
          ErrorKind::invalid_input, "evolve_density expects (atom, mode1, mode2)");
  const Dims d{fac[1].dim, fac[2].dim};
  CMatrix m = rho.matrix();
  const Eigen::Index n = m.rows();
  // rho -> U rho: mix row pairs; then rho U^dagger: mix column pairs.
  for (int m1 = 0; m1 < d.n1; ++m1) {
    for (int m2 = 0; m2 + 1 < d.n2; ++m2) {
      const auto ie = static_cast<Eigen::Index>(d.index(AtomLevel::excited, m1, m2));
      const auto ig = static_cast<Eigen::Index>(d.index(AtomLevel::ground, m1, m2 + 1));
      const Eigen::Matrix2cd u = block_u(m1, m2, t, p).u;
      for (Eigen::Index c = 0; c < n; ++c) {
        const cplx re = m(ie, c), rg = m(ig, c);
        m(ie, c) = u(0, 0) * re + u(0, 1) * rg;
        m(ig, c) = u(1, 0) * re + u(1, 1) * rg;
      }
      for (Eigen::Index r = 0; r < n; ++r) {
        const cplx ce = m(r, ie), cg = m(r, ig);
        m(r, ie) = ce * std::conj(u(0, 0)) + cg * std::conj(u(0, 1));
        m(r, ig) = ce * std::conj(u(1, 0)) + cg * std::conj(u(1, 1));
      }
    }
  }
  return DensityMatrix::unchecked_psd(fac, std::move(m));
}

namespace {

struct LevelIndex {
  AtomLevel atom;
  int m1;
  int m2;
};

// |1> = |01,e>, |2> = |01,g>, |3> = |00,e>, |4> = |02,g>
constexpr std::array<LevelIndex, 4> kFourLevelBasis{{
    {AtomLevel::excited, 0, 1},
    {AtomLevel::ground, 0, 1},
    {AtomLevel::excited, 0, 0},
    {AtomLevel::ground, 0, 2},
}};

}  // namespace

DensityMatrix four_level_from(const Ensemble& ensemble) {
  require(!ensemble.empty(), ErrorKind::invalid_input, "empty ensemble");
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (const auto& [w, psi] : ensemble) {
    const Dims d = psi.dims();
    require(d.n2 >= 3, ErrorKind::invalid_input,
            "four-level subspace needs at least 3 levels in mode 2");
    Eigen::Vector4cd v;
    for (int k = 0; k < 4; ++k) {
      const auto& b = kFourLevelBasis[static_cast<std::size_t>(k)];
      v[k] = psi.amp(b.atom, b.m1, b.m2);
    }
    require(std::abs(v.squaredNorm() - 1.0) <= kNormTol, ErrorKind::invalid_input,
            "state leaks out of the four-level subspace");
    rho.noalias() += w * (v * v.adjoint());
  }
  return DensityMatrix::unchecked_psd({{Subsystem::field_qubit, 2}, {Subsystem::atom, 2}},
                                      CMatrix(rho));
}

DensityMatrix four_level_rho(double t, double gamma, const TransformedParams& p) {
  require(gamma >= 0.0 && gamma <= 1.0, ErrorKind::invalid_input,
          "gamma must lie in [0, 1]");
  const Dims d{1, 3};
  Ensemble ens;
  if (gamma > 0.0)
    ens.push_back({gamma, evolve_pure(PureState::basis(d, AtomLevel::excited, 0, 1), t, p)});
  if (gamma < 1.0)
    ens.push_back({1.0 - gamma, evolve_pure(PureState::basis(d, AtomLevel::ground, 0, 1), t, p)});
  return four_level_from(ens);
}

double free_energy(AtomLevel a, int m1, int m2, const TransformedParams& p) {
  const double n = m1 + m2;
  const double sz = a == AtomLevel::excited ? 1.0 : -1.0;
  return p.Omega1 * m1 + p.Omega2 * m2 + p.chi * (n * n - n) + 0.5 * p.omega0() * sz;
}

PureState to_schrodinger(const PureState& interaction, double t, const TransformedParams& p) {
  const Dims d = interaction.dims();
  CVector out = interaction.amps();
  for (int a = 0; a < 2; ++a)
    for (int m1 = 0; m1 < d.n1; ++m1)
      for (int m2 = 0; m2 < d.n2; ++m2) {
        const auto lvl = static_cast<AtomLevel>(a);
        out[static_cast<Eigen::Index>(d.index(lvl, m1, m2))] *=
            std::exp(cplx{0.0, -free_energy(lvl, m1, m2, p) * t});
      }
  return make_unit_state(d, std::move(out));
}

}  // namespace kerrqed
