#pragma once

#include <Eigen/Dense>

#include "kerrqed/hilbert.hpp"
#include "kerrqed/model.hpp"

namespace kerrqed {

// Rotated-frame evolution with mode 1 decoupled from the atom. Each pair
// {|e, m1, m2>, |g, m1, m2 + 1>} evolves under its own 2x2 block. The
// interaction picture is taken with respect to the diagonal part
//   H0 = Omega1 n1 + Omega2 n2 + chi (N^2 - N) + (omega0 / 2) sigma_z,
// N = n1 + n2, omega0 = Omega2 - Delta. Unpaired amplitudes (|g, m1, 0> and
// the e-amplitudes on the mode-2 truncation edge) are stationary there.

struct BlockFrequencies {
  int m1 = 0;
  int m2 = 0;
  /// Kerr-shifted detuning, one index below `detuning`: Delta + 2 chi (m1 + m2 - 1).
  double Gamma = 0.0;
  /// Delta + 2 chi (m1 + m2 - 2)
  double Gamma_prime = 0.0;
  /// sqrt(Gamma^2 / 4 + mu_bar^2 (m2 + 1))
  double delta_plus = 0.0;
  /// sqrt(Gamma^2 / 4 + mu_bar^2 m2)
  double delta_minus = 0.0;
  /// E(g, m1, m2 + 1) - E(e, m1, m2) = Delta + 2 chi (m1 + m2); this is the
  /// detuning that actually drives the block.
  double detuning = 0.0;
  /// sqrt(detuning^2 / 4 + mu_bar^2 (m2 + 1))
  double rabi = 0.0;
};

BlockFrequencies block_frequencies(int m1, int m2, const TransformedParams& p);

struct BlockPropagator {
  Eigen::Matrix2cd u;  // rows/cols: |e, m1, m2>, |g, m1, m2 + 1>
  double t = 0.0;
};

BlockPropagator block_u(int m1, int m2, double t, const TransformedParams& p);

/// Requires |mu1| <= 1e-9 (mode 1 decoupled).
PureState evolve_pure(const PureState& state, double t, const TransformedParams& p);

/// Rho must be factored as (atom, mode1, mode2).
DensityMatrix evolve_density(const DensityMatrix& rho, double t, const TransformedParams& p);

/// Four-level X state in the basis {|01,e>, |01,g>, |00,e>, |02,g>} for
/// rho(0) = gamma |01,e><01,e| + (1 - gamma) |01,g><01,g|.
DensityMatrix four_level_rho(double t, double gamma, const TransformedParams& p);

/// Restriction of an ensemble to the same four-level basis, factored as
/// (field_qubit, atom). Weight outside the subspace above 1e-10 is an
/// invalid_input error.
DensityMatrix four_level_from(const Ensemble& ensemble);

/// Diagonal energy of H0 for a basis state.
double free_energy(AtomLevel a, int m1, int m2, const TransformedParams& p);

/// Interaction picture to Schroedinger picture: multiplies by exp(-i H0 t).
PureState to_schrodinger(const PureState& interaction, double t, const TransformedParams& p);

}  // namespace kerrqed
