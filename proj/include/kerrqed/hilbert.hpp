#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kerrqed/error.hpp"

namespace kerrqed {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kNormTol = 1e-10;

enum class AtomLevel : int { excited = 0, ground = 1 };

/// Factor labels. `field_qubit` is the two-mode qubit of the four-level
/// atom-field subspace (see analysis::four_level_from).
enum class Subsystem : std::uint8_t { atom, mode1, mode2, field_qubit };

/// Non-empty set of subsystem labels.
class SubsystemSet {
 public:
  SubsystemSet() = default;
  SubsystemSet(std::initializer_list<Subsystem> items) {
    for (auto s : items) insert(s);
  }

  void insert(Subsystem s) { bits_ |= bit(s); }
  bool contains(Subsystem s) const { return (bits_ & bit(s)) != 0; }
  bool empty() const { return bits_ == 0; }

 private:
  static std::uint8_t bit(Subsystem s) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(s));
  }
  std::uint8_t bits_ = 0;
};

/// Truncation of atom (x) mode1 (x) mode2. Row-major, atom slowest.
struct Dims {
  int n1 = 1;
  int n2 = 1;

  static constexpr int atom = 2;

  std::size_t size() const {
    return static_cast<std::size_t>(atom) * static_cast<std::size_t>(n1) *
           static_cast<std::size_t>(n2);
  }
  std::size_t index(AtomLevel a, int m1, int m2) const {
    return (static_cast<std::size_t>(a) * static_cast<std::size_t>(n1) +
            static_cast<std::size_t>(m1)) *
               static_cast<std::size_t>(n2) +
           static_cast<std::size_t>(m2);
  }
  bool operator==(const Dims&) const = default;
};

/// Normalized pure state over atom (x) mode1 (x) mode2.
class PureState {
 public:
  /// Normalizes `amps`; throws invalid_input on size mismatch or zero norm.
  PureState(Dims dims, CVector amps);

  static PureState basis(Dims dims, AtomLevel a, int m1, int m2);

  const Dims& dims() const { return dims_; }
  const CVector& amps() const { return amps_; }
  cplx amp(AtomLevel a, int m1, int m2) const {
    return amps_[static_cast<Eigen::Index>(dims_.index(a, m1, m2))];
  }

 private:
  struct Trusted {};
  PureState(Dims dims, CVector amps, Trusted)
      : dims_(dims), amps_(std::move(amps)) {}
  friend PureState make_unit_state(Dims, CVector);

  Dims dims_;
  CVector amps_;
};

/// Builds a PureState from amplitudes that are already unit norm (only
/// checked against kNormTol, not rescaled). Used by propagators.
PureState make_unit_state(Dims dims, CVector amps);

struct Factor {
  Subsystem label;
  int dim;
  bool operator==(const Factor&) const = default;
};

/// Hermitian, unit-trace, positive semidefinite matrix over a declared
/// factorization (slowest factor first).
class DensityMatrix {
 public:
  /// Full validation: Hermitian and trace within 1e-10, eigenvalues >= -1e-8.
  DensityMatrix(std::vector<Factor> factors, CMatrix m);

  static DensityMatrix from_pure(const PureState& psi);

  /// Skips the spectral positivity check (O(d^3)); Hermiticity and trace are
  /// still enforced. For matrices produced by unitary evolution.
  static DensityMatrix unchecked_psd(std::vector<Factor> factors, CMatrix m);

  const std::vector<Factor>& factors() const { return factors_; }
  const CMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  struct Trusted {};
  DensityMatrix(std::vector<Factor> factors, CMatrix m, Trusted)
      : factors_(std::move(factors)), m_(std::move(m)) {}

  std::vector<Factor> factors_;
  CMatrix m_;
};

std::vector<Factor> tripartite_factors(const Dims& dims);

/// Statistical mixture of pure states; weights sum to one.
struct WeightedState {
  double weight;
  PureState state;
};
using Ensemble = std::vector<WeightedState>;

DensityMatrix to_density(const Ensemble& ensemble);

PureState tensor_state(std::span<const cplx> atom, std::span<const cplx> f1,
                       std::span<const cplx> f2);

struct CoherentAmplitudes {
  CVector amps;           // renormalized over 0..n_max
  double truncated_mass;  // Poisson weight beyond n_max before renormalizing
};

CoherentAmplitudes coherent_amplitudes(cplx alpha, int n_max);

/// ceil(n + 6 sqrt(n) + 10)
int default_coherent_cutoff(double mean_photons);

DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemSet& keep);

/// Reduced state of a pure tripartite state without forming |psi><psi|.
DensityMatrix partial_trace(const PureState& psi, const SubsystemSet& keep);

double purity(const DensityMatrix& rho);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Pure-state trace distance, sqrt(1 - |<a|b>|^2).
double trace_distance(const PureState& a, const PureState& b);

}  // namespace kerrqed
