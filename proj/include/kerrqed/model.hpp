#pragma once

#include <utility>

#include "kerrqed/hilbert.hpp"

namespace kerrqed {

/// Laboratory-frame constants, all in units of lambda1.
struct RawParams {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double omega0 = 0.0;
  double chi1 = 0.0;
  double chi2 = 0.0;
  double chi_bar = 0.0;
  double lambda = 0.0;  // mode-mode coupling
  double lambda1 = 1.0;
  double lambda2 = 0.0;

  /// chi1 == chi2 == chi_bar / 2
  bool codirectional(double tol = 1e-12) const;
  bool kerr_active() const { return chi1 != 0.0 || chi2 != 0.0 || chi_bar != 0.0; }
};

/// Rotated-frame constants. `lambda` echoes the mode-mode coupling so the
/// revival formula can be evaluated from these alone.
struct TransformedParams {
  double theta = 0.0;
  double Omega1 = 0.0;
  double Omega2 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu_bar = 0.0;
  double Delta = 0.0;
  double chi = 0.0;
  double lambda = 0.0;

  /// Atomic frequency consistent with Delta = Omega2 - omega0.
  double omega0() const { return Omega2 - Delta; }
};

enum class AngleBranch { principal, decouple_mode1 };

/// `printed_sqrt` takes the square root of the rotated frequency
/// combinations; `linear` (default) is the rotation of the quadratic form.
enum class FrequencyForm { linear, printed_sqrt };

enum class FrameDirection { a_to_b, b_to_a };

/// lambda1 lambda2 (omega2 - omega1) / (lambda2^2 - lambda1^2)
double balanced_lambda(const RawParams& raw);

double mixing_angle(const RawParams& raw, AngleBranch branch);

TransformedParams transform_params(const RawParams& raw, double theta,
                                   FrequencyForm form = FrequencyForm::linear);

/// Copy of `p` with the detuning replaced.
TransformedParams with_detuning(TransformedParams p, double delta);

/// Balanced coupling, decouple_mode1 branch, linear frequencies.
struct DecoupledModel {
  RawParams raw;  // raw with lambda replaced by the balanced value
  TransformedParams params;
};
DecoupledModel decoupled_model(RawParams raw);

/// Exact re-expansion of a Fock-basis state under the mode rotation. Output
/// components outside the truncation box are dropped; more than 1e-10 of
/// dropped weight is a truncation_overflow error.
PureState fock_frame_change(const PureState& state, double theta, FrameDirection dir);

/// (cos t a1 - sin t a2, sin t a1 + cos t a2)
std::pair<cplx, cplx> coherent_frame_change(cplx alpha1, cplx alpha2, double theta);

/// Expectation of b1'b1 + b2'b2 (equivalently a1'a1 + a2'a2).
double mean_total_photons(const PureState& state);

}  // namespace kerrqed
