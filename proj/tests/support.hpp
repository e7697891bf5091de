#pragma once

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "kerrqed/hilbert.hpp"
#include "kerrqed/model.hpp"

namespace kq_test {

using kerrqed::cplx;
using kerrqed::CMatrix;
using kerrqed::CVector;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int uniform_int(std::mt19937_64& g, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(g);
}

inline CVector random_vector(std::mt19937_64& g, Eigen::Index n) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(nd(g), nd(g));
  return v.normalized();
}

inline kerrqed::PureState random_state(std::mt19937_64& g, kerrqed::Dims d) {
  return kerrqed::PureState(d, random_vector(g, static_cast<Eigen::Index>(d.size())));
}

/// Random density matrix of given rank via a Ginibre factor.
inline CMatrix random_density(std::mt19937_64& g, Eigen::Index n, Eigen::Index rank = -1) {
  if (rank < 0) rank = n;
  std::normal_distribution<double> nd;
  CMatrix a(n, rank);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < rank; ++j) a(i, j) = cplx(nd(g), nd(g));
  CMatrix r = a * a.adjoint();
  return r / r.trace();
}

inline CMatrix random_unitary(std::mt19937_64& g, Eigen::Index n) {
  std::normal_distribution<double> nd;
  CMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cplx(nd(g), nd(g));
  Eigen::HouseholderQR<CMatrix> qr(a);
  return qr.householderQ();
}

/// exp(-i h t) for Hermitian h, via its eigenbasis.
inline CMatrix expm_herm(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CVector ph = (es.eigenvalues().cast<cplx>() * cplx(0.0, -t)).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Random rotated-frame parameters with mode 1 decoupled.
inline kerrqed::TransformedParams random_decoupled(std::mt19937_64& g) {
  kerrqed::TransformedParams p;
  p.mu_bar = p.mu2 = uniform(g, 0.05, 2.0);
  p.mu1 = 0.0;
  p.Omega1 = uniform(g, -1.0, 1.0);
  p.Omega2 = uniform(g, -1.0, 1.0);
  p.Delta = uniform(g, -1.0, 1.0);
  p.chi = uniform(g, 0.0, 0.2);
  p.theta = uniform(g, 0.0, 3.0);
  return p;
}

inline kerrqed::TransformedParams vacuum_rabi() {
  kerrqed::TransformedParams p;
  p.mu_bar = p.mu2 = 1.0;
  p.Omega2 = 0.3;
  p.Omega1 = 0.1;
  return p;
}

}  // namespace kq_test
