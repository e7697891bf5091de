#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "kerrqed/hilbert.hpp"
#include "kerrqed/model.hpp"

namespace kerrqed {

enum class Frame { original, transformed };

/// Hamiltonian on the truncated box (2, n1_dim, n2_dim), units of lambda1.
/// Stored sparse; `dense()` materializes it for small boxes.
class TruncatedHamiltonian {
 public:
  using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

  TruncatedHamiltonian(Dims dims, Frame frame, Sparse matrix);

  const Dims& dims() const { return dims_; }
  Frame frame() const { return frame_; }
  const Sparse& matrix() const { return matrix_; }
  CMatrix dense() const { return CMatrix(matrix_); }

  /// <psi|H|psi>
  double energy(const PureState& psi) const;

 private:
  Dims dims_;
  Frame frame_;
  Sparse matrix_;
};

/// sum_i [w_i n_i + chi_i n_i (n_i - 1)] + chi_bar n1 n2 + lambda (a1'a2 + a2'a1)
///   + (omega0 / 2) sigma_z + sum_i lambda_i (a_i sigma_+ + a_i' sigma_-)
TruncatedHamiltonian build_original(const RawParams& raw, int n1_dim, int n2_dim);

/// Rotated-frame Hamiltonian with common Kerr constant chi and
/// omega0 = Omega2 - Delta.
TruncatedHamiltonian build_transformed(const TransformedParams& p, int n1_dim, int n2_dim);

/// Eigendecomposition stored per connected block of the Hamiltonian graph.
/// Number-conserving Hamiltonians split into excitation sectors, so no block
/// exceeds 2 * min(n1_dim, n2_dim) states.
class SpectralDecomposition {
 public:
  struct Block {
    std::vector<Eigen::Index> basis;  // full-space indices, ascending
    Eigen::VectorXd eigenvalues;      // ascending
    CMatrix eigenvectors;             // columns, in `basis` coordinates
  };

  SpectralDecomposition(Dims dims, std::vector<Block> blocks);

  const Dims& dims() const { return dims_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  /// All eigenvalues, ascending.
  Eigen::VectorXd eigenvalues() const;
  /// Dense eigenvector matrix with columns ordered like eigenvalues().
  CMatrix eigenvectors() const;

  /// max |H - V diag(E) V'| over the block structure
  double reconstruction_error(const TruncatedHamiltonian& h) const;

 private:
  Dims dims_;
  std::vector<Block> blocks_;
};

SpectralDecomposition spectral(const TruncatedHamiltonian& h);

/// One dense eigensolve of the whole matrix. Reference path for small boxes.
SpectralDecomposition spectral_dense(const TruncatedHamiltonian& h);

/// V exp(-i E t) V' psi
PureState propagate(const SpectralDecomposition& dec, const PureState& state, double t);

/// Upper bound on oracle working memory for a box (dense sector eigenvectors,
/// sector Hamiltonians, sparse matrix).
std::size_t oracle_memory_estimate(int n1_dim, int n2_dim);

}  // namespace kerrqed
