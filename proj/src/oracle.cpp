#include "kerrqed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace kerrqed {

TruncatedHamiltonian::TruncatedHamiltonian(Dims dims, Frame frame, Sparse matrix)
    : dims_(dims), frame_(frame), matrix_(std::move(matrix)) {
  require(static_cast<std::size_t>(matrix_.rows()) == dims.size() &&
              matrix_.rows() == matrix_.cols(),
          ErrorKind::invalid_input, "Hamiltonian size does not match dims");
}

double TruncatedHamiltonian::energy(const PureState& psi) const {
  require(psi.dims() == dims_, ErrorKind::invalid_input, "energy: dimension mismatch");
  const CVector h_psi = matrix_ * psi.amps();
  return psi.amps().dot(h_psi).real();
}

namespace {

struct Coefficients {
  double w1, w2;    // number terms
  double k1, k2;    // self Kerr, n (n - 1)
  double kx;        // cross Kerr, n1 n2
  double bs;        // beam splitter a1'a2 + h.c.
  double g1, g2;    // atom couplings
  double w0;        // atomic frequency
};

TruncatedHamiltonian assemble(const Coefficients& c, int n1_dim, int n2_dim, Frame frame) {
  const int min_dim = frame == Frame::original ? 2 : 1;
  require(n1_dim >= min_dim && n2_dim >= min_dim, ErrorKind::invalid_input,
          frame == Frame::original ? "oracle truncation needs at least 2 levels per mode"
                                   : "oracle truncation needs at least 1 level per mode");
  const Dims d{n1_dim, n2_dim};
  using Triplet = Eigen::Triplet<cplx>;
  std::vector<Triplet> t;
  t.reserve(d.size() * 5);
  auto add = [&t](std::size_t r, std::size_t col, double v) {
    if (v == 0.0) return;
    t.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col), v);
    if (r != col)
      t.emplace_back(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(r), v);
  };
  for (int a = 0; a < 2; ++a) {
    const auto lvl = static_cast<AtomLevel>(a);
    const double sz = lvl == AtomLevel::excited ? 1.0 : -1.0;
    for (int m1 = 0; m1 < n1_dim; ++m1) {
      for (int m2 = 0; m2 < n2_dim; ++m2) {
        const std::size_t i = d.index(lvl, m1, m2);
        const double diag = c.w1 * m1 + c.w2 * m2 + c.k1 * m1 * (m1 - 1.0) +
                            c.k2 * m2 * (m2 - 1.0) + c.kx * m1 * m2 + 0.5 * c.w0 * sz;
        add(i, i, diag);
        // a1' a2 |m1, m2> = sqrt((m1 + 1) m2) |m1 + 1, m2 - 1>
        if (m1 + 1 < n1_dim && m2 >= 1)
          add(d.index(lvl, m1 + 1, m2 - 1), i, c.bs * std::sqrt((m1 + 1.0) * m2));
      }
    }
  }
  // a_i sigma_+ |g, m> = sqrt(m_i) |e, m - 1_i>
  for (int m1 = 0; m1 < n1_dim; ++m1) {
    for (int m2 = 0; m2 < n2_dim; ++m2) {
      const std::size_t g = d.index(AtomLevel::ground, m1, m2);
      if (m1 >= 1) add(d.index(AtomLevel::excited, m1 - 1, m2), g, c.g1 * std::sqrt(double(m1)));
      if (m2 >= 1) add(d.index(AtomLevel::excited, m1, m2 - 1), g, c.g2 * std::sqrt(double(m2)));
    }
  }
  TruncatedHamiltonian::Sparse m(static_cast<Eigen::Index>(d.size()),
                                 static_cast<Eigen::Index>(d.size()));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return TruncatedHamiltonian(d, frame, std::move(m));
}

}  // namespace

TruncatedHamiltonian build_original(const RawParams& raw, int n1_dim, int n2_dim) {
  const Coefficients c{raw.omega1, raw.omega2, raw.chi1, raw.chi2, raw.chi_bar,
                       raw.lambda, raw.lambda1, raw.lambda2, raw.omega0};
  return assemble(c, n1_dim, n2_dim, Frame::original);
}

TruncatedHamiltonian build_transformed(const TransformedParams& p, int n1_dim, int n2_dim) {
  const Coefficients c{p.Omega1, p.Omega2, p.chi, p.chi, 2.0 * p.chi,
                       0.0, p.mu1, p.mu2, p.omega0()};
  return assemble(c, n1_dim, n2_dim, Frame::transformed);
}

SpectralDecomposition::SpectralDecomposition(Dims dims, std::vector<Block> blocks)
    : dims_(dims), blocks_(std::move(blocks)) {}

Eigen::VectorXd SpectralDecomposition::eigenvalues() const {
  std::vector<double> all;
  all.reserve(dims_.size());
  for (const auto& b : blocks_)
    all.insert(all.end(), b.eigenvalues.data(), b.eigenvalues.data() + b.eigenvalues.size());
  std::sort(all.begin(), all.end());
  return Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
}

CMatrix SpectralDecomposition::eigenvectors() const {
  struct Col {
    double e;
    std::size_t block;
    Eigen::Index col;
  };
  std::vector<Col> cols;
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi)
    for (Eigen::Index k = 0; k < blocks_[bi].eigenvalues.size(); ++k)
      cols.push_back({blocks_[bi].eigenvalues[k], bi, k});
  std::stable_sort(cols.begin(), cols.end(), [](const Col& a, const Col& b) { return a.e < b.e; });
  const auto n = static_cast<Eigen::Index>(dims_.size());
  CMatrix v = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Col& c = cols[static_cast<std::size_t>(j)];
    const Block& b = blocks_[c.block];
    for (std::size_t r = 0; r < b.basis.size(); ++r)
      v(b.basis[r], j) = b.eigenvectors(static_cast<Eigen::Index>(r), c.col);
  }
  return v;
}

double SpectralDecomposition::reconstruction_error(const TruncatedHamiltonian& h) const {
  require(h.dims() == dims_, ErrorKind::invalid_input, "reconstruction: dimension mismatch");
  std::vector<std::size_t> owner(dims_.size());
  std::vector<Eigen::Index> local(dims_.size());
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi)
    for (std::size_t r = 0; r < blocks_[bi].basis.size(); ++r) {
      owner[static_cast<std::size_t>(blocks_[bi].basis[r])] = bi;
      local[static_cast<std::size_t>(blocks_[bi].basis[r])] = static_cast<Eigen::Index>(r);
    }
  double err = 0.0;
  std::vector<CMatrix> sub(blocks_.size());
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& b = blocks_[bi];
    sub[bi] = b.eigenvectors * b.eigenvalues.asDiagonal() * b.eigenvectors.adjoint();
  }
  const auto& m = h.matrix();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (TruncatedHamiltonian::Sparse::InnerIterator it(m, r); it; ++it) {
      const auto ri = static_cast<std::size_t>(it.row());
      const auto ci = static_cast<std::size_t>(it.col());
      if (owner[ri] != owner[ci]) {
        err = std::max(err, std::abs(it.value()));
        continue;
      }
      sub[owner[ri]](local[ri], local[ci]) -= it.value();
    }
  for (const auto& s : sub) err = std::max(err, s.cwiseAbs().maxCoeff());
  return err;
}

namespace {

SpectralDecomposition::Block solve_block(const TruncatedHamiltonian& h,
                                         std::vector<Eigen::Index> basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  CMatrix sub = CMatrix::Zero(n, n);
  std::vector<Eigen::Index> local(h.dims().size(), -1);
  for (Eigen::Index k = 0; k < n; ++k) local[static_cast<std::size_t>(basis[static_cast<std::size_t>(k)])] = k;
  const auto& m = h.matrix();
  for (Eigen::Index k = 0; k < n; ++k)
    for (TruncatedHamiltonian::Sparse::InnerIterator it(m, basis[static_cast<std::size_t>(k)]); it; ++it) {
      const Eigen::Index c = local[static_cast<std::size_t>(it.col())];
      if (c >= 0) sub(k, c) = it.value();
    }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
  require(es.info() == Eigen::Success, ErrorKind::numeric_failure,
          "Hermitian eigensolver did not converge");
  return {std::move(basis), es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

SpectralDecomposition spectral(const TruncatedHamiltonian& h) {
  const std::size_t n = h.dims().size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  const auto& m = h.matrix();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (TruncatedHamiltonian::Sparse::InnerIterator it(m, r); it; ++it) {
      if (it.value() == 0.0) continue;
      const std::size_t a = find(static_cast<std::size_t>(it.row()));
      const std::size_t b = find(static_cast<std::size_t>(it.col()));
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  // Group by root; roots are the smallest member, so block order is
  // deterministic.
  std::vector<std::vector<Eigen::Index>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(static_cast<Eigen::Index>(i));
  std::vector<SpectralDecomposition::Block> blocks;
  for (auto& g : groups)
    if (!g.empty()) blocks.push_back(solve_block(h, std::move(g)));
  return SpectralDecomposition(h.dims(), std::move(blocks));
}

SpectralDecomposition spectral_dense(const TruncatedHamiltonian& h) {
  std::vector<Eigen::Index> all(h.dims().size());
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<SpectralDecomposition::Block> blocks;
  blocks.push_back(solve_block(h, std::move(all)));
  return SpectralDecomposition(h.dims(), std::move(blocks));
}

PureState propagate(const SpectralDecomposition& dec, const PureState& state, double t) {
  require(state.dims() == dec.dims(), ErrorKind::invalid_input, "propagate: dimension mismatch");
  CVector out = state.amps();
  for (const auto& b : dec.blocks()) {
    const auto n = static_cast<Eigen::Index>(b.basis.size());
    CVector x(n);
    bool any = false;
    for (Eigen::Index k = 0; k < n; ++k) {
      x[k] = out[b.basis[static_cast<std::size_t>(k)]];
      any = any || x[k] != 0.0;
    }
    if (!any) continue;
    CVector y = b.eigenvectors.adjoint() * x;
    for (Eigen::Index k = 0; k < n; ++k) y[k] *= std::exp(cplx{0.0, -b.eigenvalues[k] * t});
    x.noalias() = b.eigenvectors * y;
    for (Eigen::Index k = 0; k < n; ++k) out[b.basis[static_cast<std::size_t>(k)]] = x[k];
  }
  return make_unit_state(state.dims(), std::move(out));
}

std::size_t oracle_memory_estimate(int n1_dim, int n2_dim) {
  const Dims d{n1_dim, n2_dim};
  auto pairs_with_sum = [&](int n) -> std::size_t {
    if (n < 0) return 0;
    const int lo = std::max(0, n - (n2_dim - 1));
    const int hi = std::min(n, n1_dim - 1);
    return hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0;
  };
  const std::size_t bytes = sizeof(cplx);
  std::size_t total = 0;
  for (int k = 0; k <= n1_dim + n2_dim - 1; ++k) {
    const std::size_t s = pairs_with_sum(k) + pairs_with_sum(k - 1);
    total += 3 * s * s * bytes;  // sector matrix, eigenvectors, solver workspace
  }
  total += d.size() * 5 * (bytes + sizeof(int));  // sparse H
  total += d.size() * 8 * bytes;                   // state vectors and scratch
  return total;
}

}  // namespace kerrqed
