#include "kerrqed/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace kerrqed {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::singular_parameters: return "singular_parameters";
    case ErrorKind::domain: return "domain";
    case ErrorKind::truncation_overflow: return "truncation_overflow";
    case ErrorKind::numeric_failure: return "numeric_failure";
    case ErrorKind::config: return "config";
    case ErrorKind::resource_cap: return "resource_cap";
  }
  return "unknown";
}

PureState::PureState(Dims dims, CVector amps) : dims_(dims) {
  require(dims.n1 >= 1 && dims.n2 >= 1, ErrorKind::invalid_input,
          "mode dimensions must be positive");
  require(static_cast<std::size_t>(amps.size()) == dims.size(),
          ErrorKind::invalid_input, "amplitude count does not match dims");
  const double norm = amps.norm();
  require(norm > 0.0 && std::isfinite(norm), ErrorKind::invalid_input,
          "state has zero or non-finite norm");
  amps_ = amps / norm;
}

PureState PureState::basis(Dims dims, AtomLevel a, int m1, int m2) {
  require(m1 >= 0 && m1 < dims.n1 && m2 >= 0 && m2 < dims.n2,
          ErrorKind::invalid_input, "Fock index outside truncation");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dims.size()));
  v[static_cast<Eigen::Index>(dims.index(a, m1, m2))] = 1.0;
  return PureState(dims, std::move(v), Trusted{});
}

PureState make_unit_state(Dims dims, CVector amps) {
  require(static_cast<std::size_t>(amps.size()) == dims.size(),
          ErrorKind::invalid_input, "amplitude count does not match dims");
  require(std::abs(amps.squaredNorm() - 1.0) <= kNormTol,
          ErrorKind::numeric_failure, "propagated state lost normalization");
  return PureState(dims, std::move(amps), PureState::Trusted{});
}

namespace {

std::size_t total_dim(const std::vector<Factor>& factors) {
  std::size_t d = 1;
  for (const auto& f : factors) d *= static_cast<std::size_t>(f.dim);
  return d;
}

void check_hermitian_trace(const std::vector<Factor>& factors, const CMatrix& m) {
  require(m.rows() == m.cols(), ErrorKind::invalid_input,
          "density matrix must be square");
  require(static_cast<std::size_t>(m.rows()) == total_dim(factors),
          ErrorKind::invalid_input, "density matrix size does not match factors");
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  require(herm <= kNormTol, ErrorKind::invalid_input,
          "density matrix is not Hermitian");
  const cplx tr = m.trace();
  require(std::abs(tr - 1.0) <= kNormTol, ErrorKind::invalid_input,
          "density matrix trace is not 1");
}

}  // namespace

DensityMatrix::DensityMatrix(std::vector<Factor> factors, CMatrix m)
    : factors_(std::move(factors)), m_(std::move(m)) {
  check_hermitian_trace(factors_, m_);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::numeric_failure,
          "eigensolver failed on density matrix");
  require(es.eigenvalues().minCoeff() >= -1e-8, ErrorKind::invalid_input,
          "density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  CMatrix m = psi.amps() * psi.amps().adjoint();
  return DensityMatrix(tripartite_factors(psi.dims()), std::move(m), Trusted{});
}

DensityMatrix DensityMatrix::unchecked_psd(std::vector<Factor> factors, CMatrix m) {
  check_hermitian_trace(factors, m);
  return DensityMatrix(std::move(factors), std::move(m), Trusted{});
}

std::vector<Factor> tripartite_factors(const Dims& dims) {
  return {{Subsystem::atom, Dims::atom},
          {Subsystem::mode1, dims.n1},
          {Subsystem::mode2, dims.n2}};
}

DensityMatrix to_density(const Ensemble& ensemble) {
  require(!ensemble.empty(), ErrorKind::invalid_input, "empty ensemble");
  const Dims dims = ensemble.front().state.dims();
  const auto n = static_cast<Eigen::Index>(dims.size());
  CMatrix m = CMatrix::Zero(n, n);
  for (const auto& [w, psi] : ensemble) {
    require(psi.dims() == dims, ErrorKind::invalid_input,
            "ensemble members have different dims");
    m.noalias() += w * (psi.amps() * psi.amps().adjoint());
  }
  return DensityMatrix::unchecked_psd(tripartite_factors(dims), std::move(m));
}

PureState tensor_state(std::span<const cplx> atom, std::span<const cplx> f1,
                       std::span<const cplx> f2) {
  require(atom.size() == 2, ErrorKind::invalid_input, "atom factor must be a 2-vector");
  require(!f1.empty() && !f2.empty(), ErrorKind::invalid_input, "empty field factor");
  auto norm2 = [](std::span<const cplx> v) {
    double s = 0.0;
    for (auto z : v) s += std::norm(z);
    return s;
  };
  for (auto v : {atom, f1, f2}) {
    const double n2 = norm2(v);
    require(n2 > 0.0, ErrorKind::invalid_input, "zero-norm factor");
    require(std::abs(std::sqrt(n2) - 1.0) <= 1e-8, ErrorKind::invalid_input,
            "factor is not normalized");
  }
  const Dims dims{static_cast<int>(f1.size()), static_cast<int>(f2.size())};
  CVector amps(static_cast<Eigen::Index>(dims.size()));
  for (int a = 0; a < 2; ++a)
    for (int m1 = 0; m1 < dims.n1; ++m1)
      for (int m2 = 0; m2 < dims.n2; ++m2)
        amps[static_cast<Eigen::Index>(dims.index(static_cast<AtomLevel>(a), m1, m2))] =
            atom[static_cast<std::size_t>(a)] * f1[static_cast<std::size_t>(m1)] *
            f2[static_cast<std::size_t>(m2)];
  return PureState(dims, std::move(amps));
}

CoherentAmplitudes coherent_amplitudes(cplx alpha, int n_max) {
  require(n_max >= 0, ErrorKind::invalid_input, "n_max must be non-negative");
  const double nbar = std::norm(alpha);
  CVector amps(n_max + 1);
  cplx c = std::exp(-0.5 * nbar);
  amps[0] = c;
  for (int m = 1; m <= n_max; ++m) {
    c *= alpha / std::sqrt(static_cast<double>(m));
    amps[m] = c;
  }
  // Tail summed directly; 1 - sum would lose everything below ~1e-16.
  double tail = 0.0;
  double p = std::norm(c);
  for (int m = n_max + 1;; ++m) {
    p *= nbar / m;
    tail += p;
    if (m > nbar && p <= 1e-18 * std::max(tail, 1e-300)) break;
    if (p == 0.0) break;
  }
  amps /= amps.norm();
  return {std::move(amps), tail};
}

int default_coherent_cutoff(double mean_photons) {
  require(mean_photons >= 0.0, ErrorKind::invalid_input,
          "mean photon number must be non-negative");
  return static_cast<int>(
      std::ceil(mean_photons + 6.0 * std::sqrt(mean_photons) + 10.0));
}

namespace {

struct TraceLayout {
  std::vector<Factor> kept;
  // full_index[k * traced_dim + r] = full index for kept index k, traced r
  std::vector<std::size_t> full_index;
  std::size_t kept_dim = 1;
  std::size_t traced_dim = 1;
};

TraceLayout layout_for(const std::vector<Factor>& factors, const SubsystemSet& keep) {
  require(!keep.empty(), ErrorKind::invalid_input, "partial trace: empty keep set");
  std::size_t n_kept = 0;
  for (const auto& f : factors)
    if (keep.contains(f.label)) ++n_kept;
  // Every requested label must be present.
  for (auto s : {Subsystem::atom, Subsystem::mode1, Subsystem::mode2,
                 Subsystem::field_qubit}) {
    if (!keep.contains(s)) continue;
    const bool present = std::any_of(factors.begin(), factors.end(),
                                     [s](const Factor& f) { return f.label == s; });
    require(present, ErrorKind::invalid_input,
            "partial trace: keep names a factor that is not present");
  }
  require(n_kept < factors.size(), ErrorKind::invalid_input,
          "partial trace: keep must be a strict subset");

  TraceLayout lay;
  std::vector<std::size_t> strides(factors.size());
  std::size_t s = 1;
  for (std::size_t i = factors.size(); i-- > 0;) {
    strides[i] = s;
    s *= static_cast<std::size_t>(factors[i].dim);
  }
  std::vector<std::size_t> kept_pos, traced_pos;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (keep.contains(factors[i].label)) {
      kept_pos.push_back(i);
      lay.kept.push_back(factors[i]);
      lay.kept_dim *= static_cast<std::size_t>(factors[i].dim);
    } else {
      traced_pos.push_back(i);
      lay.traced_dim *= static_cast<std::size_t>(factors[i].dim);
    }
  }
  auto offset = [&](std::size_t linear, const std::vector<std::size_t>& pos) {
    std::size_t off = 0;
    for (std::size_t j = pos.size(); j-- > 0;) {
      const auto d = static_cast<std::size_t>(factors[pos[j]].dim);
      off += (linear % d) * strides[pos[j]];
      linear /= d;
    }
    return off;
  };
  lay.full_index.resize(lay.kept_dim * lay.traced_dim);
  for (std::size_t k = 0; k < lay.kept_dim; ++k) {
    const std::size_t ko = offset(k, kept_pos);
    for (std::size_t r = 0; r < lay.traced_dim; ++r)
      lay.full_index[k * lay.traced_dim + r] = ko + offset(r, traced_pos);
  }
  return lay;
}

}  // namespace

DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemSet& keep) {
  const TraceLayout lay = layout_for(rho.factors(), keep);
  const auto kd = static_cast<Eigen::Index>(lay.kept_dim);
  CMatrix out = CMatrix::Zero(kd, kd);
  const CMatrix& m = rho.matrix();
  for (std::size_t i = 0; i < lay.kept_dim; ++i)
    for (std::size_t j = 0; j < lay.kept_dim; ++j) {
      cplx acc = 0.0;
      for (std::size_t r = 0; r < lay.traced_dim; ++r)
        acc += m(static_cast<Eigen::Index>(lay.full_index[i * lay.traced_dim + r]),
                 static_cast<Eigen::Index>(lay.full_index[j * lay.traced_dim + r]));
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  return DensityMatrix::unchecked_psd(lay.kept, std::move(out));
}

DensityMatrix partial_trace(const PureState& psi, const SubsystemSet& keep) {
  const TraceLayout lay = layout_for(tripartite_factors(psi.dims()), keep);
  CMatrix coeffs(static_cast<Eigen::Index>(lay.kept_dim),
                 static_cast<Eigen::Index>(lay.traced_dim));
  for (std::size_t k = 0; k < lay.kept_dim; ++k)
    for (std::size_t r = 0; r < lay.traced_dim; ++r)
      coeffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r)) =
          psi.amps()[static_cast<Eigen::Index>(lay.full_index[k * lay.traced_dim + r])];
  CMatrix out = coeffs * coeffs.adjoint();
  return DensityMatrix::unchecked_psd(lay.kept, std::move(out));
}

double purity(const DensityMatrix& rho) {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return rho.matrix().squaredNorm();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require(a.factors() == b.factors(), ErrorKind::invalid_input,
          "trace distance: dimension mismatch");
  const CMatrix diff = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(diff, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::numeric_failure,
          "eigensolver failed in trace distance");
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const PureState& a, const PureState& b) {
  require(a.dims() == b.dims(), ErrorKind::invalid_input,
          "trace distance: dimension mismatch");
  // Norm of the part of b orthogonal to a; 1 - |<a|b>|^2 cancels badly.
  const cplx ov = a.amps().dot(b.amps());
  return (b.amps() - ov * a.amps()).norm();
}

}  // namespace kerrqed
