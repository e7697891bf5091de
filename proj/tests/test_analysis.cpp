#include <doctest.h>

#include <numbers>

#include "kerrqed/analysis.hpp"
#include "kerrqed/error.hpp"
#include "kerrqed/propagator.hpp"
#include "support.hpp"

using namespace kerrqed;
using Eigen::Matrix4cd;

namespace {

Matrix4cd random_x_state(std::mt19937_64& g) {
  // Populations first, then coherences inside the positivity bounds.
  double p[4];
  double s = 0.0;
  for (double& x : p) s += (x = kq_test::uniform(g, 0.0, 1.0));
  for (double& x : p) x /= s;
  Matrix4cd r = Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) r(i, i) = p[i];
  const cplx z23 = std::polar(kq_test::uniform(g, 0.0, 1.0) * std::sqrt(p[1] * p[2]), kq_test::uniform(g, -3.0, 3.0));
  const cplx z14 = std::polar(kq_test::uniform(g, 0.0, 1.0) * std::sqrt(p[0] * p[3]), kq_test::uniform(g, -3.0, 3.0));
  r(1, 2) = z23;
  r(2, 1) = std::conj(z23);
  r(0, 3) = z14;
  r(3, 0) = std::conj(z14);
  return r;
}

Eigen::Matrix2cd random_u2(std::mt19937_64& g) { return kq_test::random_unitary(g, 2); }

std::vector<Factor> two_qubits() { return {{Subsystem::field_qubit, 2}, {Subsystem::atom, 2}}; }

TimeSeries sampled(double t_max, int n, auto f) {
  TimeSeries s;
  for (int i = 0; i < n; ++i) {
    const double t = t_max * i / (n - 1);
    s.times.push_back(t);
    s.values.push_back(f(t));
  }
  return s;
}

}  // namespace

TEST_CASE("time series validation") {
  TimeSeries s{{0.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, "x"};
  CHECK_THROWS_AS(s.validate(), Error);
  TimeSeries t{{0.0, 1.0}, {0.0}, "x"};
  CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("inversion and linear entropy") {
  const Dims d{2, 3};
  CHECK(atomic_inversion(PureState::basis(d, AtomLevel::excited, 1, 2)) == 1.0);
  CHECK(atomic_inversion(DensityMatrix::from_pure(PureState::basis(d, AtomLevel::ground, 0, 0))) == -1.0);
  const auto p = kq_test::vacuum_rabi();
  CHECK(std::abs(atomic_inversion(evolve_pure(PureState::basis(d, AtomLevel::excited, 0, 0),
                                              std::numbers::pi / 4, p))) < 1e-15);

  CHECK(linear_entropy_atom(PureState::basis(d, AtomLevel::excited, 1, 1)) == doctest::Approx(0.0));
  CVector v = CVector::Zero(12);
  v[d.index(AtomLevel::excited, 0, 1)] = 1.0;
  v[d.index(AtomLevel::ground, 1, 0)] = 1.0;
  const PureState bell(d, v);
  CHECK(linear_entropy_atom(bell) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(linear_entropy_atom(DensityMatrix::from_pure(bell)) == doctest::Approx(0.5).epsilon(1e-14));

  auto g = kq_test::rng(51);
  for (int k = 0; k < 10; ++k) {
    const PureState a = kq_test::random_state(g, d), b = kq_test::random_state(g, d);
    const double w = kq_test::uniform(g, 0.0, 1.0);
    const Ensemble ens = {{w, a}, {1 - w, b}};
    const DensityMatrix rho = to_density(ens);
    CHECK(std::abs(atomic_inversion(ens) - atomic_inversion(rho)) < 1e-12);
    CHECK(std::abs(linear_entropy_atom(ens) - linear_entropy_atom(rho)) < 1e-12);
    const CMatrix ra = partial_trace(rho, {Subsystem::atom}).matrix();
    CHECK(std::abs(linear_entropy_atom(rho) - (1.0 - (ra * ra).trace().real())) < 1e-12);
    CHECK((atom_reduced(ens) - Eigen::Matrix2cd(ra)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("concurrence examples") {
  Matrix4cd bell = Matrix4cd::Zero();
  bell(1, 1) = bell(2, 2) = bell(1, 2) = bell(2, 1) = 0.5;
  CHECK(concurrence_general(bell) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(concurrence_x(bell) == doctest::Approx(1.0).epsilon(1e-14));
  Matrix4cd phi = Matrix4cd::Zero();
  phi(0, 0) = phi(3, 3) = phi(0, 3) = phi(3, 0) = 0.5;
  CHECK(concurrence_general(phi) == doctest::Approx(1.0).epsilon(1e-10));

  Matrix4cd sep = Matrix4cd::Zero();
  sep(0, 0) = sep(1, 1) = 0.5;
  CHECK(concurrence_x(sep) == 0.0);
  CHECK(concurrence_general(sep) == 0.0);
  CHECK(concurrence_general(Matrix4cd(Matrix4cd::Identity() * 0.25)) == 0.0);

  auto g = kq_test::rng(52);
  for (int k = 0; k < 20; ++k) {
    // product of random qubit states
    const CMatrix a = kq_test::random_density(g, 2), b = kq_test::random_density(g, 2);
    Matrix4cd prod;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) prod.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    CHECK(concurrence_general(prod) < 1e-7);
  }
  Matrix4cd not_x = bell;
  not_x(0, 1) = not_x(1, 0) = 0.01;
  CHECK_FALSE(is_x_state(not_x));
  CHECK_THROWS_AS(concurrence_x(not_x), Error);
  Matrix4cd negative = Matrix4cd::Zero();
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(concurrence_general(negative), Error);
}

TEST_CASE("concurrence: closed form equals Wootters on random X states; local invariance") {
  auto g = kq_test::rng(53);
  for (int k = 0; k < 1000; ++k) {
    const Matrix4cd r = random_x_state(g);
    CHECK(std::abs(concurrence_general(r) - concurrence_x(r)) < 1e-10);
  }
  for (int k = 0; k < 100; ++k) {
    const Matrix4cd r = kq_test::random_density(g, 4, kq_test::uniform_int(g, 1, 4));
    const Eigen::Matrix2cd ua = random_u2(g), ub = random_u2(g);
    Matrix4cd u;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) u.block<2, 2>(2 * i, 2 * j) = ua(i, j) * ub;
    const double c0 = concurrence_general(r);
    const double c1 = concurrence_general(Matrix4cd(u * r * u.adjoint()));
    CHECK(std::abs(c0 - c1) < 1e-9);
    CHECK(c0 >= 0.0);
    CHECK(c0 <= 1.0);
    CHECK(std::abs(concurrence_general(DensityMatrix(two_qubits(), r)) - c0) < 1e-15);
  }
}

TEST_CASE("pure four-level trajectory reaches full concurrence") {
  const auto p = kq_test::vacuum_rabi();
  const double t = std::numbers::pi * std::numbers::sqrt2 / 8;
  CHECK(concurrence_x(four_level_rho(t, 1.0, p)) == doctest::Approx(1.0).epsilon(1e-12));
  for (double s : {0.1, 0.9, 2.3})
    CHECK(concurrence_x(four_level_rho(s, 1.0, p)) ==
          doctest::Approx(std::abs(std::sin(2 * std::numbers::sqrt2 * s))).epsilon(1e-12));
}

TEST_CASE("sudden death formula") {
  TransformedParams p;
  p.chi = 0.01;
  const auto td = sudden_death_formula(p, 0.1);
  REQUIRE(td.has_value());
  // independent scalar evaluation
  const double dk = -0.02;
  const double expect = std::acos(2 * dk * dk / (dk * dk - 8 * (1 + 0.01))) / 0.02;
  CHECK(std::abs(*td - expect) < 1e-12);
  CHECK(std::abs(*td - 78.545) < 0.01);
  TransformedParams sing;
  sing.chi = 0.05;
  sing.Delta = 0.1;
  CHECK_FALSE(sudden_death_formula(sing, 0.1).has_value());
  TransformedParams big;
  big.chi = 0.0;
  big.Delta = 10.0;  // argument 200 / (100 - 8.08) > 1
  CHECK_FALSE(sudden_death_formula(big, 0.1).has_value());
}

TEST_CASE("revival time formula") {
  TransformedParams p;
  p.mu_bar = 1.0;
  const double t1 = revival_time_formula(p, 10.0, 1);
  CHECK(t1 == doctest::Approx(std::numbers::pi * (std::sqrt(11.0) + std::sqrt(10.0))).epsilon(1e-12));
  CHECK(revival_time_formula(p, 10.0, 2) == doctest::Approx(2 * t1).epsilon(1e-14));
  TransformedParams zero;
  CHECK_THROWS_AS(revival_time_formula(zero, 10.0, 1), Error);
}

TEST_CASE("cnot kerr condition") {
  TransformedParams p;
  p.mu_bar = 2.0;
  CHECK(cnot_kerr(p) == 0.0);
  p.mu_bar = 1.0;
  CHECK(std::abs(cnot_kerr(p) - std::sqrt(3.0) / 2) < 1e-12);
  p.mu_bar = 3.0;
  CHECK_THROWS_AS(cnot_kerr(p), Error);
}

TEST_CASE("sudden death detector") {
  const auto zero = sampled(20.0, 201, [](double) { return 0.0; });
  REQUIRE(detect_sudden_death(zero).has_value());
  CHECK(*detect_sudden_death(zero) == 0.0);
  const auto pos = sampled(20.0, 201, [](double t) { return 0.5 + 0.1 * std::sin(t); });
  CHECK_FALSE(detect_sudden_death(pos).has_value());
  const auto dies = sampled(30.0, 301, [](double t) { return t < 12.0 ? 0.3 : 0.0; });
  REQUIRE(detect_sudden_death(dies).has_value());
  CHECK(*detect_sudden_death(dies) == doctest::Approx(12.0));
  // brief dips shorter than the dwell are ignored
  const auto dips = sampled(30.0, 301, [](double t) { return std::abs(std::sin(t)); });
  CHECK_FALSE(detect_sudden_death(dips).has_value());
}

TEST_CASE("revival detector") {
  const double w = std::numbers::pi;
  const auto rabi = sampled(60.0, 3001, [](double t) { return std::cos(2 * t); });
  const RevivalReport r = detect_revivals(rabi, {w});
  CHECK_FALSE(r.collapse_time.has_value());
  CHECK(r.detected_times.empty());

  const auto coarse = sampled(60.0, 50, [](double t) { return std::cos(2 * t); });
  CHECK_THROWS_AS(detect_revivals(coarse, {w}), Error);

  // Jaynes-Cummings limit, nbar = 10 in the coupled mode
  TransformedParams p;
  p.mu_bar = p.mu2 = 1.0;
  p.Omega2 = 0.1;
  const Dims d{1, 60};
  const auto c = coherent_amplitudes(std::sqrt(10.0), 59);
  const cplx e[] = {1.0, 0.0};
  const cplx vac[] = {1.0};
  const PureState psi = tensor_state(e, vac, {c.amps.data(), 60});
  const auto inv = sampled(60.0, 3001, [&](double t) { return atomic_inversion(evolve_pure(psi, t, p)); });
  RevivalOptions o;
  o.window = default_revival_window(p, 0.0, 10.0);
  o.formula_time = revival_time_formula(p, 10.0, 1);
  const RevivalReport j = detect_revivals(inv, o);
  REQUIRE(j.collapse_time.has_value());
  REQUIRE_FALSE(j.detected_times.empty());
  const double scale = 2 * std::numbers::pi * std::sqrt(10.0);
  CHECK(std::abs(j.detected_times.front() - scale) < 0.15 * scale);
  CHECK(j.formula_time == o.formula_time);
}

TEST_CASE("gate check") {
  TransformedParams p;
  p.mu_bar = p.mu2 = 1.0;
  p.chi = cnot_kerr(p);
  const GateReport r = gate_check(p, 1);
  REQUIRE(r.entries.size() == 2);
  CHECK(std::abs(r.entries[0].return_probability - 1.0) < 1e-8);
  CHECK(r.time == doctest::Approx(2 * std::numbers::pi));
  const GateReport id = gate_check(p, 0);
  CHECK(id.fidelity == doctest::Approx(1.0).epsilon(1e-15));
  TransformedParams bad = p;
  bad.Delta = 0.1;
  CHECK_THROWS_AS(gate_check(bad, 1), Error);
  bad = p;
  bad.chi = 0.1;
  CHECK_THROWS_AS(gate_check(bad, 1), Error);
}

TEST_CASE("picture invariance and bounds on trajectories") {
  auto g = kq_test::rng(54);
  const Dims d{3, 6};
  for (int k = 0; k < 10; ++k) {
    const auto p = kq_test::random_decoupled(g);
    const PureState psi = kq_test::random_state(g, d);
    for (double t : {0.7, 13.0, 41.0}) {
      const PureState ip = evolve_pure(psi, t, p);
      const PureState sp = to_schrodinger(ip, t, p);
      CHECK(std::abs(atomic_inversion(ip) - atomic_inversion(sp)) < 1e-9);
      const double sl = linear_entropy_atom(ip);
      CHECK(std::abs(sl - linear_entropy_atom(sp)) < 1e-9);
      CHECK(sl >= -1e-15);
      CHECK(sl <= 0.5 + 1e-15);
    }
    const Dims q{1, 3};
    const double gamma = kq_test::uniform(g, 0.0, 1.0);
    const Ensemble ens = {{gamma, PureState::basis(q, AtomLevel::excited, 0, 1)},
                          {1 - gamma, PureState::basis(q, AtomLevel::ground, 0, 1)}};
    for (double t : {1.0, 9.0, 33.0}) {
      Ensemble ie, se;
      for (const auto& [w, s] : ens) {
        const PureState x = evolve_pure(s, t, p);
        ie.push_back({w, x});
        se.push_back({w, to_schrodinger(x, t, p)});
      }
      const double ci = concurrence_x(four_level_from(ie));
      CHECK(std::abs(ci - concurrence_general(four_level_from(se))) < 1e-9);
      CHECK(ci >= 0.0);
      CHECK(ci <= 1.0);
    }
  }
}
