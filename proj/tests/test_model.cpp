#include <doctest.h>

#include <numbers>

#include "kerrqed/error.hpp"
#include "kerrqed/model.hpp"
#include "support.hpp"

using namespace kerrqed;

namespace {

RawParams fig_raw(double lambda2) {
  RawParams r;
  r.omega1 = 0.2;
  r.omega2 = 0.1;
  r.lambda2 = lambda2;
  return r;
}

// Rotation generator K = a2' a1 - a1' a2 on the full box, identity on the atom.
CMatrix rotation_generator(Dims d) {
  const auto n = static_cast<Eigen::Index>(d.size());
  CMatrix k = CMatrix::Zero(n, n);
  for (int a = 0; a < 2; ++a)
    for (int m1 = 0; m1 < d.n1; ++m1)
      for (int m2 = 0; m2 < d.n2; ++m2) {
        const auto col = static_cast<Eigen::Index>(d.index(static_cast<AtomLevel>(a), m1, m2));
        if (m1 > 0 && m2 + 1 < d.n2)
          k(static_cast<Eigen::Index>(d.index(static_cast<AtomLevel>(a), m1 - 1, m2 + 1)), col) +=
              std::sqrt(m1 * (m2 + 1.0));
        if (m2 > 0 && m1 + 1 < d.n1)
          k(static_cast<Eigen::Index>(d.index(static_cast<AtomLevel>(a), m1 + 1, m2 - 1)), col) -=
              std::sqrt(m2 * (m1 + 1.0));
      }
  return k;
}

// Random state supported on total photon number <= n_total.
PureState random_low_state(std::mt19937_64& g, Dims d, int n_total) {
  CVector v = kq_test::random_vector(g, static_cast<Eigen::Index>(d.size()));
  for (int a = 0; a < 2; ++a)
    for (int m1 = 0; m1 < d.n1; ++m1)
      for (int m2 = 0; m2 < d.n2; ++m2)
        if (m1 + m2 > n_total) v[static_cast<Eigen::Index>(d.index(static_cast<AtomLevel>(a), m1, m2))] = 0.0;
  return PureState(d, v);
}

}  // namespace

TEST_CASE("balanced coupling") {
  CHECK(balanced_lambda(fig_raw(0.1)) == doctest::Approx(1.0 / 99.0).epsilon(1e-14));
  RawParams same = fig_raw(0.1);
  same.omega2 = same.omega1;
  CHECK(balanced_lambda(same) == 0.0);
  RawParams sing = fig_raw(1.0);
  CHECK_THROWS_AS(balanced_lambda(sing), Error);
}

TEST_CASE("mixing angle") {
  RawParams r = fig_raw(0.1);
  r.lambda = 0.0;
  CHECK(mixing_angle(r, AngleBranch::principal) == 0.0);
  r.lambda = 0.05;
  r.omega2 = r.omega1 + 2 * r.lambda;
  CHECK(mixing_angle(r, AngleBranch::principal) == doctest::Approx(std::numbers::pi / 8).epsilon(1e-14));

  RawParams b = fig_raw(0.1);
  b.lambda = 1.0 / 99.0;
  const double th = mixing_angle(b, AngleBranch::decouple_mode1);
  CHECK(th == doctest::Approx(std::atan(10.0)).epsilon(1e-14));
  CHECK(std::abs(std::tan(2 * th) - 2 * b.lambda / (b.omega2 - b.omega1)) < 1e-12);
  CHECK(std::abs(std::cos(th) - 0.1 * std::sin(th)) < 1e-14);
}

TEST_CASE("transform params examples") {
  RawParams r = fig_raw(0.1);
  r.lambda = 0.03;
  r.omega0 = 0.05;
  const auto p0 = transform_params(r, 0.0);
  CHECK(p0.Omega1 == doctest::Approx(r.omega1));
  CHECK(p0.Omega2 == doctest::Approx(r.omega2));
  CHECK(p0.mu1 == doctest::Approx(1.0));
  CHECK(p0.mu2 == doctest::Approx(0.1));
  CHECK(p0.Delta == doctest::Approx(r.omega2 - r.omega0));

  const auto ph = transform_params(r, std::numbers::pi / 2);
  CHECK(ph.mu1 == doctest::Approx(-0.1));
  CHECK(ph.mu2 == doctest::Approx(1.0));

  const auto dm = decoupled_model(fig_raw(0.1));
  CHECK(std::abs(dm.params.mu1) < 1e-15);
  CHECK(dm.params.mu2 == doctest::Approx(std::sqrt(1.01)).epsilon(1e-14));
  CHECK(dm.params.mu_bar == doctest::Approx(1.0049875621120890).epsilon(1e-14));

  RawParams kerr = r;
  kerr.chi1 = 0.01;
  CHECK_THROWS_AS(transform_params(kerr, 0.0), Error);
  kerr.chi2 = 0.01;
  kerr.chi_bar = 0.02;
  CHECK(transform_params(kerr, 0.0).chi == 0.01);

  // frequency oracle: a = R b, so the quadratic form becomes R^T W R
  for (double th : {0.1, 0.7, 2.0}) {
    Eigen::Matrix2d w;
    w << r.omega1, r.lambda, r.lambda, r.omega2;
    Eigen::Matrix2d rot;
    rot << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
    const Eigen::Matrix2d wb = rot.transpose() * w * rot;
    const auto p = transform_params(r, th);
    CHECK(std::abs(p.Omega1 - wb(0, 0)) < 1e-14);
    CHECK(std::abs(p.Omega2 - wb(1, 1)) < 1e-14);
  }
  const auto sq = transform_params(r, 0.0, FrequencyForm::printed_sqrt);
  CHECK(sq.Omega1 == doctest::Approx(std::sqrt(r.omega1)));
}

TEST_CASE("decoupling identity over random draws") {
  auto g = kq_test::rng(21);
  for (int k = 0; k < 1000; ++k) {
    RawParams r;
    r.lambda1 = 1.0;
    r.lambda2 = kq_test::uniform(g, 0.0, 3.0);
    if (std::abs(r.lambda2 - 1.0) < 1e-3) continue;
    r.omega1 = kq_test::uniform(g, -2.0, 2.0);
    r.omega2 = kq_test::uniform(g, -2.0, 2.0);
    const auto dm = decoupled_model(r);
    CHECK(std::abs(dm.params.mu1) <= 1e-12);
    CHECK(std::abs(dm.params.mu2 - std::hypot(1.0, r.lambda2)) <= 1e-12);
    const auto pp = transform_params(dm.raw, mixing_angle(dm.raw, AngleBranch::principal));
    CHECK(std::abs(pp.mu1 * pp.mu1 + pp.mu2 * pp.mu2 - 1.0 - r.lambda2 * r.lambda2) < 1e-12);
  }
}

TEST_CASE("fock frame change against the rotation generator") {
  auto g = kq_test::rng(22);
  const Dims d{7, 7};
  const CMatrix k = rotation_generator(d);
  const CMatrix ik = cplx(0, 1) * k;  // Hermitian; exp(theta K) = exp(-i (iK) theta)
  for (double th : {0.0, 0.3, std::atan(10.0), -1.2, 2.5}) {
    const CMatrix u = kq_test::expm_herm(ik, th);
    for (int rep = 0; rep < 5; ++rep) {
      const PureState psi = random_low_state(g, d, 6);
      const PureState out = fock_frame_change(psi, th, FrameDirection::a_to_b);
      CHECK((out.amps() - u * psi.amps()).norm() < 1e-12);
      CHECK(std::abs(mean_total_photons(out) - mean_total_photons(psi)) < 1e-10);
      const PureState back = fock_frame_change(out, th, FrameDirection::b_to_a);
      CHECK((back.amps() - psi.amps()).norm() < 1e-10);
    }
  }
  const double th = 0.4;
  const PureState one = PureState::basis(d, AtomLevel::ground, 1, 0);
  const PureState r = fock_frame_change(one, th, FrameDirection::a_to_b);
  CHECK(std::abs(r.amp(AtomLevel::ground, 1, 0) - std::cos(th)) < 1e-15);
  CHECK(std::abs(r.amp(AtomLevel::ground, 0, 1) - std::sin(th)) < 1e-15);

  const PureState id = random_low_state(g, d, 12);
  CHECK((fock_frame_change(id, 0.0, FrameDirection::a_to_b).amps() - id.amps()).norm() < 1e-14);
  const PureState edge = PureState::basis(d, AtomLevel::excited, 6, 6);
  CHECK_THROWS_AS(fock_frame_change(edge, 0.5, FrameDirection::a_to_b), Error);
}

TEST_CASE("coherent frame change matches the Fock route") {
  CHECK(coherent_frame_change({1.0, 2.0}, {0.5, 0.0}, 0.0) == std::pair<cplx, cplx>({1.0, 2.0}, {0.5, 0.0}));
  const auto [b1, b2] = coherent_frame_change({1.5, 0.0}, 0.0, std::numbers::pi / 2);
  CHECK(std::abs(b1) < 1e-15);
  CHECK(std::abs(b2 - 1.5) < 1e-15);

  const Dims d{31, 31};
  const cplx a1 = std::polar(1.8, 0.3), a2 = std::polar(1.1, -0.4);
  for (double th : {0.2, std::atan(10.0), -0.9}) {
    const auto c1 = coherent_amplitudes(a1, 30), c2 = coherent_amplitudes(a2, 30);
    const cplx up[] = {1.0, 0.0};
    const PureState in = tensor_state(up, {c1.amps.data(), 31}, {c2.amps.data(), 31});
    const auto [x1, x2] = coherent_frame_change(a1, a2, th);
    const auto e1 = coherent_amplitudes(x1, 30), e2 = coherent_amplitudes(x2, 30);
    const PureState expect = tensor_state(up, {e1.amps.data(), 31}, {e2.amps.data(), 31});
    CHECK(trace_distance(fock_frame_change(in, th, FrameDirection::a_to_b), expect) < 1e-8);
  }
}
