#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "mirrorspec/lindblad.hpp"

using namespace mirrorspec;
using Eigen::MatrixXcd;
using std::complex;

namespace {
const OscillatorParams kOsc{1.0, 0.4};
const DerivedOscillator kD = derive_oscillator(kOsc);

MatrixXcd random_density(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = complex<double>(g(rng), g(rng));
  }
  MatrixXcd rho = m * m.adjoint();
  return rho / rho.trace();
}
}  // namespace

TEST_CASE("truncated operators") {
  const TruncatedOperators ops = build_operators(24, kOsc, kD, 0.4);

  SUBCASE("q and p are Hermitian") {
    CHECK((ops.q - ops.q.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((ops.p - ops.p.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("canonical commutator on the interior block") {
    const MatrixXcd c = ops.q * ops.p - ops.p * ops.q;
    const int n = ops.dim - 2;  // truncation corrupts the top block
    const MatrixXcd interior = c.topLeftCorner(n, n) -
                               complex<double>(0.0, 1.0) *
                                   MatrixXcd::Identity(n, n);
    CHECK(interior.cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("e^{ivq} is unitary to truncation accuracy") {
    CHECK(ops.unitarity_defect < 1e-10);
  }
  SUBCASE("v = 0 gives the identity") {
    const TruncatedOperators id = build_operators(12, kOsc, kD, 0.0);
    CHECK((id.exp_ivq - MatrixXcd::Identity(12, 12)).cwiseAbs().maxCoeff() ==
          0.0);
  }
  SUBCASE("gamma -> 0 recovers the standard quadratures") {
    const OscillatorParams osc0{1.0, 1e-13};
    const DerivedOscillator d0 = derive_oscillator(osc0);
    const TruncatedOperators std_ops = build_operators(12, osc0, d0, 0.0);
    const MatrixXcd adag = std_ops.a.adjoint();
    const MatrixXcd q_ref = (std_ops.a + adag) / std::sqrt(2.0);
    const MatrixXcd p_ref =
        complex<double>(0.0, 1.0) * (adag - std_ops.a) / std::sqrt(2.0);
    CHECK((std_ops.q - q_ref).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((std_ops.p - p_ref).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(build_operators(3, kOsc, kD, 0.1), Error);
}

TEST_CASE("liouvillian apply") {
  const TruncatedOperators ops = build_operators(20, kOsc, kD, 0.3);

  SUBCASE("trace preservation on random states") {
    for (unsigned seed : {1u, 2u, 3u}) {
      const MatrixXcd rho = random_density(20, seed);
      const MatrixXcd L = liouvillian_apply(ops, rho, kOsc, kD, 0.5, 0.7);
      CHECK(std::abs(L.trace()) < 1e-12);
      CHECK((L - L.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("maximally mixed state with v = 0 still relaxes") {
    const TruncatedOperators ops0 = build_operators(16, kOsc, kD, 0.0);
    const MatrixXcd rho = MatrixXcd::Identity(16, 16) / 16.0;
    const MatrixXcd L = liouvillian_apply(ops0, rho, kOsc, kD, 0.0, 0.0);
    CHECK(L.cwiseAbs().maxCoeff() > 1e-6);
    CHECK(std::abs(L.trace()) < 1e-13);
  }
  SUBCASE("vacuum is stationary without drive or thermal quanta") {
    const TruncatedOperators ops0 = build_operators(16, kOsc, kD, 0.0);
    MatrixXcd vac = MatrixXcd::Zero(16, 16);
    vac(0, 0) = 1.0;
    const MatrixXcd L = liouvillian_apply(ops0, vac, kOsc, kD, 0.0, 0.0);
    CHECK(L.cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("Ehrenfest: d<p>/dt = -Omega<q> - gamma<p> + v*amp2") {
    const double v = 0.3, amp2 = 0.7, n_eff = 0.4;
    for (unsigned seed : {11u, 12u}) {
      const MatrixXcd rho = random_density(20, seed);
      const MatrixXcd L = liouvillian_apply(ops, rho, kOsc, kD, n_eff, amp2);
      const double dp = (ops.p * L).trace().real();
      const double q = (ops.q * rho).trace().real();
      const double p = (ops.p * rho).trace().real();
      // interior-block identity; random states put little weight on top levels
      CHECK(dp == doctest::Approx(-kOsc.Omega * q - kOsc.gamma * p + v * amp2)
                      .epsilon(5e-2));
    }
    // sharper check on a low-occupancy state
    MatrixXcd low = MatrixXcd::Zero(20, 20);
    low(0, 0) = 0.6;
    low(1, 1) = 0.4;
    low(0, 1) = low(1, 0) = 0.3;
    const MatrixXcd L = liouvillian_apply(ops, low, kOsc, kD, n_eff, amp2);
    const double dp = (ops.p * L).trace().real();
    const double q = (ops.q * low).trace().real();
    const double p = (ops.p * low).trace().real();
    CHECK(std::abs(dp - (-kOsc.Omega * q - kOsc.gamma * p + v * amp2)) < 1e-6);
  }
  SUBCASE("finite-difference slope of the means matches the generator") {
    // one tiny RK4 step against the Ehrenfest derivative
    const double v = 0.3, amp2 = 0.5, n_eff = 0.2;
    const TruncatedOperators o = build_operators(24, kOsc, kD, v);
    MatrixXcd rho = MatrixXcd::Zero(24, 24);
    rho(0, 0) = 0.5;
    rho(1, 1) = 0.5;
    rho(0, 1) = rho(1, 0) = 0.25;
    const double dt = 1e-4;
    auto deriv = [&](const MatrixXcd& r) {
      return liouvillian_apply(o, r, kOsc, kD, n_eff, amp2);
    };
    const MatrixXcd k1 = deriv(rho);
    const MatrixXcd k2 = deriv(rho + 0.5 * dt * k1);
    const MatrixXcd k3 = deriv(rho + 0.5 * dt * k2);
    const MatrixXcd k4 = deriv(rho + dt * k3);
    const MatrixXcd next = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double p0 = (o.p * rho).trace().real();
    const double p1 = (o.p * next).trace().real();
    const double q0 = (o.q * rho).trace().real();
    CHECK((p1 - p0) / dt ==
          doctest::Approx(-kOsc.Omega * q0 - kOsc.gamma * p0 + v * amp2)
              .epsilon(1e-6));
  }
}

TEST_CASE("steady state") {
  SUBCASE("no drive, no thermal quanta: vacuum projector") {
    const SteadyStateResult ss = steady_state(kOsc, kD, 0.0, 0.0, 0.0);
    CHECK(ss.rho(0, 0).real() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(is_valid_density(ss.rho, 1e-10, 1e-10, -1e-8));
  }
  SUBCASE("thermal equilibrium matches the gaussian-state moments") {
    const double nbar = 0.8;
    const SteadyStateResult ss = steady_state(kOsc, kD, nbar, 0.0, 0.0);
    const EquilibriumMoments m = equilibrium_moments(ss.rho, ss.ops);
    const double scale = (kOsc.Omega / kD.omega) * (nbar + 0.5);
    CHECK(m.q2 == doctest::Approx(scale).epsilon(1e-6));
    CHECK(m.p2 == doctest::Approx(scale).epsilon(1e-6));
    CHECK(m.qp_anti ==
          doctest::Approx(-(kOsc.gamma / kD.omega) * (nbar + 0.5))
              .epsilon(1e-6));
    CHECK(m.occupancy == doctest::Approx(nbar).epsilon(1e-6));
    // mean energy omega*(N+1/2), tested against the closed form
    const double h_mean =
        (kD.omega * (ss.ops.number +
                     0.5 * MatrixXcd::Identity(ss.dim, ss.dim)) *
         ss.rho)
            .trace()
            .real();
    CHECK(h_mean == doctest::Approx(mean_hamiltonian(kD, nbar)).epsilon(1e-6));
  }
  SUBCASE("driven equilibrium matches every closed form") {
    const double n_eff = 0.5, v = 0.4, amp2 = 0.8;
    const SteadyStateResult ss = steady_state(kOsc, kD, n_eff, amp2, v);
    const EquilibriumMoments m = equilibrium_moments(ss.rho, ss.ops);
    const EquilibriumMoments ref =
        equilibrium_closed_form(kOsc, kD, n_eff, v, amp2);
    CHECK(m.q == doctest::Approx(ref.q).epsilon(1e-4));
    CHECK(std::abs(m.p) < 1e-6);
    CHECK(m.q2 - m.q * m.q ==
          doctest::Approx(ref.q2 - ref.q * ref.q).epsilon(1e-4));
    CHECK(m.p2 == doctest::Approx(ref.p2).epsilon(1e-4));
    CHECK(m.qp_anti == doctest::Approx(ref.qp_anti).epsilon(1e-4));
    CHECK(m.occupancy == doctest::Approx(ref.occupancy).epsilon(1e-4));
    CHECK(std::abs(m.a2 - ref.a2) < 1e-4 * std::abs(ref.a2));
    CHECK(is_valid_density(ss.rho, 1e-9, 1e-9, -1e-8));
  }
  SUBCASE("null-space solve agrees with RK4 time integration") {
    const double n_eff = 0.3, v = 0.3, amp2 = 0.5;
    SteadyStateOptions direct;
    const SteadyStateResult a = steady_state(kOsc, kD, n_eff, amp2, v, direct);
    SteadyStateOptions relax;
    relax.time_integration = true;
    relax.tol = 1e-8;
    const SteadyStateResult b = steady_state(kOsc, kD, n_eff, amp2, v, relax);
    const EquilibriumMoments ma = equilibrium_moments(a.rho, a.ops);
    const EquilibriumMoments mb = equilibrium_moments(b.rho, b.ops);
    CHECK(ma.q == doctest::Approx(mb.q).epsilon(1e-4));
    CHECK(ma.p2 == doctest::Approx(mb.p2).epsilon(1e-4));
    CHECK(ma.occupancy == doctest::Approx(mb.occupancy).epsilon(1e-4));
  }
  SUBCASE("positivity is preserved along the relaxation") {
    const TruncatedOperators ops = build_operators(24, kOsc, kD, 0.3);
    const MatrixXcd rho =
        time_integrate_steady(ops, kOsc, kD, 0.4, 0.6, 1e-7);
    CHECK(is_valid_density(rho, 1e-8, 1e-8, -1e-8));
  }
  SUBCASE("capped truncation fails loudly") {
    SteadyStateOptions opt;
    opt.dim_start = 6;
    opt.dim_cap = 6;
    CHECK_THROWS_AS(steady_state(kOsc, kD, 2.0, 1.0, 0.5, opt),
                    TruncationError);
  }
}
