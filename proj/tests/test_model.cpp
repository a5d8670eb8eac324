#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "mirrorspec/model.hpp"

using namespace mirrorspec;
using std::complex;

TEST_CASE("derive_oscillator") {
  SUBCASE("undamped limit") {
    // gamma must stay positive; a tiny value reproduces the limit
    const DerivedOscillator d = derive_oscillator({1.0, 1e-14});
    CHECK(d.omega == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(d.tau - complex<double>(1.0, 0.0)) < 1e-12);
  }
  SUBCASE("frozen value at Omega=1, gamma=0.6") {
    const DerivedOscillator d = derive_oscillator({1.0, 0.6});
    CHECK(d.omega == doctest::Approx(0.9539392014169456).epsilon(1e-15));
    CHECK(d.tau.real() == doctest::Approx(0.9539392014169456).epsilon(1e-15));
    CHECK(d.tau.imag() == doctest::Approx(-0.3).epsilon(1e-15));
  }
  SUBCASE("tau is unimodular whenever underdamped") {
    const DerivedOscillator d = derive_oscillator({2.0, 3.9});
    CHECK(std::abs(d.tau) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.omega * d.omega + 0.25 * 3.9 * 3.9 ==
          doctest::Approx(4.0).epsilon(1e-14));
  }
  SUBCASE("overdamped input is rejected") {
    CHECK_THROWS_AS(derive_oscillator({1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(derive_oscillator({1.0, 2.1}), ValidationError);
    CHECK_THROWS_AS(derive_oscillator({-1.0, 0.1}), ValidationError);
    CHECK_THROWS_AS(derive_oscillator({1.0, -1.0}), ValidationError);
  }
}

TEST_CASE("mode transforms") {
  const OscillatorParams osc{1.0, 0.6};
  const DerivedOscillator d = derive_oscillator(osc);

  SUBCASE("zero maps to zero both ways") {
    CHECK(std::abs(mean_mode_from_qp(0.0, 0.0, d, osc)) == 0.0);
    const auto [q, p] = mean_qp_from_mode({0.0, 0.0}, d, osc);
    CHECK(q == 0.0);
    CHECK(p == 0.0);
  }
  SUBCASE("undamped mode is (q + i p)/sqrt(2)") {
    const OscillatorParams osc0{1.0, 1e-14};
    const DerivedOscillator d0 = derive_oscillator(osc0);
    const complex<double> a = mean_mode_from_qp(1.0, 0.0, d0, osc0);
    CHECK(std::abs(a - complex<double>(1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
    // pure imaginary a = i recovers (q, p) = (0, sqrt(2))
    const auto [q, p] = mean_qp_from_mode({0.0, 1.0}, d0, osc0);
    CHECK(std::abs(q) < 1e-12);
    CHECK(p == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("round trip is the identity") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
      const double q0 = u(rng), p0 = u(rng);
      const complex<double> a = mean_mode_from_qp(q0, p0, d, osc);
      const auto [q1, p1] = mean_qp_from_mode(a, d, osc);
      CHECK(std::abs(q1 - q0) < 1e-12);
      CHECK(std::abs(p1 - p0) < 1e-12);
    }
  }
}

TEST_CASE("validate_config") {
  const ModelConfig good = make_config({1.0, 0.1}, {0.5, 0.0, 10.0, 0.01},
                                       {0.3, 0.0}, {0.05, 0.0});
  CHECK_NOTHROW(validate_config(good));
  CHECK(good.kappa == doctest::Approx(0.06));

  SUBCASE("every violation is reported") {
    ModelConfig bad = good;
    bad.osc.gamma = -1.0;
    bad.laser.amp2 = -2.0;
    try {
      validate_config(bad);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.violations().size() >= 2);
      bool saw_gamma = false;
      for (const auto& v : e.violations()) {
        if (v.find("gamma") != std::string::npos) saw_gamma = true;
      }
      CHECK(saw_gamma);
    }
  }
  SUBCASE("overdamped config is rejected") {
    ModelConfig bad = good;
    bad.osc = {1.0, 2.0};
    CHECK_THROWS_AS(validate_config(bad), ValidationError);
  }
  SUBCASE("tampered derived block is caught") {
    ModelConfig bad = good;
    bad.derived.omega += 1e-6;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);
  }
}

TEST_CASE("mean hamiltonian") {
  const DerivedOscillator d = derive_oscillator({1.0, 0.6});
  CHECK(mean_hamiltonian(d, 0.0) == doctest::Approx(0.5 * d.omega));
  CHECK(mean_hamiltonian(d, 2.0) == doctest::Approx(2.5 * d.omega));
}

TEST_CASE("closed-form equilibrium moments satisfy their identities") {
  const OscillatorParams osc{1.0, 0.4};
  const DerivedOscillator d = derive_oscillator(osc);
  const double n_eff = 0.7, v = 0.4, amp2 = 0.8;
  const EquilibriumMoments m = equilibrium_closed_form(osc, d, n_eff, v, amp2);

  CHECK(m.q == doctest::Approx(v * amp2 / osc.Omega));
  CHECK(m.p == 0.0);
  // fluctuation equipartition
  CHECK(m.q2 - m.q * m.q == doctest::Approx(m.p2).epsilon(1e-14));
  // occupancy identity
  const double coh = osc.Omega * m.q * m.q / (2.0 * d.omega);
  CHECK(m.occupancy - coh ==
        doctest::Approx(n_eff + osc.Omega * v * v * amp2 /
                                    (2.0 * d.omega * osc.gamma)));
  // <a^2> identity
  const std::complex<double> i{0.0, 1.0};
  const std::complex<double> rhs = i * d.tau * amp2 * v * v / (4.0 * d.omega);
  CHECK(std::abs(m.a2 - coh - rhs) < 1e-14);
}
