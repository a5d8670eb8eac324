#pragma once

#include <complex>
#include <utility>

#include "mirrorspec/errors.hpp"

namespace mirrorspec {

// All quantities are in dimensionless units: hbar = 1 and every rate or
// frequency shares one time unit.

struct OscillatorParams {
  double Omega = 1.0;  // bare angular frequency
  double gamma = 0.1;  // damping rate; underdamped regime Omega > gamma/2
};

// Underdamped parametrization: omega = sqrt(Omega^2 - gamma^2/4) and the
// unimodular phase factor tau = omega/Omega - i*gamma/(2*Omega).
struct DerivedOscillator {
  double omega = 0.0;
  std::complex<double> tau{1.0, 0.0};
};

struct LaserParams {
  double amp2 = 0.0;    // mean photon flux |lambda|^2
  double phase = 0.0;   // arg(lambda); does not enter any spectrum
  double omega0 = 1.0;  // carrier frequency
  double Lp = 0.0;      // phase-diffusion linewidth
};

struct MirrorCoupling {
  double v = 0.0;    // radiation-pressure kick strength
  double phi = 0.0;  // mirror phase shift, in [0, 2*pi); spectrum-invisible
};

struct DetectorParams {
  double varkappa = 1.0;  // detector response bandwidth
  double alpha = 0.0;     // optical-path phase; spectrum-invisible
};

struct ModelConfig {
  OscillatorParams osc;
  DerivedOscillator derived;
  LaserParams laser;
  MirrorCoupling mirror;
  DetectorParams detector;
  double kappa = 1.0;  // total linewidth varkappa + Lp
};

// Throws ValidationError for non-positive or overdamped input.
DerivedOscillator derive_oscillator(const OscillatorParams& osc);

// Mean of the mode operator for given mean position/momentum:
// a = sqrt(Omega/(2*omega)) * (q + i*tau*p).
std::complex<double> mean_mode_from_qp(double q_mean, double p_mean,
                                       const DerivedOscillator& d,
                                       const OscillatorParams& osc);

// Inverse transformation; the imaginary parts cancel exactly for means
// coming from mean_mode_from_qp.
std::pair<double, double> mean_qp_from_mode(std::complex<double> a_mean,
                                            const DerivedOscillator& d,
                                            const OscillatorParams& osc);

// Builds derived quantities and kappa from the raw parameter blocks.
ModelConfig make_config(const OscillatorParams& osc, const LaserParams& laser,
                        const MirrorCoupling& mirror,
                        const DetectorParams& detector);

// Checks every invariant; throws ValidationError listing all violations.
// Returns its argument so call sites can validate-and-use in one expression.
const ModelConfig& validate_config(const ModelConfig& cfg);

// Mean oscillator energy at occupancy N: omega * (N + 1/2).
double mean_hamiltonian(const DerivedOscillator& d, double occupancy);

// Raw equilibrium moments of the driven, damped mirror.
struct EquilibriumMoments {
  double q = 0.0;         // <q>
  double p = 0.0;         // <p>
  double q2 = 0.0;        // <q^2>
  double p2 = 0.0;        // <p^2>
  double qp_anti = 0.0;   // <{q,p}>
  double occupancy = 0.0; // <a^dag a>
  std::complex<double> a2{0.0, 0.0};  // <a^2>
};

// Closed-form equilibrium moments for a flat bath at occupancy n_eff with
// radiation-pressure drive (kick v, photon flux amp2):
//   <q> = v*amp2/Omega,  <p> = 0,
//   <q^2> - <q>^2 = <p^2> = (Omega/omega)(n_eff + 1/2) + amp2*v^2/(2*gamma),
//   <{q,p}> = -(gamma/omega)(n_eff + 1/2),
//   <a^dag a> = Omega<q>^2/(2*omega) + n_eff + Omega*v^2*amp2/(2*omega*gamma),
//   <a^2> = Omega<q>^2/(2*omega) + i*tau*amp2*v^2/(4*omega).
EquilibriumMoments equilibrium_closed_form(const OscillatorParams& osc,
                                           const DerivedOscillator& d,
                                           double n_eff, double v,
                                           double amp2);

}  // namespace mirrorspec
