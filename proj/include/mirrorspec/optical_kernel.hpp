#pragma once

#include <complex>
#include <vector>

#include "mirrorspec/model.hpp"
#include "mirrorspec/quadrature.hpp"

namespace mirrorspec {

// Parameters of the photon-scattering kernels.
struct OpticalKernelParams {
  OscillatorParams osc;
  DerivedOscillator derived;
  double v = 0.0;
  double tol = 1e-10;
};

// Mechanical response to a photon kick:
//   h(r) = (Omega/omega) * exp(-gamma r / 2) * sin(omega r),  r >= 0.
double mechanical_response(const OpticalKernelParams& p, double r);

// Scattering exponent A(v) = Int_0^inf (e^{i v^2 h(u)} - 1) du.
// Re A <= 0; the spectrum prefactor uses exp{2 |lambda|^2 Re A}.
std::complex<double> scattering_exponent(const OpticalKernelParams& p);

// Two-time kick kernel
//   K(t) = Int_0^inf (e^{i v^2 h(t+s)} - 1)(e^{-i v^2 h(s)} - 1) ds,  t >= 0.
// Decays at least like exp(-gamma t / 2); K(0) is real and >= 0.
std::complex<double> kick_kernel(const OpticalKernelParams& p, double t);

// Uniform-grid cache of K on [0, t_max]; evaluates to 0 beyond t_max. The
// table is filled with a fixed-grid correlation rule (Filon-free: both
// factors share one sample grid) and carries a step-halving error estimate;
// kick_kernel remains the reference evaluation for tests.
struct KickKernelTable {
  double dt = 0.0;
  double t_max = 0.0;
  std::vector<std::complex<double>> values;
  double err_estimate = 0.0;

  std::complex<double> eval(double t) const;
  bool empty() const { return values.empty(); }
};

KickKernelTable build_kick_table(const OpticalKernelParams& p, double t_max,
                                 double dt);

}  // namespace mirrorspec
