#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "mirrorspec/model.hpp"
#include "mirrorspec/quadrature.hpp"

namespace mirrorspec {

// Bath occupancy spectrum N(nu). All variants are pointwise nonnegative;
// analytic variants except BoseEinstein are absolutely integrable. The
// BoseEinstein occupancy 1/(exp(nu/T)-1) diverges like T/nu at the lower
// edge of its support, so integrals against it (n_eff, thermal kernel) are
// genuinely divergent and report nonconvergence.
struct FlatSpectrum {
  double N0;
};
struct LorentzianSpectrum {
  double center;
  double halfwidth;
  double peak;
};
struct GaussianSpectrum {
  double center;
  double sigma;
  double peak;
};
struct BoseEinsteinSpectrum {
  double temperature;
  double cutoff;  // support is (0, cutoff)
};
struct TabulatedSpectrum {
  std::vector<double> nu;      // strictly increasing
  std::vector<double> values;  // >= 0; linear interpolation, 0 outside
};

class PhononSpectrum {
 public:
  using Variant = std::variant<FlatSpectrum, LorentzianSpectrum,
                               GaussianSpectrum, BoseEinsteinSpectrum,
                               TabulatedSpectrum>;

  // Factories validate their parameters and throw ValidationError.
  static PhononSpectrum flat(double N0);
  static PhononSpectrum lorentzian(double center, double halfwidth, double peak);
  static PhononSpectrum gaussian(double center, double sigma, double peak);
  static PhononSpectrum bose_einstein(double temperature, double cutoff);
  static PhononSpectrum tabulated(std::vector<double> nu,
                                  std::vector<double> values);

  double operator()(double nu) const;

  bool is_flat() const;
  double flat_level() const;  // N0 for the flat variant
  const Variant& variant() const { return v_; }
  std::string kind_name() const;

 private:
  explicit PhononSpectrum(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// Pointwise occupancy N(nu) (>= 0).
double n_of(const PhononSpectrum& spec, double nu);

// Effective occupancy: the Lorentzian-weighted average of N(nu) at the
// damped frequency,
//   n_eff = (gamma/2pi) * Int N(nu) / (gamma^2/4 + (omega-nu)^2) dnu.
// Throws QuadratureError on nonconvergence.
double n_eff(const PhononSpectrum& spec, const OscillatorParams& osc,
             const DerivedOscillator& d, double tol);

// Thermal correlation kernel entering the exact spectrum's time integrand:
//   Theta(t) = (Omega v^2 / (2 omega)) e^{(i omega - gamma/2) t}
//            + (Omega gamma v^2 / (2 pi omega))
//              * Int N(nu) cos(nu t) / (gamma^2/4 + (nu-omega)^2) dnu.
// The vacuum part is analytic; the N-part is quadrature (flat baths use the
// exact Lorentzian Fourier integral instead). t >= 0.
std::complex<double> thermal_kernel(const PhononSpectrum& spec,
                                    const OscillatorParams& osc,
                                    const DerivedOscillator& d, double v,
                                    double t, double tol);

// Generic quadrature path for the N-dependent part (no flat shortcut);
// retained so tests can cross-check the closed forms.
double thermal_kernel_nu_quad(const PhononSpectrum& spec,
                              const OscillatorParams& osc,
                              const DerivedOscillator& d, double t,
                              double tol);

// Elastic suppression factor exp{-(n_eff + 1/2) Omega v^2 / omega}, in (0,1].
double lamb_dicke_prefactor(const PhononSpectrum& spec,
                            const OscillatorParams& osc,
                            const DerivedOscillator& d, double v, double tol);

// Uniform-grid cache of the thermal kernel on [0, t_max] with cubic
// interpolation; evaluates to 0 beyond t_max, where the kernel has decayed.
struct ThermalKernelTable {
  double dt = 0.0;
  double t_max = 0.0;
  std::vector<std::complex<double>> values;
  double err_estimate = 0.0;  // worst per-node quadrature error

  std::complex<double> eval(double t) const;
  bool empty() const { return values.empty(); }
};

ThermalKernelTable build_thermal_table(const PhononSpectrum& spec,
                                       const OscillatorParams& osc,
                                       const DerivedOscillator& d, double v,
                                       double t_max, double dt, double tol);

// Two-column CSV (header row, then nu,N per line); enforces strict
// monotonicity and nonnegative occupancies.
PhononSpectrum load_tabulated_csv(const std::string& path);

// Shared cubic (Catmull-Rom style) interpolation on a uniform grid starting
// at 0; used by the kernel caches.
std::complex<double> cubic_interp_uniform(
    const std::vector<std::complex<double>>& values, double dt, double t);

}  // namespace mirrorspec
