#pragma once

#include <vector>

#include "mirrorspec/model.hpp"
#include "mirrorspec/spectrum.hpp"

namespace mirrorspec {

// Parameters for the slowly-varying-bath peak series, which replaces N(nu)
// by its value at the damped frequency. x is the composite series argument
// Omega^2 v^4 N(N+1) / (4 omega^2).
struct PeakSeriesParams {
  double N_at_omega = 0.0;
  double x = 0.0;
  double series_tol = 1e-12;
  int max_terms = 200;
  int max_peak_index = 64;
};

PeakSeriesParams make_peak_params(const ModelConfig& cfg, double N_at_omega,
                                  double series_tol = 1e-12,
                                  int max_terms = 200,
                                  int max_peak_index = 64);

// Elastic peak centered at omega0: sum over j of
//   Omega^{2j} v^{4j} (N+1)^j N^j (kappa+2j gamma) /
//   [(j!)^2 4^j omega^{2j} ((kappa+2j gamma)^2/4 + (mu-omega0)^2)].
double elastic_peak(const PeakSeriesParams& p, const ModelConfig& cfg,
                    double mu);

// Stokes peak Pi_{-n} centered at omega0 - n*omega (n >= 1), occupancy
// factors (N+1)^{j+n} N^j, widths kappa + (2j+n) gamma.
double stokes_peak(const PeakSeriesParams& p, const ModelConfig& cfg, int n,
                   double mu);

// Anti-Stokes peak Pi_{+n} centered at omega0 + n*omega (n >= 1), occupancy
// factors (N+1)^j N^{j+n}.
double antistokes_peak(const PeakSeriesParams& p, const ModelConfig& cfg,
                       int n, double mu);

// Normalized weight (1/2pi) Int Pi_n dmu for any n in Z (negative = Stokes).
double peak_weight(const PeakSeriesParams& p, const ModelConfig& cfg, int n);

// Full decomposition: per-peak center, weight and Lorentzian components.
struct LorentzianComponent {
  double width = 0.0;      // full Lorentzian width parameter kappa + m*gamma
  double amplitude = 0.0;  // coefficient of w/(w^2/4 + (mu-center)^2)
};
struct Peak {
  int n = 0;
  double center = 0.0;
  double weight = 0.0;
  std::vector<LorentzianComponent> components;
};
struct PeakDecomposition {
  double prefactor = 1.0;  // Lamb-Dicke factor exp{-(N+1/2) Omega v^2/omega}
  double N_at_omega = 0.0;
  int n_max = 0;
  double residual_weight = 0.0;  // series weight outside |n| <= n_max
  std::vector<Peak> peaks;       // ordered n = -n_max .. n_max
};

// n_max = 0 selects the index automatically so the residual weight is below
// 1e-10 of the total weight exp{(2N+1) Omega v^2/(2 omega)}.
PeakDecomposition decompose_peaks(const PeakSeriesParams& p,
                                  const ModelConfig& cfg, int n_max = 0);

// Peak-series reconstruction of the susceptibility:
//   Sigma(mu) ~= 2 exp{-(N+1/2) Omega v^2/omega} * sum_n Pi_n(mu).
SpectrumResult sigma_from_peaks(const PeakSeriesParams& p,
                                const ModelConfig& cfg, const MuGrid& grid,
                                int n_max = 0);

// Resolved-sideband thermometry from first-sideband areas:
//   N(omega) = W_{+1} / (W_{-1} - W_{+1}).
// Throws Error when the Stokes area does not dominate.
double thermometry_estimate(double w_plus1, double w_minus1);

struct ThermometryReport {
  double estimate = 0.0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  double window_halfwidth = 0.0;
  double overlap_fraction = 0.0;  // worst elastic leakage / window area
  std::vector<std::string> warnings;
};

// Integrates the spectrum over windows centered at omega0 +- omega and
// applies the estimator. window_halfwidth = 0 selects max(5*(kappa+gamma)).
ThermometryReport thermometry_from_spectrum(const SpectrumResult& result,
                                            const ModelConfig& cfg,
                                            double window_halfwidth = 0.0);

}  // namespace mirrorspec
