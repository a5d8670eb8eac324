#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mirrorspec/model.hpp"
#include "mirrorspec/optical_kernel.hpp"
#include "mirrorspec/phonon_bath.hpp"

namespace mirrorspec {

// Detector (local-oscillator) frequencies; strictly increasing.
struct MuGrid {
  std::vector<double> values;
};

MuGrid make_linear_grid(double mu_min, double mu_max, int points);

enum class SpectrumKind { kInput, kExact, kSusceptibility, kPeaksApprox };

std::string to_string(SpectrumKind kind);

struct SpectrumResult {
  MuGrid grid;
  std::vector<double> values;
  SpectrumKind kind = SpectrumKind::kInput;
  std::vector<double> err_estimate;  // per-point achieved error estimates
  std::vector<bool> converged;       // per-point convergence flags
  nlohmann::json config_snapshot = nlohmann::json::object();

  bool all_converged() const;
};

// Power spectrum of the input light (exact closed form):
//   P_in(mu) = 1 + 2 |lambda|^2 kappa / (kappa^2/4 + (mu-omega0)^2).
SpectrumResult input_spectrum(const ModelConfig& cfg, const MuGrid& grid);

// Exact heterodyne power spectrum of the reflected light. Per-point value
//   P(mu) = 1 + 4|lambda|^2 exp{2|lambda|^2 Re A - (n_eff+1/2) Omega v^2/omega}
//           * Re Int_0^inf e^{(i(mu-omega0)-kappa/2)t}
//                 exp{|lambda|^2 K(t) + Theta(t)} dt.
// Nonconvergent points are flagged, not fatal. threads = 0 uses all cores;
// results are identical for any thread count.
SpectrumResult exact_spectrum(const ModelConfig& cfg,
                              const PhononSpectrum& bath, const MuGrid& grid,
                              double tol, unsigned threads = 0);

// Weak-probe optical susceptibility Sigma(mu) = lim (P(mu)-1)/|lambda|^2:
//   Sigma(mu) = 4 exp{-(n_eff+1/2) Omega v^2/omega}
//               * Re Int_0^inf e^{(i(mu-omega0)-kappa/2)t} e^{Theta(t)} dt.
SpectrumResult susceptibility(const ModelConfig& cfg,
                              const PhononSpectrum& bath, const MuGrid& grid,
                              double tol, unsigned threads = 0);

// (1/2pi) Int (P - 1) dmu by trapezoid plus a Lorentzian-tail correction
// fitted to the outermost grid points.
struct TotalPowerReport {
  double value = 0.0;
  double tail_correction = 0.0;
  bool grid_too_narrow = false;
};
TotalPowerReport total_power_report(const SpectrumResult& result);
double total_power(const SpectrumResult& result);

// Dispatches the per-point evaluation for the intrinsic kinds (input, exact,
// susceptibility); points are independent and evaluated in grid order.
// Peak-series reconstructions are produced by the peaks module.
SpectrumResult spectrum_grid_eval(const ModelConfig& cfg,
                                  const PhononSpectrum& bath,
                                  const MuGrid& grid, SpectrumKind kind,
                                  double tol, unsigned threads = 0);

}  // namespace mirrorspec
