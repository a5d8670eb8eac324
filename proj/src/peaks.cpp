#include "mirrorspec/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mirrorspec/series.hpp"

namespace mirrorspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double lorentzian_height(double width, double detuning) {
  return width / (0.25 * width * width + detuning * detuning);
}

// y = Omega v^2 / (2 omega), the single-quantum scattering amplitude.
double half_kick(const ModelConfig& cfg) {
  return cfg.osc.Omega * cfg.mirror.v * cfg.mirror.v / (2.0 * cfg.derived.omega);
}

// Coefficient of the j-th series term for peak n (without the Lorentzian):
//   n = 0:        x^j / (j!)^2
//   n = -|n|:     (N+1)^{|n|} y^{|n|} x^j / (j! (j+|n|)!)
//   n = +|n|:     N^{|n|}     y^{|n|} x^j / (j! (j+|n|)!)
// computed by upward recursion to avoid factorial overflow.
double term_coefficient(const PeakSeriesParams& p, double y, int n, int j) {
  const int an = std::abs(n);
  double c;
  if (n == 0) {
    c = 1.0;
  } else {
    const double occ = (n < 0) ? (p.N_at_omega + 1.0) : p.N_at_omega;
    c = 1.0;
    for (int k = 1; k <= an; ++k) c *= occ * y / static_cast<double>(k);
  }
  for (int k = 1; k <= j; ++k) {
    c *= p.x / (static_cast<double>(k) * static_cast<double>(k + an));
  }
  return c;
}

double peak_series_at(const PeakSeriesParams& p, const ModelConfig& cfg,
                      int n, double mu) {
  const double y = half_kick(cfg);
  const int an = std::abs(n);
  const double center = cfg.laser.omega0 + n * cfg.derived.omega;
  const double detuning = mu - center;

  auto term = [&](int j) {
    const double width = cfg.kappa + (2 * j + an) * cfg.osc.gamma;
    return term_coefficient(p, y, n, j) * lorentzian_height(width, detuning);
  };
  return sum_series_or_throw(term, p.series_tol, p.max_terms,
                             "peak series Pi_" + std::to_string(n));
}

}  // namespace

PeakSeriesParams make_peak_params(const ModelConfig& cfg, double N_at_omega,
                                  double series_tol, int max_terms,
                                  int max_peak_index) {
  if (!(N_at_omega >= 0.0))
    throw ValidationError({"peak series: N(omega) must be >= 0"});
  if (!(series_tol > 0.0))
    throw ValidationError({"peak series: tolerance must be > 0"});
  PeakSeriesParams p;
  p.N_at_omega = N_at_omega;
  const double r = cfg.osc.Omega * cfg.mirror.v * cfg.mirror.v /
                   (2.0 * cfg.derived.omega);
  p.x = r * r * N_at_omega * (N_at_omega + 1.0);
  p.series_tol = series_tol;
  p.max_terms = max_terms;
  p.max_peak_index = max_peak_index;
  return p;
}

double elastic_peak(const PeakSeriesParams& p, const ModelConfig& cfg,
                    double mu) {
  return peak_series_at(p, cfg, 0, mu);
}

double stokes_peak(const PeakSeriesParams& p, const ModelConfig& cfg, int n,
                   double mu) {
  if (n < 1) throw Error("stokes_peak: n must be >= 1");
  return peak_series_at(p, cfg, -n, mu);
}

double antistokes_peak(const PeakSeriesParams& p, const ModelConfig& cfg,
                       int n, double mu) {
  if (n < 1) throw Error("antistokes_peak: n must be >= 1");
  return peak_series_at(p, cfg, n, mu);
}

double peak_weight(const PeakSeriesParams& p, const ModelConfig& cfg, int n) {
  const double y = half_kick(cfg);
  auto term = [&](int j) { return term_coefficient(p, y, n, j); };
  return sum_series_or_throw(term, p.series_tol, p.max_terms,
                             "peak weight W_" + std::to_string(n));
}

PeakDecomposition decompose_peaks(const PeakSeriesParams& p,
                                  const ModelConfig& cfg, int n_max) {
  const double y = half_kick(cfg);
  const double N = p.N_at_omega;
  const double total_weight = std::exp(y * (2.0 * N + 1.0));

  PeakDecomposition out;
  out.N_at_omega = N;
  out.prefactor = std::exp(-(N + 0.5) * 2.0 * y);

  if (n_max <= 0) {
    // grow until the residual weight is negligible against the exact total
    double covered = peak_weight(p, cfg, 0);
    n_max = 0;
    while (n_max < p.max_peak_index &&
           total_weight - covered > 1e-10 * total_weight) {
      ++n_max;
      covered += peak_weight(p, cfg, -n_max) + peak_weight(p, cfg, n_max);
    }
    out.residual_weight = std::max(total_weight - covered, 0.0);
  } else {
    double covered = peak_weight(p, cfg, 0);
    for (int n = 1; n <= n_max; ++n) {
      covered += peak_weight(p, cfg, -n) + peak_weight(p, cfg, n);
    }
    out.residual_weight = std::max(total_weight - covered, 0.0);
  }
  out.n_max = n_max;

  for (int n = -n_max; n <= n_max; ++n) {
    Peak peak;
    peak.n = n;
    peak.center = cfg.laser.omega0 + n * cfg.derived.omega;
    peak.weight = peak_weight(p, cfg, n);
    const int an = std::abs(n);
    double lead = 0.0;
    for (int j = 0; j < p.max_terms; ++j) {
      const double c = term_coefficient(p, y, n, j);
      if (j == 0) lead = c;
      if (c <= p.series_tol * lead && j > 0) break;
      if (c == 0.0 && j == 0) break;  // anti-Stokes at N = 0
      peak.components.push_back(
          {cfg.kappa + (2 * j + an) * cfg.osc.gamma, c});
    }
    out.peaks.push_back(std::move(peak));
  }
  return out;
}

SpectrumResult sigma_from_peaks(const PeakSeriesParams& p,
                                const ModelConfig& cfg, const MuGrid& grid,
                                int n_max) {
  validate_config(cfg);
  const PeakDecomposition dec = decompose_peaks(p, cfg, n_max);

  SpectrumResult out;
  out.grid = grid;
  out.kind = SpectrumKind::kPeaksApprox;
  const std::size_t npts = grid.values.size();
  out.values.assign(npts, 0.0);
  // residual peaks sit at least (n_max+1)*omega away; bound their height by
  // residual weight spread over the narrowest Lorentzian
  const double resid_height =
      2.0 * dec.prefactor * dec.residual_weight * 4.0 / cfg.kappa;
  out.err_estimate.assign(npts, resid_height);
  out.converged.assign(npts, true);

  for (std::size_t i = 0; i < npts; ++i) {
    const double mu = grid.values[i];
    double sum = 0.0;
    for (const Peak& peak : dec.peaks) {
      double acc = 0.0;
      for (const LorentzianComponent& c : peak.components) {
        acc += c.amplitude * lorentzian_height(c.width, mu - peak.center);
      }
      sum += acc;
    }
    out.values[i] = 2.0 * dec.prefactor * sum;
  }
  return out;
}

double thermometry_estimate(double w_plus1, double w_minus1) {
  if (!(w_plus1 >= 0.0)) {
    throw Error("thermometry: anti-Stokes area must be >= 0");
  }
  if (!(w_minus1 > w_plus1)) {
    throw Error(
        "thermometry: Stokes area must dominate the anti-Stokes area");
  }
  return w_plus1 / (w_minus1 - w_plus1);
}

ThermometryReport thermometry_from_spectrum(const SpectrumResult& result,
                                            const ModelConfig& cfg,
                                            double window_halfwidth) {
  validate_config(cfg);
  const double omega = cfg.derived.omega;
  const double omega0 = cfg.laser.omega0;
  const double widths = cfg.kappa + cfg.osc.gamma;

  ThermometryReport rep;
  rep.window_halfwidth = std::max(5.0 * widths, window_halfwidth);

  if (5.0 * widths >= 0.5 * omega) {
    rep.warnings.push_back(
        "sidebands are not resolved: kappa + gamma is not small against "
        "omega");
  }
  if (rep.window_halfwidth >= omega) {
    rep.warnings.push_back("integration windows overlap the elastic peak");
  }

  const double baseline = (result.kind == SpectrumKind::kInput ||
                           result.kind == SpectrumKind::kExact)
                              ? 1.0
                              : 0.0;

  const auto& mu = result.grid.values;
  const auto& val = result.values;
  auto window_area = [&](double center) {
    const double lo = center - rep.window_halfwidth;
    const double hi = center + rep.window_halfwidth;
    if (lo < mu.front() || hi > mu.back()) {
      throw Error("thermometry: spectrum grid does not cover the window at " +
                  std::to_string(center));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
      const double a = std::max(mu[i], lo);
      const double b = std::min(mu[i + 1], hi);
      if (b <= a) continue;
      // trapezoid on the clipped segment
      const double fa = val[i] + (val[i + 1] - val[i]) *
                                     ((a - mu[i]) / (mu[i + 1] - mu[i]));
      const double fb = val[i] + (val[i + 1] - val[i]) *
                                     ((b - mu[i]) / (mu[i + 1] - mu[i]));
      acc += 0.5 * ((fa - baseline) + (fb - baseline)) * (b - a);
    }
    return acc / kTwoPi;
  };

  const double area_elastic = window_area(omega0);
  rep.w_minus = window_area(omega0 - omega);
  rep.w_plus = window_area(omega0 + omega);

  // Lorentzian leakage of the elastic peak into each sideband window,
  // modelled with the baseline width kappa.
  auto leak = [&](double distance) {
    auto cdf = [&](double x) { return std::atan(2.0 * x / cfg.kappa) / kPi; };
    return std::abs(area_elastic) *
           (cdf(distance + rep.window_halfwidth) -
            cdf(distance - rep.window_halfwidth));
  };
  const double leak_mass = leak(omega);
  const double win_ref =
      std::max(std::abs(rep.w_minus), std::abs(rep.w_plus));
  rep.overlap_fraction = (win_ref > 0.0) ? leak_mass / win_ref : 0.0;
  if (rep.overlap_fraction > 0.01) {
    rep.warnings.push_back(
        "adjacent-peak tails exceed 1% of the sideband window area");
  }

  rep.estimate = thermometry_estimate(std::max(rep.w_plus, 0.0), rep.w_minus);
  return rep;
}

}  // namespace mirrorspec
