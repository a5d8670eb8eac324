#include "mirrorspec/phonon_bath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mirrorspec {

namespace {

constexpr double kPi = std::numbers::pi;

double lorentzian_value(const LorentzianSpectrum& s, double nu) {
  const double d = nu - s.center;
  return s.peak * s.halfwidth * s.halfwidth /
         (s.halfwidth * s.halfwidth + d * d);
}

double gaussian_value(const GaussianSpectrum& s, double nu) {
  const double z = (nu - s.center) / s.sigma;
  return s.peak * std::exp(-0.5 * z * z);
}

double bose_einstein_value(const BoseEinsteinSpectrum& s, double nu) {
  if (!(nu > 0.0) || !(nu < s.cutoff)) return 0.0;
  return 1.0 / std::expm1(nu / s.temperature);
}

double tabulated_value(const TabulatedSpectrum& s, double nu) {
  if (nu <= s.nu.front() || nu >= s.nu.back()) {
    // compact support convention; endpoints themselves still interpolate
    if (nu == s.nu.front()) return s.values.front();
    if (nu == s.nu.back()) return s.values.back();
    return 0.0;
  }
  const auto it = std::upper_bound(s.nu.begin(), s.nu.end(), nu);
  const std::size_t k = static_cast<std::size_t>(it - s.nu.begin()) - 1;
  const double w = (nu - s.nu[k]) / (s.nu[k + 1] - s.nu[k]);
  return (1.0 - w) * s.values[k] + w * s.values[k + 1];
}

// Lorentzian weight of the nu-integrals, scale gamma/2 around omega.
double kernel_weight(double nu, double omega, double gamma) {
  const double d = nu - omega;
  return 1.0 / (0.25 * gamma * gamma + d * d);
}

// Integration window for Int N(nu)*K(nu)*... dnu together with a bound on
// the neglected mass outside it. For unbounded-support variants the window
// is a hull of the bath and kernel cores plus a margin sized so the product
// tail is below frac_tol; compact-support variants use their support.
struct NuWindow {
  double lo = 0.0;
  double hi = 0.0;
  double tail_bound = 0.0;  // bound on the neglected |integrand| mass
  bool unbounded_lo = false;
  bool unbounded_hi = false;
};

NuWindow nu_window(const PhononSpectrum& spec, double omega, double gamma,
                   double frac_tol) {
  NuWindow w;
  const double kernel_margin = 40.0 * gamma;
  if (const auto* f = std::get_if<FlatSpectrum>(&spec.variant())) {
    (void)f;
    w.lo = omega - kernel_margin;
    w.hi = omega + kernel_margin;
    w.unbounded_lo = w.unbounded_hi = true;  // handled by mapped tails
    return w;
  }
  if (const auto* s = std::get_if<LorentzianSpectrum>(&spec.variant())) {
    const double hw = s->halfwidth;
    double margin = std::cbrt(100.0 * std::max(s->peak, 1e-300) * hw * hw /
                              (3.0 * std::max(frac_tol, 1e-300)));
    margin = std::max({margin, 40.0 * hw, kernel_margin});
    const double cap = 2000.0 * std::max({hw, gamma, 1.0, std::abs(s->center - omega)});
    double capped_bound = 0.0;
    if (margin > cap) {
      margin = cap;
      capped_bound = 2.0 * s->peak * hw * hw / (3.0 * margin * margin * margin);
    }
    w.lo = std::min(s->center, omega) - margin;
    w.hi = std::max(s->center, omega) + margin;
    w.tail_bound = capped_bound + 2.0 * s->peak * hw * hw /
                                      (3.0 * margin * margin * margin);
    return w;
  }
  if (const auto* s = std::get_if<GaussianSpectrum>(&spec.variant())) {
    const double arg = std::max(
        std::exp(1.0), 100.0 * s->peak * (s->sigma + 1.0) /
                           std::max(frac_tol, 1e-300));
    double r = std::sqrt(2.0 * std::log(arg)) + 2.0;
    r = std::clamp(r, 10.0, 45.0);
    const double margin = std::max(r * s->sigma, kernel_margin);
    w.lo = std::min(s->center, omega) - margin;
    w.hi = std::max(s->center, omega) + margin;
    const double edge = margin / s->sigma;
    w.tail_bound = 2.0 * s->peak * s->sigma * std::exp(-0.5 * edge * edge) *
                   kernel_weight(w.hi, omega, gamma);
    return w;
  }
  if (const auto* s = std::get_if<BoseEinsteinSpectrum>(&spec.variant())) {
    w.lo = 0.0;
    w.hi = s->cutoff;
    return w;
  }
  const auto& s = std::get<TabulatedSpectrum>(spec.variant());
  w.lo = s.nu.front();
  w.hi = s.nu.back();
  return w;
}

// ---- Filon-Simpson quadrature of Int g(nu) cos(nu t) dnu -------------------
//
// Piecewise-quadratic fit of g on a uniform grid, with the cosine integrated
// exactly per double panel. The accuracy is uniform in t, which direct
// panel-based quadrature cannot deliver once t * window >> 1.

struct FilonWeights {
  std::complex<double> cm, c0, cp;  // weights of the three panel samples
};

FilonWeights filon_weights(double theta) {
  std::complex<double> m0, m1, m2;
  const double th2 = theta * theta;
  if (std::abs(theta) < 0.9) {
    m0 = 2.0 * (1.0 - th2 / 6.0 + th2 * th2 / 120.0 -
                th2 * th2 * th2 / 5040.0 + th2 * th2 * th2 * th2 / 362880.0);
    const double s1 = theta / 3.0 - theta * th2 / 30.0 +
                      theta * th2 * th2 / 840.0 -
                      theta * th2 * th2 * th2 / 45360.0;
    m1 = std::complex<double>(0.0, 2.0 * s1);
    m2 = 2.0 * (1.0 / 3.0 - th2 / 10.0 + th2 * th2 / 168.0 -
                th2 * th2 * th2 / 6480.0 + th2 * th2 * th2 * th2 / 443520.0);
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    m0 = 2.0 * s / theta;
    m1 = std::complex<double>(0.0, 2.0 * (s - theta * c) / th2);
    m2 = 2.0 * ((th2 - 2.0) * s + 2.0 * theta * c) / (th2 * theta);
  }
  FilonWeights w;
  w.cm = 0.5 * (m2 - m1);
  w.c0 = m0 - m2;
  w.cp = 0.5 * (m2 + m1);
  return w;
}

// Returns Re Int_a^b g(nu) e^{i nu t} dnu for the sampled g (odd sample count).
double filon_cos(const std::vector<double>& g, double a, double h, double t) {
  const std::size_t n = g.size();
  const double theta = t * h;
  const FilonWeights w = filon_weights(theta);
  const std::complex<double> step =
      std::exp(std::complex<double>(0.0, 2.0 * h * t));
  std::complex<double> sum{0.0, 0.0};
  std::complex<double> phase =
      std::exp(std::complex<double>(0.0, (a + h) * t));
  for (std::size_t j = 0; j + 2 < n; j += 2) {
    sum += phase * (w.cm * g[j] + w.c0 * g[j + 1] + w.cp * g[j + 2]);
    // refresh the phase recurrence periodically to stop drift
    if (((j >> 1) & 1023) == 1023) {
      phase = std::exp(std::complex<double>(0.0, (a + (j + 3) * h) * t));
    } else {
      phase *= step;
    }
  }
  return (h * sum).real();
}

struct FilonPlan {
  double a = 0.0;
  double h = 0.0;
  std::vector<double> g;        // samples at step h
  std::vector<double> g_half;   // samples at step h/2
  double tail_bound = 0.0;

  double eval(double t) const { return filon_cos(g_half, a, 0.5 * h, t); }
  double eval_coarse(double t) const { return filon_cos(g, a, h, t); }
};

double bath_feature_scale(const PhononSpectrum& spec) {
  if (const auto* s = std::get_if<LorentzianSpectrum>(&spec.variant()))
    return s->halfwidth;
  if (const auto* s = std::get_if<GaussianSpectrum>(&spec.variant()))
    return s->sigma;
  if (const auto* s = std::get_if<TabulatedSpectrum>(&spec.variant())) {
    double dmin = s->nu.back() - s->nu.front();
    for (std::size_t k = 0; k + 1 < s->nu.size(); ++k)
      dmin = std::min(dmin, s->nu[k + 1] - s->nu[k]);
    return dmin;
  }
  return 1.0;
}

FilonPlan make_filon_plan(const PhononSpectrum& spec, double omega,
                          double gamma, double frac_tol) {
  NuWindow w = nu_window(spec, omega, gamma, frac_tol);
  FilonPlan plan;
  plan.a = w.lo;
  plan.tail_bound = w.tail_bound;

  const double scale = std::min(0.5 * gamma, bath_feature_scale(spec));
  double h = scale / 8.0;
  const std::size_t max_pts = (1u << 21);
  std::size_t n_double = static_cast<std::size_t>(
      std::ceil((w.hi - w.lo) / (2.0 * h)));
  n_double = std::max<std::size_t>(n_double, 8);
  if (2 * n_double + 1 > max_pts) n_double = (max_pts - 1) / 2;
  h = (w.hi - w.lo) / (2.0 * static_cast<double>(n_double));
  plan.h = h;

  const std::size_t n = 2 * n_double + 1;
  plan.g.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double nu = w.lo + static_cast<double>(i) * h;
    plan.g[i] = n_of(spec, nu) * kernel_weight(nu, omega, gamma);
  }
  plan.g_half.resize(2 * n - 1);
  for (std::size_t i = 0; i < 2 * n - 1; ++i) {
    const double nu = w.lo + static_cast<double>(i) * 0.5 * h;
    plan.g_half[i] = (i % 2 == 0)
                         ? plan.g[i / 2]
                         : n_of(spec, nu) * kernel_weight(nu, omega, gamma);
  }
  return plan;
}

std::complex<double> vacuum_kernel(const OscillatorParams& osc,
                                   const DerivedOscillator& d, double v,
                                   double t) {
  const double amp = osc.Omega * v * v / (2.0 * d.omega);
  return amp * std::exp(std::complex<double>(-0.5 * osc.gamma * t,
                                             d.omega * t));
}

std::complex<double> flat_kernel(double N0, const OscillatorParams& osc,
                                 const DerivedOscillator& d, double v,
                                 double t) {
  // Exact Lorentzian Fourier integral for a constant occupancy spectrum.
  const double amp = osc.Omega * v * v / (2.0 * d.omega);
  const std::complex<double> up(-0.5 * osc.gamma * t, d.omega * t);
  const std::complex<double> dn(-0.5 * osc.gamma * t, -d.omega * t);
  return amp * ((N0 + 1.0) * std::exp(up) + N0 * std::exp(dn));
}

}  // namespace

PhononSpectrum PhononSpectrum::flat(double N0) {
  if (!(N0 >= 0.0)) throw ValidationError({"flat bath: N0 must be >= 0"});
  return PhononSpectrum(Variant{FlatSpectrum{N0}});
}

PhononSpectrum PhononSpectrum::lorentzian(double center, double halfwidth,
                                          double peak) {
  std::vector<std::string> bad;
  if (!(halfwidth > 0.0)) bad.push_back("lorentzian bath: halfwidth must be > 0");
  if (!(peak >= 0.0)) bad.push_back("lorentzian bath: peak must be >= 0");
  if (!std::isfinite(center)) bad.push_back("lorentzian bath: center must be finite");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return PhononSpectrum(Variant{LorentzianSpectrum{center, halfwidth, peak}});
}

PhononSpectrum PhononSpectrum::gaussian(double center, double sigma,
                                        double peak) {
  std::vector<std::string> bad;
  if (!(sigma > 0.0)) bad.push_back("gaussian bath: sigma must be > 0");
  if (!(peak >= 0.0)) bad.push_back("gaussian bath: peak must be >= 0");
  if (!std::isfinite(center)) bad.push_back("gaussian bath: center must be finite");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return PhononSpectrum(Variant{GaussianSpectrum{center, sigma, peak}});
}

PhononSpectrum PhononSpectrum::bose_einstein(double temperature,
                                             double cutoff) {
  std::vector<std::string> bad;
  if (!(temperature > 0.0))
    bad.push_back("bose-einstein bath: temperature must be > 0");
  if (!(cutoff > 0.0)) bad.push_back("bose-einstein bath: cutoff must be > 0");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return PhononSpectrum(Variant{BoseEinsteinSpectrum{temperature, cutoff}});
}

PhononSpectrum PhononSpectrum::tabulated(std::vector<double> nu,
                                         std::vector<double> values) {
  std::vector<std::string> bad;
  if (nu.size() != values.size())
    bad.push_back("tabulated bath: nu and value arrays differ in length");
  if (nu.size() < 2) bad.push_back("tabulated bath: needs at least 2 points");
  for (std::size_t k = 0; k + 1 < nu.size(); ++k) {
    if (!(nu[k] < nu[k + 1])) {
      bad.push_back("tabulated bath: grid must be strictly increasing");
      break;
    }
  }
  for (double x : values) {
    if (!(x >= 0.0)) {
      bad.push_back("tabulated bath: occupancies must be >= 0");
      break;
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return PhononSpectrum(Variant{TabulatedSpectrum{std::move(nu), std::move(values)}});
}

double PhononSpectrum::operator()(double nu) const {
  return std::visit(
      [nu](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FlatSpectrum>) return s.N0;
        if constexpr (std::is_same_v<T, LorentzianSpectrum>)
          return lorentzian_value(s, nu);
        if constexpr (std::is_same_v<T, GaussianSpectrum>)
          return gaussian_value(s, nu);
        if constexpr (std::is_same_v<T, BoseEinsteinSpectrum>)
          return bose_einstein_value(s, nu);
        if constexpr (std::is_same_v<T, TabulatedSpectrum>)
          return tabulated_value(s, nu);
      },
      v_);
}

bool PhononSpectrum::is_flat() const {
  return std::holds_alternative<FlatSpectrum>(v_);
}

double PhononSpectrum::flat_level() const {
  return std::get<FlatSpectrum>(v_).N0;
}

std::string PhononSpectrum::kind_name() const {
  if (std::holds_alternative<FlatSpectrum>(v_)) return "flat";
  if (std::holds_alternative<LorentzianSpectrum>(v_)) return "lorentzian";
  if (std::holds_alternative<GaussianSpectrum>(v_)) return "gaussian";
  if (std::holds_alternative<BoseEinsteinSpectrum>(v_)) return "bose_einstein";
  return "tabulated";
}

double n_of(const PhononSpectrum& spec, double nu) { return spec(nu); }

double n_eff(const PhononSpectrum& spec, const OscillatorParams& osc,
             const DerivedOscillator& d, double tol) {
  if (!(tol > 0.0)) throw Error("n_eff: tol must be positive");

  const double omega = d.omega;
  const double gamma = osc.gamma;
  const double coef = gamma / (2.0 * kPi);

  const NuWindow w = nu_window(spec, omega, gamma, 0.01 * tol / coef);
  auto f = [&](double nu) -> std::complex<double> {
    return spec(nu) * kernel_weight(nu, omega, gamma);
  };

  QuadratureSpec qs;
  qs.abs_tol = 0.5 * tol / coef;
  qs.rel_tol = 0.5 * tol;
  qs.max_subdivisions = 40000;

  QuadResult r = (w.unbounded_lo || w.unbounded_hi)
                     ? real_line_quad(f, w.lo, w.hi, qs, w.unbounded_lo,
                                      w.unbounded_hi)
                     : adaptive_quad(f, w.lo, w.hi, qs);
  r.error_estimate += w.tail_bound;

  if (!r.converged) {
    throw QuadratureError(
        "n_eff: nu-quadrature did not converge (achieved estimate " +
            std::to_string(coef * r.error_estimate) + ")",
        coef * r.value, coef * r.error_estimate);
  }
  const double value = coef * r.value.real();
  return std::max(value, 0.0);
}

double thermal_kernel_nu_quad(const PhononSpectrum& spec,
                              const OscillatorParams& osc,
                              const DerivedOscillator& d, double t,
                              double tol) {
  const double omega = d.omega;
  const double gamma = osc.gamma;
  const NuWindow w = nu_window(spec, omega, gamma, 0.01 * tol);
  auto f = [&](double nu) -> std::complex<double> {
    return spec(nu) * std::cos(nu * t) * kernel_weight(nu, omega, gamma);
  };
  QuadratureSpec qs;
  qs.abs_tol = 0.5 * tol;
  qs.rel_tol = 1e-10;
  qs.osc_freq_hint = t;
  qs.max_subdivisions = 200000;
  QuadResult r = (w.unbounded_lo || w.unbounded_hi)
                     ? real_line_quad(f, w.lo, w.hi, qs, w.unbounded_lo,
                                      w.unbounded_hi)
                     : adaptive_quad(f, w.lo, w.hi, qs);
  r.error_estimate += w.tail_bound;
  if (!r.converged) {
    throw QuadratureError("thermal kernel nu-integral did not converge",
                          r.value, r.error_estimate);
  }
  return r.value.real();
}

std::complex<double> thermal_kernel(const PhononSpectrum& spec,
                                    const OscillatorParams& osc,
                                    const DerivedOscillator& d, double v,
                                    double t, double tol) {
  if (!(t >= 0.0)) throw Error("thermal_kernel: t must be >= 0");
  if (!(tol > 0.0)) throw Error("thermal_kernel: tol must be positive");
  if (v == 0.0) return {0.0, 0.0};

  if (spec.is_flat()) return flat_kernel(spec.flat_level(), osc, d, v, t);

  const double coef =
      osc.Omega * osc.gamma * v * v / (2.0 * kPi * d.omega);
  const double tol_nu = tol / std::max(coef, 1e-300);

  if (std::holds_alternative<BoseEinsteinSpectrum>(spec.variant())) {
    // The occupancy diverges like T/nu at the support edge, so this integral
    // has no finite value; the adaptive pass reports the failure honestly.
    const double npart = thermal_kernel_nu_quad(spec, osc, d, t, tol_nu);
    return vacuum_kernel(osc, d, v, t) + coef * npart;
  }

  FilonPlan plan = make_filon_plan(spec, d.omega, osc.gamma, 0.01 * tol_nu);
  double coarse = plan.eval_coarse(t);
  double fine = plan.eval(t);
  double err = std::abs(coarse - fine) + plan.tail_bound;
  int refine = 0;
  while (err > tol_nu && refine < 3) {
    // promote the half grid to the coarse one and halve again
    plan.g.swap(plan.g_half);
    plan.h *= 0.5;
    const std::size_t n = plan.g.size();
    plan.g_half.resize(2 * n - 1);
    for (std::size_t i = 0; i < 2 * n - 1; ++i) {
      plan.g_half[i] = (i % 2 == 0) ? plan.g[i / 2] : 0.0;
    }
    // fill the new odd samples
    for (std::size_t i = 1; i < 2 * n - 1; i += 2) {
      const double nu = plan.a + static_cast<double>(i) * 0.5 * plan.h;
      plan.g_half[i] = n_of(spec, nu) * kernel_weight(nu, d.omega, osc.gamma);
    }
    coarse = fine;
    fine = plan.eval(t);
    err = std::abs(coarse - fine) + plan.tail_bound;
    ++refine;
  }
  if (err > tol_nu) {
    throw QuadratureError("thermal_kernel: Filon refinement did not converge",
                          coef * fine, coef * err);
  }
  return vacuum_kernel(osc, d, v, t) + coef * fine;
}

double lamb_dicke_prefactor(const PhononSpectrum& spec,
                            const OscillatorParams& osc,
                            const DerivedOscillator& d, double v,
                            double tol) {
  if (v == 0.0) return 1.0;
  const double neff = n_eff(spec, osc, d, tol);
  return std::exp(-(neff + 0.5) * osc.Omega * v * v / d.omega);
}

std::complex<double> cubic_interp_uniform(
    const std::vector<std::complex<double>>& values, double dt, double t) {
  const std::size_t n = values.size();
  if (n < 2) throw Error("cubic_interp_uniform: table too small");
  const double pos = t / dt;
  std::size_t k = static_cast<std::size_t>(pos);
  if (k >= n - 1) return values.back();
  const double u = pos - static_cast<double>(k);

  const std::complex<double> p1 = values[k];
  const std::complex<double> p2 = values[k + 1];
  const std::complex<double> p0 =
      (k > 0) ? values[k - 1] : 2.0 * values[0] - values[1];
  const std::complex<double> p3 =
      (k + 2 < n) ? values[k + 2] : 2.0 * values[n - 1] - values[n - 2];

  return p1 + 0.5 * u *
                  (p2 - p0 +
                   u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                        u * (3.0 * (p1 - p2) + p3 - p0)));
}

std::complex<double> ThermalKernelTable::eval(double t) const {
  if (t < 0.0) throw Error("ThermalKernelTable: t must be >= 0");
  if (empty() || t >= t_max) return {0.0, 0.0};
  return cubic_interp_uniform(values, dt, t);
}

ThermalKernelTable build_thermal_table(const PhononSpectrum& spec,
                                       const OscillatorParams& osc,
                                       const DerivedOscillator& d, double v,
                                       double t_max, double dt, double tol) {
  if (!(t_max > 0.0) || !(dt > 0.0))
    throw Error("build_thermal_table: t_max and dt must be positive");
  if (std::holds_alternative<BoseEinsteinSpectrum>(spec.variant())) {
    throw Error(
        "build_thermal_table: bose_einstein occupancy is not absolutely "
        "integrable; the thermal kernel integral diverges");
  }

  ThermalKernelTable tab;
  const std::size_t n = static_cast<std::size_t>(std::ceil(t_max / dt)) + 1;
  tab.dt = dt;
  tab.t_max = static_cast<double>(n - 1) * dt;
  tab.values.resize(n);

  if (v == 0.0) {
    std::fill(tab.values.begin(), tab.values.end(),
              std::complex<double>{0.0, 0.0});
    return tab;
  }

  if (spec.is_flat()) {
    const double N0 = spec.flat_level();
    for (std::size_t i = 0; i < n; ++i) {
      tab.values[i] = flat_kernel(N0, osc, d, v, static_cast<double>(i) * dt);
    }
    return tab;
  }

  const double coef = osc.Omega * osc.gamma * v * v / (2.0 * kPi * d.omega);
  const double tol_nu = tol / std::max(coef, 1e-300);
  const FilonPlan plan = make_filon_plan(spec, d.omega, osc.gamma, 0.01 * tol_nu);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double coarse = plan.eval_coarse(t);
    const double fine = plan.eval(t);
    worst = std::max(worst, std::abs(coarse - fine));
    tab.values[i] = vacuum_kernel(osc, d, v, t) + coef * fine;
  }
  tab.err_estimate = coef * (worst + plan.tail_bound);
  return tab;
}

PhononSpectrum load_tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open bath spectrum file: " + path);

  std::vector<double> nu;
  std::vector<double> val;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream ss(cleaned);
    double a = 0.0, b = 0.0;
    if (!(ss >> a >> b)) {
      if (lineno == 1) continue;  // header row
      throw Error("malformed bath spectrum row at " + path + ":" +
                  std::to_string(lineno));
    }
    nu.push_back(a);
    val.push_back(b);
  }
  return PhononSpectrum::tabulated(std::move(nu), std::move(val));
}

}  // namespace mirrorspec
