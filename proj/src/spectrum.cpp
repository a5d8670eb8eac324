#include "mirrorspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace mirrorspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Minimal self-description so downstream consumers (total_power, files) can
// recover the detuning origin and linewidth; the CLI replaces it with the
// fully resolved run config.
nlohmann::json model_snapshot(const ModelConfig& cfg,
                              const PhononSpectrum& bath) {
  nlohmann::json j;
  j["model"] = {{"kappa", cfg.kappa},
                {"omega", cfg.derived.omega},
                {"laser", {{"omega0", cfg.laser.omega0},
                           {"amp2", cfg.laser.amp2}}},
                {"oscillator", {{"Omega", cfg.osc.Omega},
                                {"gamma", cfg.osc.gamma}}},
                {"mirror", {{"v", cfg.mirror.v}}}};
  j["bath"] = {{"kind", bath.kind_name()}};
  return j;
}

double bath_max_frequency(const PhononSpectrum& spec, double omega) {
  if (const auto* s = std::get_if<LorentzianSpectrum>(&spec.variant()))
    return std::max(omega, std::abs(s->center) + 10.0 * s->halfwidth);
  if (const auto* s = std::get_if<GaussianSpectrum>(&spec.variant()))
    return std::max(omega, std::abs(s->center) + 5.0 * s->sigma);
  if (const auto* s = std::get_if<TabulatedSpectrum>(&spec.variant()))
    return std::max({omega, std::abs(s->nu.front()), std::abs(s->nu.back())});
  return omega;
}

// Everything that is independent of mu, built once per evaluation call and
// shared read-only across grid points.
struct EvalContext {
  ModelConfig cfg;
  double tol = 1e-8;
  bool with_kick = false;  // exact spectrum with amp2 > 0 and v != 0
  bool flat = false;
  PhononSpectrum bath = PhononSpectrum::flat(0.0);
  double neff = 0.0;
  double prefactor = 1.0;  // exp(2 amp2 Re A - ld_exponent) resp. exp(-ld_exponent)
  double front = 1.0;      // 4*amp2*prefactor resp. 4*prefactor
  ThermalKernelTable theta_tab;
  KickKernelTable kick_tab;
  double T_kernel = 0.0;  // beyond this the kernels are treated as zero
  double T_int = 0.0;     // numeric integration endpoint
  bool analytic_tail = false;
  double tail_bound = 0.0;
  double kernel_err = 0.0;  // tables + interpolation, per unit time mass

  std::complex<double> theta(double t) const {
    const double v = cfg.mirror.v;
    if (v == 0.0) return {0.0, 0.0};
    if (flat) {
      return thermal_kernel(bath, cfg.osc, cfg.derived, v, t, 1.0);
    }
    return theta_tab.eval(t);
  }

  std::complex<double> kick(double t) const {
    if (!with_kick) return {0.0, 0.0};
    return cfg.laser.amp2 * kick_tab.eval(t);
  }
};

EvalContext build_context(const ModelConfig& cfg, const PhononSpectrum& bath,
                          double tol, bool exact) {
  validate_config(cfg);
  if (!(tol > 0.0)) throw Error("spectrum: tol must be positive");

  EvalContext ctx;
  ctx.cfg = cfg;
  ctx.bath = bath;
  ctx.tol = tol;
  ctx.flat = bath.is_flat();

  const double omega = cfg.derived.omega;
  const double gamma = cfg.osc.gamma;
  const double kappa = cfg.kappa;
  const double v = cfg.mirror.v;
  const double amp2 = cfg.laser.amp2;

  ctx.neff = (v == 0.0) ? 0.0 : n_eff(bath, cfg.osc, cfg.derived, tol * 1e-2);
  const double ld_exponent = (ctx.neff + 0.5) * cfg.osc.Omega * v * v / omega;

  double two_amp2_re_a = 0.0;
  ctx.with_kick = exact && amp2 > 0.0 && v != 0.0;
  if (ctx.with_kick) {
    OpticalKernelParams okp{cfg.osc, cfg.derived, v, std::min(tol, 1e-9)};
    two_amp2_re_a = 2.0 * amp2 * scattering_exponent(okp).real();
  }
  ctx.prefactor = std::exp(two_amp2_re_a - ld_exponent);
  ctx.front = 4.0 * (exact ? amp2 : 1.0) * ctx.prefactor;

  // Kernel caches. Flat baths use the exact closed-form kernel per
  // evaluation instead of a table.
  const double dt = std::min(kPi / (16.0 * bath_max_frequency(bath, omega)),
                             0.05 / kappa);
  const double t_kernel = (v == 0.0) ? 0.0 : 40.0 / gamma;
  double kernel_resid = 0.0;
  double theta_scale = 0.0;
  if (v != 0.0) {
    if (ctx.flat) {
      theta_scale = std::abs(
          thermal_kernel(bath, cfg.osc, cfg.derived, v, 0.0, 1.0));
      kernel_resid += theta_scale * std::exp(-0.5 * gamma * t_kernel);
    } else {
      ctx.theta_tab = build_thermal_table(bath, cfg.osc, cfg.derived, v,
                                          t_kernel, dt, tol * 1e-2);
      theta_scale = std::abs(ctx.theta_tab.values.front());
      kernel_resid += std::abs(ctx.theta_tab.values.back());
      ctx.kernel_err += ctx.theta_tab.err_estimate;
      // empirical cubic-interpolation probe at off-grid midpoints
      double probe = 0.0;
      for (int k = 1; k <= 16; ++k) {
        const double t = (static_cast<double>(k) - 0.5) *
                         (ctx.theta_tab.t_max / 17.0);
        const std::complex<double> exact_val = thermal_kernel(
            bath, cfg.osc, cfg.derived, v, t, std::max(tol * 1e-2, 1e-12));
        probe = std::max(probe, std::abs(exact_val - ctx.theta_tab.eval(t)));
      }
      ctx.kernel_err += probe;
    }
  }
  if (ctx.with_kick) {
    OpticalKernelParams okp{cfg.osc, cfg.derived, v, std::min(tol, 1e-9)};
    ctx.kick_tab = build_kick_table(okp, t_kernel, dt);
    const double k0 = std::abs(ctx.kick_tab.values.front());
    kernel_resid += amp2 * std::abs(ctx.kick_tab.values.back());
    // cubic interpolation of an oscillation at ~2*omega on step dt
    const double ph = dt * 2.0 * omega;
    ctx.kernel_err += amp2 * (ctx.kick_tab.err_estimate +
                              0.03 * ph * ph * ph * ph * k0);
    theta_scale += amp2 * k0;
  }

  // Integration span: numeric quadrature to T_int, then either an analytic
  // pure-exponential tail (kernels dead) or a bounded dropped tail.
  const double exp_log_max = theta_scale;  // |exp exponent| <= theta_scale
  const double tol_point = tol / std::max(1.0, ctx.front);
  const double eps_tail = 0.01 * tol_point;
  const double t_env =
      (2.0 / kappa) *
      (exp_log_max + std::log(2.0 / std::max(kappa * eps_tail, 1e-300)));
  ctx.T_kernel = t_kernel;
  if (t_kernel >= t_env) {
    ctx.T_int = t_env;
    ctx.analytic_tail = false;
    ctx.tail_bound = eps_tail;
  } else {
    ctx.T_int = std::max(t_kernel, std::min(t_env, 16.0 / kappa));
    ctx.analytic_tail = true;
    ctx.tail_bound = (2.0 / kappa) * std::exp(-0.5 * kappa * ctx.T_int) *
                     kernel_resid * std::exp(kernel_resid);
  }
  return ctx;
}

struct PointValue {
  double value = 0.0;
  double err = 0.0;
  bool converged = false;
};

PointValue eval_point(const EvalContext& ctx, double mu) {
  const double delta = mu - ctx.cfg.laser.omega0;
  const double kappa = ctx.cfg.kappa;
  const std::complex<double> decay(-0.5 * kappa, delta);

  auto integrand = [&ctx, decay](double t) {
    return std::exp(decay * t + ctx.kick(t) + ctx.theta(t));
  };

  QuadratureSpec qs;
  qs.abs_tol = 0.25 * ctx.tol / std::max(1.0, ctx.front);
  qs.rel_tol = 1e-9;
  qs.osc_freq_hint = std::max({ctx.cfg.derived.omega, std::abs(delta),
                               1.0 / ctx.T_int});
  const double need = std::ceil(ctx.T_int * 8.0 * qs.osc_freq_hint / kPi);
  qs.max_subdivisions =
      static_cast<int>(std::min(need + 4096.0, 4.0e6));

  QuadResult r = adaptive_quad(integrand, 0.0, ctx.T_int, qs);
  std::complex<double> total = r.value;
  if (ctx.analytic_tail) {
    total += std::exp(decay * ctx.T_int) / (-decay);
  }

  PointValue p;
  p.value = ctx.front * total.real();
  p.err = ctx.front * (r.error_estimate + ctx.tail_bound +
                       ctx.kernel_err * (2.0 / kappa));
  p.converged = r.converged;
  return p;
}

SpectrumResult run_grid(const EvalContext& ctx, const MuGrid& grid,
                        SpectrumKind kind, double baseline, unsigned threads) {
  const std::size_t n = grid.values.size();
  SpectrumResult out;
  out.grid = grid;
  out.kind = kind;
  out.values.assign(n, 0.0);
  out.err_estimate.assign(n, 0.0);
  out.converged.assign(n, false);
  out.config_snapshot = model_snapshot(ctx.cfg, ctx.bath);

  unsigned n_threads = threads == 0 ? std::thread::hardware_concurrency() : threads;
  n_threads = std::clamp<unsigned>(n_threads, 1, 64);
  n_threads = std::min<std::size_t>(n_threads, n);

  auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const PointValue p = eval_point(ctx, grid.values[i]);
      out.values[i] = baseline + p.value;
      out.err_estimate[i] = p.err;
      out.converged[i] = p.converged;
    }
  };

  if (n_threads <= 1) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned k = 0; k < n_threads; ++k) {
      const std::size_t lo = n * k / n_threads;
      const std::size_t hi = n * (k + 1) / n_threads;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

void check_grid(const MuGrid& grid) {
  if (grid.values.empty()) throw Error("mu grid must not be empty");
  for (std::size_t i = 0; i + 1 < grid.values.size(); ++i) {
    if (!(grid.values[i] < grid.values[i + 1])) {
      throw Error("mu grid must be strictly increasing");
    }
    if (!std::isfinite(grid.values[i])) throw Error("mu grid must be finite");
  }
}

}  // namespace

MuGrid make_linear_grid(double mu_min, double mu_max, int points) {
  if (points < 2) throw Error("grid needs at least 2 points");
  if (!(mu_min < mu_max)) throw Error("grid requires mu_min < mu_max");
  MuGrid g;
  g.values.resize(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    g.values[static_cast<std::size_t>(i)] =
        mu_min + (mu_max - mu_min) * static_cast<double>(i) /
                     static_cast<double>(points - 1);
  }
  return g;
}

std::string to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::kInput: return "input";
    case SpectrumKind::kExact: return "exact";
    case SpectrumKind::kSusceptibility: return "susceptibility";
    case SpectrumKind::kPeaksApprox: return "peaks-approx";
  }
  return "unknown";
}

bool SpectrumResult::all_converged() const {
  return std::all_of(converged.begin(), converged.end(),
                     [](bool b) { return b; });
}

SpectrumResult input_spectrum(const ModelConfig& cfg, const MuGrid& grid) {
  validate_config(cfg);
  check_grid(grid);
  SpectrumResult out;
  out.grid = grid;
  out.kind = SpectrumKind::kInput;
  out.config_snapshot = model_snapshot(cfg, PhononSpectrum::flat(0.0));
  const std::size_t n = grid.values.size();
  out.values.resize(n);
  out.err_estimate.assign(n, 0.0);
  out.converged.assign(n, true);
  const double amp2 = cfg.laser.amp2;
  const double kappa = cfg.kappa;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = grid.values[i] - cfg.laser.omega0;
    out.values[i] = 1.0 + 2.0 * amp2 * kappa / (0.25 * kappa * kappa + d * d);
  }
  return out;
}

SpectrumResult exact_spectrum(const ModelConfig& cfg,
                              const PhononSpectrum& bath, const MuGrid& grid,
                              double tol, unsigned threads) {
  check_grid(grid);
  if (cfg.laser.amp2 == 0.0) {
    // prefactor 4|lambda|^2 kills the whole correction term
    SpectrumResult out;
    out.grid = grid;
    out.kind = SpectrumKind::kExact;
    out.values.assign(grid.values.size(), 1.0);
    out.err_estimate.assign(grid.values.size(), 0.0);
    out.converged.assign(grid.values.size(), true);
    validate_config(cfg);
    out.config_snapshot = model_snapshot(cfg, bath);
    return out;
  }
  const EvalContext ctx = build_context(cfg, bath, tol, /*exact=*/true);
  return run_grid(ctx, grid, SpectrumKind::kExact, 1.0, threads);
}

SpectrumResult susceptibility(const ModelConfig& cfg,
                              const PhononSpectrum& bath, const MuGrid& grid,
                              double tol, unsigned threads) {
  check_grid(grid);
  const EvalContext ctx = build_context(cfg, bath, tol, /*exact=*/false);
  return run_grid(ctx, grid, SpectrumKind::kSusceptibility, 0.0, threads);
}

TotalPowerReport total_power_report(const SpectrumResult& result) {
  const auto& mu = result.grid.values;
  const auto& val = result.values;
  if (mu.size() < 8) throw Error("total_power: grid too small");

  const double baseline = (result.kind == SpectrumKind::kInput ||
                           result.kind == SpectrumKind::kExact)
                              ? 1.0
                              : 0.0;
  double omega0 = 0.0;
  double kappa = 0.0;
  if (result.config_snapshot.contains("model")) {
    const auto& m = result.config_snapshot["model"];
    omega0 = m["laser"]["omega0"].get<double>();
    kappa = m["kappa"].get<double>();
  } else {
    throw Error("total_power: result lacks its config snapshot");
  }

  TotalPowerReport rep;
  double peak = 0.0;
  for (double x : val) peak = std::max(peak, std::abs(x - baseline));
  const double edge = std::max(std::abs(val.front() - baseline),
                               std::abs(val.back() - baseline));
  rep.grid_too_narrow = edge >= 1e-6 * peak;

  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
    acc += 0.5 * (val[i] - baseline + val[i + 1] - baseline) *
           (mu[i + 1] - mu[i]);
  }
  acc /= kTwoPi;

  // Lorentzian tail fit c/(kappa^2/4 + delta^2) on the outer 10% per side.
  const std::size_t n = mu.size();
  const std::size_t m = std::max<std::size_t>(3, n / 10);
  auto tail = [&](bool upper) {
    double c_acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = upper ? n - 1 - j : j;
      const double d = mu[i] - omega0;
      c_acc += (val[i] - baseline) * (0.25 * kappa * kappa + d * d);
      ++cnt;
    }
    const double c = c_acc / static_cast<double>(cnt);
    const double X = std::abs((upper ? mu.back() : mu.front()) - omega0);
    return c * (2.0 / kappa) * (0.5 * kPi - std::atan(2.0 * X / kappa)) /
           kTwoPi;
  };
  rep.tail_correction = tail(false) + tail(true);
  rep.value = acc + rep.tail_correction;
  return rep;
}

double total_power(const SpectrumResult& result) {
  return total_power_report(result).value;
}

SpectrumResult spectrum_grid_eval(const ModelConfig& cfg,
                                  const PhononSpectrum& bath,
                                  const MuGrid& grid, SpectrumKind kind,
                                  double tol, unsigned threads) {
  switch (kind) {
    case SpectrumKind::kInput:
      return input_spectrum(cfg, grid);
    case SpectrumKind::kExact:
      return exact_spectrum(cfg, bath, grid, tol, threads);
    case SpectrumKind::kSusceptibility:
      return susceptibility(cfg, bath, grid, tol, threads);
    case SpectrumKind::kPeaksApprox:
      throw Error(
          "peaks-approx spectra are assembled by sigma_from_peaks in the "
          "peaks module");
  }
  throw Error("unknown spectrum kind");
}

}  // namespace mirrorspec
