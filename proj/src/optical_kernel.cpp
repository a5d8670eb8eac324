#include "mirrorspec/optical_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mirrorspec/phonon_bath.hpp"  // cubic_interp_uniform

namespace mirrorspec {

namespace {

std::complex<double> phase_factor(const OpticalKernelParams& p, double u) {
  // e^{i v^2 h(u)} - 1
  const double arg = p.v * p.v * mechanical_response(p, u);
  return std::complex<double>(std::cos(arg) - 1.0, std::sin(arg));
}

}  // namespace

double mechanical_response(const OpticalKernelParams& p, double r) {
  if (!(r >= 0.0)) throw Error("mechanical_response: r must be >= 0");
  return (p.osc.Omega / p.derived.omega) *
         std::exp(-0.5 * p.osc.gamma * r) * std::sin(p.derived.omega * r);
}

std::complex<double> scattering_exponent(const OpticalKernelParams& p) {
  QuadratureSpec qs;
  qs.abs_tol = p.tol;
  qs.rel_tol = 1e-10;
  qs.osc_freq_hint = p.derived.omega;
  qs.decay_rate_hint = 0.5 * p.osc.gamma;
  qs.max_subdivisions = 200000;
  QuadResult r = semi_infinite_quad(
      [&p](double u) { return phase_factor(p, u); }, qs);
  return integrate_or_throw(r, "scattering_exponent");
}

std::complex<double> kick_kernel(const OpticalKernelParams& p, double t) {
  if (!(t >= 0.0)) throw Error("kick_kernel: t must be >= 0");
  QuadratureSpec qs;
  qs.abs_tol = p.tol;
  qs.rel_tol = 1e-10;
  qs.osc_freq_hint = 2.0 * p.derived.omega;
  qs.decay_rate_hint = p.osc.gamma;  // combined envelope of both factors
  qs.max_subdivisions = 200000;
  QuadResult r = semi_infinite_quad(
      [&p, t](double s) {
        return phase_factor(p, t + s) * std::conj(phase_factor(p, s));
      },
      qs);
  return integrate_or_throw(r, "kick_kernel");
}

std::complex<double> KickKernelTable::eval(double t) const {
  if (t < 0.0) throw Error("KickKernelTable: t must be >= 0");
  if (empty() || t >= t_max) return {0.0, 0.0};
  return cubic_interp_uniform(values, dt, t);
}

KickKernelTable build_kick_table(const OpticalKernelParams& p, double t_max,
                                 double dt) {
  if (!(t_max > 0.0) || !(dt > 0.0))
    throw Error("build_kick_table: t_max and dt must be positive");

  KickKernelTable tab;
  const std::size_t n_t = static_cast<std::size_t>(std::ceil(t_max / dt)) + 1;
  tab.dt = dt;
  tab.t_max = static_cast<double>(n_t - 1) * dt;
  tab.values.assign(n_t, {0.0, 0.0});
  if (p.v == 0.0) return tab;

  // Both factors of K(t) = Int phi(t+s) conj(phi(s)) ds are sampled on one
  // uniform grid whose step divides dt, so phi(t_i + s_j) is a plain lookup.
  // Composite Simpson in s, evaluated at step h and h/2 for the estimate.
  const double s_cut =
      std::log(100.0 / std::max(p.tol, 1e-14)) / p.osc.gamma;
  const double h_want = std::numbers::pi / (64.0 * p.derived.omega);
  const std::size_t m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(dt / h_want)));

  auto correlate = [&](std::size_t mm) {
    const double h = dt / static_cast<double>(mm);
    std::size_t n_s = static_cast<std::size_t>(std::ceil(s_cut / h));
    if (n_s % 2 == 1) ++n_s;
    const std::size_t n_phi = (n_t - 1) * mm + n_s + 1;
    std::vector<std::complex<double>> phi(n_phi);
    for (std::size_t i = 0; i < n_phi; ++i) {
      phi[i] = phase_factor(p, static_cast<double>(i) * h);
    }
    std::vector<std::complex<double>> out(n_t);
    for (std::size_t i = 0; i < n_t; ++i) {
      const std::size_t base = i * mm;
      std::complex<double> acc = phi[base] * std::conj(phi[0]) +
                                 phi[base + n_s] * std::conj(phi[n_s]);
      for (std::size_t j = 1; j < n_s; j += 2) {
        acc += 4.0 * phi[base + j] * std::conj(phi[j]);
      }
      for (std::size_t j = 2; j < n_s; j += 2) {
        acc += 2.0 * phi[base + j] * std::conj(phi[j]);
      }
      out[i] = acc * (h / 3.0);
    }
    return out;
  };

  const std::vector<std::complex<double>> coarse = correlate(m);
  const std::vector<std::complex<double>> fine = correlate(2 * m);
  double worst = 0.0;
  for (std::size_t i = 0; i < n_t; ++i) {
    worst = std::max(worst, std::abs(coarse[i] - fine[i]));
    tab.values[i] = fine[i];
  }
  // tail of the s-integral beyond the cut, |phi| <= 2 each
  tab.err_estimate = worst + 4.0 * std::exp(-p.osc.gamma * s_cut) / p.osc.gamma;
  return tab;
}

}  // namespace mirrorspec
