#include "mirrorspec/model.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace mirrorspec {

namespace {

void check_oscillator(const OscillatorParams& osc,
                      std::vector<std::string>& out) {
  if (!(osc.Omega > 0.0)) out.push_back("oscillator.Omega must be > 0");
  if (!(osc.gamma > 0.0)) out.push_back("oscillator.gamma must be > 0");
  if (osc.Omega > 0.0 && osc.gamma > 0.0 && !(osc.Omega > 0.5 * osc.gamma)) {
    out.push_back("oscillator is overdamped: requires Omega > gamma/2");
  }
}

}  // namespace

DerivedOscillator derive_oscillator(const OscillatorParams& osc) {
  std::vector<std::string> violations;
  check_oscillator(osc, violations);
  if (!violations.empty()) throw ValidationError(std::move(violations));

  DerivedOscillator d;
  d.omega = std::sqrt(osc.Omega * osc.Omega - 0.25 * osc.gamma * osc.gamma);
  d.tau = {d.omega / osc.Omega, -0.5 * osc.gamma / osc.Omega};
  return d;
}

std::complex<double> mean_mode_from_qp(double q_mean, double p_mean,
                                       const DerivedOscillator& d,
                                       const OscillatorParams& osc) {
  const double pref = std::sqrt(osc.Omega / (2.0 * d.omega));
  const std::complex<double> i{0.0, 1.0};
  return pref * (q_mean + i * d.tau * p_mean);
}

std::pair<double, double> mean_qp_from_mode(std::complex<double> a_mean,
                                            const DerivedOscillator& d,
                                            const OscillatorParams& osc) {
  const double pref = std::sqrt(osc.Omega / (2.0 * d.omega));
  const std::complex<double> i{0.0, 1.0};
  const std::complex<double> q =
      pref * (std::conj(d.tau) * a_mean + d.tau * std::conj(a_mean));
  const std::complex<double> p = i * pref * (std::conj(a_mean) - a_mean);
  return {q.real(), p.real()};
}

ModelConfig make_config(const OscillatorParams& osc, const LaserParams& laser,
                        const MirrorCoupling& mirror,
                        const DetectorParams& detector) {
  ModelConfig cfg;
  cfg.osc = osc;
  cfg.derived = derive_oscillator(osc);
  cfg.laser = laser;
  cfg.mirror = mirror;
  cfg.detector = detector;
  cfg.kappa = detector.varkappa + laser.Lp;
  return cfg;
}

const ModelConfig& validate_config(const ModelConfig& cfg) {
  std::vector<std::string> violations;
  check_oscillator(cfg.osc, violations);

  if (violations.empty()) {
    const DerivedOscillator ref = derive_oscillator(cfg.osc);
    if (std::abs(cfg.derived.omega - ref.omega) > 1e-12 ||
        std::abs(cfg.derived.tau - ref.tau) > 1e-12) {
      violations.push_back("derived oscillator is inconsistent with (Omega, gamma)");
    }
    if (std::abs(std::abs(cfg.derived.tau) - 1.0) > 1e-12) {
      violations.push_back("derived.tau must be unimodular");
    }
  }

  if (!(cfg.laser.amp2 >= 0.0)) violations.push_back("laser.amp2 must be >= 0");
  if (!(cfg.laser.omega0 > 0.0)) violations.push_back("laser.omega0 must be > 0");
  if (!(cfg.laser.Lp >= 0.0)) violations.push_back("laser.Lp must be >= 0");
  if (!std::isfinite(cfg.mirror.v)) violations.push_back("mirror.v must be finite");
  if (!(cfg.mirror.phi >= 0.0 && cfg.mirror.phi < 2.0 * std::numbers::pi)) {
    violations.push_back("mirror.phi must lie in [0, 2*pi)");
  }
  if (!(cfg.detector.varkappa > 0.0)) {
    violations.push_back("detector.varkappa must be > 0");
  }
  if (std::abs(cfg.kappa - (cfg.detector.varkappa + cfg.laser.Lp)) > 1e-12) {
    violations.push_back("kappa must equal varkappa + Lp");
  }

  if (!violations.empty()) throw ValidationError(std::move(violations));
  return cfg;
}

double mean_hamiltonian(const DerivedOscillator& d, double occupancy) {
  return d.omega * (occupancy + 0.5);
}

EquilibriumMoments equilibrium_closed_form(const OscillatorParams& osc,
                                           const DerivedOscillator& d,
                                           double n_eff, double v,
                                           double amp2) {
  const double q_inf = v * amp2 / osc.Omega;
  const double thermal = (osc.Omega / d.omega) * (n_eff + 0.5);
  const double drive = amp2 * v * v / (2.0 * osc.gamma);
  const double coherent = osc.Omega * q_inf * q_inf / (2.0 * d.omega);
  const std::complex<double> i{0.0, 1.0};

  EquilibriumMoments m;
  m.q = q_inf;
  m.p = 0.0;
  m.p2 = thermal + drive;
  m.q2 = m.p2 + q_inf * q_inf;
  m.qp_anti = -(osc.gamma / d.omega) * (n_eff + 0.5);
  m.occupancy = coherent + n_eff +
                osc.Omega * v * v * amp2 / (2.0 * d.omega * osc.gamma);
  m.a2 = coherent + i * d.tau * amp2 * v * v / (4.0 * d.omega);
  return m;
}

}  // namespace mirrorspec
