#pragma once

#include <Eigen/Dense>

#include "mirrorspec/model.hpp"

namespace mirrorspec {

// Truncated number-basis operators for the Markovian-limit master equation.
// The position/momentum matrices use the nonstandard unimodular weighting:
//   q = sqrt(Omega/2omega) (conj(tau) a + tau a^dag),
//   p = i sqrt(Omega/2omega) (a^dag - a),
// and e^{ivq} is built from the spectral decomposition of the Hermitian q.
struct TruncatedOperators {
  int dim = 0;
  double v = 0.0;
  Eigen::MatrixXcd a;        // lowering operator
  Eigen::MatrixXcd q;
  Eigen::MatrixXcd p;
  Eigen::MatrixXcd number;   // a^dag a
  Eigen::MatrixXcd exp_ivq;  // e^{ivq}
  double unitarity_defect = 0.0;  // truncation diagnostic ||E E^dag - 1||
};

TruncatedOperators build_operators(int dim, const OscillatorParams& osc,
                                   const DerivedOscillator& d, double v);

// Generator of the limiting Markovian dynamics:
//   L[rho] = -i[H, rho] + gamma (n_eff+1) D[a] rho + gamma n_eff D[a^dag] rho
//          + amp2 (e^{ivq} rho e^{-ivq} - rho),
// with H = omega (a^dag a + 1/2). The output is traceless and Hermitian.
Eigen::MatrixXcd liouvillian_apply(const TruncatedOperators& ops,
                                   const Eigen::MatrixXcd& rho,
                                   const OscillatorParams& osc,
                                   const DerivedOscillator& d, double n_eff,
                                   double amp2);

struct SteadyStateOptions {
  double tol = 1e-10;      // residual ||L[rho]||_1 target
  int dim_start = 20;
  int dim_cap = 160;
  bool time_integration = false;  // RK4 relaxation instead of the null-space solve
};

struct SteadyStateResult {
  Eigen::MatrixXcd rho;
  TruncatedOperators ops;
  int dim = 0;
  double residual = 0.0;      // achieved ||L[rho]||_1
  double top_population = 0.0;
};

// Steady state with adaptive truncation: starts at dim_start and doubles the
// dimension until the top two number-level populations fall below 1e-8,
// failing explicitly at dim_cap. Default route is a direct null-space solve
// of the vectorized generator; RK4 time integration to t = 30/gamma is kept
// as an independent cross-check.
SteadyStateResult steady_state(const OscillatorParams& osc,
                               const DerivedOscillator& d, double n_eff,
                               double amp2, double v,
                               const SteadyStateOptions& opt = {});

// RK4 relaxation from the thermal-like seed; exposed for cross-checks.
Eigen::MatrixXcd time_integrate_steady(const TruncatedOperators& ops,
                                       const OscillatorParams& osc,
                                       const DerivedOscillator& d,
                                       double n_eff, double amp2, double tol);

// Moments as traces against the truncated operator matrices.
EquilibriumMoments equilibrium_moments(const Eigen::MatrixXcd& rho,
                                       const TruncatedOperators& ops);

// Density-matrix sanity: Hermitian, unit trace, positive semidefinite.
bool is_valid_density(const Eigen::MatrixXcd& rho, double herm_tol = 1e-12,
                      double trace_tol = 1e-12, double eig_floor = -1e-10);

}  // namespace mirrorspec
