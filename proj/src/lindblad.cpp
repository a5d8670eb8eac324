#include "mirrorspec/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace mirrorspec {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using std::complex;

MatrixXcd lowering_operator(int dim) {
  MatrixXcd a = MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

MatrixXcd hamiltonian(const TruncatedOperators& ops,
                      const DerivedOscillator& d) {
  return d.omega *
         (ops.number + 0.5 * MatrixXcd::Identity(ops.dim, ops.dim));
}

// kron(B^T, A) acting on column-stacked rho: vec(A rho B).
MatrixXcd super_sandwich(const MatrixXcd& A, const MatrixXcd& B) {
  const int n = static_cast<int>(A.rows());
  MatrixXcd out(n * n, n * n);
  const MatrixXcd Bt = B.transpose();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.block(i * n, j * n, n, n) = Bt(i, j) * A;
    }
  }
  return out;
}

MatrixXcd build_superoperator(const TruncatedOperators& ops,
                              const OscillatorParams& osc,
                              const DerivedOscillator& d, double n_eff,
                              double amp2) {
  const int n = ops.dim;
  const MatrixXcd I = MatrixXcd::Identity(n, n);
  const MatrixXcd H = hamiltonian(ops, d);
  const MatrixXcd adag = ops.a.adjoint();
  const MatrixXcd ada = adag * ops.a;
  const MatrixXcd aad = ops.a * adag;
  const complex<double> im(0.0, 1.0);

  MatrixXcd L = -im * (super_sandwich(H, I) - super_sandwich(I, H));
  const double g_down = osc.gamma * (n_eff + 1.0);
  const double g_up = osc.gamma * n_eff;
  L += g_down * (super_sandwich(ops.a, adag) -
                 0.5 * (super_sandwich(ada, I) + super_sandwich(I, ada)));
  L += g_up * (super_sandwich(adag, ops.a) -
               0.5 * (super_sandwich(aad, I) + super_sandwich(I, aad)));
  if (amp2 != 0.0) {
    L += amp2 * (super_sandwich(ops.exp_ivq, ops.exp_ivq.adjoint()) -
                 super_sandwich(I, I));
  }
  return L;
}

MatrixXcd unvec(const VectorXcd& x, int n) {
  MatrixXcd rho(n, n);
  for (int j = 0; j < n; ++j) rho.col(j) = x.segment(j * n, n);
  return rho;
}

MatrixXcd hermitize_unit_trace(MatrixXcd rho) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const complex<double> tr = rho.trace();
  if (std::abs(tr) < 1e-300) throw Error("steady state solve produced a traceless matrix");
  return rho / tr;
}

double trace_norm_hermitian(const MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

MatrixXcd solve_null_space(const TruncatedOperators& ops,
                           const OscillatorParams& osc,
                           const DerivedOscillator& d, double n_eff,
                           double amp2, double tol, double* residual) {
  const int n = ops.dim;
  const MatrixXcd L = build_superoperator(ops, osc, d, n_eff, amp2);

  auto attempt = [&](int replace_row) {
    MatrixXcd M = L;
    VectorXcd b = VectorXcd::Zero(n * n);
    M.row(replace_row).setZero();
    for (int j = 0; j < n; ++j) M(replace_row, j * n + j) = 1.0;
    b(replace_row) = 1.0;
    const VectorXcd x = M.partialPivLu().solve(b);
    return hermitize_unit_trace(unvec(x, n));
  };

  MatrixXcd rho = attempt(0);
  double res = trace_norm_hermitian(
      liouvillian_apply(ops, rho, osc, d, n_eff, amp2));
  if (!(res < std::sqrt(tol))) {
    // retry with a different constrained row before giving up
    const MatrixXcd rho2 = attempt(n * n - 1);
    const double res2 = trace_norm_hermitian(
        liouvillian_apply(ops, rho2, osc, d, n_eff, amp2));
    if (res2 < res) {
      rho = rho2;
      res = res2;
    }
  }
  *residual = res;
  return rho;
}

MatrixXcd thermal_seed(int dim, double n_eff) {
  MatrixXcd rho = MatrixXcd::Zero(dim, dim);
  const double ratio = n_eff / (n_eff + 1.0);
  double w = 1.0;
  double norm = 0.0;
  for (int k = 0; k < dim; ++k) {
    rho(k, k) = w;
    norm += w;
    w *= ratio;
  }
  return rho / norm;
}

}  // namespace

TruncatedOperators build_operators(int dim, const OscillatorParams& osc,
                                   const DerivedOscillator& d, double v) {
  if (dim < 4) throw Error("build_operators: dim must be >= 4");

  TruncatedOperators ops;
  ops.dim = dim;
  ops.v = v;
  ops.a = lowering_operator(dim);
  const MatrixXcd adag = ops.a.adjoint();
  ops.number = adag * ops.a;

  const double pref = std::sqrt(osc.Omega / (2.0 * d.omega));
  const complex<double> im(0.0, 1.0);
  ops.q = pref * (std::conj(d.tau) * ops.a + d.tau * adag);
  ops.p = im * pref * (adag - ops.a);

  if (v == 0.0) {
    ops.exp_ivq = MatrixXcd::Identity(dim, dim);
    ops.unitarity_defect = 0.0;
    return ops;
  }

  // q is Hermitian by construction; exponentiate through its eigenbasis.
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(ops.q);
  VectorXcd phases(dim);
  for (int k = 0; k < dim; ++k) {
    phases(k) = std::exp(im * v * es.eigenvalues()(k));
  }
  ops.exp_ivq =
      es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  ops.unitarity_defect =
      (ops.exp_ivq * ops.exp_ivq.adjoint() - MatrixXcd::Identity(dim, dim))
          .cwiseAbs()
          .maxCoeff();
  return ops;
}

Eigen::MatrixXcd liouvillian_apply(const TruncatedOperators& ops,
                                   const Eigen::MatrixXcd& rho,
                                   const OscillatorParams& osc,
                                   const DerivedOscillator& d, double n_eff,
                                   double amp2) {
  const MatrixXcd H = hamiltonian(ops, d);
  const MatrixXcd adag = ops.a.adjoint();
  const MatrixXcd ada = adag * ops.a;
  const MatrixXcd aad = ops.a * adag;
  const complex<double> im(0.0, 1.0);

  MatrixXcd out = -im * (H * rho - rho * H);
  const double g_down = osc.gamma * (n_eff + 1.0);
  const double g_up = osc.gamma * n_eff;
  out += g_down * (ops.a * rho * adag - 0.5 * (ada * rho + rho * ada));
  out += g_up * (adag * rho * ops.a - 0.5 * (aad * rho + rho * aad));
  if (amp2 != 0.0) {
    out += amp2 * (ops.exp_ivq * rho * ops.exp_ivq.adjoint() - rho);
  }
  return out;
}

Eigen::MatrixXcd time_integrate_steady(const TruncatedOperators& ops,
                                       const OscillatorParams& osc,
                                       const DerivedOscillator& d,
                                       double n_eff, double amp2, double tol) {
  const double dt =
      0.01 / std::max({osc.Omega, osc.gamma, amp2});
  const double t_end = 30.0 / osc.gamma;
  const double t_check = 1.0 / osc.gamma;

  MatrixXcd rho = thermal_seed(ops.dim, n_eff);
  MatrixXcd prev = rho;
  double t = 0.0;
  double next_check = t_check;

  auto deriv = [&](const MatrixXcd& r) {
    return liouvillian_apply(ops, r, osc, d, n_eff, amp2);
  };

  while (t < t_end) {
    const MatrixXcd k1 = deriv(rho);
    const MatrixXcd k2 = deriv(rho + 0.5 * dt * k1);
    const MatrixXcd k3 = deriv(rho + 0.5 * dt * k2);
    const MatrixXcd k4 = deriv(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
    if (t >= next_check) {
      rho = hermitize_unit_trace(rho);
      if (trace_norm_hermitian(rho - prev) < tol) break;
      prev = rho;
      next_check += t_check;
    }
  }
  return hermitize_unit_trace(rho);
}

SteadyStateResult steady_state(const OscillatorParams& osc,
                               const DerivedOscillator& d, double n_eff,
                               double amp2, double v,
                               const SteadyStateOptions& opt) {
  if (!(n_eff >= 0.0)) throw Error("steady_state: n_eff must be >= 0");
  if (!(amp2 >= 0.0)) throw Error("steady_state: amp2 must be >= 0");

  int dim = std::max(4, opt.dim_start);
  while (true) {
    TruncatedOperators ops = build_operators(dim, osc, d, v);
    double residual = 0.0;
    MatrixXcd rho;
    if (opt.time_integration) {
      rho = time_integrate_steady(ops, osc, d, n_eff, amp2, opt.tol);
      residual = trace_norm_hermitian(
          liouvillian_apply(ops, rho, osc, d, n_eff, amp2));
    } else {
      rho = solve_null_space(ops, osc, d, n_eff, amp2, opt.tol, &residual);
    }

    const double top = std::max(std::abs(rho(dim - 1, dim - 1)),
                                std::abs(rho(dim - 2, dim - 2)));
    if (top < 1e-8) {
      if (!(residual < opt.tol)) {
        throw Error("steady_state: residual " + std::to_string(residual) +
                    " did not reach tolerance");
      }
      SteadyStateResult out;
      out.rho = std::move(rho);
      out.ops = std::move(ops);
      out.dim = dim;
      out.residual = residual;
      out.top_population = top;
      return out;
    }
    if (dim >= opt.dim_cap) {
      throw TruncationError(
          "steady_state: truncation " + std::to_string(dim) +
              " still carries top-level population " + std::to_string(top),
          dim, top);
    }
    dim = std::min(2 * dim, opt.dim_cap);
  }
}

EquilibriumMoments equilibrium_moments(const Eigen::MatrixXcd& rho,
                                       const TruncatedOperators& ops) {
  auto expect = [&rho](const MatrixXcd& op) {
    return (op * rho).trace();
  };
  EquilibriumMoments m;
  m.q = expect(ops.q).real();
  m.p = expect(ops.p).real();
  m.q2 = expect(ops.q * ops.q).real();
  m.p2 = expect(ops.p * ops.p).real();
  m.qp_anti = expect(ops.q * ops.p + ops.p * ops.q).real();
  m.occupancy = expect(ops.number).real();
  m.a2 = expect(ops.a * ops.a);
  return m;
}

bool is_valid_density(const Eigen::MatrixXcd& rho, double herm_tol,
                      double trace_tol, double eig_floor) {
  if (rho.rows() != rho.cols()) return false;
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > herm_tol) return false;
  if (std::abs(rho.trace() - 1.0) > trace_tol) return false;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > eig_floor;
}

}  // namespace mirrorspec
