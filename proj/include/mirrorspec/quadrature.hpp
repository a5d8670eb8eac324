#pragma once

#include <complex>
#include <functional>

#include "mirrorspec/errors.hpp"

namespace mirrorspec {

// Tolerances and control knobs for the adaptive integrators. The oscillation
// hint forces the initial panel width down to pi/(8*osc_freq_hint) so that a
// known oscillation is resolved before the error-driven refinement starts;
// the decay hint is used by semi_infinite_quad to pick its truncation point.
struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_subdivisions = 20000;
  double osc_freq_hint = 0.0;    // angular frequency of the integrand, 0 = none
  double decay_rate_hint = 0.0;  // envelope exp(-rate*t), semi-infinite only
};

struct QuadResult {
  std::complex<double> value{0.0, 0.0};
  double error_estimate = 0.0;
  int panels = 0;
  bool converged = false;
};

using Integrand = std::function<std::complex<double>(double)>;

// Adaptive Gauss-Kronrod 7/15 on [a, b]. Worst-panel-first refinement with
// deterministic tie-breaking; the final sum is accumulated left-to-right with
// compensation, so identical inputs give bitwise-identical outputs.
QuadResult adaptive_quad(const Integrand& f, double a, double b,
                         const QuadratureSpec& spec);

// Integral over [0, inf) of an integrand bounded by C*exp(-decay_rate*t).
// Truncates where exp(-decay_rate*T) < 0.01*abs_tol and delegates to
// adaptive_quad; the truncation bound is folded into the error estimate.
QuadResult semi_infinite_quad(const Integrand& f, const QuadratureSpec& spec);

// Integral over the whole real line: adaptive on the core window [a, b] plus
// the two tails mapped onto [0, 1) via x = b + s/(1-s). The integrand must
// decay at least like 1/x^2 for the mapped tails to be integrable.
QuadResult real_line_quad(const Integrand& f, double core_lo, double core_hi,
                          const QuadratureSpec& spec, bool lower_tail = true,
                          bool upper_tail = true);

// Convenience wrapper: returns the value or throws QuadratureError.
std::complex<double> integrate_or_throw(const QuadResult& r,
                                        const std::string& context);

}  // namespace mirrorspec
