#include "mirrorspec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

namespace mirrorspec {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK dqk15 constants).
// The even-indexed Kronrod nodes are the 7-point Gauss nodes.
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
constexpr double kWg[4] = {0.1294849661688697, 0.2797053914892767,
                           0.3818300505051189, 0.4179591836734694};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  std::complex<double> integral{0.0, 0.0};
  double err = 0.0;
  std::uint64_t seq = 0;
};

// Single GK15 evaluation with the QUADPACK error heuristic.
Panel gk15(const Integrand& f, double a, double b, std::uint64_t seq) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);

  std::complex<double> fv[15];
  fv[7] = f(c);
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXgk[i];
    fv[i] = f(c - dx);
    fv[14 - i] = f(c + dx);
  }

  std::complex<double> resk = kWgk[7] * fv[7];
  double resabs = kWgk[7] * std::abs(fv[7]);
  for (int i = 0; i < 7; ++i) {
    resk += kWgk[i] * (fv[i] + fv[14 - i]);
    resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
  }

  std::complex<double> resg = kWg[3] * fv[7];
  for (int i = 0; i < 3; ++i) {
    const int j = 2 * i + 1;  // Gauss nodes sit at odd Kronrod indices
    resg += kWg[i] * (fv[j] + fv[14 - j]);
  }

  const std::complex<double> mean = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fv[7] - mean);
  for (int i = 0; i < 7; ++i) {
    resasc += kWgk[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));
  }

  Panel p;
  p.a = a;
  p.b = b;
  p.seq = seq;
  p.integral = resk * h;
  resabs *= std::abs(h);
  resasc *= std::abs(h);

  double err = std::abs(resk - resg) * std::abs(h);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(err, 50.0 * eps * resabs);
  }
  p.err = err;
  return p;
}

struct WorstFirst {
  bool operator()(const Panel& x, const Panel& y) const {
    if (x.err != y.err) return x.err < y.err;  // max-heap on error
    return x.seq > y.seq;                      // then oldest first
  }
};

std::complex<double> compensated_total(std::vector<Panel>& panels) {
  std::sort(panels.begin(), panels.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  std::complex<double> sum{0.0, 0.0};
  std::complex<double> comp{0.0, 0.0};
  for (const Panel& p : panels) {
    const std::complex<double> y = p.integral - comp;
    const std::complex<double> t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

QuadResult adaptive_quad(const Integrand& f, double a, double b,
                         const QuadratureSpec& spec) {
  if (!(a < b)) throw Error("adaptive_quad: requires a < b");
  if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0)) {
    throw Error("adaptive_quad: tolerances must be positive");
  }

  const int max_panels = std::max(1, spec.max_subdivisions);
  int n0 = 1;
  if (spec.osc_freq_hint > 0.0) {
    const double w = std::numbers::pi / (8.0 * spec.osc_freq_hint);
    const double need = std::ceil((b - a) / w);
    n0 = static_cast<int>(std::min(need, static_cast<double>(max_panels)));
    n0 = std::max(n0, 1);
  }

  std::uint64_t seq = 0;
  std::priority_queue<Panel, std::vector<Panel>, WorstFirst> heap;
  double total_err = 0.0;
  std::complex<double> total{0.0, 0.0};

  for (int i = 0; i < n0; ++i) {
    const double pa = a + (b - a) * static_cast<double>(i) / n0;
    const double pb = (i + 1 == n0) ? b : a + (b - a) * static_cast<double>(i + 1) / n0;
    Panel p = gk15(f, pa, pb, seq++);
    total += p.integral;
    total_err += p.err;
    heap.push(p);
  }

  int panels = n0;
  auto tol_met = [&]() {
    return total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
  };

  int stuck = 0;
  while (!tol_met() && panels < max_panels && !heap.empty()) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) {
      // Cannot split further in floating point; park it.
      ++stuck;
      if (stuck > 64) break;
      continue;
    }
    Panel left = gk15(f, worst.a, mid, seq++);
    Panel right = gk15(f, mid, worst.b, seq++);
    total += left.integral + right.integral - worst.integral;
    total_err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
    ++panels;
  }

  std::vector<Panel> all;
  all.reserve(static_cast<std::size_t>(heap.size()) + stuck);
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }

  QuadResult r;
  r.value = compensated_total(all);
  r.error_estimate = 0.0;
  for (const Panel& p : all) r.error_estimate += p.err;
  r.panels = panels;
  r.converged =
      r.error_estimate <= std::max(spec.abs_tol, spec.rel_tol * std::abs(r.value));
  return r;
}

QuadResult semi_infinite_quad(const Integrand& f, const QuadratureSpec& spec) {
  if (!(spec.decay_rate_hint > 0.0)) {
    throw Error("semi_infinite_quad: decay_rate_hint must be positive");
  }
  const double rate = spec.decay_rate_hint;
  // exp(-rate*T) < 0.01 * abs_tol
  const double T = std::log(100.0 / spec.abs_tol) / rate;
  QuadResult r = adaptive_quad(f, 0.0, T, spec);
  const double tail_bound = std::exp(-rate * T) / rate;
  r.error_estimate += tail_bound;
  r.converged =
      r.error_estimate <= std::max(spec.abs_tol, spec.rel_tol * std::abs(r.value));
  return r;
}

QuadResult real_line_quad(const Integrand& f, double core_lo, double core_hi,
                          const QuadratureSpec& spec, bool lower_tail,
                          bool upper_tail) {
  if (!(core_lo < core_hi)) throw Error("real_line_quad: requires core_lo < core_hi");
  QuadResult core = adaptive_quad(f, core_lo, core_hi, spec);

  QuadratureSpec tail_spec = spec;
  tail_spec.osc_freq_hint = 0.0;  // mapped coordinate, hint no longer applies

  QuadResult r = core;
  if (upper_tail) {
    auto g = [&f, core_hi](double s) -> std::complex<double> {
      if (s >= 1.0) return {0.0, 0.0};
      const double one_minus = 1.0 - s;
      const double x = core_hi + s / one_minus;
      return f(x) / (one_minus * one_minus);
    };
    QuadResult t = adaptive_quad(g, 0.0, 1.0, tail_spec);
    r.value += t.value;
    r.error_estimate += t.error_estimate;
    r.panels += t.panels;
    r.converged = r.converged && t.converged;
  }
  if (lower_tail) {
    auto g = [&f, core_lo](double s) -> std::complex<double> {
      if (s >= 1.0) return {0.0, 0.0};
      const double one_minus = 1.0 - s;
      const double x = core_lo - s / one_minus;
      return f(x) / (one_minus * one_minus);
    };
    QuadResult t = adaptive_quad(g, 0.0, 1.0, tail_spec);
    r.value += t.value;
    r.error_estimate += t.error_estimate;
    r.panels += t.panels;
    r.converged = r.converged && t.converged;
  }
  r.converged = r.error_estimate <=
                std::max(spec.abs_tol, spec.rel_tol * std::abs(r.value));
  return r;
}

std::complex<double> integrate_or_throw(const QuadResult& r,
                                        const std::string& context) {
  if (!r.converged) {
    throw QuadratureError(context + ": quadrature did not converge (estimate " +
                              std::to_string(r.error_estimate) + ")",
                          r.value, r.error_estimate);
  }
  return r.value;
}

}  // namespace mirrorspec
