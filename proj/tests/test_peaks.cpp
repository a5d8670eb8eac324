#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mirrorspec/peaks.hpp"
#include "mirrorspec/quadrature.hpp"

using namespace mirrorspec;

namespace {

// resolved-sideband style configuration
ModelConfig resolved_config(double v = 0.5) {
  return make_config({1.0, 0.02}, {0.5, 0.0, 40.0, 0.005}, {v, 0.0},
                     {0.015, 0.0});
}

// numerical (1/2pi) Int Pi_n over the real line, via core window + tails
double weight_by_quadrature(const PeakSeriesParams& p, const ModelConfig& cfg,
                            int n) {
  const double center = cfg.laser.omega0 + n * cfg.derived.omega;
  auto f = [&](double mu) -> std::complex<double> {
    if (n == 0) return elastic_peak(p, cfg, mu);
    if (n < 0) return stokes_peak(p, cfg, -n, mu);
    return antistokes_peak(p, cfg, n, mu);
  };
  QuadratureSpec qs;
  qs.abs_tol = 1e-12;
  qs.rel_tol = 1e-10;
  const QuadResult r =
      real_line_quad(f, center - 400.0 * cfg.kappa, center + 400.0 * cfg.kappa, qs);
  REQUIRE(r.converged);
  return r.value.real() / (2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("elastic peak") {
  const ModelConfig cfg = resolved_config();
  SUBCASE("N = 0 collapses to the bare Lorentzian with unit weight") {
    const PeakSeriesParams p = make_peak_params(cfg, 0.0);
    for (double mu : {39.5, 40.0, 40.3}) {
      const double d = mu - cfg.laser.omega0;
      CHECK(elastic_peak(p, cfg, mu) ==
            doctest::Approx(cfg.kappa / (0.25 * cfg.kappa * cfg.kappa + d * d))
                .epsilon(1e-12));
    }
    CHECK(peak_weight(p, cfg, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("weight equals the brute-force series sum") {
    const PeakSeriesParams p = make_peak_params(cfg, 0.8);
    double brute = 0.0;
    for (int j = 199; j >= 0; --j) {
      double t = 1.0;
      for (int k = 1; k <= j; ++k) t *= p.x / (static_cast<double>(k) * k);
      brute += t;
    }
    CHECK(peak_weight(p, cfg, 0) == doctest::Approx(brute).epsilon(1e-13));
  }
}

TEST_CASE("stokes and anti-stokes peaks") {
  const ModelConfig cfg = resolved_config();
  const double y = cfg.osc.Omega * cfg.mirror.v * cfg.mirror.v /
                   (2.0 * cfg.derived.omega);

  SUBCASE("N = 0 Stokes is a single Lorentzian with the stated weight") {
    const PeakSeriesParams p = make_peak_params(cfg, 0.0);
    for (int n : {1, 2, 3}) {
      double expect_w = 1.0;
      for (int k = 1; k <= n; ++k) expect_w *= y / static_cast<double>(k);
      CHECK(peak_weight(p, cfg, -n) ==
            doctest::Approx(expect_w).epsilon(1e-12));
      const double mu = cfg.laser.omega0 - n * cfg.derived.omega + 0.01;
      const double d = mu - (cfg.laser.omega0 - n * cfg.derived.omega);
      const double w = cfg.kappa + n * cfg.osc.gamma;
      CHECK(stokes_peak(p, cfg, n, mu) ==
            doctest::Approx(expect_w * w / (0.25 * w * w + d * d))
                .epsilon(1e-12));
      // anti-Stokes vanishes identically at N = 0
      CHECK(antistokes_peak(p, cfg, n, mu) == 0.0);
      CHECK(peak_weight(p, cfg, n) == 0.0);
    }
  }
  SUBCASE("weights match numerical integration of the profiles") {
    const PeakSeriesParams p = make_peak_params(cfg, 0.6);
    for (int n : {-2, -1, 0, 1, 2}) {
      CHECK(peak_weight(p, cfg, n) ==
            doctest::Approx(weight_by_quadrature(p, cfg, n)).epsilon(1e-6));
    }
  }
  SUBCASE("detailed balance ratio holds term by term") {
    for (double N : {0.1, 1.0, 3.0}) {
      const PeakSeriesParams p = make_peak_params(cfg, N);
      for (int n = 1; n <= 5; ++n) {
        const double ratio =
            peak_weight(p, cfg, n) / peak_weight(p, cfg, -n);
        CHECK(ratio == doctest::Approx(std::pow(N / (N + 1.0), n))
                           .epsilon(1e-12));
      }
    }
    // N = 1, n = 2 gives 1/4
    const PeakSeriesParams p1 = make_peak_params(cfg, 1.0);
    CHECK(peak_weight(p1, cfg, 2) / peak_weight(p1, cfg, -2) ==
          doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("peak decomposition bookkeeping") {
  const ModelConfig cfg = resolved_config();
  const PeakSeriesParams p = make_peak_params(cfg, 0.5);
  const PeakDecomposition dec = decompose_peaks(p, cfg);

  CHECK(dec.n_max >= 1);
  CHECK(dec.residual_weight >= 0.0);
  const double y = cfg.osc.Omega * cfg.mirror.v * cfg.mirror.v /
                   (2.0 * cfg.derived.omega);
  const double total = std::exp(y * (2.0 * 0.5 + 1.0));
  CHECK(dec.residual_weight <= 1e-9 * total);
  CHECK(dec.prefactor ==
        doctest::Approx(std::exp(-(0.5 + 0.5) * 2.0 * y)).epsilon(1e-12));

  double covered = 0.0;
  for (const Peak& peak : dec.peaks) {
    covered += peak.weight;
    double comp_sum = 0.0;
    for (const auto& c : peak.components) {
      CHECK(c.amplitude >= 0.0);
      CHECK(c.width >= cfg.kappa);
      comp_sum += c.amplitude;
    }
    CHECK(comp_sum == doctest::Approx(peak.weight).epsilon(1e-9));
  }
  CHECK(covered + dec.residual_weight == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("sigma_from_peaks") {
  const ModelConfig cfg = resolved_config();
  SUBCASE("v = 0 leaves only the elastic Lorentzian") {
    const ModelConfig cfg0 = make_config({1.0, 0.02}, {0.5, 0.0, 40.0, 0.005},
                                         {0.0, 0.0}, {0.015, 0.0});
    const PeakSeriesParams p = make_peak_params(cfg0, 0.5);
    const MuGrid grid = make_linear_grid(39.0, 41.0, 21);
    const SpectrumResult s = sigma_from_peaks(p, cfg0, grid);
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      const double d = grid.values[i] - 40.0;
      CHECK(s.values[i] ==
            doctest::Approx(2.0 * cfg0.kappa /
                            (0.25 * cfg0.kappa * cfg0.kappa + d * d))
                .epsilon(1e-10));
    }
  }
  SUBCASE("total integral is consistent with prefactor times weights") {
    const PeakSeriesParams p = make_peak_params(cfg, 0.4);
    const PeakDecomposition dec = decompose_peaks(p, cfg);
    // analytic area of the series: 2 * prefactor * sum of weights
    double weights = 0.0;
    for (const Peak& peak : dec.peaks) weights += peak.weight;
    const double y = cfg.osc.Omega * cfg.mirror.v * cfg.mirror.v /
                     (2.0 * cfg.derived.omega);
    CHECK(2.0 * dec.prefactor * (weights + dec.residual_weight) ==
          doctest::Approx(2.0).epsilon(1e-6));
    CHECK(weights == doctest::Approx(std::exp(y * (2.0 * 0.4 + 1.0)))
                         .epsilon(1e-9));
  }
}

TEST_CASE("thermometry estimator") {
  CHECK(thermometry_estimate(0.2, 0.3) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(thermometry_estimate(0.0, 0.3) == 0.0);
  CHECK_THROWS_AS(thermometry_estimate(0.3, 0.3), Error);
  CHECK_THROWS_AS(thermometry_estimate(0.4, 0.3), Error);
  CHECK_THROWS_AS(thermometry_estimate(-0.1, 0.3), Error);

  // exact inverse of the weight-ratio identity
  const ModelConfig cfg = resolved_config();
  const PeakSeriesParams p = make_peak_params(cfg, 0.7);
  const double wp = peak_weight(p, cfg, 1);
  const double wm = peak_weight(p, cfg, -1);
  CHECK(thermometry_estimate(wp, wm) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("thermometry from a synthetic spectrum") {
  SUBCASE("well-resolved regime recovers N") {
    const ModelConfig cfg = make_config({1.0, 0.005}, {0.5, 0.0, 40.0, 0.001},
                                        {0.5, 0.0}, {0.004, 0.0});
    const PeakSeriesParams p = make_peak_params(cfg, 0.5);
    const MuGrid grid = make_linear_grid(38.6, 41.4, 4001);
    const SpectrumResult synth = sigma_from_peaks(p, cfg, grid);
    const ThermometryReport rep = thermometry_from_spectrum(synth, cfg);
    CHECK(rep.estimate == doctest::Approx(0.5).epsilon(0.02));
    CHECK(rep.warnings.empty());
  }
  SUBCASE("N = 0 estimates ~0") {
    const ModelConfig cfg = make_config({1.0, 0.005}, {0.5, 0.0, 40.0, 0.001},
                                        {0.5, 0.0}, {0.004, 0.0});
    const PeakSeriesParams p = make_peak_params(cfg, 0.0);
    const MuGrid grid = make_linear_grid(38.6, 41.4, 4001);
    const SpectrumResult synth = sigma_from_peaks(p, cfg, grid);
    const ThermometryReport rep = thermometry_from_spectrum(synth, cfg);
    CHECK(std::abs(rep.estimate) < 1e-3);
  }
  SUBCASE("overlapping regime emits a warning but still reports") {
    // kappa ~ omega: hopelessly unresolved
    const ModelConfig cfg = make_config({1.0, 0.05}, {0.5, 0.0, 40.0, 0.2},
                                        {0.5, 0.0}, {0.6, 0.0});
    const PeakSeriesParams p = make_peak_params(cfg, 0.5);
    const MuGrid grid = make_linear_grid(28.0, 52.0, 3001);
    const SpectrumResult synth = sigma_from_peaks(p, cfg, grid);
    const ThermometryReport rep = thermometry_from_spectrum(synth, cfg);
    CHECK_FALSE(rep.warnings.empty());
    CHECK(std::isfinite(rep.estimate));
  }
}
