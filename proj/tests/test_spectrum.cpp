#include <doctest.h>

#include <cmath>
#include <complex>

#include "mirrorspec/spectrum.hpp"

using namespace mirrorspec;

namespace {

ModelConfig test_config(double v = 0.3, double amp2 = 0.7) {
  return make_config({1.0, 0.5}, {amp2, 0.0, 20.0, 0.1}, {v, 0.0}, {0.4, 0.0});
}

}  // namespace

TEST_CASE("input spectrum closed form") {
  const ModelConfig cfg = test_config();
  const MuGrid grid = make_linear_grid(10.0, 30.0, 401);
  const SpectrumResult r = input_spectrum(cfg, grid);

  // on-resonance value 1 + 8 |lambda|^2 / kappa (grid contains omega0 = 20)
  const std::size_t mid = 200;
  CHECK(grid.values[mid] == doctest::Approx(20.0));
  CHECK(r.values[mid] ==
        doctest::Approx(1.0 + 8.0 * cfg.laser.amp2 / cfg.kappa).epsilon(1e-12));
  for (double x : r.values) CHECK(x >= 1.0);

  // |lambda|^2 = 0 gives the flat unit spectrum
  const SpectrumResult r0 = input_spectrum(test_config(0.3, 0.0), grid);
  for (double x : r0.values) CHECK(x == 1.0);

  // total power: (1/2pi) Int (P_in - 1) = 2 |lambda|^2
  const MuGrid wide = make_linear_grid(20.0 - 60.0, 20.0 + 60.0, 4001);
  const SpectrumResult rw = input_spectrum(cfg, wide);
  CHECK(total_power(rw) ==
        doctest::Approx(2.0 * cfg.laser.amp2).epsilon(1e-3));
}

TEST_CASE("exact spectrum limits") {
  SUBCASE("v = 0 coincides with the input spectrum") {
    const ModelConfig cfg = test_config(0.0);
    const MuGrid grid = make_linear_grid(15.0, 25.0, 101);
    const SpectrumResult ex =
        exact_spectrum(cfg, PhononSpectrum::flat(0.4), grid, 1e-9, 1);
    const SpectrumResult in = input_spectrum(cfg, grid);
    REQUIRE(ex.all_converged());
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      CHECK(std::abs(ex.values[i] - in.values[i]) < 1e-6);
    }
  }
  SUBCASE("|lambda|^2 = 0 gives the unit spectrum") {
    const ModelConfig cfg = test_config(0.3, 0.0);
    const MuGrid grid = make_linear_grid(18.0, 22.0, 11);
    const SpectrumResult ex =
        exact_spectrum(cfg, PhononSpectrum::flat(0.4), grid, 1e-9);
    for (double x : ex.values) CHECK(x == 1.0);
  }
  SUBCASE("P >= 1 for a driven configuration") {
    const ModelConfig cfg = test_config(0.4, 0.8);
    const MuGrid grid = make_linear_grid(14.0, 26.0, 61);
    const SpectrumResult ex =
        exact_spectrum(cfg, PhononSpectrum::flat(0.5), grid, 1e-8);
    REQUIRE(ex.all_converged());
    for (double x : ex.values) CHECK(x >= 1.0 - 1e-9);
  }
}

TEST_CASE("susceptibility") {
  SUBCASE("v = 0 reduces to the input Lorentzian shape") {
    const ModelConfig cfg = test_config(0.0);
    const MuGrid grid = make_linear_grid(16.0, 24.0, 41);
    const SpectrumResult s =
        susceptibility(cfg, PhononSpectrum::flat(0.4), grid, 1e-9, 1);
    REQUIRE(s.all_converged());
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      const double d = grid.values[i] - cfg.laser.omega0;
      const double expect =
          2.0 * cfg.kappa / (0.25 * cfg.kappa * cfg.kappa + d * d);
      CHECK(s.values[i] == doctest::Approx(expect).epsilon(1e-6));
      CHECK(s.values[i] >= -1e-9);
    }
  }
  SUBCASE("weak-probe consistency: P - 1 ~ |lambda|^2 Sigma") {
    const double amp2 = 1e-4;
    const ModelConfig cfg = test_config(0.3, amp2);
    const MuGrid grid = make_linear_grid(19.0, 21.0, 9);
    const PhononSpectrum bath = PhononSpectrum::flat(0.5);
    const SpectrumResult p = exact_spectrum(cfg, bath, grid, 1e-9, 1);
    const SpectrumResult s = susceptibility(cfg, bath, grid, 1e-9, 1);
    REQUIRE(p.all_converged());
    REQUIRE(s.all_converged());
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      CHECK(std::abs(p.values[i] - 1.0 - amp2 * s.values[i]) < 1e-6);
    }
  }
  SUBCASE("enlarging kappa lowers the on-resonance susceptibility") {
    const PhononSpectrum bath = PhononSpectrum::flat(0.3);
    MuGrid point;
    point.values = {20.0};
    double prev = 1e300;
    for (double vk : {0.3, 0.5, 0.8, 1.2}) {
      const ModelConfig cfg = make_config({1.0, 0.5}, {0.7, 0.0, 20.0, 0.1},
                                          {0.3, 0.0}, {vk, 0.0});
      const SpectrumResult s = susceptibility(cfg, bath, point, 1e-8, 1);
      CHECK(s.values[0] < prev);
      prev = s.values[0];
    }
  }
}

TEST_CASE("grid dispatch and determinism") {
  const ModelConfig cfg = test_config(0.3, 0.6);
  const PhononSpectrum bath = PhononSpectrum::flat(0.4);

  SUBCASE("single-point grid behaves as the scalar op") {
    MuGrid one;
    one.values = {20.7};
    const MuGrid three = make_linear_grid(20.2, 21.2, 3);  // shares 20.7
    const SpectrumResult a =
        spectrum_grid_eval(cfg, bath, one, SpectrumKind::kExact, 1e-8, 1);
    const SpectrumResult b =
        spectrum_grid_eval(cfg, bath, three, SpectrumKind::kExact, 1e-8, 1);
    CHECK(a.values[0] == b.values[1]);  // bitwise: pointwise independence
  }
  SUBCASE("serial and parallel agree bitwise") {
    const MuGrid grid = make_linear_grid(18.0, 22.0, 41);
    const SpectrumResult serial =
        exact_spectrum(cfg, bath, grid, 1e-8, 1);
    const SpectrumResult parallel =
        exact_spectrum(cfg, bath, grid, 1e-8, 0);
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      CHECK(serial.values[i] == parallel.values[i]);
    }
  }
  SUBCASE("repeated serial runs are bitwise identical") {
    const MuGrid grid = make_linear_grid(19.0, 21.0, 11);
    const SpectrumResult r1 = susceptibility(cfg, bath, grid, 1e-8, 1);
    const SpectrumResult r2 = susceptibility(cfg, bath, grid, 1e-8, 1);
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      CHECK(r1.values[i] == r2.values[i]);
    }
  }
  SUBCASE("kind dispatch") {
    const MuGrid grid = make_linear_grid(19.0, 21.0, 5);
    CHECK(spectrum_grid_eval(cfg, bath, grid, SpectrumKind::kInput, 1e-8).kind ==
          SpectrumKind::kInput);
    CHECK(spectrum_grid_eval(cfg, bath, grid, SpectrumKind::kSusceptibility,
                             1e-8, 1)
              .kind == SpectrumKind::kSusceptibility);
    CHECK_THROWS_AS(spectrum_grid_eval(cfg, bath, grid,
                                       SpectrumKind::kPeaksApprox, 1e-8),
                    Error);
  }
}

TEST_CASE("total power") {
  SUBCASE("identically-one spectrum integrates to zero") {
    const ModelConfig cfg = test_config(0.3, 0.0);
    const MuGrid grid = make_linear_grid(10.0, 30.0, 201);
    SpectrumResult r = input_spectrum(cfg, grid);  // amp2 = 0 -> all ones
    CHECK(total_power(r) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("narrow grid is flagged") {
    const ModelConfig cfg = test_config();
    const MuGrid grid = make_linear_grid(19.9, 20.1, 64);
    const SpectrumResult r = input_spectrum(cfg, grid);
    CHECK(total_power_report(r).grid_too_narrow);
  }
  SUBCASE("exact spectrum conserves total power") {
    const ModelConfig cfg = test_config(0.3, 0.5);
    const MuGrid grid = make_linear_grid(20.0 - 25.0, 20.0 + 25.0, 1201);
    const SpectrumResult r =
        exact_spectrum(cfg, PhononSpectrum::flat(0.5), grid, 1e-8);
    REQUIRE(r.all_converged());
    CHECK(total_power(r) == doctest::Approx(2.0 * 0.5).epsilon(0.01));
  }
}

TEST_CASE("exact spectrum with a non-flat bath stays sane") {
  const ModelConfig cfg = test_config(0.35, 0.6);
  const PhononSpectrum bath = PhononSpectrum::lorentzian(0.9, 0.3, 0.8);
  const MuGrid grid = make_linear_grid(17.0, 23.0, 31);
  const SpectrumResult r = exact_spectrum(cfg, bath, grid, 1e-7);
  REQUIRE(r.all_converged());
  for (double x : r.values) CHECK(x >= 1.0 - 1e-7);
}
