#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mirrorspec/model.hpp"
#include "mirrorspec/peaks.hpp"
#include "mirrorspec/phonon_bath.hpp"
#include "mirrorspec/spectrum.hpp"

namespace mirrorspec {

// Fully resolved run description: model, bath, grid and command options.
struct GridSpec {
  double mu_min = 0.0;
  double mu_max = 1.0;
  int points = 2;
};

struct RunConfig {
  ModelConfig model;
  PhononSpectrum bath = PhononSpectrum::flat(0.0);
  GridSpec grid;
  double tol = 1e-8;
  bool serial = false;
  std::string out_dir = ".";
  std::string format = "both";  // csv | json | both
  int peak_n_max = 0;           // 0 = automatic weight cutoff
  double window_halfwidth = 0.0;  // 0 = automatic
  int oracle_dim = 0;             // 0 = adaptive truncation
  nlohmann::json resolved = nlohmann::json::object();  // normalized snapshot
};

// Minimal TOML reader (tables, key = value with strings, numbers, booleans
// and flat arrays, comments). Covers the batch-config schema; anything more
// exotic is rejected with a line-numbered error.
nlohmann::json parse_toml(std::istream& in, const std::string& origin);
nlohmann::json parse_toml_file(const std::string& path);

// Accepts a TOML or JSON config document, or a JSON output file produced by
// this tool (the embedded "config" object is re-ingested for bitwise
// reproducible re-runs).
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const nlohmann::json& doc);

// Physically sensible resolved-sideband demo parameters.
RunConfig demo_config();
// Oracle-compatible demo: flat bath, no phase diffusion, moderate damping.
RunConfig demo_oracle_config();

void write_spectrum_csv(const SpectrumResult& result, std::ostream& out);
void write_spectrum_csv_file(const SpectrumResult& result,
                             const std::string& path);
nlohmann::json spectrum_to_json(const SpectrumResult& result);
void write_spectrum_json_file(const SpectrumResult& result,
                              const std::string& path);

// Reads a spectrum back. JSON files are self-describing; CSV needs the kind.
SpectrumResult read_spectrum_json(const std::string& path);
SpectrumResult read_spectrum_csv(const std::string& path, SpectrumKind kind);

nlohmann::json peaks_to_json(const PeakDecomposition& dec,
                             const nlohmann::json& config_snapshot);

}  // namespace mirrorspec
