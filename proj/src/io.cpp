#include "mirrorspec/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mirrorspec {

namespace {

using nlohmann::json;

[[noreturn]] void toml_fail(const std::string& origin, std::size_t line,
                            const std::string& what) {
  throw Error(origin + ":" + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Removes a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

json parse_scalar(const std::string& tok, const std::string& origin,
                  std::size_t line) {
  if (tok.empty()) toml_fail(origin, line, "empty value");
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      toml_fail(origin, line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
      if (tok[i] == '\\' && i + 2 < tok.size()) {
        ++i;
        switch (tok[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: toml_fail(origin, line, "unsupported escape sequence");
        }
      } else {
        out += tok[i];
      }
    }
    return out;
  }
  // number: integer when it looks like one, double otherwise
  try {
    std::size_t used = 0;
    if (tok.find_first_of(".eEnN") == std::string::npos) {
      const long long v = std::stoll(tok, &used);
      if (used == tok.size()) return v;
    }
    const double v = std::stod(tok, &used);
    if (used != tok.size()) toml_fail(origin, line, "malformed number: " + tok);
    return v;
  } catch (const std::exception&) {
    toml_fail(origin, line, "cannot parse value: " + tok);
  }
}

json parse_value(const std::string& raw, const std::string& origin,
                 std::size_t line) {
  const std::string tok = strip(raw);
  if (!tok.empty() && tok.front() == '[') {
    if (tok.back() != ']') toml_fail(origin, line, "unterminated array");
    json arr = json::array();
    std::string body = tok.substr(1, tok.size() - 2);
    std::string cur;
    bool in_str = false;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        if (!strip(cur).empty()) arr.push_back(parse_scalar(strip(cur), origin, line));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!strip(cur).empty()) arr.push_back(parse_scalar(strip(cur), origin, line));
    return arr;
  }
  return parse_scalar(tok, origin, line);
}

json* descend(json& root, const std::string& dotted, const std::string& origin,
              std::size_t line) {
  json* node = &root;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    part = strip(part);
    if (part.empty()) toml_fail(origin, line, "empty table-name component");
    node = &((*node)[part]);
    if (!node->is_object() && !node->is_null()) {
      toml_fail(origin, line, "key reused as table: " + part);
    }
    if (node->is_null()) *node = json::object();
  }
  return node;
}

}  // namespace

json parse_toml(std::istream& in, const std::string& origin) {
  json root = json::object();
  json* table = &root;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = strip(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') toml_fail(origin, lineno, "unterminated table header");
      table = descend(root, s.substr(1, s.size() - 2), origin, lineno);
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      toml_fail(origin, lineno, "expected key = value");
    }
    const std::string key = strip(s.substr(0, eq));
    if (key.empty()) toml_fail(origin, lineno, "empty key");
    (*table)[key] = parse_value(s.substr(eq + 1), origin, lineno);
  }
  return root;
}

json parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  return parse_toml(in, path);
}

namespace {

double get_num(const json& j, const std::string& table, const std::string& key,
               bool required, double fallback) {
  if (!j.contains(table) || !j[table].contains(key)) {
    if (required) throw Error("config: missing " + table + "." + key);
    return fallback;
  }
  const json& v = j[table][key];
  if (!v.is_number()) throw Error("config: " + table + "." + key + " must be numeric");
  return v.get<double>();
}

PhononSpectrum bath_from_json(const json& doc) {
  if (!doc.contains("bath") || !doc["bath"].contains("kind")) {
    throw Error("config: missing bath.kind");
  }
  const json& b = doc["bath"];
  const std::string kind = b["kind"].get<std::string>();
  if (kind == "flat") {
    return PhononSpectrum::flat(get_num(doc, "bath", "N0", true, 0.0));
  }
  if (kind == "lorentzian") {
    return PhononSpectrum::lorentzian(get_num(doc, "bath", "center", true, 0),
                                      get_num(doc, "bath", "halfwidth", true, 0),
                                      get_num(doc, "bath", "peak", true, 0));
  }
  if (kind == "gaussian") {
    return PhononSpectrum::gaussian(get_num(doc, "bath", "center", true, 0),
                                    get_num(doc, "bath", "sigma", true, 0),
                                    get_num(doc, "bath", "peak", true, 0));
  }
  if (kind == "bose_einstein") {
    return PhononSpectrum::bose_einstein(
        get_num(doc, "bath", "temperature", true, 0),
        get_num(doc, "bath", "cutoff", true, 0));
  }
  if (kind == "tabulated") {
    if (b.contains("nu") && b.contains("values")) {
      return PhononSpectrum::tabulated(b["nu"].get<std::vector<double>>(),
                                       b["values"].get<std::vector<double>>());
    }
    if (b.contains("csv")) {
      return load_tabulated_csv(b["csv"].get<std::string>());
    }
    throw Error("config: tabulated bath needs csv or inline nu/values");
  }
  throw Error("config: unknown bath.kind '" + kind + "'");
}

json bath_to_json(const PhononSpectrum& bath) {
  json b;
  b["kind"] = bath.kind_name();
  if (const auto* s = std::get_if<FlatSpectrum>(&bath.variant())) {
    b["N0"] = s->N0;
  } else if (const auto* s = std::get_if<LorentzianSpectrum>(&bath.variant())) {
    b["center"] = s->center;
    b["halfwidth"] = s->halfwidth;
    b["peak"] = s->peak;
  } else if (const auto* s = std::get_if<GaussianSpectrum>(&bath.variant())) {
    b["center"] = s->center;
    b["sigma"] = s->sigma;
    b["peak"] = s->peak;
  } else if (const auto* s = std::get_if<BoseEinsteinSpectrum>(&bath.variant())) {
    b["temperature"] = s->temperature;
    b["cutoff"] = s->cutoff;
  } else if (const auto* s = std::get_if<TabulatedSpectrum>(&bath.variant())) {
    b["nu"] = s->nu;        // embedded inline so re-runs do not need the file
    b["values"] = s->values;
  }
  return b;
}

}  // namespace

RunConfig run_config_from_json(const json& raw) {
  // An output file embeds the resolved config under "config".
  const json& doc = (raw.contains("config") && raw.contains("schema_version"))
                        ? raw["config"]
                        : raw;

  OscillatorParams osc;
  osc.Omega = get_num(doc, "oscillator", "Omega", true, 0);
  osc.gamma = get_num(doc, "oscillator", "gamma", true, 0);

  LaserParams laser;
  laser.amp2 = get_num(doc, "laser", "amp2", true, 0);
  laser.phase = get_num(doc, "laser", "phase", false, 0.0);
  laser.omega0 = get_num(doc, "laser", "omega0", true, 0);
  laser.Lp = get_num(doc, "laser", "Lp", false, 0.0);

  MirrorCoupling mirror;
  mirror.v = get_num(doc, "mirror", "v", true, 0);
  mirror.phi = get_num(doc, "mirror", "phi", false, 0.0);

  DetectorParams det;
  det.varkappa = get_num(doc, "detector", "varkappa", true, 0);
  det.alpha = get_num(doc, "detector", "alpha", false, 0.0);

  RunConfig rc;
  rc.model = make_config(osc, laser, mirror, det);
  validate_config(rc.model);
  rc.bath = bath_from_json(doc);

  rc.grid.mu_min = get_num(doc, "grid", "mu_min", true, 0);
  rc.grid.mu_max = get_num(doc, "grid", "mu_max", true, 0);
  rc.grid.points = static_cast<int>(get_num(doc, "grid", "points", true, 0));
  if (rc.grid.points < 2) throw Error("config: grid.points must be >= 2");
  if (!(rc.grid.mu_min < rc.grid.mu_max)) {
    throw Error("config: grid.mu_min must be < grid.mu_max");
  }

  rc.tol = get_num(doc, "run", "tol", false, 1e-8);
  if (!(rc.tol > 0.0)) throw Error("config: run.tol must be > 0");
  if (doc.contains("run")) {
    const json& r = doc["run"];
    if (r.contains("serial")) rc.serial = r["serial"].get<bool>();
    if (r.contains("out_dir")) rc.out_dir = r["out_dir"].get<std::string>();
    if (r.contains("format")) rc.format = r["format"].get<std::string>();
    if (r.contains("peak_n_max")) rc.peak_n_max = r["peak_n_max"].get<int>();
    if (r.contains("window_halfwidth"))
      rc.window_halfwidth = r["window_halfwidth"].get<double>();
    if (r.contains("oracle_dim")) rc.oracle_dim = r["oracle_dim"].get<int>();
  }
  if (rc.format != "csv" && rc.format != "json" && rc.format != "both") {
    throw Error("config: run.format must be csv, json or both");
  }

  // Normalized snapshot with every field explicit.
  json snap;
  snap["oscillator"] = {{"Omega", osc.Omega}, {"gamma", osc.gamma}};
  snap["laser"] = {{"amp2", laser.amp2},
                   {"phase", laser.phase},
                   {"omega0", laser.omega0},
                   {"Lp", laser.Lp}};
  snap["mirror"] = {{"v", mirror.v}, {"phi", mirror.phi}};
  snap["detector"] = {{"varkappa", det.varkappa}, {"alpha", det.alpha}};
  snap["bath"] = bath_to_json(rc.bath);
  snap["grid"] = {{"mu_min", rc.grid.mu_min},
                  {"mu_max", rc.grid.mu_max},
                  {"points", rc.grid.points}};
  snap["run"] = {{"tol", rc.tol},
                 {"serial", rc.serial},
                 {"out_dir", rc.out_dir},
                 {"format", rc.format},
                 {"peak_n_max", rc.peak_n_max},
                 {"window_halfwidth", rc.window_halfwidth},
                 {"oracle_dim", rc.oracle_dim}};
  snap["model"] = {{"kappa", rc.model.kappa},
                   {"omega", rc.model.derived.omega},
                   {"laser", {{"omega0", laser.omega0}}}};
  rc.resolved = std::move(snap);
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  const bool is_json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
  if (is_json) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw Error("malformed JSON in " + path + ": " + e.what());
    }
    return run_config_from_json(doc);
  }
  return run_config_from_json(parse_toml_file(path));
}

RunConfig demo_config() {
  json doc = {
      {"oscillator", {{"Omega", 1.0}, {"gamma", 0.02}}},
      {"laser", {{"amp2", 0.5}, {"phase", 0.0}, {"omega0", 40.0}, {"Lp", 0.005}}},
      {"mirror", {{"v", 0.3}, {"phi", 0.0}}},
      {"detector", {{"varkappa", 0.015}, {"alpha", 0.0}}},
      {"bath", {{"kind", "flat"}, {"N0", 0.5}}},
      {"grid", {{"mu_min", 37.5}, {"mu_max", 42.5}, {"points", 1001}}},
      {"run", {{"tol", 1e-8}}},
  };
  return run_config_from_json(doc);
}

RunConfig demo_oracle_config() {
  json doc = {
      {"oscillator", {{"Omega", 1.0}, {"gamma", 0.3}}},
      {"laser", {{"amp2", 0.5}, {"phase", 0.0}, {"omega0", 40.0}, {"Lp", 0.0}}},
      {"mirror", {{"v", 0.3}, {"phi", 0.0}}},
      {"detector", {{"varkappa", 0.02}, {"alpha", 0.0}}},
      {"bath", {{"kind", "flat"}, {"N0", 0.5}}},
      {"grid", {{"mu_min", 37.5}, {"mu_max", 42.5}, {"points", 101}}},
      {"run", {{"tol", 1e-8}}},
  };
  return run_config_from_json(doc);
}

void write_spectrum_csv(const SpectrumResult& result, std::ostream& out) {
  out << "mu,value,err_estimate\n";
  char buf[128];
  for (std::size_t i = 0; i < result.grid.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n",
                  result.grid.values[i], result.values[i],
                  result.err_estimate[i]);
    out << buf;
  }
}

void write_spectrum_csv_file(const SpectrumResult& result,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_spectrum_csv(result, out);
}

json spectrum_to_json(const SpectrumResult& result) {
  json j;
  j["schema_version"] = 1;
  j["kind"] = to_string(result.kind);
  j["config"] = result.config_snapshot;
  j["mu"] = result.grid.values;
  j["value"] = result.values;
  j["err_estimate"] = result.err_estimate;
  j["converged"] = result.converged;
  return j;
}

void write_spectrum_json_file(const SpectrumResult& result,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << spectrum_to_json(result).dump(2) << "\n";
}

SpectrumResult read_spectrum_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open spectrum file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("malformed spectrum JSON in " + path + ": " + e.what());
  }
  SpectrumResult r;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "input") r.kind = SpectrumKind::kInput;
    else if (kind == "exact") r.kind = SpectrumKind::kExact;
    else if (kind == "susceptibility") r.kind = SpectrumKind::kSusceptibility;
    else if (kind == "peaks-approx") r.kind = SpectrumKind::kPeaksApprox;
    else throw Error("unknown spectrum kind: " + kind);
    r.grid.values = j.at("mu").get<std::vector<double>>();
    r.values = j.at("value").get<std::vector<double>>();
    if (j.contains("err_estimate"))
      r.err_estimate = j["err_estimate"].get<std::vector<double>>();
    else
      r.err_estimate.assign(r.values.size(), 0.0);
    if (j.contains("converged"))
      r.converged = j["converged"].get<std::vector<bool>>();
    else
      r.converged.assign(r.values.size(), true);
    if (j.contains("config")) r.config_snapshot = j["config"];
  } catch (const json::exception& e) {
    throw Error("malformed spectrum JSON in " + path + ": " + e.what());
  }
  if (r.grid.values.size() != r.values.size()) {
    throw Error("spectrum file " + path + ": mu/value length mismatch");
  }
  return r;
}

SpectrumResult read_spectrum_csv(const std::string& path, SpectrumKind kind) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open spectrum file: " + path);
  SpectrumResult r;
  r.kind = kind;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double mu = 0.0, val = 0.0, err = 0.0;
    if (!(ss >> mu >> val)) {
      if (lineno == 1) continue;  // header
      throw Error("malformed spectrum row at " + path + ":" +
                  std::to_string(lineno));
    }
    ss >> err;
    r.grid.values.push_back(mu);
    r.values.push_back(val);
    r.err_estimate.push_back(err);
    r.converged.push_back(true);
  }
  if (r.values.size() < 2) throw Error("spectrum file too short: " + path);
  return r;
}

json peaks_to_json(const PeakDecomposition& dec,
                   const json& config_snapshot) {
  json j;
  j["schema_version"] = 1;
  j["config"] = config_snapshot;
  j["prefactor"] = dec.prefactor;
  j["N_at_omega"] = dec.N_at_omega;
  j["n_max"] = dec.n_max;
  j["residual_weight"] = dec.residual_weight;
  json peaks = json::array();
  for (const Peak& p : dec.peaks) {
    json comps = json::array();
    for (const LorentzianComponent& c : p.components) {
      comps.push_back({{"width", c.width}, {"amplitude", c.amplitude}});
    }
    peaks.push_back({{"n", p.n},
                     {"center", p.center},
                     {"weight", p.weight},
                     {"components", comps}});
  }
  j["peaks"] = peaks;
  return j;
}

}  // namespace mirrorspec
