// scenario.hpp -- the experiment runner behind the CLI: config parsing (a
// small TOML subset or JSON, including re-fed run manifests), MHz
// normalization, named scenarios writing CSV/JSON artifacts, and figure-data
// emission. Every run writes a manifest echoing the resolved config; the
// manifest is written last and marks completion.
#pragma once

#include <zenofuse/dynamics.hpp>
#include <zenofuse/fusion.hpp>
#include <zenofuse/zeno.hpp>

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace zenofuse {

using jsn = nlohmann::json;

inline constexpr const char* kArtifactName = "zenofuse";
inline constexpr const char* kArtifactVersion = "0.1.0";

// Config and usage errors; carry a source:line or field path in the message.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// exit codes of run_scenario / the CLI
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

// ------------------------------ TOML subset ---------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline jsn parse_toml_scalar(const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError(where + ": empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError(where + ": unterminated string " + v);
    std::string out;
    for (size_t i = 1; i + 1 < v.size(); ++i) {
      char c = v[i];
      if (c == '\\') {
        if (i + 2 >= v.size()) throw ConfigError(where + ": dangling escape");
        char n = v[++i];
        switch (n) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: throw ConfigError(where + ": unsupported escape \\" + std::string(1, n));
        }
      } else {
        out += c;
      }
    }
    return jsn(out);
  }
  if (v == "true") return jsn(true);
  if (v == "false") return jsn(false);
  // integer first so seeds and counts stay integral
  {
    size_t pos = 0;
    try {
      if (v.find_first_of(".eE") == std::string::npos) {
        long long i = std::stoll(v, &pos);
        if (pos == v.size()) return jsn(i);
      }
    } catch (...) {
    }
  }
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos == v.size()) return jsn(d);
  } catch (...) {
  }
  throw ConfigError(where + ": cannot parse value '" + v + "'");
}

// strips a trailing # comment, respecting quoted strings
inline std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (c == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

inline bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

}  // namespace detail

// Parses the supported TOML subset into a JSON object: `key = value` lines,
// one level of [section] tables, strings, integers, floats, booleans, and
// flat arrays. Multi-line values and nested tables are not supported.
inline jsn toml_subset_to_json(const std::string& text, const std::string& source = "config") {
  jsn root = jsn::object();
  jsn* table = &root;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    std::string s = detail::trim(detail::strip_comment(line));
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + ": malformed section header " + s);
      const std::string name = detail::trim(s.substr(1, s.size() - 2));
      if (!detail::valid_key(name))
        throw ConfigError(where + ": bad section name '" + name + "' (nested tables unsupported)");
      table = &root[name];
      if (!table->is_object()) *table = jsn::object();
      continue;
    }

    const size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    if (!detail::valid_key(key)) throw ConfigError(where + ": bad key '" + key + "'");
    if (table->contains(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    std::string val = detail::trim(s.substr(eq + 1));

    if (!val.empty() && val.front() == '[') {
      if (val.back() != ']') throw ConfigError(where + ": array must close on the same line");
      jsn arr = jsn::array();
      std::string body = val.substr(1, val.size() - 2);
      std::string item;
      bool in_str = false;
      for (char c : body) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
          arr.push_back(detail::parse_toml_scalar(item, where));
          item.clear();
        } else {
          item += c;
        }
      }
      if (!detail::trim(item).empty()) arr.push_back(detail::parse_toml_scalar(item, where));
      (*table)[key] = std::move(arr);
    } else {
      (*table)[key] = detail::parse_toml_scalar(val, where);
    }
  }
  return root;
}

// Accepts JSON (first significant character '{') or the TOML subset.
inline jsn config_text_to_json(const std::string& text, const std::string& source = "config") {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') {
      try {
        return jsn::parse(text);
      } catch (const jsn::exception& e) {
        throw ConfigError(source + ": " + e.what());
      }
    }
    break;
  }
  return toml_subset_to_json(text, source);
}

inline jsn load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_text_to_json(buf.str(), path);
}

// ------------------------------ scenario config ------------------------------

struct SweepSpec {
  std::string parameter = "kappa";  // kappa | gamma | kappa_f
  double from = 0.0;
  double to = 0.1;
  int points = 11;
};

struct NetworkSpec {
  std::vector<int> pool = {5, 5};
  int target = 8;
  int trials = 10000;
};

struct ScenarioConfig {
  std::string scenario;  // zeno-spectrum gate-evolve fuse lindblad sweep network emit-figure
  ModelKind model = ModelKind::single_cavity;
  ModelParams params;
  int n = 5, m = 5;
  double dt = 0.02;
  int stride = 200;           // record every stride-th integrator step
  double t_final = -1;        // < 0 selects gate_time(params)
  std::uint64_t seed = 1;
  std::string out = "zf";     // output path prefix ("dir/" or "dir/name")
  bool dump_state = false;
  std::string figure;         // emit-figure target, e.g. fig-PX
  SweepSpec sweep;
  NetworkSpec network;
};

namespace detail {

inline double as_number(const jsn& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError("field " + field + " must be a number");
  return v.get<double>();
}

inline int as_int(const jsn& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError("field " + field + " must be an integer");
  return v.get<int>();
}

inline std::string as_string(const jsn& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError("field " + field + " must be a string");
  return v.get<std::string>();
}

inline bool as_bool(const jsn& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError("field " + field + " must be a boolean");
  return v.get<bool>();
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "single_cavity" || s == "single-cavity") return ModelKind::single_cavity;
  if (s == "cavity_fiber" || s == "cavity-fiber") return ModelKind::cavity_fiber;
  throw ConfigError("unknown model '" + s + "' (single_cavity | cavity_fiber)");
}

inline const char* model_name(ModelKind k) {
  return k == ModelKind::single_cavity ? "single_cavity" : "cavity_fiber";
}

}  // namespace detail

// Builds a ScenarioConfig from a parsed config object. Unknown keys are
// errors; manifest bookkeeping keys (artifact, status, outputs, result,
// error) are ignored so a run manifest can be re-fed as a config. A
// [units] table with unit = "MHz" and lambda in MHz rescales every rate to
// lambda units.
inline ScenarioConfig config_from_json(const jsn& root) {
  if (!root.is_object()) throw ConfigError("config root must be a table/object");
  ScenarioConfig c;

  static const std::vector<std::string> reserved = {"artifact", "status", "outputs", "result",
                                                    "error"};
  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string& k = it.key();
    const jsn& v = it.value();
    if (std::find(reserved.begin(), reserved.end(), k) != reserved.end()) continue;
    if (k == "scenario") c.scenario = detail::as_string(v, k);
    else if (k == "model") c.model = detail::parse_model(detail::as_string(v, k));
    else if (k == "n") c.n = detail::as_int(v, k);
    else if (k == "m") c.m = detail::as_int(v, k);
    else if (k == "dt") c.dt = detail::as_number(v, k);
    else if (k == "stride") c.stride = detail::as_int(v, k);
    else if (k == "t_final") c.t_final = detail::as_number(v, k);
    else if (k == "seed") {
      if (!v.is_number_integer()) throw ConfigError("field seed must be an integer");
      c.seed = v.get<std::uint64_t>();
    } else if (k == "out") c.out = detail::as_string(v, k);
    else if (k == "dump_state") c.dump_state = detail::as_bool(v, k);
    else if (k == "figure") c.figure = detail::as_string(v, k);
    else if (k == "params" || k == "units" || k == "sweep" || k == "network") {
      if (!v.is_object()) throw ConfigError("field " + k + " must be a table/object");
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }

  if (root.contains("params")) {
    for (auto it = root["params"].begin(); it != root["params"].end(); ++it) {
      const std::string f = "params." + it.key();
      const jsn& v = it.value();
      if (it.key() == "lambda") c.params.lambda = detail::as_number(v, f);
      else if (it.key() == "omega") c.params.omega = detail::as_number(v, f);
      else if (it.key() == "delta") c.params.delta = detail::as_number(v, f);
      else if (it.key() == "v" || it.key() == "fiber_v") {
        if (c.model != ModelKind::cavity_fiber)
          throw ConfigError(f + " only applies to the cavity_fiber model");
        c.params.fiber_v = detail::as_number(v, f);
      } else if (it.key() == "kappa") c.params.kappa = detail::as_number(v, f);
      else if (it.key() == "kappa_f") {
        if (c.model != ModelKind::cavity_fiber)
          throw ConfigError(f + " only applies to the cavity_fiber model");
        c.params.kappa_f = detail::as_number(v, f);
      } else if (it.key() == "gamma") c.params.gamma = detail::as_number(v, f);
      else if (it.key() == "ratio_limit") c.params.ratio_limit = detail::as_number(v, f);
      else if (it.key() == "enforce_ratio") c.params.enforce_ratio = detail::as_bool(v, f);
      else throw ConfigError("unknown config key '" + f + "'");
    }
  }

  if (root.contains("units")) {
    std::string unit = "lambda";
    double lambda_unit = 0;
    for (auto it = root["units"].begin(); it != root["units"].end(); ++it) {
      const std::string f = "units." + it.key();
      if (it.key() == "unit") unit = detail::as_string(it.value(), f);
      else if (it.key() == "lambda") lambda_unit = detail::as_number(it.value(), f);
      else throw ConfigError("unknown config key '" + f + "'");
    }
    if (unit == "MHz") {
      if (lambda_unit <= 0) throw ConfigError("units.lambda (in MHz) must be > 0 for unit=MHz");
      // every rate was given in MHz; renormalize so lambda = 1
      c.params.omega /= lambda_unit;
      c.params.delta /= lambda_unit;
      c.params.fiber_v = c.model == ModelKind::cavity_fiber ? c.params.fiber_v / lambda_unit
                                                            : c.params.fiber_v;
      c.params.kappa /= lambda_unit;
      c.params.kappa_f /= lambda_unit;
      c.params.gamma /= lambda_unit;
      c.params.lambda = 1.0;
    } else if (unit != "lambda") {
      throw ConfigError("units.unit must be \"lambda\" or \"MHz\"");
    }
  }

  if (root.contains("sweep")) {
    for (auto it = root["sweep"].begin(); it != root["sweep"].end(); ++it) {
      const std::string f = "sweep." + it.key();
      if (it.key() == "parameter") c.sweep.parameter = detail::as_string(it.value(), f);
      else if (it.key() == "from") c.sweep.from = detail::as_number(it.value(), f);
      else if (it.key() == "to") c.sweep.to = detail::as_number(it.value(), f);
      else if (it.key() == "points") c.sweep.points = detail::as_int(it.value(), f);
      else throw ConfigError("unknown config key '" + f + "'");
    }
  }

  if (root.contains("network")) {
    for (auto it = root["network"].begin(); it != root["network"].end(); ++it) {
      const std::string f = "network." + it.key();
      if (it.key() == "pool") {
        if (!it.value().is_array()) throw ConfigError(f + " must be an array of sizes");
        c.network.pool.clear();
        for (const auto& e : it.value()) c.network.pool.push_back(detail::as_int(e, f));
      } else if (it.key() == "target") c.network.target = detail::as_int(it.value(), f);
      else if (it.key() == "trials") c.network.trials = detail::as_int(it.value(), f);
      else throw ConfigError("unknown config key '" + f + "'");
    }
  }

  return c;
}

// Resolved-config echo used for the run manifest; feeding it back through
// config_from_json reproduces the run.
inline jsn config_to_json(const ScenarioConfig& c) {
  jsn j;
  j["scenario"] = c.scenario;
  j["model"] = detail::model_name(c.model);
  j["n"] = c.n;
  j["m"] = c.m;
  j["dt"] = c.dt;
  j["stride"] = c.stride;
  j["t_final"] = c.t_final;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["dump_state"] = c.dump_state;
  if (!c.figure.empty()) j["figure"] = c.figure;
  jsn p;
  p["lambda"] = c.params.lambda;
  p["omega"] = c.params.omega;
  p["delta"] = c.params.delta;
  p["kappa"] = c.params.kappa;
  p["gamma"] = c.params.gamma;
  if (c.model == ModelKind::cavity_fiber) {
    p["v"] = c.params.fiber_v;
    p["kappa_f"] = c.params.kappa_f;
  }
  p["ratio_limit"] = c.params.ratio_limit;
  p["enforce_ratio"] = c.params.enforce_ratio;
  j["params"] = std::move(p);
  if (c.scenario == "sweep") {
    j["sweep"] = {{"parameter", c.sweep.parameter},
                  {"from", c.sweep.from},
                  {"to", c.sweep.to},
                  {"points", c.sweep.points}};
  }
  if (c.scenario == "network") {
    j["network"] = {
        {"pool", c.network.pool}, {"target", c.network.target}, {"trials", c.network.trials}};
  }
  return j;
}

// ------------------------------- serialization -------------------------------

// Debug dump of a state vector. Not a stability-guaranteed format.
inline jsn state_to_json(const StateVector& v) {
  jsn j;
  jsn factors = jsn::array();
  for (const auto& f : v.space->factors()) {
    const char* kind = f.kind == FactorKind::atom ? "atom"
                       : f.kind == FactorKind::mode ? "mode"
                                                    : "flag";
    factors.push_back({{"kind", kind}, {"dim", f.dim}});
  }
  j["space"] = std::move(factors);
  jsn amps = jsn::array();
  for (int i = 0; i < v.space->dim(); ++i)
    amps.push_back({v.amps(i).real(), v.amps(i).imag()});
  j["amplitudes"] = std::move(amps);
  return j;
}

namespace detail {

inline std::string fmt_double(double x, int sig = 12) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", sig, x);
  return buf;
}

inline std::string out_path(const std::string& prefix, const std::string& name) {
  if (prefix.empty()) return name;
  if (prefix.back() == '/') return prefix + name;
  return prefix + "-" + name;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

inline std::string trajectory_csv(const Trajectory& traj) {
  std::string csv = "t,fidelity,trace,n_excitation";
  for (const auto& name : traj.probe_names) csv += "," + name;
  csv += "\n";
  for (const auto& pt : traj.points) {
    csv += fmt_double(pt.t) + "," + fmt_double(pt.fidelity) + "," + fmt_double(pt.trace) + "," +
           fmt_double(pt.n_excitation);
    for (double p : pt.probe_values) csv += "," + fmt_double(p);
    csv += "\n";
  }
  return csv;
}

inline int snapshots_for(double t, double dt, int stride) {
  if (stride < 1) throw ConfigError("stride must be >= 1");
  const long long steps = static_cast<long long>(std::ceil(t / dt));
  return static_cast<int>(std::max(1ll, steps / stride));
}

}  // namespace detail

// --------------------------------- run result --------------------------------

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> outputs;  // files written, manifest last
  std::string message;               // diagnostic on failure
  jsn manifest;
};

namespace detail {

// shared state assembled per run: model space, Hamiltonian with the Stark
// compensation, collapse channels, prepared branch state, ideal target
struct ProtocolSetup {
  SpacePtr space;
  OperatorMatrix h;
  std::vector<OperatorMatrix> collapse;
  StateVector initial;
  StateVector target;
};

inline ProtocolSetup make_protocol_setup(const ScenarioConfig& c) {
  ProtocolSetup s;
  s.space = protocol_space(c.model, /*with_flag=*/true);
  s.h = model_hamiltonian(c.params, s.space, c.model) + stark_compensation(c.params, s.space, c.model);
  s.collapse = collapse_operators(c.params, s.space, c.model);
  s.initial = initial_branch_state(c.n, c.m, c.model);
  s.target = ideal_target_state(c.n, c.m, c.model);
  return s;
}

inline double resolve_t(const ScenarioConfig& c) {
  return c.t_final > 0 ? c.t_final : gate_time(c.params);
}

// final fidelity of one dissipative protocol run (no trajectory kept)
inline double lindblad_final_fidelity(const ScenarioConfig& c, double t) {
  auto s = make_protocol_setup(c);
  PropagationOptions opt;
  opt.dt = c.dt;
  opt.snapshots = 1;
  opt.fidelity_target = s.target;
  auto res = propagate_lindblad(s.h, s.collapse, DensityOperator::from_pure(s.initial), t, opt);
  return res.trajectory.points.back().fidelity;
}

}  // namespace detail

// ------------------------------ figure emission ------------------------------

// Writes the data files behind one figure id and returns their paths.
// fig-PX is exact arithmetic; the remaining families run the dissipative
// protocol with the configured parameters (use the fast preset to keep CI
// cheap; the slow-drive operating point takes minutes per series).
inline std::vector<std::string> emit_figure_data(const ScenarioConfig& c) {
  std::vector<std::string> written;
  const std::string& fig = c.figure;
  if (fig.empty()) throw ConfigError("emit-figure needs figure = fig-PX | fig-4a..c | fig-5a..d");

  auto series_rates = std::vector<double>{0.0, 0.05, 0.1};

  if (fig == "fig-PX") {
    std::string csv = "m,n,p\n";
    for (int m = 2; m <= 20; ++m)
      for (int n = 2; n <= 20; ++n) {
        const double p = static_cast<double>(n + m - 2) / (static_cast<double>(n) * m);
        csv += std::to_string(m) + "," + std::to_string(n) + "," + detail::fmt_double(p, 17) + "\n";
      }
    const auto path = detail::out_path(c.out, "fig-PX.csv");
    detail::write_text_file(path, csv);
    written.push_back(path);
    return written;
  }

  const bool fig4 = fig.rfind("fig-4", 0) == 0;
  const bool fig5 = fig.rfind("fig-5", 0) == 0;
  if (!fig4 && !fig5) throw ConfigError("unknown figure id '" + fig + "'");
  if (fig4 && c.model != ModelKind::single_cavity)
    throw ConfigError(fig + " belongs to the single_cavity model");
  if (fig5 && c.model != ModelKind::cavity_fiber)
    throw ConfigError(fig + " belongs to the cavity_fiber model");

  const double t = detail::resolve_t(c);

  // time-series families: one rate swept over {0, 0.05, 0.1}, others zero
  auto time_family = [&](const std::string& rate_name) {
    std::string csv = rate_name + ",t,fidelity\n";
    for (double r : series_rates) {
      ScenarioConfig cc = c;
      cc.params.kappa = cc.params.gamma = cc.params.kappa_f = 0;
      if (rate_name == "gamma") cc.params.gamma = r;
      else if (rate_name == "kappa") cc.params.kappa = r;
      else cc.params.kappa_f = r;
      auto s = detail::make_protocol_setup(cc);
      PropagationOptions opt;
      opt.dt = cc.dt;
      opt.snapshots = detail::snapshots_for(t, cc.dt, cc.stride);
      opt.fidelity_target = s.target;
      auto res =
          propagate_lindblad(s.h, s.collapse, DensityOperator::from_pure(s.initial), t, opt);
      for (const auto& pt : res.trajectory.points)
        csv += detail::fmt_double(r) + "," + detail::fmt_double(pt.t) + "," +
               detail::fmt_double(pt.fidelity) + "\n";
    }
    const auto path = detail::out_path(c.out, fig + ".csv");
    detail::write_text_file(path, csv);
    written.push_back(path);
  };

  // endpoint families: fidelity at gate time versus each decay ratio
  auto ratio_family = [&](const std::vector<std::string>& axes) {
    std::string csv = "axis,ratio,fidelity\n";
    for (const auto& axis : axes) {
      for (int i = 0; i < c.sweep.points; ++i) {
        const double r = c.sweep.from + (c.sweep.to - c.sweep.from) *
                                            (c.sweep.points == 1 ? 0.0
                                                                 : static_cast<double>(i) /
                                                                       (c.sweep.points - 1));
        ScenarioConfig cc = c;
        cc.params.kappa = cc.params.gamma = cc.params.kappa_f = 0;
        if (axis == "kappa") cc.params.kappa = r;
        else if (axis == "gamma") cc.params.gamma = r;
        else cc.params.kappa_f = r;
        csv += axis + "," + detail::fmt_double(r) + "," +
               detail::fmt_double(detail::lindblad_final_fidelity(cc, t)) + "\n";
      }
    }
    const auto path = detail::out_path(c.out, fig + ".csv");
    detail::write_text_file(path, csv);
    written.push_back(path);
  };

  if (fig == "fig-4a") time_family("gamma");
  else if (fig == "fig-4b") time_family("kappa");
  else if (fig == "fig-4c") ratio_family({"kappa", "gamma"});
  else if (fig == "fig-5a") time_family("gamma");
  else if (fig == "fig-5b") time_family("kappa");
  else if (fig == "fig-5c") time_family("kappa_f");
  else if (fig == "fig-5d") ratio_family({"kappa", "gamma", "kappa_f"});
  else throw ConfigError("unknown figure id '" + fig + "'");
  return written;
}

// -------------------------------- run_scenario -------------------------------

namespace detail {

inline void run_zeno_spectrum(const ScenarioConfig& c, RunResult& out, jsn& result) {
  auto space = protocol_space(c.model, /*with_flag=*/false);
  auto h = model_hamiltonian(c.params, space, c.model);
  auto h_meas = coupling_hamiltonian(c.params, space, c.model);
  auto h_obs = drive_hamiltonian(c.params, space, c.model);

  const int n_modes = static_cast<int>(space->positions(FactorKind::mode).size());
  std::vector<int> seed = {atom::g0, atom::g1};
  seed.insert(seed.end(), static_cast<size_t>(n_modes), 0);
  auto sub = closed_subspace(h, seed);
  auto dec = eigenprojections(h_meas, sub);
  auto hz = zeno_hamiltonian(h_obs, dec);

  std::vector<int> swapped = seed;
  std::swap(swapped[0], swapped[1]);
  auto eff = adiabatic_eliminate(hz, dec, {seed, swapped}, c.params);

  jsn j;
  j["model"] = model_name(c.model);
  j["lambda"] = c.params.lambda;
  jsn labels = jsn::array();
  for (int idx : sub) labels.push_back(space->format_label(space->label_of(idx)));
  j["subspace_labels"] = std::move(labels);
  jsn evs = jsn::array();
  for (const auto& cl : dec.clusters)
    evs.push_back({{"eigenvalue", cl.eigenvalue}, {"multiplicity", cl.multiplicity()}});
  j["eigenvalues"] = std::move(evs);

  auto mat_json = [](const Eigen::MatrixXcd& m) {
    jsn rows = jsn::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      jsn row = jsn::array();
      for (Eigen::Index s = 0; s < m.cols(); ++s) row.push_back({m(r, s).real(), m(r, s).imag()});
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["effective"] = {{"retained_labels", eff.retained_labels},
                    {"eliminated_labels", eff.eliminated_labels},
                    {"raw", mat_json(eff.raw)},
                    {"compensated", mat_json(eff.compensated)}};
  j["regime"] = {{"omega_over_lambda", eff.omega_over_lambda},
                 {"omega_over_delta", eff.omega_over_delta}};
  j["gate_time"] = gate_time(c.params);

  const auto path = out_path(c.out, "zeno.json");
  write_text_file(path, j.dump(2) + "\n");
  out.outputs.push_back(path);
  result["gate_time"] = gate_time(c.params);
}

inline void run_gate_evolve(const ScenarioConfig& c, RunResult& out, jsn& result) {
  auto space = protocol_space(c.model, /*with_flag=*/false);
  auto h = model_hamiltonian(c.params, space, c.model) + stark_compensation(c.params, space, c.model);
  const int n_modes = static_cast<int>(space->positions(FactorKind::mode).size());
  std::vector<int> start = {atom::g0, atom::g1};
  start.insert(start.end(), static_cast<size_t>(n_modes), 0);
  auto psi0 = ket(space, start);
  const double t = resolve_t(c);

  PropagationOptions opt;
  opt.dt = c.dt;
  opt.snapshots = snapshots_for(t, c.dt, c.stride);
  opt.fidelity_target = apply_fusion(psi0, ideal_gate_map(space, c.model));
  auto res = propagate_schrodinger(h, psi0, t, opt);

  const auto path = out_path(c.out, "gate.csv");
  write_text_file(path, trajectory_csv(res.trajectory));
  out.outputs.push_back(path);

  std::vector<int> flipped = start;
  std::swap(flipped[0], flipped[1]);
  result["final_fidelity"] = res.trajectory.points.back().fidelity;
  result["population_start"] = std::norm(res.state.amps(space->index_of(start)));
  result["population_flipped"] = std::norm(res.state.amps(space->index_of(flipped)));
  result["t"] = t;

  if (c.dump_state) {
    const auto spath = out_path(c.out, "state.json");
    write_text_file(spath, state_to_json(res.state).dump(2) + "\n");
    out.outputs.push_back(spath);
  }
}

inline void run_fuse(const ScenarioConfig& c, RunResult& out, jsn& result) {
  auto fused = ideal_target_state(c.n, c.m, c.model);
  auto branches = fusion_branches(fused);
  auto exact = outcome_probabilities(c.n, c.m);

  jsn j;
  j["model"] = model_name(c.model);
  j["n"] = c.n;
  j["m"] = c.m;
  jsn outcomes = jsn::array();
  for (const auto& rec : branches) {
    const char* cls = rec.outcome == FusionOutcome::failure   ? "failure"
                      : rec.outcome == FusionOutcome::recycle ? "recycle"
                                                              : "success";
    jsn o;
    o["label"] = std::string(rec.a0 == atom::g1 ? "g1" : "g0") + " " +
                 (rec.a1 == atom::g1 ? "g1" : "g0");
    o["probability"] = rec.probability;
    o["classification"] = cls;
    if (rec.outcome == FusionOutcome::success_10 || rec.outcome == FusionOutcome::success_01) {
      auto corrected = correct_phase(rec, c.model);
      o["corrected_fidelity"] = fidelity(corrected, fused_flag_target(c.n, c.m, rec));
    }
    outcomes.push_back(std::move(o));
  }
  j["outcomes"] = std::move(outcomes);
  j["success_probability"] = exact.success_total.value();
  j["success_probability_rational"] =
      std::to_string(exact.success_total.num) + "/" + std::to_string(exact.success_total.den);

  const auto path = out_path(c.out, "fuse.json");
  write_text_file(path, j.dump(2) + "\n");
  out.outputs.push_back(path);
  result["success_probability"] = exact.success_total.value();

  if (c.dump_state) {
    const auto spath = out_path(c.out, "state.json");
    write_text_file(spath, state_to_json(fused).dump(2) + "\n");
    out.outputs.push_back(spath);
  }
}

inline void run_lindblad(const ScenarioConfig& c, RunResult& out, jsn& result) {
  auto s = make_protocol_setup(c);
  const double t = resolve_t(c);
  PropagationOptions opt;
  opt.dt = c.dt;
  opt.snapshots = snapshots_for(t, c.dt, c.stride);
  opt.fidelity_target = s.target;
  auto res = propagate_lindblad(s.h, s.collapse, DensityOperator::from_pure(s.initial), t, opt);

  const auto path = out_path(c.out, "lindblad.csv");
  write_text_file(path, trajectory_csv(res.trajectory));
  out.outputs.push_back(path);
  result["final_fidelity"] = res.trajectory.points.back().fidelity;
  result["t"] = t;
  result["min_eigenvalue_seen"] = res.trajectory.min_eigenvalue_seen;
}

inline void run_sweep(const ScenarioConfig& c, RunResult& out, jsn& result) {
  const auto& sw = c.sweep;
  if (sw.parameter != "kappa" && sw.parameter != "gamma" && sw.parameter != "kappa_f")
    throw ConfigError("sweep.parameter must be kappa | gamma | kappa_f");
  if (sw.parameter == "kappa_f" && c.model != ModelKind::cavity_fiber)
    throw ConfigError("sweep.parameter kappa_f only applies to the cavity_fiber model");
  if (sw.points < 1) throw ConfigError("sweep.points must be >= 1");
  const double t = resolve_t(c);

  std::string csv = sw.parameter + ",fidelity\n";
  for (int i = 0; i < sw.points; ++i) {
    const double r =
        sw.from +
        (sw.to - sw.from) * (sw.points == 1 ? 0.0 : static_cast<double>(i) / (sw.points - 1));
    ScenarioConfig cc = c;
    if (sw.parameter == "kappa") cc.params.kappa = r;
    else if (sw.parameter == "gamma") cc.params.gamma = r;
    else cc.params.kappa_f = r;
    csv += fmt_double(r) + "," + fmt_double(lindblad_final_fidelity(cc, t)) + "\n";
  }
  const auto path = out_path(c.out, "sweep.csv");
  write_text_file(path, csv);
  out.outputs.push_back(path);
  result["points"] = sw.points;
  result["t"] = t;
}

inline void run_network(const ScenarioConfig& c, RunResult& out, jsn& result) {
  auto stats = simulate_network(c.network.pool, c.network.target, c.network.trials, c.seed);

  jsn j;
  j["pool"] = c.network.pool;
  j["target"] = stats.target;
  j["trials"] = stats.trials;
  j["seed"] = stats.master_seed;
  j["reached"] = stats.reached;
  j["reached_fraction"] = stats.reached_fraction;
  j["mean_attempts"] = stats.mean_attempts;
  j["outcome_totals"] = {{"failure", stats.outcome_totals[0]},
                         {"recycle", stats.outcome_totals[1]},
                         {"success_10", stats.outcome_totals[2]},
                         {"success_01", stats.outcome_totals[3]}};
  jsn hist = jsn::object();
  for (const auto& [size, count] : stats.achieved_histogram)
    hist[std::to_string(size)] = count;
  j["achieved_histogram"] = std::move(hist);

  const auto jpath = out_path(c.out, "network.json");
  write_text_file(jpath, j.dump(2) + "\n");
  out.outputs.push_back(jpath);

  std::string csv = "size,count\n";
  for (const auto& [size, count] : stats.achieved_histogram)
    csv += std::to_string(size) + "," + std::to_string(count) + "\n";
  const auto cpath = out_path(c.out, "network-hist.csv");
  detail::write_text_file(cpath, csv);
  out.outputs.push_back(cpath);

  result["reached_fraction"] = stats.reached_fraction;
}

}  // namespace detail

// Executes the configured scenario. Outputs are deterministic for a fixed
// config (seed included). A manifest echoing the resolved config is written
// last as the completion marker; on a numerical abort the manifest carries
// status "partial" plus the error, and the exit code is 3. Config problems
// exit 2 before any file is written.
inline RunResult run_scenario(const ScenarioConfig& c) {
  RunResult out;
  jsn result = jsn::object();
  std::string numerical_error;

  try {
    c.params.validate();
    if (c.n < 2 || c.m < 2) throw ConfigError("register sizes n, m must be >= 2");
    if (c.dt <= 0 || c.dt > 0.05) throw ConfigError("dt must lie in (0, 0.05]");
    if (c.stride < 1) throw ConfigError("stride must be >= 1");

    if (c.scenario == "zeno-spectrum") detail::run_zeno_spectrum(c, out, result);
    else if (c.scenario == "gate-evolve") detail::run_gate_evolve(c, out, result);
    else if (c.scenario == "fuse") detail::run_fuse(c, out, result);
    else if (c.scenario == "lindblad") detail::run_lindblad(c, out, result);
    else if (c.scenario == "sweep") detail::run_sweep(c, out, result);
    else if (c.scenario == "network") detail::run_network(c, out, result);
    else if (c.scenario == "emit-figure") {
      for (auto& f : emit_figure_data(c)) out.outputs.push_back(f);
    } else {
      throw ConfigError("unknown scenario '" + c.scenario +
                        "' (zeno-spectrum | gate-evolve | fuse | lindblad | sweep | network | "
                        "emit-figure)");
    }
  } catch (const ConfigError& e) {
    out.exit_code = kExitConfig;
    out.message = e.what();
    return out;
  } catch (const NumericalError& e) {
    numerical_error = e.what();
  } catch (const std::invalid_argument& e) {
    out.exit_code = kExitConfig;
    out.message = e.what();
    return out;
  }

  jsn manifest = config_to_json(c);
  manifest["artifact"] = {{"name", kArtifactName}, {"version", kArtifactVersion}};
  manifest["outputs"] = out.outputs;
  if (numerical_error.empty()) {
    manifest["status"] = "complete";
    manifest["result"] = result;
  } else {
    manifest["status"] = "partial";
    manifest["error"] = numerical_error;
  }

  const auto mpath = detail::out_path(c.out, "manifest.json");
  detail::write_text_file(mpath, manifest.dump(2) + "\n");
  out.outputs.push_back(mpath);
  out.manifest = std::move(manifest);

  if (!numerical_error.empty()) {
    out.exit_code = kExitNumerical;
    out.message = numerical_error;
  }
  return out;
}

}  // namespace zenofuse
