// zenofuse CLI: scenario runner for the cavity-QED W-state fusion engine.
// Resolution order for every setting: built-in defaults < --preset < --config
// file < explicit flags. Exit codes: 0 ok, 2 config error, 3 numerical abort.
#include <CLI11.hpp>
#include <zenofuse/scenario.hpp>

#include <iostream>

namespace {

using zenofuse::ConfigError;
using zenofuse::jsn;

void deep_merge(jsn& dst, const jsn& src) {
  if (!dst.is_object() || !src.is_object()) {
    dst = src;
    return;
  }
  for (auto it = src.begin(); it != src.end(); ++it) {
    if (dst.contains(it.key()) && dst[it.key()].is_object() && it.value().is_object())
      deep_merge(dst[it.key()], it.value());
    else
      dst[it.key()] = it.value();
  }
}

jsn preset_json(const std::string& name) {
  if (name == "fast") return {{"params", {{"omega", 0.05}}}};
  if (name == "paper-fig4")
    return {{"model", "single_cavity"},
            {"n", 5},
            {"m", 5},
            {"params", {{"omega", 0.01}, {"delta", 0.8}}}};
  if (name == "paper-fig5")
    return {{"model", "cavity_fiber"},
            {"n", 5},
            {"m", 5},
            {"params", {{"omega", 0.01}, {"delta", 0.8}, {"v", 1.0}}}};
  if (name == "paper-figPX") return {{"figure", "fig-PX"}};
  throw ConfigError("unknown preset '" + name +
                    "' (paper-fig4 | paper-fig5 | paper-figPX | fast)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zenofuse: Zeno-protected cavity-QED W-state fusion simulator"};
  app.require_subcommand(1);

  std::string config_path, model, preset, out, figure, sweep_parameter;
  std::uint64_t seed = 0;
  double dt = 0, t_final = 0, omega = 0, delta = 0, kappa = 0, gamma = 0, kappa_f = 0, fiber_v = 0;
  double sweep_from = 0, sweep_to = 0;
  int stride = 0, n = 0, m = 0, sweep_points = 0, target = 0, trials = 0;
  bool dump_state = false;
  std::vector<int> pool;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", config_path,
                  "config file: TOML subset or JSON (a run manifest re-feeds)");
    s->add_option("--model", model, "single_cavity | cavity_fiber");
    s->add_option("--preset", preset, "paper-fig4 | paper-fig5 | paper-figPX | fast");
    s->add_option("--out", out, "output path prefix (dir/ or dir/name)");
    s->add_option("--seed", seed, "master RNG seed");
    s->add_option("--dt", dt, "integrator step (lambda units, <= 0.05)");
    s->add_option("--stride", stride, "record every stride-th step");
    s->add_flag("--dump-state", dump_state, "also write the final state as JSON");
    s->add_option("--n", n, "register size of party A");
    s->add_option("--m", m, "register size of party B");
    s->add_option("--t", t_final, "evolution time; defaults to the gate time");
    s->add_option("--omega", omega, "classical drive Omega / lambda");
    s->add_option("--delta", delta, "detuning Delta / lambda");
    s->add_option("--kappa", kappa, "cavity decay kappa / lambda");
    s->add_option("--gamma", gamma, "spontaneous emission gamma / lambda");
    s->add_option("--kappa-f", kappa_f, "fiber decay kappa_f / lambda (fiber model)");
    s->add_option("--fiber-v", fiber_v, "fiber coupling v / lambda (fiber model)");
  };

  auto* sc_zeno = app.add_subcommand("zeno-spectrum",
                                     "JSON report: protected subspace, measurement spectrum, "
                                     "effective two-state model");
  auto* sc_gate = app.add_subcommand("gate-evolve",
                                     "Schrodinger gate calibration from |g0 g1, vacuum>");
  auto* sc_fuse = app.add_subcommand("fuse", "ideal fusion outcome table and corrections");
  auto* sc_lind = app.add_subcommand("lindblad",
                                     "dissipative protocol run with fidelity trajectory");
  auto* sc_sweep = app.add_subcommand("sweep", "final fidelity versus one decay rate");
  auto* sc_net = app.add_subcommand("network", "Monte Carlo fusion network with recycling");
  auto* sc_fig = app.add_subcommand("emit-figure", "write figure data files (fig-PX, fig-4*, fig-5*)");
  for (auto* s : {sc_zeno, sc_gate, sc_fuse, sc_lind, sc_sweep, sc_net, sc_fig}) add_common(s);

  for (auto* s : {sc_sweep, sc_fig}) {
    s->add_option("--parameter", sweep_parameter, "kappa | gamma | kappa_f");
    s->add_option("--from", sweep_from, "sweep start");
    s->add_option("--to", sweep_to, "sweep end");
    s->add_option("--points", sweep_points, "sweep point count");
  }
  sc_net->add_option("--pool", pool, "initial register sizes, e.g. --pool 5 5 4");
  sc_net->add_option("--target", target, "goal register size");
  sc_net->add_option("--trials", trials, "Monte Carlo trials");
  sc_fig->add_option("--figure", figure, "fig-PX | fig-4a..c | fig-5a..d");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return zenofuse::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto passed = [&](const char* flag) {
    auto* o = sub->get_option_no_throw(flag);
    return o && o->count() > 0;
  };

  jsn doc = jsn::object();
  try {
    if (passed("--preset")) deep_merge(doc, preset_json(preset));
    if (passed("--config")) deep_merge(doc, zenofuse::load_config_file(config_path));

    if (passed("--model")) doc["model"] = model;
    if (passed("--out")) doc["out"] = out;
    if (passed("--seed")) doc["seed"] = seed;
    if (passed("--dt")) doc["dt"] = dt;
    if (passed("--stride")) doc["stride"] = stride;
    if (passed("--dump-state")) doc["dump_state"] = true;
    if (passed("--n")) doc["n"] = n;
    if (passed("--m")) doc["m"] = m;
    if (passed("--t")) doc["t_final"] = t_final;
    if (passed("--omega")) doc["params"]["omega"] = omega;
    if (passed("--delta")) doc["params"]["delta"] = delta;
    if (passed("--kappa")) doc["params"]["kappa"] = kappa;
    if (passed("--gamma")) doc["params"]["gamma"] = gamma;
    if (passed("--kappa-f")) doc["params"]["kappa_f"] = kappa_f;
    if (passed("--fiber-v")) doc["params"]["v"] = fiber_v;
    if (passed("--parameter")) doc["sweep"]["parameter"] = sweep_parameter;
    if (passed("--from")) doc["sweep"]["from"] = sweep_from;
    if (passed("--to")) doc["sweep"]["to"] = sweep_to;
    if (passed("--points")) doc["sweep"]["points"] = sweep_points;
    if (passed("--pool")) doc["network"]["pool"] = pool;
    if (passed("--target")) doc["network"]["target"] = target;
    if (passed("--trials")) doc["network"]["trials"] = trials;
    if (passed("--figure")) doc["figure"] = figure;
    doc["scenario"] = sub->get_name();

    const auto cfg = zenofuse::config_from_json(doc);
    const auto res = zenofuse::run_scenario(cfg);
    if (!res.message.empty()) std::cerr << "error: " << res.message << "\n";
    for (const auto& f : res.outputs) std::cout << f << "\n";
    return res.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return zenofuse::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
