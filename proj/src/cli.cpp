#include "hybrid/cli.hpp"

#include "hybrid/dynamics.hpp"
#include "hybrid/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <sstream>

namespace hybrid {

namespace {

ZooEntry entry_for(const RunConfig& cfg) {
  try {
    return make_zoo_entry(cfg.system, cfg.parameters);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string output_path(const RunConfig& cfg, const std::string& suffix) {
  const std::string prefix = cfg.prefix.empty() ? cfg.system : cfg.prefix;
  return (std::filesystem::path(cfg.out_dir) / (prefix + suffix)).string();
}

void prepare_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + cfg.out_dir + "': " + ec.message());
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json config_json(const RunConfig& c) {
  Json j;
  j["system"] = {{"name", c.system}, {"parameters", Json(zoo_defaults(c.system))}};
  for (const auto& [k, v] : c.parameters) j["system"]["parameters"][k] = v;
  j["integrator"] = to_json(c.integrator);
  j["run"] = {{"horizon", c.horizon},
              {"seed", c.seed},
              {"iterations", c.iterations},
              {"burn_in", c.burn_in},
              {"trajectories", c.trajectories},
              {"grid", {{"rows", c.grid.rows}, {"cols", c.grid.cols},
                        {"x_half_width", c.grid.a}, {"y_half_width", c.grid.b}}}};
  j["analysis"] = {{"density", c.density},
                   {"samples", c.samples},
                   {"impact_samples", c.impact_samples},
                   {"tolerance", c.tolerance},
                   {"escape_threshold", c.zeno.escape_threshold},
                   {"ratio_tolerance", c.zeno.ratio_tolerance},
                   {"window", c.zeno.window}};
  return j;
}

int runtime_code(Termination t) {
  return t == Termination::TimeHorizon ? kExitOk : kExitRuntime;
}

}  // namespace

Vec initial_state(const ZooEntry& e, const RunConfig& cfg) {
  const auto dim = static_cast<Eigen::Index>(e.system.dimension());
  const auto n = static_cast<Eigen::Index>(e.system.config_dimension);
  if (cfg.state) {
    if (static_cast<Eigen::Index>(cfg.state->size()) != dim)
      throw ConfigError("initial state needs " + std::to_string(dim) + " entries");
    Vec x = Eigen::Map<const Vec>(cfg.state->data(), dim);
    if (e.mechanics && e.mechanics->constraint_count() > 0) {
      const Vec v = e.system.velocity(x);
      const Vec r = e.mechanics->constraints(x.head(n)) * v;
      if (r.norm() > 1e-9 * std::max(1.0, v.norm()))
        throw ConfigError("initial state violates the velocity constraints");
    }
    return x;
  }
  if (cfg.position) {
    if (static_cast<Eigen::Index>(cfg.position->size()) != n ||
        static_cast<Eigen::Index>(cfg.velocity->size()) != n)
      throw ConfigError("initial position and velocity need " + std::to_string(n) + " entries each");
    const Vec q = Eigen::Map<const Vec>(cfg.position->data(), n);
    const Vec v = Eigen::Map<const Vec>(cfg.velocity->data(), n);
    if (!e.mechanics) return stack(q, v);
    const Vec vd = project_onto_D(*e.mechanics, q, v);
    const HybridState s = legendre(*e.mechanics, HybridState::velocity(q, vd));
    return stack(s.q, s.fiber);
  }
  return e.default_state;
}

int cmd_list_systems(std::ostream& out) {
  out << std::left << std::setw(20) << "name" << std::setw(5) << "dof" << std::setw(13)
      << "constraints" << std::setw(14) << "impacts" << "summary\n";
  for (const auto& name : zoo_names()) {
    const ZooEntry e = make_zoo_entry(name);
    out << std::setw(20) << name << std::setw(5) << e.dof() << std::setw(13) << e.constraint_count()
        << std::setw(14) << to_string(e.impact_kind) << e.summary << '\n';
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const ZooEntry e = entry_for(cfg);
  const Vec x0 = initial_state(e, cfg);
  const HybridTrajectory traj = hybrid_flow(e.system, x0, cfg.horizon, cfg.integrator);

  std::ostringstream tcsv, ecsv;
  write_trajectory_csv(tcsv, e.system, traj);
  write_events_csv(ecsv, e.system, traj);
  Json summary = trajectory_summary(e.system, traj);
  summary["initial_state"] = vec_json(x0);
  summary["config"] = config_json(cfg);

  prepare_dir(cfg);
  write_file(output_path(cfg, "_trajectory.csv"), tcsv.str());
  write_file(output_path(cfg, "_events.csv"), ecsv.str());
  write_file(output_path(cfg, "_summary.json"), summary.dump(2) + "\n");
  out << e.name << ": " << traj.events.size() << " impacts, " << to_string(traj.reason)
      << " at t = " << format_number(traj.final_time) << '\n';
  return runtime_code(traj.reason);
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const ZooEntry e = entry_for(cfg);
  if (e.densities.empty()) throw ConfigError("system '" + e.name + "' has no density candidates");
  const DensityCandidate* cand = &e.densities.front();
  if (!cfg.density.empty()) {
    try {
      cand = &e.density(cfg.density);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
  }
  const auto states = sample_states(e, cfg.samples, cfg.seed);
  const auto impacts = sample_impacts(e, cfg.impact_samples, trajectory_seed(cfg.seed, 1));
  const DensityAudit a = audit_density(e, cand->density, states, impacts);

  const bool div_ok = a.divergence <= cfg.tolerance;
  const bool imp_ok = a.impact <= cfg.tolerance;
  const bool energy_ok = a.energy <= 1e-9;
  Json j;
  j["system"] = e.name;
  j["density"] = cand->name;
  j["measure"] = e.constraint_count() ? "nonholonomic volume" : "canonical volume";
  j["tolerance"] = cfg.tolerance;
  j["samples"] = a.states;
  j["impact_samples"] = a.impacts;
  j["checks"] = {
      {"divergence", {{"residual", a.divergence}, {"pass", div_ok}}},
      {"impact_jacobian", {{"residual", a.impact}, {"pass", imp_ok}}},
      {"energy", {{"residual", a.energy}, {"pass", energy_ok}}}};
  if (a.worst) j["worst_impact_state"] = vec_json(a.worst->state);
  const bool pass = div_ok && imp_ok && energy_ok;
  j["pass"] = pass;
  j["config"] = config_json(cfg);

  prepare_dir(cfg);
  write_file(output_path(cfg, "_check.json"), j.dump(2) + "\n");
  out << e.name << " / " << cand->name << ": divergence " << format_number(a.divergence)
      << ", impact " << format_number(a.impact) << ", energy " << format_number(a.energy) << " -> "
      << (pass ? "pass" : "FAIL") << '\n';
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_density(const RunConfig& cfg, std::ostream& out) {
  const ZooEntry e = entry_for(cfg);
  DensityRun run;
  run.iterations = cfg.iterations;
  run.burn_in = cfg.burn_in;
  run.seed = cfg.seed;
  run.grid = cfg.grid;
  if (run.grid.a <= 0 || run.grid.b <= 0) {
    if (!e.table) throw ConfigError("system '" + e.name + "' has no table; set run.grid bounds");
    run.grid.a = e.table->a;
    run.grid.b = e.table->b;
  }
  if (run.grid.rows == 0 || run.grid.cols == 0) throw ConfigError("grid needs rows and cols");
  if (!e.planar_position) throw ConfigError("system '" + e.name + "' has no planar position");

  DensityGrid g;
  if (cfg.state || cfg.position) {
    if (cfg.trajectories != 1) throw ConfigError("an explicit initial state needs trajectories = 1");
    g = accumulate_density(e.system, e.planar_position, initial_state(e, cfg), run, cfg.integrator);
  } else {
    g = ensemble_density(e.system, e.planar_position, e.sample_state, cfg.trajectories, run,
                         cfg.integrator, cfg.workers);
  }
  std::ostringstream csv;
  write_grid_csv(csv, g);
  Json side = grid_sidecar(g);
  side["system"] = e.name;
  side["config"] = config_json(cfg);

  prepare_dir(cfg);
  write_file(output_path(cfg, "_grid.csv"), csv.str());
  write_file(output_path(cfg, "_grid.json"), side.dump(2) + "\n");
  out << e.name << ": " << g.samples << " samples, " << g.occupied() << " occupied cells"
      << (g.complete ? "" : ", stopped early: " + g.termination) << '\n';
  return g.complete ? kExitOk : kExitRuntime;
}

int cmd_zeno(const RunConfig& cfg, std::ostream& out) {
  const ZooEntry e = entry_for(cfg);
  const Vec x0 = initial_state(e, cfg);
  IntegratorConfig ic = cfg.integrator;
  ic.record_arcs = false;
  const HybridTrajectory traj = hybrid_flow(e.system, x0, cfg.horizon, ic);
  const ZenoReport rep = detect_zeno(traj, e.system, cfg.zeno);
  Json j = to_json(rep);
  j["system"] = e.name;
  j["termination"] = to_string(traj.reason);
  j["detail"] = traj.detail;
  j["final_time"] = traj.final_time;
  j["config"] = config_json(cfg);

  prepare_dir(cfg);
  write_file(output_path(cfg, "_zeno.json"), j.dump(2) + "\n");
  out << e.name << ": " << to_string(rep.classification);
  if (rep.t_infinity) out << ", t_inf = " << format_number(*rep.t_infinity);
  out << " (" << to_string(traj.reason) << ")\n";
  return traj.reason == Termination::Error ? kExitRuntime : kExitOk;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and analyze hybrid mechanical systems with impacts"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  double tolerance = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML run configuration")->required();
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_option("--out", out_dir, "override output.dir");
    sub->add_option("--tolerance", tolerance, "override analysis.tolerance")
        ->check(CLI::PositiveNumber);
  };
  auto* sim = app.add_subcommand("simulate", "integrate one trajectory; trajectory/events CSV and summary JSON");
  auto* chk = app.add_subcommand("check", "density invariance residuals; report JSON");
  auto* den = app.add_subcommand("density", "occupancy grid of iterated time-1 maps");
  auto* zen = app.add_subcommand("zeno", "impact-time analysis; Zeno report JSON");
  auto* lst = app.add_subcommand("list-systems", "list built-in systems");
  for (auto* s : {sim, chk, den, zen}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (lst->parsed()) return cmd_list_systems(out);
    RunConfig cfg = load_config(config_path);
    if (sim->parsed() || chk->parsed() || den->parsed() || zen->parsed()) {
      auto* sub = app.get_subcommands().front();
      if (sub->count("--seed")) cfg.seed = seed;
      if (sub->count("--out")) cfg.out_dir = out_dir;
      if (sub->count("--tolerance")) cfg.tolerance = tolerance;
    }
    if (sim->parsed()) return cmd_simulate(cfg, out);
    if (chk->parsed()) return cmd_check(cfg, out);
    if (den->parsed()) return cmd_density(cfg, out);
    return cmd_zeno(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace hybrid
