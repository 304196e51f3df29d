#include "hybrid/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace hybrid {

namespace {

std::string where(const YAML::Node& n) {
  return "line " + std::to_string(n.Mark().line + 1);
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  throw ConfigError(where(n) + ": " + msg);
}

void expect_map(const YAML::Node& n, const std::string& what) {
  if (!n.IsMap()) fail(n, "'" + what + "' must be a mapping");
}

void only_keys(const YAML::Node& n, const std::string& section, const std::set<std::string>& keys) {
  expect_map(n, section);
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!keys.count(key)) fail(kv.first, "unknown key '" + key + "' in section '" + section + "'");
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, "invalid value '" + n.Scalar() + "' for '" + key + "'");
  }
}

double real(const YAML::Node& n, const std::string& key) { return scalar<double>(n, key); }

std::uint64_t count(const YAML::Node& n, const std::string& key) {
  const double v = real(n, key);
  if (!(v >= 0) || v != static_cast<double>(static_cast<std::uint64_t>(v)))
    fail(n, "'" + key + "' must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::vector<double> reals(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) fail(n, "'" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const auto& v : n) out.push_back(real(v, key));
  return out;
}

void read_system(const YAML::Node& n, RunConfig& c) {
  only_keys(n, "system", {"name", "parameters"});
  if (!n["name"]) fail(n, "section 'system' needs 'name'");
  c.system = scalar<std::string>(n["name"], "name");
  if (const auto p = n["parameters"]) {
    expect_map(p, "parameters");
    for (const auto& kv : p) c.parameters[kv.first.as<std::string>()] = real(kv.second, kv.first.as<std::string>());
  }
}

void read_integrator(const YAML::Node& n, IntegratorConfig& c) {
  only_keys(n, "integrator",
            {"rtol", "atol", "max_step", "event_tolerance", "interior_samples", "max_impacts",
             "min_impact_gap", "zeno_window", "domain_bound", "sample_interval"});
  if (n["rtol"]) c.rtol = real(n["rtol"], "rtol");
  if (n["atol"]) c.atol = real(n["atol"], "atol");
  if (n["max_step"]) c.max_step = real(n["max_step"], "max_step");
  if (n["event_tolerance"]) c.event_tolerance = real(n["event_tolerance"], "event_tolerance");
  if (n["interior_samples"]) c.interior_samples = static_cast<int>(count(n["interior_samples"], "interior_samples"));
  if (n["max_impacts"]) c.max_impacts = count(n["max_impacts"], "max_impacts");
  if (n["min_impact_gap"]) c.min_impact_gap = real(n["min_impact_gap"], "min_impact_gap");
  if (n["zeno_window"]) c.zeno_window = count(n["zeno_window"], "zeno_window");
  if (n["domain_bound"]) c.domain_bound = real(n["domain_bound"], "domain_bound");
  if (n["sample_interval"]) c.sample_interval = real(n["sample_interval"], "sample_interval");
}

void read_initial(const YAML::Node& n, RunConfig& c) {
  only_keys(n, "initial", {"state", "position", "velocity"});
  if (n["state"]) c.state = reals(n["state"], "state");
  if (n["position"]) c.position = reals(n["position"], "position");
  if (n["velocity"]) c.velocity = reals(n["velocity"], "velocity");
  if (c.state && (c.position || c.velocity))
    fail(n, "give either 'state' or 'position'/'velocity', not both");
  if (static_cast<bool>(c.position) != static_cast<bool>(c.velocity))
    fail(n, "'position' and 'velocity' go together");
}

void read_run(const YAML::Node& n, RunConfig& c) {
  only_keys(n, "run", {"horizon", "seed", "iterations", "burn_in", "trajectories", "workers", "grid"});
  if (n["horizon"]) c.horizon = real(n["horizon"], "horizon");
  if (n["seed"]) c.seed = count(n["seed"], "seed");
  if (n["iterations"]) c.iterations = count(n["iterations"], "iterations");
  if (n["burn_in"]) c.burn_in = count(n["burn_in"], "burn_in");
  if (n["trajectories"]) c.trajectories = count(n["trajectories"], "trajectories");
  if (n["workers"]) c.workers = static_cast<unsigned>(count(n["workers"], "workers"));
  if (const auto g = n["grid"]) {
    only_keys(g, "grid", {"rows", "cols", "x_half_width", "y_half_width"});
    if (g["rows"]) c.grid.rows = count(g["rows"], "rows");
    if (g["cols"]) c.grid.cols = count(g["cols"], "cols");
    if (g["x_half_width"]) c.grid.a = real(g["x_half_width"], "x_half_width");
    if (g["y_half_width"]) c.grid.b = real(g["y_half_width"], "y_half_width");
  }
  if (!(c.horizon > 0)) fail(n, "'horizon' must be positive");
  if (c.trajectories == 0) fail(n, "'trajectories' must be at least 1");
}

void read_analysis(const YAML::Node& n, RunConfig& c) {
  only_keys(n, "analysis", {"density", "samples", "impact_samples", "tolerance", "escape_threshold",
                            "ratio_tolerance", "window"});
  if (n["density"]) c.density = scalar<std::string>(n["density"], "density");
  if (n["samples"]) c.samples = count(n["samples"], "samples");
  if (n["impact_samples"]) c.impact_samples = count(n["impact_samples"], "impact_samples");
  if (n["tolerance"]) c.tolerance = real(n["tolerance"], "tolerance");
  if (n["escape_threshold"]) c.zeno.escape_threshold = real(n["escape_threshold"], "escape_threshold");
  if (n["ratio_tolerance"]) c.zeno.ratio_tolerance = real(n["ratio_tolerance"], "ratio_tolerance");
  if (n["window"]) c.zeno.window = count(n["window"], "window");
  if (!(c.tolerance > 0)) fail(n, "'tolerance' must be positive");
}

void read_output(const YAML::Node& n, RunConfig& c) {
  only_keys(n, "output", {"dir", "prefix"});
  if (n["dir"]) c.out_dir = scalar<std::string>(n["dir"], "dir");
  if (n["prefix"]) c.prefix = scalar<std::string>(n["prefix"], "prefix");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsDefined() || root.IsNull()) throw ConfigError("empty configuration");
  only_keys(root, "top level", {"system", "integrator", "initial", "run", "analysis", "output"});
  RunConfig c;
  if (!root["system"]) throw ConfigError("missing section 'system'");
  read_system(root["system"], c);
  if (root["integrator"]) read_integrator(root["integrator"], c.integrator);
  if (root["initial"]) read_initial(root["initial"], c);
  if (root["run"]) read_run(root["run"], c);
  if (root["analysis"]) read_analysis(root["analysis"], c);
  if (root["output"]) read_output(root["output"], c);
  try {
    c.integrator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where(root["integrator"] ? root["integrator"] : root) + ": " + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hybrid
