#include "hybrid/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hybrid {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// JSON has no inf/nan; those become null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

std::vector<std::string> velocity_names(const HybridSystem& sys) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sys.config_dimension; ++i) out.push_back("v_" + sys.state_names[i]);
  return out;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const HybridSystem& sys, const HybridTrajectory& traj) {
  os << "t";
  for (const auto& n : sys.state_names) os << ',' << n;
  os << ",arc\n";
  for (std::size_t a = 0; a < traj.arcs.size(); ++a) {
    const Arc& arc = traj.arcs[a];
    for (std::size_t i = 0; i < arc.times.size(); ++i) {
      os << format_number(arc.times[i]);
      for (Eigen::Index k = 0; k < arc.states[i].size(); ++k) os << ',' << format_number(arc.states[i][k]);
      os << ',' << a << '\n';
    }
  }
}

void write_events_csv(std::ostream& os, const HybridSystem& sys, const HybridTrajectory& traj) {
  const auto names = velocity_names(sys);
  std::size_t nl = 0;
  for (const auto& e : traj.events) nl = std::max(nl, static_cast<std::size_t>(e.lambda.size()));
  os << "t,surface";
  for (const auto& n : names) os << ',' << n << "_pre";
  for (const auto& n : names) os << ',' << n << "_post";
  os << ",epsilon";
  for (std::size_t k = 0; k < nl; ++k) os << ",lambda_" << k + 1;
  os << '\n';
  for (const auto& e : traj.events) {
    const Vec v0 = sys.velocity(e.pre), v1 = sys.velocity(e.post);
    os << format_number(e.t) << ',' << e.label;
    for (Eigen::Index i = 0; i < v0.size(); ++i) os << ',' << format_number(v0[i]);
    for (Eigen::Index i = 0; i < v1.size(); ++i) os << ',' << format_number(v1[i]);
    os << ',' << format_number(e.epsilon);
    for (std::size_t k = 0; k < nl; ++k)
      os << ',' << (k < static_cast<std::size_t>(e.lambda.size()) ? format_number(e.lambda[k]) : "");
    os << '\n';
  }
}

Json trajectory_summary(const HybridSystem& sys, const HybridTrajectory& traj) {
  Json j;
  j["system"] = sys.name;
  j["state_names"] = sys.state_names;
  j["termination"] = to_string(traj.reason);
  j["detail"] = traj.detail;
  j["final_time"] = number(traj.final_time);
  j["final_state"] = vec_json(traj.final_state);
  j["impacts"] = traj.events.size();
  j["steps"] = traj.steps;
  if (sys.energy && traj.final_state.size()) {
    double e0 = std::nan(""), drift = 0;
    if (!traj.arcs.empty() && !traj.arcs.front().states.empty()) {
      e0 = sys.energy(traj.arcs.front().states.front());
      for (const auto& arc : traj.arcs)
        for (const auto& x : arc.states) drift = std::max(drift, std::abs(sys.energy(x) - e0));
    }
    j["initial_energy"] = number(e0);
    j["final_energy"] = number(sys.energy(traj.final_state));
    j["max_energy_drift"] = number(drift);
  }
  return j;
}

Json to_json(const IntegratorConfig& c) {
  Json j;
  j["rtol"] = c.rtol;
  j["atol"] = c.atol;
  j["max_step"] = c.max_step;
  j["event_tolerance"] = c.event_tolerance;
  j["interior_samples"] = c.interior_samples;
  j["max_impacts"] = c.max_impacts;
  j["min_impact_gap"] = c.min_impact_gap;
  j["zeno_window"] = c.zeno_window;
  j["domain_bound"] = c.domain_bound;
  j["sample_interval"] = c.sample_interval;
  return j;
}

Json to_json(const ZenoReport& r) {
  Json j;
  j["classification"] = to_string(r.classification);
  j["impacts"] = r.impact_times.size();
  j["ratio"] = r.ratio ? number(*r.ratio) : Json(nullptr);
  j["t_infinity"] = r.t_infinity ? number(*r.t_infinity) : Json(nullptr);
  j["max_state_norm"] = number(r.max_state_norm);
  Json times = Json::array(), gaps = Json::array(), tang = Json::array();
  for (double t : r.impact_times) times.push_back(number(t));
  for (double g : r.gaps) gaps.push_back(number(g));
  for (double d : r.tangency_distance) tang.push_back(number(d));
  j["impact_times"] = times;
  j["gaps"] = gaps;
  j["tangency_distance"] = tang;
  return j;
}

void write_grid_csv(std::ostream& os, const DensityGrid& g) {
  for (std::size_t c = 0; c < g.spec.cols; ++c) os << (c ? "," : "") << "col_" << c;
  os << '\n';
  for (std::size_t r = 0; r < g.spec.rows; ++r) {
    for (std::size_t c = 0; c < g.spec.cols; ++c)
      os << (c ? "," : "") << format_number(g.density[r * g.spec.cols + c]);
    os << '\n';
  }
}

Json grid_sidecar(const DensityGrid& g) {
  Json j;
  j["x_bounds"] = {-g.spec.a, g.spec.a};
  j["y_bounds"] = {-g.spec.b, g.spec.b};
  j["rows"] = g.spec.rows;
  j["cols"] = g.spec.cols;
  j["layout"] = "row-major, row 0 = lowest y, col 0 = lowest x";
  j["seed"] = g.seed;
  const auto per = [&](std::uint64_t n) { return g.trajectories ? n / g.trajectories : n; };
  j["iterations"] = per(g.samples);  // per trajectory
  j["burn_in"] = per(g.burn_in);
  j["samples"] = g.samples;
  j["trajectories"] = g.trajectories;
  j["outside"] = g.outside;
  j["occupied_cells"] = g.occupied();
  j["total_mass"] = g.total_mass();
  j["complete"] = g.complete;
  j["termination"] = g.termination;
  j["kind"] = "empirical histogram";
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace hybrid
