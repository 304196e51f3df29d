#pragma once

// CSV and JSON writers for trajectories, events, grids and reports.

#include "hybrid/flow.hpp"
#include "hybrid/stats.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace hybrid {

using Json = nlohmann::ordered_json;

/// Shortest round-trip text for a double ("%.17g"), with nan/inf spelled out.
std::string format_number(double v);

/// Columns: t, one per state name, arc (index of the smooth arc).
void write_trajectory_csv(std::ostream& os, const HybridSystem& sys, const HybridTrajectory& traj);

/// Columns: t, surface, pre and post velocities, epsilon, lambda_k.
void write_events_csv(std::ostream& os, const HybridSystem& sys, const HybridTrajectory& traj);

Json trajectory_summary(const HybridSystem& sys, const HybridTrajectory& traj);
Json to_json(const IntegratorConfig& cfg);
Json to_json(const ZenoReport& rep);

/// Grid as a rows x cols matrix of normalized densities, first row = lowest y.
void write_grid_csv(std::ostream& os, const DensityGrid& grid);
Json grid_sidecar(const DensityGrid& grid);

/// Writes `text` to `path`, throwing std::runtime_error on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace hybrid
