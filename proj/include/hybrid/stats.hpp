#pragma once

// Occupancy histograms of iterated time-1 maps over a planar table.

#include "hybrid/flow.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace hybrid {

using PlanarProjection = std::function<std::array<double, 2>(const Vec&)>;

struct GridSpec {
  double a = 1.0;  // x in [-a, a]
  double b = 1.0;  // y in [-b, b]
  std::size_t rows = 100;
  std::size_t cols = 100;
};

struct DensityGrid {
  GridSpec spec;
  std::vector<std::uint64_t> counts;  // row-major, row = y bin, col = x bin
  std::vector<double> density;        // normalized, sums to 1
  std::uint64_t samples = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  std::size_t trajectories = 1;
  std::uint64_t outside = 0;  // samples that fell outside the bounds
  bool complete = true;
  std::string termination;    // empty when every run finished

  std::size_t occupied() const;
  double total_mass() const;
};

struct DensityRun {
  std::uint64_t iterations = 10000;  // recorded time-1 iterates
  std::uint64_t burn_in = 1000;      // discarded iterates before recording
  std::uint64_t seed = 0;
  GridSpec grid;
};

/// Iterates time_1_map burn_in + iterations times from x0 and bins the planar
/// projection of the recorded iterates.
DensityGrid accumulate_density(const HybridSystem& sys, const PlanarProjection& project,
                               const Vec& x0, const DensityRun& run, const IntegratorConfig& cfg);

/// Runs n_traj trajectories from sampled initial states on worker threads and
/// averages their normalized grids. Trajectory i draws its initial state from
/// an RNG seeded by a hash of (seed, i), so the result does not depend on the
/// number of workers.
DensityGrid ensemble_density(const HybridSystem& sys, const PlanarProjection& project,
                             const std::function<Vec(std::mt19937_64&)>& sampler,
                             std::size_t n_traj, const DensityRun& run,
                             const IntegratorConfig& cfg, unsigned workers = 0);

double total_variation(const DensityGrid& a, const DensityGrid& b);

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);

}  // namespace hybrid
