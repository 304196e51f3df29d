#include "hybrid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace hybrid {

std::size_t DensityGrid::occupied() const {
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; }));
}

double DensityGrid::total_mass() const {
  double s = 0;
  for (double d : density) s += d;
  return s;
}

namespace {

void check_run(const DensityRun& run) {
  if (run.grid.rows == 0 || run.grid.cols == 0) throw std::invalid_argument("empty grid");
  if (!(run.grid.a > 0) || !(run.grid.b > 0)) throw std::invalid_argument("grid bounds must be positive");
}

void normalize(DensityGrid& g) {
  g.density.assign(g.counts.size(), 0.0);
  const std::uint64_t inside = g.samples - g.outside;
  if (inside == 0) return;
  for (std::size_t i = 0; i < g.counts.size(); ++i)
    g.density[i] = static_cast<double>(g.counts[i]) / static_cast<double>(inside);
}

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 step
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DensityGrid accumulate_density(const HybridSystem& sys, const PlanarProjection& project,
                               const Vec& x0, const DensityRun& run, const IntegratorConfig& cfg) {
  check_run(run);
  DensityGrid g;
  g.spec = run.grid;
  g.seed = run.seed;
  g.counts.assign(run.grid.rows * run.grid.cols, 0);
  IntegratorConfig c = cfg;
  c.record_arcs = false;
  Vec x = x0;
  const std::uint64_t total = run.burn_in + run.iterations;
  for (std::uint64_t it = 0; it < total; ++it) {
    try {
      x = time_1_map(sys, x, c);
    } catch (const FlowTerminated& e) {
      g.complete = false;
      g.termination = e.what();
      break;
    }
    if (it < run.burn_in) {
      ++g.burn_in;
      continue;
    }
    ++g.samples;
    const auto p = project(x);
    const double u = (p[0] + g.spec.a) / (2 * g.spec.a);
    const double v = (p[1] + g.spec.b) / (2 * g.spec.b);
    if (!(u >= 0 && u <= 1 && v >= 0 && v <= 1)) {
      ++g.outside;
      continue;
    }
    const auto col = std::min(g.spec.cols - 1, static_cast<std::size_t>(u * static_cast<double>(g.spec.cols)));
    const auto row = std::min(g.spec.rows - 1, static_cast<std::size_t>(v * static_cast<double>(g.spec.rows)));
    ++g.counts[row * g.spec.cols + col];
  }
  normalize(g);
  return g;
}

DensityGrid ensemble_density(const HybridSystem& sys, const PlanarProjection& project,
                             const std::function<Vec(std::mt19937_64&)>& sampler,
                             std::size_t n_traj, const DensityRun& run,
                             const IntegratorConfig& cfg, unsigned workers) {
  check_run(run);
  if (n_traj == 0) throw std::invalid_argument("ensemble needs at least one trajectory");
  std::vector<Vec> starts(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) {
    std::mt19937_64 rng(trajectory_seed(run.seed, i));
    starts[i] = sampler(rng);
  }
  std::vector<DensityGrid> parts(n_traj);
  std::vector<std::exception_ptr> errors(n_traj);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_traj));
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < n_traj; i += workers) {
      try {
        DensityRun r = run;
        r.seed = trajectory_seed(run.seed, i);
        parts[i] = accumulate_density(sys, project, starts[i], r, cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (n_traj == 1) {
    parts[0].seed = run.seed;
    return parts[0];
  }
  DensityGrid g;
  g.spec = run.grid;
  g.seed = run.seed;
  g.trajectories = n_traj;
  g.counts.assign(run.grid.rows * run.grid.cols, 0);
  g.density.assign(g.counts.size(), 0.0);
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < g.counts.size(); ++i) {
      g.counts[i] += p.counts[i];
      g.density[i] += p.density[i] / static_cast<double>(n_traj);
    }
    g.samples += p.samples;
    g.burn_in += p.burn_in;
    g.outside += p.outside;
    if (!p.complete) {
      g.complete = false;
      if (g.termination.empty()) g.termination = p.termination;
    }
  }
  return g;
}

double total_variation(const DensityGrid& a, const DensityGrid& b) {
  if (a.density.size() != b.density.size()) throw std::invalid_argument("grid shapes differ");
  double s = 0;
  for (std::size_t i = 0; i < a.density.size(); ++i) s += std::abs(a.density[i] - b.density[i]);
  return 0.5 * s;
}

}  // namespace hybrid
