#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybrid/stats.hpp"
#include "hybrid/zoo.hpp"

#include <cmath>
#include <set>

using namespace hybrid;

namespace {

HybridSystem still() {
  HybridSystem s;
  s.name = "still";
  s.state_names = {"x", "y"};
  s.field = [](const Vec& x) { return Vec::Zero(x.size()).eval(); };
  s.impact = [](std::size_t, const Vec& x) { return ImpactResult{x}; };
  return s;
}

PlanarProjection first_two = [](const Vec& x) { return std::array<double, 2>{x[0], x[1]}; };

DensityGrid manual(std::vector<double> d, std::size_t rows, std::size_t cols) {
  DensityGrid g;
  g.spec.rows = rows;
  g.spec.cols = cols;
  g.density = std::move(d);
  return g;
}

}  // namespace

TEST_CASE("a stationary state fills one cell") {
  DensityRun run;
  run.iterations = 50;
  run.burn_in = 5;
  run.grid = {1.0, 1.0, 10, 10};
  Vec x0(2);
  x0 << 0.35, -0.55;  // column 6, row 2
  const auto g = accumulate_density(still(), first_two, x0, run, {});
  CHECK(g.samples == 50);
  CHECK(g.burn_in == 5);
  CHECK(g.occupied() == 1);
  CHECK(g.counts[2 * 10 + 6] == 50);
  CHECK(g.density[2 * 10 + 6] == 1.0);
  CHECK(g.complete);

  x0 << 3.0, 0.0;
  const auto out = accumulate_density(still(), first_two, x0, run, {});
  CHECK(out.outside == 50);
  CHECK(out.occupied() == 0);
  CHECK(out.total_mass() == 0.0);
}

TEST_CASE("bad grids are rejected") {
  DensityRun run;
  run.grid.rows = 0;
  CHECK_THROWS_AS(accumulate_density(still(), first_two, Vec::Zero(2), run, {}), std::invalid_argument);
  run.grid = {-1.0, 1.0, 4, 4};
  CHECK_THROWS_AS(accumulate_density(still(), first_two, Vec::Zero(2), run, {}), std::invalid_argument);
}

TEST_CASE("total variation") {
  const auto a = manual({0.5, 0.5, 0, 0}, 2, 2);
  const auto b = manual({0, 0.5, 0.5, 0}, 2, 2);
  CHECK(total_variation(a, b) == doctest::Approx(0.5));
  CHECK(total_variation(a, a) == 0.0);
  CHECK(total_variation(a, manual({0, 0, 0.5, 0.5}, 2, 2)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(total_variation(a, manual({1}, 1, 1)), std::invalid_argument);
}

TEST_CASE("bouncer orbit visits two cells") {
  const ZooEntry e = make_interval_bouncer(1.0);
  Vec x0(2);
  x0 << 0.3, 1.0;
  DensityRun run;
  run.iterations = 40;
  run.burn_in = 0;
  run.grid = {1.0, 1.5, 8, 8};
  const PlanarProjection xv = [](const Vec& x) { return std::array<double, 2>{x[0], x[1]}; };
  const auto g = accumulate_density(e.system, xv, x0, run, {});
  CHECK(g.occupied() == 2);
  CHECK(g.counts[6 * 8 + 5] == 20);  // (0.3, 1)
  CHECK(g.counts[1 * 8 + 6] == 20);  // (0.7, -1)
}

TEST_CASE("sleigh grids") {
  const ZooEntry e = make_zoo_entry("chaplygin-sleigh");
  DensityRun run;
  run.iterations = 200;
  run.burn_in = 20;
  run.seed = 4;
  run.grid = {e.table->a, e.table->b, 20, 20};

  const auto a = accumulate_density(e.system, e.planar_position, e.default_state, run, {});
  const auto b = accumulate_density(e.system, e.planar_position, e.default_state, run, {});
  CHECK(a.counts == b.counts);
  CHECK(a.density == b.density);
  CHECK(std::abs(a.total_mass() - 1.0) <= 1e-12);
  CHECK(a.samples == 200);

  const auto sampler = [&](std::mt19937_64& r) { return e.sample_state(r); };
  const auto e1 = ensemble_density(e.system, e.planar_position, sampler, 3, run, {}, 1);
  const auto e3 = ensemble_density(e.system, e.planar_position, sampler, 3, run, {}, 3);
  CHECK(e1.density == e3.density);
  CHECK(e1.trajectories == 3);
  CHECK(e1.samples == 600);
  CHECK(std::abs(e1.total_mass() - 1.0) <= 1e-12);

  // one trajectory reproduces accumulate_density from the same start
  std::mt19937_64 rng(trajectory_seed(run.seed, 0));
  const Vec start = e.sample_state(rng);
  const auto single = ensemble_density(e.system, e.planar_position, sampler, 1, run, {}, 1);
  const auto direct = accumulate_density(e.system, e.planar_position, start, run, {});
  CHECK(single.counts == direct.counts);

  // two-trajectory ensemble is the mean of the two normalized grids
  std::mt19937_64 r1(trajectory_seed(run.seed, 1));
  const auto second = accumulate_density(e.system, e.planar_position, e.sample_state(r1), run, {});
  const auto pair = ensemble_density(e.system, e.planar_position, sampler, 2, run, {}, 2);
  double err = 0;
  for (std::size_t i = 0; i < pair.density.size(); ++i)
    err = std::max(err, std::abs(pair.density[i] - 0.5 * (direct.density[i] + second.density[i])));
  CHECK(err <= 1e-15);

  run.seed = 5;
  const auto other = ensemble_density(e.system, e.planar_position, sampler, 3, run, {}, 1);
  CHECK(total_variation(e1, other) > 0);
}

TEST_CASE("trajectory seeds") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m : {0ULL, 1ULL, 42ULL})
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(trajectory_seed(m, i));
  CHECK(seen.size() == 300);
  CHECK(trajectory_seed(7, 3) == trajectory_seed(7, 3));
}

TEST_CASE("vertical disk ensembles agree") {
  const ZooEntry e = make_zoo_entry("vertical-disk");
  DensityRun run;
  run.iterations = 400;
  run.burn_in = 50;
  run.grid = {e.table->a, e.table->b, 4, 4};
  const auto sampler = [&](std::mt19937_64& r) { return e.sample_state(r); };
  run.seed = 1;
  const auto a = ensemble_density(e.system, e.planar_position, sampler, 4, run, {});
  run.seed = 2;
  const auto b = ensemble_density(e.system, e.planar_position, sampler, 4, run, {});
  CHECK(a.complete);
  CHECK(b.complete);
  CHECK(total_variation(a, b) < 0.25);
}
