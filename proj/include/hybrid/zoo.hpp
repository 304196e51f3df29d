#pragma once

// Ready-made hybrid systems: Zeno toys, point billiards and nonholonomic
// billiards on an elliptic table.

#include "hybrid/analysis.hpp"
#include "hybrid/geometry.hpp"
#include "hybrid/system.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hybrid {

enum class ImpactKind { Holonomic, Nonholonomic, Custom };
std::string to_string(ImpactKind k);

struct TableSpec {
  enum class Shape { Ellipse, Strip } shape = Shape::Ellipse;
  double a = 2.0;  // ellipse semi-axes, or strip width (a) and plotting half-height (b)
  double b = 1.0;
};

struct DensityCandidate {
  std::string name;
  Density density;  // on the full state; w.r.t. mu_C for constrained entries
};

using Rng = std::mt19937_64;

struct ZooEntry {
  std::string name;
  std::string summary;
  std::map<std::string, double> parameters;
  std::shared_ptr<const MechanicalSystem> mechanics;  // null for raw vector fields
  std::vector<ImpactSurface> surfaces;                // configuration walls (mechanical)
  ImpactKind impact_kind = ImpactKind::Custom;
  HybridSystem system;
  std::optional<TableSpec> table;
  Vec default_state;
  std::function<std::array<double, 2>(const Vec&)> planar_position;
  std::function<Vec(Rng&)> sample_state;           // interior, on the constraints
  std::function<ImpactPoint(Rng&)> sample_impact;  // on a guard, approaching it
  std::vector<DensityCandidate> densities;
  std::optional<ImpactPoint> certificate;  // impact state where an invariance candidate fails

  std::size_t dof() const;
  std::size_t constraint_count() const { return mechanics ? mechanics->constraint_count() : 0; }
  const DensityCandidate& density(const std::string& name) const;
};

ZooEntry make_interval_bouncer(double alpha);
ZooEntry make_planar_box(double alpha, double beta);
ZooEntry make_tan_escape();
ZooEntry make_elliptic_billiard(TableSpec table = {});
ZooEntry make_chaplygin_sleigh(double m, double I, double a, double L, TableSpec table = {});
ZooEntry make_rolling_ball(double k, double r, TableSpec table = {});
ZooEntry make_vertical_disk(double m, double I, double J, double R, TableSpec table = {});
ZooEntry make_heisenberg_toy(TableSpec table = {TableSpec::Shape::Strip, 2.0, 2.0});

/// Stable ordering.
std::vector<std::string> zoo_names();

/// Builds a named entry; unknown parameters throw std::invalid_argument.
ZooEntry make_zoo_entry(const std::string& name, const std::map<std::string, double>& params = {});

/// Default parameters of a named entry.
std::map<std::string, double> zoo_defaults(const std::string& name);

std::vector<Vec> sample_states(const ZooEntry& e, std::size_t n, std::uint64_t seed);
std::vector<ImpactPoint> sample_impacts(const ZooEntry& e, std::size_t n, std::uint64_t seed);

struct DensityAudit {
  double divergence = 0;  // max |div X| w.r.t. f mu over the interior states
  double impact = 0;      // max |J(Delta) - 1| w.r.t. f mu over the impact states
  double energy = 0;      // max |H+ - H-|
  std::size_t states = 0, impacts = 0;
  std::optional<ImpactPoint> worst;  // impact state attaining `impact`
};

/// Continuous and impact residuals of a density candidate. For constrained
/// entries the residuals are taken on D* in the chart of each point, with f
/// relative to mu_C.
DensityAudit audit_density(const ZooEntry& e, const Density& f, const std::vector<Vec>& states,
                           const std::vector<ImpactPoint>& impacts,
                           const AnalysisOptions& opts = {});

}  // namespace hybrid
