#pragma once

// A hybrid system on a chart of state space: a vector field, guard functions
// (interior h > 0) and an impact map per guard.

#include "hybrid/dynamics.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hybrid {

struct Guard {
  std::string label;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // in state coordinates
};

struct ImpactResult {
  Vec state;
  double epsilon = 0.0;
  Vec lambda;
  bool grazing = false;
};

struct HybridSystem {
  std::string name;
  std::vector<std::string> state_names;
  std::function<Vec(const Vec&)> field;
  std::vector<Guard> guards;
  std::function<ImpactResult(std::size_t, const Vec&)> impact;
  std::function<double(const Vec&)> energy;    // optional
  std::function<Vec(const Vec&)> velocity;     // optional; configuration velocity for reports
  std::size_t config_dimension = 0;            // leading coordinates that are positions

  std::size_t dimension() const { return state_names.size(); }
  // dh(X) at x; negative means approaching the wall.
  double guard_rate(std::size_t k, const Vec& x) const {
    return guards[k].gradient(x).dot(field(x));
  }
};

/// Bundle for a natural mechanical system on T*Q in (q, p) coordinates. The
/// field is the global nonholonomic field (plain Hamiltonian when m = 0) and
/// each wall uses the global nonholonomic impact map.
HybridSystem mechanical_bundle(std::shared_ptr<const MechanicalSystem> sys,
                               std::vector<ImpactSurface> surfaces, std::string name);

/// Same, with a user Hamiltonian in place of the natural one. Impacts still use
/// the metric of sys.
HybridSystem mechanical_bundle(std::shared_ptr<const MechanicalSystem> sys,
                               std::shared_ptr<const Hamiltonian> H,
                               std::vector<ImpactSurface> surfaces, std::string name);

}  // namespace hybrid
