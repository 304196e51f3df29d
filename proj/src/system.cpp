#include "hybrid/system.hpp"

#include "hybrid/impacts.hpp"

namespace hybrid {

HybridSystem mechanical_bundle(std::shared_ptr<const MechanicalSystem> sys,
                               std::vector<ImpactSurface> surfaces, std::string name) {
  auto H = std::make_shared<NaturalHamiltonian>(sys);
  return mechanical_bundle(std::move(sys), std::move(H), std::move(surfaces), std::move(name));
}

HybridSystem mechanical_bundle(std::shared_ptr<const MechanicalSystem> sys,
                               std::shared_ptr<const Hamiltonian> H,
                               std::vector<ImpactSurface> surfaces, std::string name) {
  const std::size_t n = sys->dimension();
  HybridSystem out;
  out.name = std::move(name);
  out.config_dimension = n;
  for (const auto& c : sys->chart().names()) out.state_names.push_back(c);
  for (const auto& c : sys->chart().names()) out.state_names.push_back("p_" + c);

  out.field = [sys, H, n](const Vec& x) {
    const Vec q = x.head(n), p = x.tail(n);
    return nonholonomic_vector_field(*H, *sys, q, p).stacked();
  };
  auto walls = std::make_shared<std::vector<ImpactSurface>>(std::move(surfaces));
  for (std::size_t k = 0; k < walls->size(); ++k) {
    Guard gd;
    gd.label = (*walls)[k].label;
    gd.value = [walls, k, n](const Vec& x) { return (*walls)[k].h(Vec(x.head(n))); };
    gd.gradient = [walls, k, n](const Vec& x) {
      Vec g = Vec::Zero(2 * n);
      g.head(n) = (*walls)[k].h.gradient(Vec(x.head(n)));
      return g;
    };
    out.guards.push_back(std::move(gd));
  }
  out.impact = [sys, walls, n](std::size_t k, const Vec& x) {
    const Vec q = x.head(n);
    const Mat g = sys->metric(q);
    const Vec v = g.llt().solve(Vec(x.tail(n)));
    const ImpactOutcome r = nonholonomic_impact_global(*sys, (*walls)[k], q, v);
    ImpactResult res;
    res.state = stack(q, g * r.qdot);
    res.epsilon = r.epsilon;
    res.lambda = r.lambda;
    res.grazing = r.grazing;
    return res;
  };
  out.energy = [H, n](const Vec& x) { return H->value(x.head(n), x.tail(n)); };
  out.velocity = [H, n](const Vec& x) { return H->dp(x.head(n), x.tail(n)); };
  return out;
}

}  // namespace hybrid
