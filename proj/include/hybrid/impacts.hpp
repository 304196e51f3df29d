#pragma once

// Elastic impact maps on the velocity side and the augmented differential.

#include "hybrid/system.hpp"

namespace hybrid {

struct ImpactOutcome {
  Vec qdot;
  double epsilon = 0.0;
  Vec lambda;  // one entry per constraint
  bool grazing = false;
};

inline constexpr double kGrazingTolerance = 1e-8;

/// |dh(qdot)| < 1e-8 |qdot|_g
bool is_grazing(const Mat& g, const Vec& dh, const Vec& qdot);

/// qdot - 2 dh(qdot) / g(grad h, grad h) grad h
ImpactOutcome holonomic_impact(const MechanicalSystem& sys, const ImpactSurface& surface,
                               const Vec& q, const Vec& qdot);

/// Restricted nonholonomic map on on-constraint velocities. Throws
/// std::invalid_argument if eta(qdot) != 0, ModelError if the denominator
/// dh(pi_D grad h) vanishes.
ImpactOutcome nonholonomic_impact(const MechanicalSystem& sys, const ImpactSurface& surface,
                                  const Vec& q, const Vec& qdot);

/// Global extension, linear in qdot and defined off the constraint
/// distribution.
ImpactOutcome nonholonomic_impact_global(const MechanicalSystem& sys,
                                         const ImpactSurface& surface, const Vec& q,
                                         const Vec& qdot);

/// Denominator dh(grad h) - m_{ab} dh(W^a) dh(W^b) = dh(pi_D grad h).
double impact_denominator(const MechanicalSystem& sys, const ImpactSurface& surface,
                          const Vec& q);

/// Splits v = a X(x) + u with u tangent to the guard and returns
/// a X(Delta(x)) + Delta_* u, the pushforward taken by central differences
/// with one Richardson level. Throws TransversalityError when X is tangent.
Vec augmented_differential(const HybridSystem& sys, std::size_t guard, const Vec& x,
                           const Vec& v, double fd_step = 1e-6);

/// Pushforward of a tangent vector to the guard under the impact map.
Vec impact_pushforward(const HybridSystem& sys, std::size_t guard, const Vec& x, const Vec& u,
                       double fd_step = 1e-6);

}  // namespace hybrid
