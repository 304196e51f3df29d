#pragma once

// Numerical checks of hybrid invariance for forms and volumes.

#include "hybrid/constrained_chart.hpp"
#include "hybrid/flow.hpp"
#include "hybrid/forms.hpp"
#include "hybrid/system.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace hybrid {

using Field = std::function<Vec(const Vec&)>;
using Density = std::function<double(const Vec&)>;

struct AnalysisOptions {
  double fd_step = 1e-6;          // pushforwards of maps
  double divergence_step = 1e-4;  // divergence and dg stencils (Richardson)
  double lie_time = 1e-2;
  int lie_substeps = 4;           // RK4 substeps for the short flows
  double volume_step = 1e-5;      // stencil for Jacobians of the hybrid flow
  std::uint64_t seed = 20240611;
};

struct ImpactPoint {
  std::size_t guard = 0;
  Vec state;
};

/// Central differences with one Richardson level.
Vec fd_pushforward(const std::function<Vec(const Vec&)>& map, const Vec& x, const Vec& u,
                   double step);
Mat fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& x, double step);

/// Classical RK4 flow for time t in `substeps` steps (t may be negative).
Vec short_flow(const Field& X, const Vec& x, double t, int substeps);

/// Orthonormal basis (N x N-1) of ker dh at x.
Mat guard_tangent_basis(const HybridSystem& sys, std::size_t guard, const Vec& x);

double lie_derivative_residual(const SampledKForm& form, const Field& X,
                               const std::vector<Vec>& points, const AnalysisOptions& opts = {});

/// Compares i_X alpha on tangent vectors to the guard before the impact with
/// its value on the pushed-forward vectors after it.
double energy_condition_residual(const SampledKForm& form, const HybridSystem& sys,
                                 const std::vector<ImpactPoint>& points,
                                 const AnalysisOptions& opts = {});

/// Compares alpha restricted to the guard before and after the impact. Zero for
/// forms of degree >= dim, whose restriction vanishes.
double specular_condition_residual(const SampledKForm& form, const HybridSystem& sys,
                                   const std::vector<ImpactPoint>& points,
                                   const AnalysisOptions& opts = {});

/// f(Dx) det[X(Dx), D_* B] / (f(x) det[X(x), B]) for a basis B of the guard.
double hybrid_jacobian(const HybridSystem& sys, const Density& density, const ImpactPoint& point,
                       const AnalysisOptions& opts = {});

/// (2 dh(pi_D qdot) - dh(qdot)) / dh(qdot) with qdot = dH/dp.
double nonholonomic_jacobian_closed_form(const MechanicalSystem& sys, const Hamiltonian& H,
                                         const ImpactSurface& surface, const Vec& q,
                                         const Vec& p);

/// (1/f) sum_i d(f X^i)/dx^i at each point. Throws std::invalid_argument if f <= 0.
std::vector<double> divergence(const Field& X, const Density& density,
                               const std::vector<Vec>& points, const AnalysisOptions& opts = {});

/// m_{ab} L_{W^a} eta^b as a covector at q.
Vec theta_C(const MechanicalSystem& sys, const Vec& q);

struct CohomologyResidual {
  double continuous = 0;  // max |dg(X) + div_mu X|
  double impact = 0;      // max |g o Delta - g + ln J_mu|
};

CohomologyResidual cohomology_residual(const HybridSystem& sys, const Density& g,
                                       const Density& density, const std::vector<Vec>& points,
                                       const std::vector<ImpactPoint>& impact_points,
                                       const AnalysisOptions& opts = {});

/// Cohomology residuals on D* for a constrained bundle on (q, p): g and the
/// density are functions of the full state, the density relative to mu_C.
/// Each point is evaluated in its own best chart.
CohomologyResidual constrained_cohomology_residual(const HybridSystem& full,
                                                   std::shared_ptr<const MechanicalSystem> mech,
                                                   const Density& g, const Density& density,
                                                   const std::vector<Vec>& points,
                                                   const std::vector<ImpactPoint>& impact_points,
                                                   const AnalysisOptions& opts = {});

struct VolumeCheck {
  double deviation = 0;   // det(D phi_T) f(phi_T x) / f(x) - 1
  double determinant = 0;
  std::size_t impacts = 0;
};

/// Throws std::runtime_error if the stencil straddles a change in the impact
/// sequence or an impact lies within the stencil of t = 0 or T.
VolumeCheck flow_volume_check(const HybridSystem& sys, const Density& density, const Vec& x0,
                              double T, const IntegratorConfig& cfg,
                              const AnalysisOptions& opts = {});

/// Volume check on D* for a constrained bundle on (q, p). The density is with
/// respect to mu_C; the start and end points use their own best charts.
VolumeCheck constrained_flow_volume_check(const HybridSystem& full,
                                          std::shared_ptr<const MechanicalSystem> mech,
                                          const Density& density, const Vec& x0, double T,
                                          const IntegratorConfig& cfg,
                                          const AnalysisOptions& opts = {});

/// Symplectic defect |J^T Omega J - Omega| of the time-T hybrid flow map.
double symplectic_defect(const HybridSystem& sys, const Vec& x0, double T,
                         const IntegratorConfig& cfg, const AnalysisOptions& opts = {});

struct InvarianceReport {
  double lie = 0, energy = 0, specular = 0;
  std::size_t samples = 0, impact_samples = 0;
  double tolerance = 0;
  bool lie_pass = false, energy_pass = false, specular_pass = false;
  bool pass() const { return lie_pass && energy_pass && specular_pass; }
};

InvarianceReport check_invariance(const SampledKForm& form, const HybridSystem& sys,
                                  const std::vector<Vec>& points,
                                  const std::vector<ImpactPoint>& impact_points, double tolerance,
                                  const AnalysisOptions& opts = {});

}  // namespace hybrid
