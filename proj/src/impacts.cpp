#include "hybrid/impacts.hpp"

#include <cmath>
#include <stdexcept>

namespace hybrid {

namespace {

struct WallData {
  LocalFrame frame;
  Vec dh;       // covector components
  Vec grad;     // g^-1 dh
  Vec dhW;      // dh(W^a)
  double D = 0; // dh(pi_D grad h)
};

WallData wall_data(const MechanicalSystem& sys, const ImpactSurface& surface, const Vec& q) {
  WallData w;
  w.frame = local_frame(sys, q);
  w.dh = surface.h.gradient(q);
  w.grad = w.frame.g_inv * w.dh;
  w.dhW = w.frame.W.transpose() * w.dh;
  const double dhgrad = w.dh.dot(w.grad);
  w.D = dhgrad;
  if (w.dhW.size() > 0) w.D -= w.dhW.dot(w.frame.mass_inv * w.dhW);
  if (!(w.D > 1e-12 * dhgrad))
    throw ModelError("impact denominator vanishes on surface '" + surface.label +
                     "' (nontrivial impact condition fails)");
  return w;
}

}  // namespace

bool is_grazing(const Mat& g, const Vec& dh, const Vec& qdot) {
  const double speed = std::sqrt(std::max(0.0, qdot.dot(g * qdot)));
  return std::abs(dh.dot(qdot)) < kGrazingTolerance * speed || speed == 0.0;
}

ImpactOutcome holonomic_impact(const MechanicalSystem& sys, const ImpactSurface& surface,
                               const Vec& q, const Vec& qdot) {
  const Mat g = sys.metric(q);
  const Vec dh = surface.h.gradient(q);
  ImpactOutcome out;
  out.lambda = Vec::Zero(0);
  if (is_grazing(g, dh, qdot)) {
    out.qdot = qdot;
    out.grazing = true;
    return out;
  }
  const Vec grad = g.llt().solve(dh);
  out.epsilon = -2.0 * dh.dot(qdot) / dh.dot(grad);
  out.qdot = qdot + out.epsilon * grad;
  return out;
}

double impact_denominator(const MechanicalSystem& sys, const ImpactSurface& surface,
                          const Vec& q) {
  return wall_data(sys, surface, q).D;
}

ImpactOutcome nonholonomic_impact(const MechanicalSystem& sys, const ImpactSurface& surface,
                                  const Vec& q, const Vec& qdot) {
  const WallData w = wall_data(sys, surface, q);
  const Vec c = w.frame.eta * qdot;
  const double speed = std::sqrt(std::max(0.0, qdot.dot(w.frame.g * qdot)));
  if (c.size() > 0 && c.norm() > 1e-9 * std::max(1.0, w.frame.eta.norm() * qdot.norm()))
    throw std::invalid_argument("velocity does not satisfy the constraints");
  ImpactOutcome out;
  out.lambda = Vec::Zero(c.size());
  const double rate = w.dh.dot(qdot);
  if (std::abs(rate) < kGrazingTolerance * speed || speed == 0.0) {
    out.qdot = qdot;
    out.grazing = true;
    return out;
  }
  out.epsilon = -2.0 * rate / w.D;
  if (c.size() > 0) out.lambda = 2.0 * (w.frame.mass_inv * w.dhW) * rate / w.D;
  out.qdot = qdot + w.frame.W * out.lambda + out.epsilon * w.grad;
  return out;
}

ImpactOutcome nonholonomic_impact_global(const MechanicalSystem& sys,
                                         const ImpactSurface& surface, const Vec& q,
                                         const Vec& qdot) {
  const WallData w = wall_data(sys, surface, q);
  ImpactOutcome out;
  const std::size_t m = w.dhW.size();
  out.lambda = Vec::Zero(m);
  if (is_grazing(w.frame.g, w.dh, qdot)) {
    out.qdot = qdot;
    out.grazing = true;
    return out;
  }
  // s = dh(qdot) - m_{ab} dh(W^b) eta^a(qdot) = dh(pi_D qdot)
  const Vec mdhW = m > 0 ? Vec(w.frame.mass_inv * w.dhW) : Vec::Zero(0);
  double s = w.dh.dot(qdot);
  if (m > 0) s -= mdhW.dot(w.frame.eta * qdot);
  out.epsilon = -2.0 * s / w.D;
  if (m > 0) out.lambda = 2.0 * mdhW * s / w.D;
  out.qdot = qdot + w.frame.W * out.lambda + out.epsilon * w.grad;
  return out;
}

Vec impact_pushforward(const HybridSystem& sys, std::size_t guard, const Vec& x, const Vec& u,
                       double fd_step) {
  const double un = u.norm();
  if (un == 0.0) return Vec::Zero(x.size());
  const double base = fd_step * std::max(1.0, x.norm()) / un;
  auto diff = [&](double d) {
    const Vec a = sys.impact(guard, x + d * u).state;
    const Vec b = sys.impact(guard, x - d * u).state;
    return Vec((a - b) / (2.0 * d));
  };
  const Vec coarse = diff(base);
  const Vec fine = diff(0.5 * base);
  return (4.0 * fine - coarse) / 3.0;
}

Vec augmented_differential(const HybridSystem& sys, std::size_t guard, const Vec& x,
                           const Vec& v, double fd_step) {
  const Vec X = sys.field(x);
  const Vec dh = sys.guards[guard].gradient(x);
  const double rate = dh.dot(X);
  if (std::abs(rate) < kGrazingTolerance * dh.norm() * X.norm() || rate == 0.0)
    throw TransversalityError("vector field is tangent to guard '" + sys.guards[guard].label +
                              "'");
  const double a = dh.dot(v) / rate;
  const Vec u = v - a * X;
  const ImpactResult post = sys.impact(guard, x);
  return a * sys.field(post.state) + impact_pushforward(sys, guard, x, u, fd_step);
}

}  // namespace hybrid
