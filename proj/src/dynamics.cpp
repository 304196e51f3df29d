#include "hybrid/dynamics.hpp"

#include <cmath>

namespace hybrid {

Vec stack(const Vec& q, const Vec& p) {
  Vec x(q.size() + p.size());
  x << q, p;
  return x;
}

Vec config_part(const Vec& x) { return x.head(x.size() / 2); }
Vec fiber_part(const Vec& x) { return x.tail(x.size() / 2); }

HybridState legendre(const MechanicalSystem& sys, const HybridState& state) {
  const Mat g = sys.metric(state.q);
  if (state.rep == Representation::Velocity)
    return HybridState::momentum(state.q, g * state.fiber);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw ModelError("metric is not invertible");
  return HybridState::velocity(state.q, llt.solve(state.fiber));
}

NaturalHamiltonian::NaturalHamiltonian(std::shared_ptr<const MechanicalSystem> sys)
    : sys_(std::move(sys)) {
  if (!sys_) throw ModelError("null mechanical system");
}

double NaturalHamiltonian::value(const Vec& q, const Vec& p) const {
  const Vec v = sys_->metric(q).llt().solve(p);
  return 0.5 * p.dot(v) + sys_->potential(q);
}

Vec NaturalHamiltonian::dp(const Vec& q, const Vec& p) const {
  return sys_->metric(q).llt().solve(p);
}

// dH/dq^k = -1/2 qdot^T (d_k g) qdot + dV/dq^k, since d(g^-1) = -g^-1 dg g^-1.
Vec NaturalHamiltonian::dq(const Vec& q, const Vec& p) const {
  const Vec v = dp(q, p);
  const auto dg = sys_->metric_derivatives(q);
  Vec out = sys_->potential_gradient(q);
  for (std::size_t k = 0; k < dg.size(); ++k) out[k] -= 0.5 * v.dot(dg[k] * v);
  return out;
}

GenericHamiltonian::GenericHamiltonian(std::size_t n, Value value, Partial dq, Partial dp,
                                       double fd_step)
    : n_(n), value_(std::move(value)), dq_(std::move(dq)), dp_(std::move(dp)),
      fd_step_(fd_step) {}

Vec GenericHamiltonian::dq(const Vec& q, const Vec& p) const {
  if (dq_) return dq_(q, p);
  Vec out(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    Vec a = q, b = q;
    const double h = fd_step_ * std::max(1.0, std::abs(q[k]));
    a[k] += h;
    b[k] -= h;
    out[k] = (value_(a, p) - value_(b, p)) / (2 * h);
  }
  return out;
}

Vec GenericHamiltonian::dp(const Vec& q, const Vec& p) const {
  if (dp_) return dp_(q, p);
  Vec out(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    Vec a = p, b = p;
    const double h = fd_step_ * std::max(1.0, std::abs(p[k]));
    a[k] += h;
    b[k] -= h;
    out[k] = (value_(q, a) - value_(q, b)) / (2 * h);
  }
  return out;
}

PhaseVelocity hamiltonian_vector_field(const Hamiltonian& H, const Vec& q, const Vec& p) {
  return {H.dp(q, p), -H.dq(q, p)};
}

Observable observable_of(const Hamiltonian& H) {
  return {[&H](const Vec& q, const Vec& p) { return H.value(q, p); },
          [&H](const Vec& q, const Vec& p) { return H.dq(q, p); },
          [&H](const Vec& q, const Vec& p) { return H.dp(q, p); }};
}

std::vector<Mat> constraint_field_derivatives(const MechanicalSystem& sys, const Vec& q,
                                              const LocalFrame& frame) {
  const auto dg = sys.metric_derivatives(q);
  const auto deta = sys.constraint_derivatives(q);
  std::vector<Mat> out;
  out.reserve(dg.size());
  for (std::size_t k = 0; k < dg.size(); ++k)
    out.push_back(frame.g_inv * (deta[k].transpose() - dg[k] * frame.W));
  return out;
}

Observable constraint_momentum(const MechanicalSystem& sys, std::size_t alpha) {
  const MechanicalSystem* s = &sys;
  Observable o;
  o.value = [s, alpha](const Vec& q, const Vec& p) {
    return p.dot(constraint_vector_fields(*s, q).col(alpha));
  };
  o.dp = [s, alpha](const Vec& q, const Vec&) {
    return Vec(constraint_vector_fields(*s, q).col(alpha));
  };
  o.dq = [s, alpha](const Vec& q, const Vec& p) {
    const LocalFrame f = local_frame(*s, q);
    const auto dW = constraint_field_derivatives(*s, q, f);
    Vec out(q.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) out[k] = p.dot(dW[k].col(alpha));
    return out;
  };
  return o;
}

double poisson_bracket(const Observable& f, const Observable& g, const Vec& q, const Vec& p) {
  return f.dq(q, p).dot(g.dp(q, p)) - f.dp(q, p).dot(g.dq(q, p));
}

PhaseVelocity nonholonomic_vector_field(const Hamiltonian& H, const MechanicalSystem& sys,
                                        const Vec& q, const Vec& p) {
  PhaseVelocity out = hamiltonian_vector_field(H, q, p);
  const std::size_t m = sys.constraint_count();
  if (m == 0) return out;
  const LocalFrame f = local_frame(sys, q);
  const auto dW = constraint_field_derivatives(sys, q, f);
  const Vec Hq = -out.pdot;
  const Vec& Hp = out.qdot;
  // {H, P(W^a)} = H_q . W^a - H_p . (p . dW^a/dq)
  Vec bracket(m);
  for (std::size_t a = 0; a < m; ++a) {
    double s = Hq.dot(f.W.col(a));
    for (Eigen::Index k = 0; k < q.size(); ++k) s -= Hp[k] * p.dot(dW[k].col(a));
    bracket[a] = s;
  }
  const Vec lambda = f.mass_inv * bracket;
  out.pdot += f.eta.transpose() * lambda;
  return out;
}

}  // namespace hybrid
