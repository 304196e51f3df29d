#pragma once

// Continuous dynamics on T*Q: Hamiltonian vector fields, Poisson brackets and
// the nonholonomic (Lagrange-d'Alembert) field in momentum coordinates.

#include "hybrid/geometry.hpp"

#include <functional>
#include <memory>

namespace hybrid {

enum class Representation { Momentum, Velocity };

struct HybridState {
  Vec q;
  Vec fiber;  // p or qdot, depending on rep
  Representation rep = Representation::Momentum;

  static HybridState momentum(Vec q, Vec p) {
    return {std::move(q), std::move(p), Representation::Momentum};
  }
  static HybridState velocity(Vec q, Vec v) {
    return {std::move(q), std::move(v), Representation::Velocity};
  }
};

/// p = g qdot or qdot = g^-1 p, whichever switches the representation.
HybridState legendre(const MechanicalSystem& sys, const HybridState& state);

/// Stacks (q, p) into one phase-space vector and back.
Vec stack(const Vec& q, const Vec& p);
Vec config_part(const Vec& x);
Vec fiber_part(const Vec& x);

class Hamiltonian {
 public:
  virtual ~Hamiltonian() = default;
  virtual std::size_t dimension() const = 0;
  virtual double value(const Vec& q, const Vec& p) const = 0;
  virtual Vec dq(const Vec& q, const Vec& p) const = 0;
  virtual Vec dp(const Vec& q, const Vec& p) const = 0;
};

/// H(q,p) = 1/2 p^T g^-1 p + V(q).
class NaturalHamiltonian final : public Hamiltonian {
 public:
  explicit NaturalHamiltonian(std::shared_ptr<const MechanicalSystem> sys);

  std::size_t dimension() const override { return sys_->dimension(); }
  double value(const Vec& q, const Vec& p) const override;
  Vec dq(const Vec& q, const Vec& p) const override;
  Vec dp(const Vec& q, const Vec& p) const override;

  const MechanicalSystem& system() const { return *sys_; }
  std::shared_ptr<const MechanicalSystem> system_ptr() const { return sys_; }

 private:
  std::shared_ptr<const MechanicalSystem> sys_;
};

/// Arbitrary H with optional closed-form partials; missing partials use
/// central differences.
class GenericHamiltonian final : public Hamiltonian {
 public:
  using Value = std::function<double(const Vec&, const Vec&)>;
  using Partial = std::function<Vec(const Vec&, const Vec&)>;

  GenericHamiltonian(std::size_t n, Value value, Partial dq = {}, Partial dp = {},
                     double fd_step = kDefaultFdStep);

  std::size_t dimension() const override { return n_; }
  double value(const Vec& q, const Vec& p) const override { return value_(q, p); }
  Vec dq(const Vec& q, const Vec& p) const override;
  Vec dp(const Vec& q, const Vec& p) const override;

 private:
  std::size_t n_;
  Value value_;
  Partial dq_, dp_;
  double fd_step_;
};

struct PhaseVelocity {
  Vec qdot;
  Vec pdot;
  Vec stacked() const { return stack(qdot, pdot); }
};

PhaseVelocity hamiltonian_vector_field(const Hamiltonian& H, const Vec& q, const Vec& p);

/// A phase-space function with its partial derivatives.
struct Observable {
  std::function<double(const Vec&, const Vec&)> value;
  std::function<Vec(const Vec&, const Vec&)> dq;
  std::function<Vec(const Vec&, const Vec&)> dp;
};

Observable observable_of(const Hamiltonian& H);

/// P(W^alpha)(q,p) = p . W^alpha(q), with dq from the chain rule through g and eta.
Observable constraint_momentum(const MechanicalSystem& sys, std::size_t alpha);

/// {f,g} = f_q . g_p - f_p . g_q
double poisson_bracket(const Observable& f, const Observable& g, const Vec& q, const Vec& p);

/// dW/dq^k as n x m matrices: g^-1 (d_k eta^T - d_k g W).
std::vector<Mat> constraint_field_derivatives(const MechanicalSystem& sys, const Vec& q,
                                              const LocalFrame& frame);

/// Hamiltonian field plus multiplier force m_{ab} {H, P(W^a)} eta^b, which keeps
/// every P(W^a) constant along the flow (globally, not only on D*).
PhaseVelocity nonholonomic_vector_field(const Hamiltonian& H, const MechanicalSystem& sys,
                                        const Vec& q, const Vec& p);

}  // namespace hybrid
