#pragma once

// Coordinates (q, p_I) on the constraint submanifold D* = {P(W^a) = 0} of
// T*Q. The dependent momenta p_J solve W_J^T p_J = -W_I^T p_I. In these
// coordinates the nonholonomic volume is |det W_J(q)|^-1 dq dp_I.

#include "hybrid/system.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace hybrid {

class ConstrainedChart {
 public:
  ConstrainedChart(std::shared_ptr<const MechanicalSystem> sys, std::vector<std::size_t> dependent);

  /// Dependent momenta chosen to maximize |det W_J(q)|.
  static ConstrainedChart best_at(std::shared_ptr<const MechanicalSystem> sys, const Vec& q);

  std::size_t dimension() const { return 2 * n_ - dependent_.size(); }
  const std::vector<std::size_t>& dependent() const { return dependent_; }
  const std::vector<std::size_t>& independent() const { return independent_; }

  Vec lift(const Vec& y) const;      // (q, p_I) -> (q, p) on D*
  Vec project(const Vec& x) const;   // (q, p) -> (q, p_I)
  double volume_factor(const Vec& q) const;  // |det W_J(q)|^-1

  /// Field, guards and impacts of a full (q, p) bundle transported to the chart.
  HybridSystem reduce(const HybridSystem& full) const;

  /// f(lift(y)) |det W_J|^-1, a density on the chart for f given w.r.t. mu_C.
  std::function<double(const Vec&)> reduce_density(std::function<double(const Vec&)> f) const;

 private:
  std::shared_ptr<const MechanicalSystem> sys_;
  std::size_t n_;
  std::vector<std::size_t> dependent_, independent_;
};

}  // namespace hybrid
