#pragma once

// Configuration-space data of a natural mechanical system: a single chart, a
// Riemannian metric, a potential and a set of linear velocity constraints,
// together with the pointwise objects derived from them.

#include "hybrid/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hybrid {

inline constexpr double kDefaultFdStep = 1e-6;

class ChartSpec {
 public:
  ChartSpec(std::vector<std::string> names, std::vector<bool> periodic);

  std::size_t dimension() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  bool periodic(std::size_t i) const { return periodic_[i]; }

  // Angles wrapped to (-pi, pi]. Output only; integration stays on the
  // universal cover.
  Vec wrap(const Vec& q) const;

 private:
  std::vector<std::string> names_;
  std::vector<bool> periodic_;
};

class ScalarField {
 public:
  using Value = std::function<double(const Vec&)>;
  using Gradient = std::function<Vec(const Vec&)>;

  ScalarField() = default;
  explicit ScalarField(Value value, Gradient gradient = {}, double fd_step = kDefaultFdStep);

  double operator()(const Vec& q) const { return value_(q); }
  Vec gradient(const Vec& q) const;
  Vec numeric_gradient(const Vec& q) const;
  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }
  explicit operator bool() const { return static_cast<bool>(value_); }

 private:
  Value value_;
  Gradient gradient_;
  double fd_step_ = kDefaultFdStep;
};

class MetricField {
 public:
  using Value = std::function<Mat(const Vec&)>;
  // k-th entry is dg/dq^k.
  using Derivative = std::function<std::vector<Mat>(const Vec&)>;

  MetricField() = default;
  explicit MetricField(Value value, Derivative derivative = {}, double fd_step = kDefaultFdStep);

  Mat operator()(const Vec& q) const { return value_(q); }
  std::vector<Mat> derivatives(const Vec& q) const;
  std::vector<Mat> numeric_derivatives(const Vec& q) const;
  bool has_analytic_derivative() const { return static_cast<bool>(derivative_); }

 private:
  Value value_;
  Derivative derivative_;
  double fd_step_ = kDefaultFdStep;
};

/// The covectors eta^alpha(q), stacked as the rows of an m x n matrix.
class ConstraintSet {
 public:
  using Value = std::function<Mat(const Vec&)>;
  using Derivative = std::function<std::vector<Mat>(const Vec&)>;

  ConstraintSet() = default;
  ConstraintSet(std::size_t count, Value value, Derivative derivative = {},
                double fd_step = kDefaultFdStep);

  static ConstraintSet none() { return {}; }

  std::size_t count() const { return count_; }
  Mat operator()(const Vec& q) const;
  std::vector<Mat> derivatives(const Vec& q) const;
  std::vector<Mat> numeric_derivatives(const Vec& q) const;
  bool has_analytic_derivative() const { return static_cast<bool>(derivative_); }

 private:
  std::size_t count_ = 0;
  Value value_;
  Derivative derivative_;
  double fd_step_ = kDefaultFdStep;
};

struct ImpactSurface {
  std::string label;
  ScalarField h;  // interior is h > 0, the wall is h = 0
};

class MechanicalSystem {
 public:
  MechanicalSystem(ChartSpec chart, MetricField metric, ScalarField potential,
                   ConstraintSet constraints);

  const ChartSpec& chart() const { return chart_; }
  std::size_t dimension() const { return chart_.dimension(); }
  std::size_t constraint_count() const { return constraints_.count(); }

  Mat metric(const Vec& q) const { return metric_(q); }
  std::vector<Mat> metric_derivatives(const Vec& q) const { return metric_.derivatives(q); }
  double potential(const Vec& q) const { return potential_ ? potential_(q) : 0.0; }
  Vec potential_gradient(const Vec& q) const;
  Mat constraints(const Vec& q) const { return constraints_(q); }
  std::vector<Mat> constraint_derivatives(const Vec& q) const {
    return constraints_.derivatives(q);
  }

  /// Checks the construction invariants at q: g(q) SPD, constraints of full
  /// rank, and any analytic derivative matching central differences
  /// (relative 1e-5). Throws ModelError.
  void validate_at(const Vec& q) const;

 private:
  ChartSpec chart_;
  MetricField metric_;
  ScalarField potential_;
  ConstraintSet constraints_;
};

/// Everything the dynamics and impact maps need at one configuration.
struct LocalFrame {
  Mat g;
  Mat g_inv;
  Mat eta;       // m x n
  Mat W;         // n x m, columns W^alpha = g^-1 eta^alpha^T
  Mat mass;      // m^{alpha beta} = eta^alpha(W^beta)
  Mat mass_inv;  // m_{alpha beta}
};

LocalFrame local_frame(const MechanicalSystem& sys, const Vec& q);

Mat metric_inverse_at(const MechanicalSystem& sys, const Vec& q);

/// Columns are W^alpha = g^-1 (eta^alpha)^T.
Mat constraint_vector_fields(const MechanicalSystem& sys, const Vec& q);

struct ConstraintMass {
  Mat mass;
  Mat inverse;
};
ConstraintMass constraint_mass_matrix(const MechanicalSystem& sys, const Vec& q);

Vec grad_h(const MechanicalSystem& sys, const ImpactSurface& surface, const Vec& q);

/// g-orthogonal projection onto D = ker eta.
Vec project_onto_D(const MechanicalSystem& sys, const Vec& q, const Vec& v);
Vec project_onto_D(const LocalFrame& frame, const Vec& v);

/// dh(q) != 0 and dh not in span{eta}. Throws ModelError.
void validate_surface_at(const MechanicalSystem& sys, const ImpactSurface& surface, const Vec& q);

/// Residual of projecting the covector dh onto span{eta^alpha}, relative to |dh|.
double annihilator_residual(const Mat& eta, const RowVec& dh);

}  // namespace hybrid
