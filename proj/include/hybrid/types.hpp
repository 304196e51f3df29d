#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hybrid {

using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when model data violates a structural requirement: a metric that is
/// not positive-definite, dependent constraints, a surface whose differential
/// lies in the constraint annihilator, and so on.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation needs the flow to cross a guard transversally and
/// it does not (|dh(qdot)| below tolerance).
class TransversalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Relative singular-value cutoff for rank and definiteness checks.
inline constexpr double kRankTolerance = 1e-10;

}  // namespace hybrid
