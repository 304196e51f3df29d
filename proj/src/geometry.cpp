#include "hybrid/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hybrid {

namespace {

// Central difference of a matrix-valued map in coordinate direction k.
template <class F>
Mat central_partial(const F& f, const Vec& q, std::size_t k, double step) {
  Vec qp = q, qm = q;
  const double hk = step * std::max(1.0, std::abs(q[k]));
  qp[k] += hk;
  qm[k] -= hk;
  return (f(qp) - f(qm)) / (2.0 * hk);
}

bool close_relative(const Mat& a, const Mat& b, double tol) {
  const double scale = std::max({1.0, a.norm(), b.norm()});
  return (a - b).norm() <= tol * scale;
}

double smallest_relative_singular_value(const Mat& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (s[0] == 0.0) return 0.0;
  return s[s.size() - 1] / s[0];
}

}  // namespace

ChartSpec::ChartSpec(std::vector<std::string> names, std::vector<bool> periodic)
    : names_(std::move(names)), periodic_(std::move(periodic)) {
  if (names_.empty()) throw ModelError("chart needs at least one coordinate");
  if (names_.size() != periodic_.size())
    throw ModelError("chart names and periodicity flags differ in length");
}

Vec ChartSpec::wrap(const Vec& q) const {
  Vec out = q;
  for (std::size_t i = 0; i < dimension(); ++i) {
    if (!periodic_[i]) continue;
    double a = std::remainder(q[i], 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    out[i] = a;
  }
  return out;
}

ScalarField::ScalarField(Value value, Gradient gradient, double fd_step)
    : value_(std::move(value)), gradient_(std::move(gradient)), fd_step_(fd_step) {
  if (fd_step_ <= 0) throw ModelError("finite-difference step must be positive");
}

Vec ScalarField::gradient(const Vec& q) const {
  return gradient_ ? gradient_(q) : numeric_gradient(q);
}

Vec ScalarField::numeric_gradient(const Vec& q) const {
  Vec g(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    Vec qp = q, qm = q;
    const double hk = fd_step_ * std::max(1.0, std::abs(q[k]));
    qp[k] += hk;
    qm[k] -= hk;
    g[k] = (value_(qp) - value_(qm)) / (2.0 * hk);
  }
  return g;
}

MetricField::MetricField(Value value, Derivative derivative, double fd_step)
    : value_(std::move(value)), derivative_(std::move(derivative)), fd_step_(fd_step) {}

std::vector<Mat> MetricField::derivatives(const Vec& q) const {
  return derivative_ ? derivative_(q) : numeric_derivatives(q);
}

std::vector<Mat> MetricField::numeric_derivatives(const Vec& q) const {
  std::vector<Mat> out;
  out.reserve(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k)
    out.push_back(central_partial(value_, q, k, fd_step_));
  return out;
}

ConstraintSet::ConstraintSet(std::size_t count, Value value, Derivative derivative,
                             double fd_step)
    : count_(count), value_(std::move(value)), derivative_(std::move(derivative)),
      fd_step_(fd_step) {}

Mat ConstraintSet::operator()(const Vec& q) const {
  if (count_ == 0) return Mat(0, q.size());
  return value_(q);
}

std::vector<Mat> ConstraintSet::derivatives(const Vec& q) const {
  if (count_ == 0) return std::vector<Mat>(q.size(), Mat(0, q.size()));
  return derivative_ ? derivative_(q) : numeric_derivatives(q);
}

std::vector<Mat> ConstraintSet::numeric_derivatives(const Vec& q) const {
  std::vector<Mat> out;
  for (Eigen::Index k = 0; k < q.size(); ++k)
    out.push_back(count_ == 0 ? Mat(0, q.size()) : central_partial(value_, q, k, fd_step_));
  return out;
}

MechanicalSystem::MechanicalSystem(ChartSpec chart, MetricField metric, ScalarField potential,
                                   ConstraintSet constraints)
    : chart_(std::move(chart)), metric_(std::move(metric)), potential_(std::move(potential)),
      constraints_(std::move(constraints)) {
  if (constraints_.count() >= chart_.dimension())
    throw ModelError("more constraints than degrees of freedom");
}

Vec MechanicalSystem::potential_gradient(const Vec& q) const {
  if (!potential_) return Vec::Zero(q.size());
  return potential_.gradient(q);
}

void MechanicalSystem::validate_at(const Vec& q) const {
  const std::size_t n = dimension();
  if (static_cast<std::size_t>(q.size()) != n) throw ModelError("configuration has wrong size");
  const Mat g = metric(q);
  if (g.rows() != static_cast<Eigen::Index>(n) || g.cols() != static_cast<Eigen::Index>(n))
    throw ModelError("metric has wrong shape");
  if ((g - g.transpose()).norm() > 1e-12 * std::max(1.0, g.norm()))
    throw ModelError("metric is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(g);
  const auto& ev = eig.eigenvalues();
  if (!(ev[0] > kRankTolerance * ev[ev.size() - 1])) {
    std::ostringstream os;
    os << "metric is not positive-definite (smallest eigenvalue " << ev[0] << ")";
    throw ModelError(os.str());
  }
  const Mat eta = constraints(q);
  if (eta.rows() != static_cast<Eigen::Index>(constraint_count()) ||
      eta.cols() != static_cast<Eigen::Index>(n))
    throw ModelError("constraint matrix has wrong shape");
  if (constraint_count() > 0 && smallest_relative_singular_value(eta) <= kRankTolerance)
    throw ModelError("constraint covectors are linearly dependent");

  constexpr double kDerivTol = 1e-5;
  if (metric_.has_analytic_derivative()) {
    const auto a = metric_.derivatives(q);
    const auto f = metric_.numeric_derivatives(q);
    for (std::size_t k = 0; k < n; ++k)
      if (!close_relative(a[k], f[k], kDerivTol))
        throw ModelError("analytic metric derivative disagrees with finite differences");
  }
  if (constraints_.has_analytic_derivative()) {
    const auto a = constraints_.derivatives(q);
    const auto f = constraints_.numeric_derivatives(q);
    for (std::size_t k = 0; k < n; ++k)
      if (!close_relative(a[k], f[k], kDerivTol))
        throw ModelError("analytic constraint derivative disagrees with finite differences");
  }
  if (potential_ && potential_.has_analytic_gradient()) {
    if (!close_relative(potential_.gradient(q), potential_.numeric_gradient(q), kDerivTol))
      throw ModelError("analytic potential gradient disagrees with finite differences");
  }
}

Mat metric_inverse_at(const MechanicalSystem& sys, const Vec& q) {
  const Mat g = sys.metric(q);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw ModelError("metric is not invertible");
  return llt.solve(Mat::Identity(g.rows(), g.cols()));
}

LocalFrame local_frame(const MechanicalSystem& sys, const Vec& q) {
  LocalFrame f;
  f.g = sys.metric(q);
  Eigen::LLT<Mat> llt(f.g);
  if (llt.info() != Eigen::Success) throw ModelError("metric is not invertible");
  f.g_inv = llt.solve(Mat::Identity(f.g.rows(), f.g.cols()));
  f.eta = sys.constraints(q);
  f.W = f.g_inv * f.eta.transpose();
  f.mass = f.eta * f.W;
  if (f.mass.size() > 0) {
    Eigen::LLT<Mat> mllt(f.mass);
    if (mllt.info() != Eigen::Success)
      throw ModelError("constraint mass matrix is singular");
    f.mass_inv = mllt.solve(Mat::Identity(f.mass.rows(), f.mass.cols()));
  } else {
    f.mass_inv = Mat(0, 0);
  }
  return f;
}

Mat constraint_vector_fields(const MechanicalSystem& sys, const Vec& q) {
  return metric_inverse_at(sys, q) * sys.constraints(q).transpose();
}

ConstraintMass constraint_mass_matrix(const MechanicalSystem& sys, const Vec& q) {
  const LocalFrame f = local_frame(sys, q);
  return {f.mass, f.mass_inv};
}

Vec grad_h(const MechanicalSystem& sys, const ImpactSurface& surface, const Vec& q) {
  const Mat g = sys.metric(q);
  return g.llt().solve(surface.h.gradient(q));
}

Vec project_onto_D(const LocalFrame& frame, const Vec& v) {
  if (frame.eta.rows() == 0) return v;
  return v - frame.W * (frame.mass_inv * (frame.eta * v));
}

Vec project_onto_D(const MechanicalSystem& sys, const Vec& q, const Vec& v) {
  return project_onto_D(local_frame(sys, q), v);
}

double annihilator_residual(const Mat& eta, const RowVec& dh) {
  const double norm = dh.norm();
  if (norm == 0.0) return 0.0;
  if (eta.rows() == 0) return 1.0;
  // Least-squares fit dh ~ c * eta.
  const Vec c = eta.transpose().colPivHouseholderQr().solve(dh.transpose());
  return (dh.transpose() - eta.transpose() * c).norm() / norm;
}

void validate_surface_at(const MechanicalSystem& sys, const ImpactSurface& surface,
                         const Vec& q) {
  const Vec dh = surface.h.gradient(q);
  if (!(dh.norm() > 0.0) || !dh.allFinite())
    throw ModelError("surface '" + surface.label + "' has vanishing differential");
  if (annihilator_residual(sys.constraints(q), dh.transpose()) <= 1e-8)
    throw ModelError("surface '" + surface.label + "' violates the nontrivial impact condition");
}

}  // namespace hybrid
