#include "hybrid/constrained_chart.hpp"

#include "hybrid/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace hybrid {

namespace {

Mat rows_of(const Mat& m, const std::vector<std::size_t>& rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

}  // namespace

ConstrainedChart::ConstrainedChart(std::shared_ptr<const MechanicalSystem> sys,
                                   std::vector<std::size_t> dependent)
    : sys_(std::move(sys)), n_(sys_->dimension()), dependent_(std::move(dependent)) {
  if (dependent_.size() != sys_->constraint_count())
    throw ModelError("chart needs one dependent momentum per constraint");
  std::sort(dependent_.begin(), dependent_.end());
  for (std::size_t i = 0; i < n_; ++i)
    if (!std::binary_search(dependent_.begin(), dependent_.end(), i)) independent_.push_back(i);
  if (independent_.size() + dependent_.size() != n_)
    throw ModelError("invalid dependent momentum indices");
}

ConstrainedChart ConstrainedChart::best_at(std::shared_ptr<const MechanicalSystem> sys,
                                           const Vec& q) {
  const std::size_t n = sys->dimension(), m = sys->constraint_count();
  const Mat W = constraint_vector_fields(*sys, q);
  std::vector<std::size_t> best, idx(m);
  double best_det = -1;
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  // Enumerate m-subsets of rows; sizes in the zoo are tiny.
  while (true) {
    const double d = m == 0 ? 1.0 : std::abs(rows_of(W, idx).determinant());
    if (d > best_det) {
      best_det = d;
      best = idx;
    }
    std::size_t pos = m;
    while (pos > 0 && idx[pos - 1] == n - m + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < m; ++i) idx[i] = idx[i - 1] + 1;
  }
  if (!(best_det > 0)) throw ModelError("constraint fields are degenerate");
  return ConstrainedChart(std::move(sys), best);
}

Vec ConstrainedChart::lift(const Vec& y) const {
  const Vec q = y.head(n_);
  Vec p(n_);
  for (std::size_t i = 0; i < independent_.size(); ++i) p[independent_[i]] = y[n_ + i];
  if (!dependent_.empty()) {
    const Mat W = constraint_vector_fields(*sys_, q);
    const Mat WJ = rows_of(W, dependent_), WI = rows_of(W, independent_);
    Vec pI(independent_.size());
    for (std::size_t i = 0; i < independent_.size(); ++i) pI[i] = p[independent_[i]];
    const Vec pJ = WJ.transpose().partialPivLu().solve(-(WI.transpose() * pI));
    for (std::size_t i = 0; i < dependent_.size(); ++i) p[dependent_[i]] = pJ[i];
  }
  return stack(q, p);
}

Vec ConstrainedChart::project(const Vec& x) const {
  Vec y(dimension());
  y.head(n_) = x.head(n_);
  for (std::size_t i = 0; i < independent_.size(); ++i) y[n_ + i] = x[n_ + independent_[i]];
  return y;
}

double ConstrainedChart::volume_factor(const Vec& q) const {
  if (dependent_.empty()) return 1.0;
  const Mat W = constraint_vector_fields(*sys_, q);
  return 1.0 / std::abs(rows_of(W, dependent_).determinant());
}

HybridSystem ConstrainedChart::reduce(const HybridSystem& full) const {
  auto self = std::make_shared<ConstrainedChart>(*this);
  auto base = std::make_shared<HybridSystem>(full);
  HybridSystem out;
  out.name = full.name;
  out.config_dimension = n_;
  for (std::size_t i = 0; i < n_; ++i) out.state_names.push_back(full.state_names[i]);
  for (std::size_t i : independent_) out.state_names.push_back(full.state_names[n_ + i]);
  out.field = [self, base](const Vec& y) { return self->project(base->field(self->lift(y))); };
  for (std::size_t k = 0; k < full.guards.size(); ++k) {
    Guard g;
    g.label = full.guards[k].label;
    g.value = [self, base, k](const Vec& y) { return base->guards[k].value(self->lift(y)); };
    // Guards depend on q only, so the chart gradient is the q-part.
    g.gradient = [self, base, k](const Vec& y) {
      const Vec gf = base->guards[k].gradient(self->lift(y));
      Vec out = Vec::Zero(y.size());
      out.head(self->n_) = gf.head(self->n_);
      return out;
    };
    out.guards.push_back(std::move(g));
  }
  out.impact = [self, base](std::size_t k, const Vec& y) {
    ImpactResult r = base->impact(k, self->lift(y));
    r.state = self->project(r.state);
    return r;
  };
  if (full.energy)
    out.energy = [self, base](const Vec& y) { return base->energy(self->lift(y)); };
  if (full.velocity)
    out.velocity = [self, base](const Vec& y) { return base->velocity(self->lift(y)); };
  return out;
}

std::function<double(const Vec&)> ConstrainedChart::reduce_density(
    std::function<double(const Vec&)> f) const {
  auto self = std::make_shared<ConstrainedChart>(*this);
  return [self, f](const Vec& y) {
    return f(self->lift(y)) * self->volume_factor(y.head(self->n_));
  };
}

}  // namespace hybrid
