#include "hybrid/analysis.hpp"

#include "hybrid/dynamics.hpp"
#include "hybrid/impacts.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hybrid {

namespace {

Mat random_columns(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  // Unit columns keep residuals on the scale of the form's values.
  for (Eigen::Index j = 0; j < cols; ++j) m.col(j).normalize();
  return m;
}

double stencil(double step, const Vec& x) { return step * std::max(1.0, x.lpNorm<Eigen::Infinity>()); }

struct FlowOutcome {
  Vec state;
  std::vector<std::size_t> guards;
};

FlowOutcome run_flow(const HybridSystem& sys, const Vec& x, double T, IntegratorConfig cfg) {
  cfg.record_arcs = false;
  const HybridTrajectory tr = hybrid_flow(sys, x, T, cfg);
  if (tr.reason != Termination::TimeHorizon) throw FlowTerminated(tr.reason, tr.detail);
  FlowOutcome out{tr.final_state, {}};
  for (const auto& e : tr.events) out.guards.push_back(e.guard);
  return out;
}

// Jacobian of the time-T flow (optionally wrapped by chart maps) with a
// consistency check on the impact sequence across the stencil.
Mat flow_jacobian(const HybridSystem& sys, const Vec& x0, double T, const IntegratorConfig& cfg,
                  double step, const std::function<Vec(const Vec&)>& in,
                  const std::function<Vec(const Vec&)>& out, std::size_t* impacts) {
  const FlowOutcome centre = run_flow(sys, in(x0), T, cfg);
  if (impacts) *impacts = centre.guards.size();
  const Eigen::Index N = x0.size();
  const double h = stencil(step, x0);
  Mat J(out(centre.state).size(), N);
  for (Eigen::Index i = 0; i < N; ++i) {
    auto eval = [&](double d) {
      Vec y = x0;
      y[i] += d;
      const FlowOutcome f = run_flow(sys, in(y), T, cfg);
      if (f.guards != centre.guards)
        throw std::runtime_error("impact sequence changes inside the finite-difference stencil");
      return out(f.state);
    };
    const Vec c1 = (eval(h) - eval(-h)) / (2 * h);
    const Vec c2 = (eval(0.5 * h) - eval(-0.5 * h)) / h;
    J.col(i) = (4 * c2 - c1) / 3;
  }
  return J;
}

}  // namespace

Vec fd_pushforward(const std::function<Vec(const Vec&)>& map, const Vec& x, const Vec& u,
                   double step) {
  const double un = u.norm();
  if (un == 0) return Vec::Zero(map(x).size());
  const double h = stencil(step, x) / un;
  auto cd = [&](double d) { return Vec((map(x + d * u) - map(x - d * u)) / (2 * d)); };
  return (4 * cd(0.5 * h) - cd(h)) / 3;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& x, double step) {
  const Eigen::Index N = x.size();
  Mat J;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vec c = fd_pushforward(map, x, Vec::Unit(N, i), step);
    if (i == 0) J.resize(c.size(), N);
    J.col(i) = c;
  }
  return J;
}

Vec short_flow(const Field& X, const Vec& x, double t, int substeps) {
  const double h = t / substeps;
  Vec y = x;
  for (int i = 0; i < substeps; ++i) {
    const Vec k1 = X(y);
    const Vec k2 = X(y + 0.5 * h * k1);
    const Vec k3 = X(y + 0.5 * h * k2);
    const Vec k4 = X(y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

Mat guard_tangent_basis(const HybridSystem& sys, std::size_t guard, const Vec& x) {
  const Vec dh = sys.guards[guard].gradient(x);
  const Eigen::Index N = dh.size();
  const Mat dhm = dh;
  Eigen::HouseholderQR<Mat> qr(dhm);
  const Mat Q = qr.householderQ() * Mat::Identity(N, N);
  return Q.rightCols(N - 1);
}

double lie_derivative_residual(const SampledKForm& form, const Field& X,
                               const std::vector<Vec>& points, const AnalysisOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  double worst = 0;
  for (const Vec& x : points) {
    const Mat U = random_columns(rng, x.size(), static_cast<Eigen::Index>(form.degree()));
    auto pulled = [&](double t) {
      auto phi = [&](const Vec& y) { return short_flow(X, y, t, opts.lie_substeps); };
      Mat V(U.rows(), U.cols());
      for (Eigen::Index j = 0; j < U.cols(); ++j) V.col(j) = fd_pushforward(phi, x, U.col(j), opts.fd_step);
      return form(phi(x), V);
    };
    const double tau = opts.lie_time;
    const double d1 = (pulled(tau) - pulled(-tau)) / (2 * tau);
    const double d2 = (pulled(0.5 * tau) - pulled(-0.5 * tau)) / tau;
    worst = std::max(worst, std::abs((4 * d2 - d1) / 3));
  }
  return worst;
}

double energy_condition_residual(const SampledKForm& form, const HybridSystem& sys,
                                 const std::vector<ImpactPoint>& points,
                                 const AnalysisOptions& opts) {
  if (form.degree() == 0) return 0.0;
  const SampledKForm iX = interior(sys.field, form);
  std::mt19937_64 rng(opts.seed);
  double worst = 0;
  for (const auto& pt : points) {
    const Mat B = guard_tangent_basis(sys, pt.guard, pt.state);
    const Mat U = B * random_columns(rng, B.cols(), static_cast<Eigen::Index>(iX.degree()));
    const Vec post = sys.impact(pt.guard, pt.state).state;
    Mat V(U.rows(), U.cols());
    for (Eigen::Index j = 0; j < U.cols(); ++j)
      V.col(j) = impact_pushforward(sys, pt.guard, pt.state, U.col(j), opts.fd_step);
    worst = std::max(worst, std::abs(iX(post, V) - iX(pt.state, U)));
  }
  return worst;
}

double specular_condition_residual(const SampledKForm& form, const HybridSystem& sys,
                                   const std::vector<ImpactPoint>& points,
                                   const AnalysisOptions& opts) {
  if (points.empty()) return 0.0;
  if (form.degree() >= sys.dimension()) return 0.0;
  std::mt19937_64 rng(opts.seed);
  double worst = 0;
  for (const auto& pt : points) {
    const Mat B = guard_tangent_basis(sys, pt.guard, pt.state);
    const Mat U = B * random_columns(rng, B.cols(), static_cast<Eigen::Index>(form.degree()));
    const Vec post = sys.impact(pt.guard, pt.state).state;
    Mat V(U.rows(), U.cols());
    for (Eigen::Index j = 0; j < U.cols(); ++j)
      V.col(j) = impact_pushforward(sys, pt.guard, pt.state, U.col(j), opts.fd_step);
    worst = std::max(worst, std::abs(form(post, V) - form(pt.state, U)));
  }
  return worst;
}

double hybrid_jacobian(const HybridSystem& sys, const Density& density, const ImpactPoint& pt,
                       const AnalysisOptions& opts) {
  const Vec& x = pt.state;
  const Mat B = guard_tangent_basis(sys, pt.guard, x);
  const Eigen::Index N = x.size();
  Mat pre(N, N), post(N, N);
  pre.col(0) = sys.field(x);
  pre.rightCols(N - 1) = B;
  const Vec y = sys.impact(pt.guard, x).state;
  post.col(0) = sys.field(y);
  for (Eigen::Index j = 0; j < N - 1; ++j)
    post.col(j + 1) = impact_pushforward(sys, pt.guard, x, B.col(j), opts.fd_step);
  const double den = density(x) * pre.determinant();
  if (den == 0.0) throw TransversalityError("vector field is tangent to the guard");
  return density(y) * post.determinant() / den;
}

double nonholonomic_jacobian_closed_form(const MechanicalSystem& sys, const Hamiltonian& H,
                                         const ImpactSurface& surface, const Vec& q,
                                         const Vec& p) {
  const Vec v = H.dp(q, p);
  const Vec dh = surface.h.gradient(q);
  const double rate = dh.dot(v);
  if (std::abs(rate) < kGrazingTolerance * dh.norm() * v.norm() || rate == 0.0)
    throw TransversalityError("flow is tangent to surface '" + surface.label + "'");
  const Vec pv = project_onto_D(sys, q, v);
  return (2 * dh.dot(pv) - rate) / rate;
}

std::vector<double> divergence(const Field& X, const Density& density,
                               const std::vector<Vec>& points, const AnalysisOptions& opts) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec& x : points) {
    const double f0 = density(x);
    if (!(f0 > 0)) throw std::invalid_argument("density must be positive");
    double s = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = opts.divergence_step * std::max(1.0, std::abs(x[i]));
      auto fx = [&](double d) {
        Vec y = x;
        y[i] += d;
        return density(y) * X(y)[i];
      };
      const double c1 = (fx(h) - fx(-h)) / (2 * h);
      const double c2 = (fx(0.5 * h) - fx(-0.5 * h)) / h;
      s += (4 * c2 - c1) / 3;
    }
    out.push_back(s / f0);
  }
  return out;
}

Vec theta_C(const MechanicalSystem& sys, const Vec& q) {
  const Eigen::Index n = q.size();
  const std::size_t m = sys.constraint_count();
  Vec theta = Vec::Zero(n);
  if (m == 0) return theta;
  const LocalFrame f = local_frame(sys, q);
  const auto deta = sys.constraint_derivatives(q);   // deta[k](b, j) = d_k eta^b_j
  const auto dW = constraint_field_derivatives(sys, q, f);  // dW[k](i, a) = d_k W^a_i
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      const double mab = f.mass_inv(a, b);
      if (mab == 0.0) continue;
      // (L_{W^a} eta^b)_j = W^i (d_i eta_j - d_j eta_i) + d_j (eta_i W^i)
      for (Eigen::Index j = 0; j < n; ++j) {
        double v = 0;
        for (Eigen::Index i = 0; i < n; ++i)
          v += f.W(i, a) * (deta[i](b, j) - deta[j](b, i));
        v += deta[j].row(b).dot(f.W.col(a)) + f.eta.row(b).dot(dW[j].col(a));
        theta[j] += mab * v;
      }
    }
  }
  return theta;
}

CohomologyResidual cohomology_residual(const HybridSystem& sys, const Density& g,
                                       const Density& density, const std::vector<Vec>& points,
                                       const std::vector<ImpactPoint>& impact_points,
                                       const AnalysisOptions& opts) {
  CohomologyResidual r;
  const auto div = divergence(sys.field, density, points, opts);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec& x = points[i];
    const Vec X = sys.field(x);
    const double xn = X.norm();
    double dgX = 0;
    if (xn > 0) {
      const double h = opts.divergence_step * std::max(1.0, x.lpNorm<Eigen::Infinity>()) / xn;
      auto cd = [&](double d) { return (g(x + d * X) - g(x - d * X)) / (2 * d); };
      dgX = (4 * cd(0.5 * h) - cd(h)) / 3;
    }
    r.continuous = std::max(r.continuous, std::abs(dgX + div[i]));
  }
  for (const auto& pt : impact_points) {
    const double J = hybrid_jacobian(sys, density, pt, opts);
    const Vec y = sys.impact(pt.guard, pt.state).state;
    if (!(J > 0)) {
      r.impact = std::numeric_limits<double>::infinity();
      continue;
    }
    r.impact = std::max(r.impact, std::abs(g(y) - g(pt.state) + std::log(J)));
  }
  return r;
}

CohomologyResidual constrained_cohomology_residual(const HybridSystem& full,
                                                   std::shared_ptr<const MechanicalSystem> mech,
                                                   const Density& g, const Density& density,
                                                   const std::vector<Vec>& points,
                                                   const std::vector<ImpactPoint>& impact_points,
                                                   const AnalysisOptions& opts) {
  const std::size_t n = mech->dimension();
  CohomologyResidual r;
  auto merge = [&](const ConstrainedChart& ch, const std::vector<Vec>& pts,
                   const std::vector<ImpactPoint>& ips) {
    const HybridSystem red = ch.reduce(full);
    const Density gc = [&ch, &g](const Vec& y) { return g(ch.lift(y)); };
    const auto c = cohomology_residual(red, gc, ch.reduce_density(density), pts, ips, opts);
    r.continuous = std::max(r.continuous, c.continuous);
    r.impact = std::max(r.impact, c.impact);
  };
  for (const Vec& x : points) {
    const auto ch = ConstrainedChart::best_at(mech, x.head(n));
    merge(ch, {ch.project(x)}, {});
  }
  for (const auto& pt : impact_points) {
    const auto ch = ConstrainedChart::best_at(mech, pt.state.head(n));
    merge(ch, {}, {{pt.guard, ch.project(pt.state)}});
  }
  return r;
}

VolumeCheck flow_volume_check(const HybridSystem& sys, const Density& density, const Vec& x0,
                              double T, const IntegratorConfig& cfg,
                              const AnalysisOptions& opts) {
  const auto id = [](const Vec& v) { return v; };
  VolumeCheck out;
  const Mat J = flow_jacobian(sys, x0, T, cfg, opts.volume_step, id, id, &out.impacts);
  const Vec xT = run_flow(sys, x0, T, cfg).state;
  out.determinant = J.determinant();
  out.deviation = out.determinant * density(xT) / density(x0) - 1.0;
  return out;
}

VolumeCheck constrained_flow_volume_check(const HybridSystem& full,
                                          std::shared_ptr<const MechanicalSystem> mech,
                                          const Density& density, const Vec& x0, double T,
                                          const IntegratorConfig& cfg,
                                          const AnalysisOptions& opts) {
  const std::size_t n = mech->dimension();
  const ConstrainedChart start = ConstrainedChart::best_at(mech, x0.head(n));
  const Vec xT = run_flow(full, x0, T, cfg).state;
  const ConstrainedChart end = ConstrainedChart::best_at(mech, xT.head(n));
  const Vec y0 = start.project(x0);
  VolumeCheck out;
  const Mat J = flow_jacobian(
      full, y0, T, cfg, opts.volume_step, [&](const Vec& y) { return start.lift(y); },
      [&](const Vec& x) { return end.project(x); }, &out.impacts);
  out.determinant = J.determinant();
  const double f0 = density(x0) * start.volume_factor(x0.head(n));
  const double fT = density(xT) * end.volume_factor(xT.head(n));
  out.deviation = out.determinant * fT / f0 - 1.0;
  return out;
}

double symplectic_defect(const HybridSystem& sys, const Vec& x0, double T,
                         const IntegratorConfig& cfg, const AnalysisOptions& opts) {
  const auto id = [](const Vec& v) { return v; };
  const Mat J = flow_jacobian(sys, x0, T, cfg, opts.volume_step, id, id, nullptr);
  const Eigen::Index n = x0.size() / 2;
  Mat Omega = Mat::Zero(2 * n, 2 * n);
  Omega.topRightCorner(n, n) = Mat::Identity(n, n);
  Omega.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return (J.transpose() * Omega * J - Omega).norm();
}

InvarianceReport check_invariance(const SampledKForm& form, const HybridSystem& sys,
                                  const std::vector<Vec>& points,
                                  const std::vector<ImpactPoint>& impact_points, double tolerance,
                                  const AnalysisOptions& opts) {
  InvarianceReport r;
  r.tolerance = tolerance;
  r.samples = points.size();
  r.impact_samples = impact_points.size();
  r.lie = lie_derivative_residual(form, sys.field, points, opts);
  r.energy = energy_condition_residual(form, sys, impact_points, opts);
  r.specular = specular_condition_residual(form, sys, impact_points, opts);
  r.lie_pass = r.lie <= tolerance;
  r.energy_pass = r.energy <= tolerance;
  r.specular_pass = r.specular <= tolerance;
  return r;
}

}  // namespace hybrid
