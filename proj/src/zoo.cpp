#include "hybrid/zoo.hpp"

#include "hybrid/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hybrid {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Wall for a rigid segment end at (x + s L cos a, y + s L sin a) on the
// ellipse x^2/A^2 + y^2/B^2 = 1; interior positive.
ScalarField end_wall(double A, double B, double L, double s, std::size_t ia) {
  auto value = [=](const Vec& q) {
    const double X = q[0] + s * L * std::cos(q[ia]);
    const double Y = q[1] + s * L * std::sin(q[ia]);
    return 1.0 - X * X / (A * A) - Y * Y / (B * B);
  };
  auto grad = [=](const Vec& q) {
    const double c = std::cos(q[ia]), sn = std::sin(q[ia]);
    const double X = q[0] + s * L * c, Y = q[1] + s * L * sn;
    Vec g = Vec::Zero(q.size());
    g[0] = -2 * X / (A * A);
    g[1] = -2 * Y / (B * B);
    if (s * L != 0.0) g[ia] = 2 * s * L * (X * sn / (A * A) - Y * c / (B * B));
    return g;
  };
  return ScalarField(value, grad);
}

ScalarField centre_wall(double A, double B) {
  return end_wall(A, B, 0.0, 0.0, 0);
}

void require_positive(double v, const char* what) {
  if (!(v > 0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

struct MechanicalSpec {
  std::function<Vec(Rng&)> config;           // raw configuration proposal
  std::function<bool(const Vec&)> accept;     // extra filter on full states
  double wall_margin = 1e-2;
};

Vec project_to_surface(const ScalarField& h, Vec q) {
  for (int it = 0; it < 60; ++it) {
    const double v = h(q);
    if (std::abs(v) < 1e-15) break;
    const Vec g = h.gradient(q);
    q -= v / g.squaredNorm() * g;
  }
  return q;
}

// Fills system, samplers and planar position for a mechanical entry.
void finish_mechanical(ZooEntry& e, MechanicalSpec spec) {
  e.system = mechanical_bundle(e.mechanics, e.surfaces, e.name);
  auto mech = e.mechanics;
  auto walls = std::make_shared<std::vector<ImpactSurface>>(e.surfaces);
  auto accept = spec.accept;
  auto config = spec.config;
  const double margin = spec.wall_margin;

  auto random_velocity = [mech](Rng& rng, const Vec& q) {
    Vec v(q.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    return project_onto_D(*mech, q, v);
  };

  e.sample_state = [=](Rng& rng) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      const Vec q = config(rng);
      bool inside = true;
      for (const auto& w : *walls) inside = inside && w.h(q) > margin;
      if (!inside) continue;
      try {
        mech->validate_at(q);
      } catch (const ModelError&) {
        continue;
      }
      const Vec v = random_velocity(rng, q);
      const Vec x = stack(q, mech->metric(q) * v);
      if (accept && !accept(x)) continue;
      return x;
    }
    throw std::runtime_error("state sampler failed");
  };

  e.sample_impact = [=](Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, walls->size() - 1);
    for (int attempt = 0; attempt < 100000; ++attempt) {
      const std::size_t k = pick(rng);
      const Vec q = project_to_surface((*walls)[k].h, config(rng));
      if (!q.allFinite() || std::abs((*walls)[k].h(q)) > 1e-12) continue;
      bool ok = true;
      for (std::size_t j = 0; j < walls->size(); ++j)
        if (j != k) ok = ok && (*walls)[j].h(q) > margin;
      if (!ok) continue;
      try {
        mech->validate_at(q);
      } catch (const ModelError&) {
        continue;
      }
      Vec v = random_velocity(rng, q);
      const Mat g = mech->metric(q);
      const double rate = (*walls)[k].h.gradient(q).dot(v);
      const double speed = std::sqrt(v.dot(g * v));
      if (std::abs(rate) < 0.05 * speed * (*walls)[k].h.gradient(q).norm()) continue;
      if (rate > 0) v = -v;
      const Vec x = stack(q, g * v);
      if (accept && !accept(x)) continue;
      return ImpactPoint{k, x};
    }
    throw std::runtime_error("impact sampler failed");
  };
  e.planar_position = [](const Vec& x) { return std::array<double, 2>{x[0], x[1]}; };
}

// Position in the table's bounding box, every other coordinate an angle.
Vec ellipse_config(Rng& rng, const TableSpec& t, std::size_t n) {
  Vec q(n);
  q[0] = uniform(rng, -t.a, t.a);
  q[1] = uniform(rng, -t.b, t.b);
  for (std::size_t i = 2; i < n; ++i) q[i] = uniform(rng, -kPi, kPi);
  return q;
}

}  // namespace

std::string to_string(ImpactKind k) {
  switch (k) {
    case ImpactKind::Holonomic: return "holonomic";
    case ImpactKind::Nonholonomic: return "nonholonomic";
    case ImpactKind::Custom: return "custom";
  }
  return "unknown";
}

std::size_t ZooEntry::dof() const {
  return mechanics ? mechanics->dimension() : system.config_dimension;
}

const DensityCandidate& ZooEntry::density(const std::string& n) const {
  for (const auto& d : densities)
    if (d.name == n) return d;
  std::string known;
  for (const auto& d : densities) known += (known.empty() ? "" : ", ") + d.name;
  throw std::invalid_argument("system '" + name + "' has no density named '" + n + "' (known: " + known + ")");
}

ZooEntry make_interval_bouncer(double alpha) {
  require_positive(alpha, "alpha");
  ZooEntry e;
  e.name = "interval-bouncer";
  e.summary = "free particle on [0,1], walls reverse and scale velocity by alpha";
  e.parameters = {{"alpha", alpha}};
  e.impact_kind = ImpactKind::Custom;
  HybridSystem& s = e.system;
  s.name = e.name;
  s.state_names = {"q", "v"};
  s.config_dimension = 1;
  s.field = [](const Vec& x) { return Vec((Vec(2) << x[1], 0.0).finished()); };
  s.guards.push_back({"left", [](const Vec& x) { return x[0]; },
                      [](const Vec&) { return Vec((Vec(2) << 1.0, 0.0).finished()); }});
  s.guards.push_back({"right", [](const Vec& x) { return 1.0 - x[0]; },
                      [](const Vec&) { return Vec((Vec(2) << -1.0, 0.0).finished()); }});
  s.impact = [alpha](std::size_t, const Vec& x) {
    ImpactResult r;
    r.state = Vec((Vec(2) << x[0], -alpha * x[1]).finished());
    r.epsilon = -(1.0 + alpha) * x[1];
    r.lambda = Vec(0);
    return r;
  };
  s.energy = [](const Vec& x) { return 0.5 * x[1] * x[1]; };
  s.velocity = [](const Vec& x) { return Vec((Vec(1) << x[1]).finished()); };
  e.default_state = (Vec(2) << 0.0, 1.0).finished();
  e.planar_position = [](const Vec& x) { return std::array<double, 2>{x[0], 0.0}; };
  e.sample_state = [](Rng& rng) {
    Vec x(2);
    x << uniform(rng, 0.05, 0.95), normal(rng);
    return x;
  };
  e.sample_impact = [](Rng& rng) {
    const bool left = uniform(rng, 0, 1) < 0.5;
    const double v = 0.2 + std::abs(normal(rng));
    return ImpactPoint{left ? 0u : 1u, (Vec(2) << (left ? 0.0 : 1.0), left ? -v : v).finished()};
  };
  e.densities.push_back({"lebesgue", [](const Vec&) { return 1.0; }});
  return e;
}

ZooEntry make_planar_box(double alpha, double beta) {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  ZooEntry e;
  e.name = "planar-box";
  e.summary = "free particle on [0,1] x R, walls map (xdot, ydot) to (-alpha xdot, beta ydot)";
  e.parameters = {{"alpha", alpha}, {"beta", beta}};
  e.impact_kind = ImpactKind::Custom;
  HybridSystem& s = e.system;
  s.name = e.name;
  s.state_names = {"x", "y", "xdot", "ydot"};
  s.config_dimension = 2;
  s.field = [](const Vec& x) { return Vec((Vec(4) << x[2], x[3], 0.0, 0.0).finished()); };
  s.guards.push_back({"left", [](const Vec& x) { return x[0]; },
                      [](const Vec&) { return Vec(Vec::Unit(4, 0)); }});
  s.guards.push_back({"right", [](const Vec& x) { return 1.0 - x[0]; },
                      [](const Vec&) { return Vec(-Vec::Unit(4, 0)); }});
  s.impact = [alpha, beta](std::size_t, const Vec& x) {
    ImpactResult r;
    r.state = x;
    r.state[2] = -alpha * x[2];
    r.state[3] = beta * x[3];
    r.lambda = Vec(0);
    return r;
  };
  s.energy = [](const Vec& x) { return 0.5 * (x[2] * x[2] + x[3] * x[3]); };
  s.velocity = [](const Vec& x) { return Vec(x.tail(2)); };
  e.default_state = (Vec(4) << 0.0, 0.0, 1.0, 1.0).finished();
  e.planar_position = [](const Vec& x) { return std::array<double, 2>{x[0], x[1]}; };
  e.sample_state = [](Rng& rng) {
    Vec x(4);
    x << uniform(rng, 0.05, 0.95), normal(rng), normal(rng), normal(rng);
    return x;
  };
  e.sample_impact = [](Rng& rng) {
    const bool left = uniform(rng, 0, 1) < 0.5;
    const double v = 0.2 + std::abs(normal(rng));
    Vec x(4);
    x << (left ? 0.0 : 1.0), normal(rng), left ? -v : v, normal(rng);
    return ImpactPoint{left ? 0u : 1u, x};
  };
  e.densities.push_back({"lebesgue", [](const Vec&) { return 1.0; }});
  return e;
}

ZooEntry make_tan_escape() {
  ZooEntry e;
  e.name = "tan-escape";
  e.summary = "H = p_x (1 + x^2) + p_y^2 x / 2 with walls x = 0, x = 1 flipping p_y";
  e.impact_kind = ImpactKind::Custom;
  auto H = std::make_shared<GenericHamiltonian>(
      2,
      [](const Vec& q, const Vec& p) { return p[0] * (1 + q[0] * q[0]) + 0.5 * p[1] * p[1] * q[0]; },
      [](const Vec& q, const Vec& p) {
        return Vec((Vec(2) << 2 * q[0] * p[0] + 0.5 * p[1] * p[1], 0.0).finished());
      },
      [](const Vec& q, const Vec& p) {
        return Vec((Vec(2) << 1 + q[0] * q[0], p[1] * q[0]).finished());
      });
  HybridSystem& s = e.system;
  s.name = e.name;
  s.state_names = {"x", "y", "p_x", "p_y"};
  s.config_dimension = 2;
  s.field = [H](const Vec& x) {
    return hamiltonian_vector_field(*H, x.head(2), x.tail(2)).stacked();
  };
  s.guards.push_back({"x=0", [](const Vec& x) { return x[0]; },
                      [](const Vec&) { return Vec(Vec::Unit(4, 0)); }});
  s.guards.push_back({"x=1", [](const Vec& x) { return 1.0 - x[0]; },
                      [](const Vec&) { return Vec(-Vec::Unit(4, 0)); }});
  s.impact = [](std::size_t, const Vec& x) {
    ImpactResult r;
    r.state = x;
    r.state[3] = -x[3];
    r.lambda = Vec(0);
    return r;
  };
  s.energy = [H](const Vec& x) { return H->value(x.head(2), x.tail(2)); };
  s.velocity = [H](const Vec& x) { return H->dp(x.head(2), x.tail(2)); };
  e.default_state = (Vec(4) << 0.0, 0.0, 0.0, 0.0).finished();
  e.planar_position = [](const Vec& x) { return std::array<double, 2>{x[0], x[1]}; };
  e.sample_state = [](Rng& rng) {
    Vec x(4);
    x << uniform(rng, 0.05, 0.95), normal(rng), normal(rng), normal(rng);
    return x;
  };
  e.sample_impact = [](Rng& rng) {
    Vec x(4);
    x << 1.0, normal(rng), normal(rng), normal(rng);
    return ImpactPoint{1u, x};
  };
  e.densities.push_back({"lebesgue", [](const Vec&) { return 1.0; }});
  return e;
}

ZooEntry make_elliptic_billiard(TableSpec table) {
  require_positive(table.a, "table a");
  require_positive(table.b, "table b");
  ZooEntry e;
  e.name = "elliptic-billiard";
  e.summary = "free point particle in an ellipse, specular walls";
  e.parameters = {{"table_a", table.a}, {"table_b", table.b}};
  e.impact_kind = ImpactKind::Holonomic;
  e.table = table;
  e.mechanics = std::make_shared<MechanicalSystem>(
      ChartSpec({"x", "y"}, {false, false}),
      MetricField([](const Vec&) { return Mat(Mat::Identity(2, 2)); },
                  [](const Vec&) { return std::vector<Mat>(2, Mat::Zero(2, 2)); }),
      ScalarField(), ConstraintSet::none());
  e.surfaces.push_back({"wall", centre_wall(table.a, table.b)});
  finish_mechanical(e, {[table](Rng& rng) { return ellipse_config(rng, table, 2); }, {}});
  e.default_state = (Vec(4) << 0.1, 0.2, 0.6, 0.8).finished();
  e.densities.push_back({"canonical", [](const Vec&) { return 1.0; }});
  return e;
}

ZooEntry make_chaplygin_sleigh(double m, double I, double a, double L, TableSpec table) {
  require_positive(m, "m");
  require_positive(I, "I");
  require_positive(L, "L");
  ZooEntry e;
  e.name = "chaplygin-sleigh";
  e.summary = "knife-edge sleigh in an elliptic table, front and back ends collide";
  e.parameters = {{"m", m}, {"I", I}, {"a", a}, {"L", L}, {"table_a", table.a}, {"table_b", table.b}};
  e.impact_kind = ImpactKind::Nonholonomic;
  e.table = table;
  const double ma = m * a;
  auto metric = [m, I, ma, a](const Vec& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    Mat g(3, 3);
    g << m, 0, -ma * s, 0, m, ma * c, -ma * s, ma * c, I + ma * a;
    return g;
  };
  auto dmetric = [ma](const Vec& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    std::vector<Mat> d(3, Mat::Zero(3, 3));
    d[2] << 0, 0, -ma * c, 0, 0, -ma * s, -ma * c, -ma * s, 0;
    return d;
  };
  auto eta = [](const Vec& q) {
    Mat m1(1, 3);
    m1 << -std::sin(q[2]), std::cos(q[2]), 0;
    return m1;
  };
  auto deta = [](const Vec& q) {
    std::vector<Mat> d(3, Mat::Zero(1, 3));
    d[2] << -std::cos(q[2]), -std::sin(q[2]), 0;
    return d;
  };
  auto sys = std::make_shared<MechanicalSystem>(ChartSpec({"x", "y", "theta"}, {false, false, true}),
                                                MetricField(metric, dmetric), ScalarField(),
                                                ConstraintSet(1, eta, deta));
  sys->validate_at(Vec::Zero(3));
  e.mechanics = sys;
  e.surfaces.push_back({"front", end_wall(table.a, table.b, L, 1.0, 2)});
  e.surfaces.push_back({"back", end_wall(table.a, table.b, L, -1.0, 2)});
  const double inertia = I + ma * a;
  // Stay away from p_theta = 0, where the candidate densities are singular.
  finish_mechanical(e, {[table](Rng& rng) { return ellipse_config(rng, table, 3); },
                        [inertia](const Vec& x) { return std::abs(x[5]) > 0.1 * inertia; }});
  {
    const double th = 0.3, v = 1.0, w = 0.8;
    const Vec q = (Vec(3) << 0.0, 0.0, th).finished();
    const Vec qd = (Vec(3) << v * std::cos(th), v * std::sin(th), w).finished();
    e.default_state = stack(q, metric(q) * qd);
  }
  auto ptheta = [](const Vec& x) { return std::abs(x[5]); };
  e.densities.push_back({"p_theta^-1", [ptheta](const Vec& x) { return 1.0 / ptheta(x); }});
  e.densities.push_back({"p_theta^-3", [ptheta](const Vec& x) { return std::pow(ptheta(x), -3); }});
  e.densities.push_back({"uniform", [](const Vec&) { return 1.0; }});
  e.densities.push_back({"config:2+cos(theta)", [](const Vec& x) { return 2.0 + std::cos(x[2]); }});

  // Certificate: an impact where p_theta^-3 changes by the largest relative amount.
  Rng rng(7);
  double best = -1;
  for (int i = 0; i < 64; ++i) {
    const ImpactPoint pt = e.sample_impact(rng);
    const Vec post = e.system.impact(pt.guard, pt.state).state;
    const double rel = std::abs(std::pow(std::abs(post[5]), -3) / std::pow(std::abs(pt.state[5]), -3) - 1);
    if (rel > best) {
      best = rel;
      e.certificate = pt;
    }
  }
  return e;
}

ZooEntry make_rolling_ball(double k, double r, TableSpec table) {
  require_positive(k, "k");
  require_positive(r, "r");
  ZooEntry e;
  e.name = "rolling-ball";
  e.summary = "ball rolling without slipping, centre bounces off an elliptic wall";
  e.parameters = {{"k", k}, {"r", r}, {"table_a", table.a}, {"table_b", table.b}};
  e.impact_kind = ImpactKind::Nonholonomic;
  e.table = table;
  const double k2 = k * k;
  auto metric = [k2](const Vec& q) {
    Mat g = Mat::Zero(5, 5);
    g(0, 0) = g(1, 1) = 1;
    g(2, 2) = g(3, 3) = g(4, 4) = k2;
    g(3, 4) = g(4, 3) = k2 * std::cos(q[2]);
    return g;
  };
  auto dmetric = [k2](const Vec& q) {
    std::vector<Mat> d(5, Mat::Zero(5, 5));
    d[2](3, 4) = d[2](4, 3) = -k2 * std::sin(q[2]);
    return d;
  };
  auto eta = [r](const Vec& q) {
    const double st = std::sin(q[2]), sp = std::sin(q[4]), cp = std::cos(q[4]);
    Mat m(2, 5);
    m << 1, 0, -r * sp, r * st * cp, 0,
         0, 1, r * cp, r * st * sp, 0;
    return m;
  };
  auto deta = [r](const Vec& q) {
    const double st = std::sin(q[2]), ct = std::cos(q[2]);
    const double sp = std::sin(q[4]), cp = std::cos(q[4]);
    std::vector<Mat> d(5, Mat::Zero(2, 5));
    d[2] << 0, 0, 0, r * ct * cp, 0,
            0, 0, 0, r * ct * sp, 0;
    d[4] << 0, 0, -r * cp, -r * st * sp, 0,
            0, 0, -r * sp, r * st * cp, 0;
    return d;
  };
  auto sys = std::make_shared<MechanicalSystem>(
      ChartSpec({"x", "y", "theta", "phi", "psi"}, {false, false, true, true, true}),
      MetricField(metric, dmetric), ScalarField(), ConstraintSet(2, eta, deta));
  sys->validate_at((Vec(5) << 0, 0, 1.0, 0, 0).finished());
  e.mechanics = sys;
  e.surfaces.push_back({"wall", centre_wall(table.a, table.b)});
  finish_mechanical(e, {[table](Rng& rng) {
                          Vec q(5);
                          q << uniform(rng, -table.a, table.a), uniform(rng, -table.b, table.b),
                              uniform(rng, 0.4, kPi - 0.4), uniform(rng, -kPi, kPi),
                              uniform(rng, -kPi, kPi);
                          return q;
                        },
                        {}});
  {
    const Vec q = (Vec(5) << 0.0, 0.0, 1.2, 0.3, -0.4).finished();
    // Roll with angular rates chosen freely; the constraints fix xdot, ydot.
    Vec qd(5);
    qd << 0, 0, 0.7, 0.5, 0.2;
    const Mat E = eta(q);
    qd.head(2) = -E.rightCols(3) * qd.tail(3);
    e.default_state = stack(q, metric(q) * qd);
  }
  e.densities.push_back({"uniform", [](const Vec&) { return 1.0; }});
  return e;
}

ZooEntry make_vertical_disk(double m, double I, double J, double R, TableSpec table) {
  require_positive(m, "m");
  require_positive(I, "I");
  require_positive(J, "J");
  require_positive(R, "R");
  if (std::max(table.a, table.b) <= R) throw std::invalid_argument("table too small for a disk of radius R");
  ZooEntry e;
  e.name = "vertical-disk";
  e.summary = "upright rolling disk, rim points along the heading collide with the wall";
  e.parameters = {{"m", m}, {"I", I}, {"J", J}, {"R", R}, {"table_a", table.a}, {"table_b", table.b}};
  e.impact_kind = ImpactKind::Nonholonomic;
  e.table = table;
  const Vec diag = (Vec(4) << m, m, I, J).finished();
  auto metric = [diag](const Vec&) { return Mat(diag.asDiagonal()); };
  auto dmetric = [](const Vec&) { return std::vector<Mat>(4, Mat::Zero(4, 4)); };
  auto eta = [R](const Vec& q) {
    Mat E(2, 4);
    E << 1, 0, -R * std::cos(q[3]), 0,
         0, 1, -R * std::sin(q[3]), 0;
    return E;
  };
  auto deta = [R](const Vec& q) {
    std::vector<Mat> d(4, Mat::Zero(2, 4));
    d[3] << 0, 0, R * std::sin(q[3]), 0,
            0, 0, -R * std::cos(q[3]), 0;
    return d;
  };
  auto sys = std::make_shared<MechanicalSystem>(
      ChartSpec({"x", "y", "theta", "phi"}, {false, false, true, true}),
      MetricField(metric, dmetric), ScalarField(), ConstraintSet(2, eta, deta));
  sys->validate_at(Vec::Zero(4));
  e.mechanics = sys;
  e.surfaces.push_back({"front", end_wall(table.a, table.b, R, 1.0, 3)});
  e.surfaces.push_back({"back", end_wall(table.a, table.b, R, -1.0, 3)});
  finish_mechanical(e, {[table](Rng& rng) { return ellipse_config(rng, table, 4); }, {}});
  {
    const Vec q = (Vec(4) << 0.0, 0.0, 0.0, 0.4).finished();
    const double thd = 1.0, phd = 0.3;
    Vec qd(4);
    qd << R * thd * std::cos(q[3]), R * thd * std::sin(q[3]), thd, phd;
    e.default_state = stack(q, metric(q) * qd);
  }
  e.densities.push_back({"uniform", [](const Vec&) { return 1.0; }});
  return e;
}

ZooEntry make_heisenberg_toy(TableSpec table) {
  require_positive(table.a, "strip width");
  ZooEntry e;
  e.name = "heisenberg-toy";
  e.summary = "flat R^3 with constraint dz - y dx, walls x = 0 and x = width";
  e.parameters = {{"width", table.a}};
  e.impact_kind = ImpactKind::Nonholonomic;
  e.table = table;
  auto eta = [](const Vec& q) {
    Mat E(1, 3);
    E << -q[1], 0, 1;
    return E;
  };
  auto deta = [](const Vec&) {
    std::vector<Mat> d(3, Mat::Zero(1, 3));
    d[1] << -1, 0, 0;
    return d;
  };
  auto sys = std::make_shared<MechanicalSystem>(
      ChartSpec({"x", "y", "z"}, {false, false, false}),
      MetricField([](const Vec&) { return Mat(Mat::Identity(3, 3)); },
                  [](const Vec&) { return std::vector<Mat>(3, Mat::Zero(3, 3)); }),
      ScalarField(), ConstraintSet(1, eta, deta));
  e.mechanics = sys;
  const double w = table.a;
  e.surfaces.push_back({"x=0", ScalarField([](const Vec& q) { return q[0]; },
                                           [](const Vec&) { return Vec(Vec::Unit(3, 0)); })});
  e.surfaces.push_back({"x=w", ScalarField([w](const Vec& q) { return w - q[0]; },
                                           [](const Vec&) { return Vec(-Vec::Unit(3, 0)); })});
  finish_mechanical(e, {[w](Rng& rng) {
                          Vec q(3);
                          q << uniform(rng, 0, w), uniform(rng, -1.5, 1.5), uniform(rng, -1, 1);
                          return q;
                        },
                        {}});
  e.default_state = (Vec(6) << 0.5, 1.0, 0.0, 1.0, 0.0, 1.0).finished();
  e.densities.push_back({"config:sqrt(1+y^2)",
                         [](const Vec& x) { return std::sqrt(1 + x[1] * x[1]); }});
  e.densities.push_back({"uniform", [](const Vec&) { return 1.0; }});
  return e;
}

std::vector<std::string> zoo_names() {
  return {"chaplygin-sleigh", "elliptic-billiard", "heisenberg-toy", "interval-bouncer",
          "planar-box",       "rolling-ball",      "tan-escape",     "vertical-disk"};
}

std::map<std::string, double> zoo_defaults(const std::string& name) {
  if (name == "interval-bouncer") return {{"alpha", 1.0}};
  if (name == "planar-box") return {{"alpha", 1.0}, {"beta", 1.0}};
  if (name == "tan-escape") return {};
  if (name == "elliptic-billiard") return {{"table_a", 2.0}, {"table_b", 1.0}};
  if (name == "chaplygin-sleigh")
    return {{"m", 1.0}, {"I", 1.0}, {"a", 0.5}, {"L", 1.0}, {"table_a", 2.0}, {"table_b", 1.5}};
  if (name == "rolling-ball")
    return {{"k", std::sqrt(0.4)}, {"r", 1.0}, {"table_a", 2.0}, {"table_b", 1.5}};
  if (name == "vertical-disk")
    return {{"m", 1.0}, {"I", 1.0}, {"J", 1.0}, {"R", 1.0}, {"table_a", 2.0}, {"table_b", 1.5}};
  if (name == "heisenberg-toy") return {{"width", 2.0}};
  throw std::invalid_argument("unknown system '" + name + "'");
}

ZooEntry make_zoo_entry(const std::string& name, const std::map<std::string, double>& params) {
  auto p = zoo_defaults(name);
  for (const auto& [k, v] : params) {
    if (!p.count(k))
      throw std::invalid_argument("system '" + name + "' has no parameter '" + k + "'");
    p[k] = v;
  }
  auto table = [&] { return TableSpec{TableSpec::Shape::Ellipse, p["table_a"], p["table_b"]}; };
  if (name == "interval-bouncer") return make_interval_bouncer(p["alpha"]);
  if (name == "planar-box") return make_planar_box(p["alpha"], p["beta"]);
  if (name == "tan-escape") return make_tan_escape();
  if (name == "elliptic-billiard") return make_elliptic_billiard(table());
  if (name == "chaplygin-sleigh") return make_chaplygin_sleigh(p["m"], p["I"], p["a"], p["L"], table());
  if (name == "rolling-ball") return make_rolling_ball(p["k"], p["r"], table());
  if (name == "vertical-disk") return make_vertical_disk(p["m"], p["I"], p["J"], p["R"], table());
  return make_heisenberg_toy({TableSpec::Shape::Strip, p["width"], 2.0});
}

std::vector<Vec> sample_states(const ZooEntry& e, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(e.sample_state(rng));
  return out;
}

std::vector<ImpactPoint> sample_impacts(const ZooEntry& e, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ImpactPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(e.sample_impact(rng));
  return out;
}

}  // namespace hybrid

namespace hybrid {

DensityAudit audit_density(const ZooEntry& e, const Density& f, const std::vector<Vec>& states,
                           const std::vector<ImpactPoint>& impacts, const AnalysisOptions& opts) {
  DensityAudit a;
  a.states = states.size();
  a.impacts = impacts.size();
  const bool constrained = e.mechanics && e.mechanics->constraint_count() > 0;
  const std::size_t n = e.system.config_dimension;
  for (const Vec& x : states) {
    double d;
    if (constrained) {
      const auto ch = ConstrainedChart::best_at(e.mechanics, x.head(n));
      const HybridSystem red = ch.reduce(e.system);
      d = divergence(red.field, ch.reduce_density(f), {ch.project(x)}, opts)[0];
    } else {
      d = divergence(e.system.field, f, {x}, opts)[0];
    }
    a.divergence = std::max(a.divergence, std::abs(d));
  }
  for (const ImpactPoint& pt : impacts) {
    double J;
    if (constrained) {
      const auto ch = ConstrainedChart::best_at(e.mechanics, pt.state.head(n));
      const HybridSystem red = ch.reduce(e.system);
      J = hybrid_jacobian(red, ch.reduce_density(f), {pt.guard, ch.project(pt.state)}, opts);
    } else {
      J = hybrid_jacobian(e.system, f, pt, opts);
    }
    if (!a.worst || std::abs(J - 1) > a.impact) {
      a.impact = std::abs(J - 1);
      a.worst = pt;
    }
    if (e.system.energy) {
      const Vec post = e.system.impact(pt.guard, pt.state).state;
      a.energy = std::max(a.energy, std::abs(e.system.energy(post) - e.system.energy(pt.state)));
    }
  }
  return a;
}

}  // namespace hybrid
