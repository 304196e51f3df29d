// Acceptance run: one PASS/FAIL line per criterion, each against its runtime
// budget. Exits non-zero if any criterion fails.

#include "hybrid/analysis.hpp"
#include "hybrid/constrained_chart.hpp"
#include "hybrid/flow.hpp"
#include "hybrid/forms.hpp"
#include "hybrid/impacts.hpp"
#include "hybrid/io.hpp"
#include "hybrid/stats.hpp"
#include "hybrid/zoo.hpp"

#include "corner_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hybrid;

namespace {

const Density one = [](const Vec&) { return 1.0; };

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < budget_s, "runtime " + num(secs) + " s < " + num(budget_s) + " s");
  if (!o.pass) ++failures;
  std::printf("criterion %2d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

// Time between the first and second impacts, or past the first when there is
// only one, so the check spans exactly one impact.
double one_impact_horizon(const HybridSystem& sys, const Vec& x0) {
  const auto tr = hybrid_flow(sys, x0, 20.0, {});
  if (tr.events.empty()) throw std::runtime_error("no impact within t = 20");
  if (tr.events.size() == 1) return tr.events[0].t + 0.5;
  return 0.5 * (tr.events[0].t + tr.events[1].t);
}

// Volume check along a start state, skipping horizons whose stencil straddles
// a change in the impact sequence.
VolumeCheck constrained_volume(const ZooEntry& e, const Vec& x0) {
  for (double T : {3.0, 3.4, 3.9, 4.5, 5.2, 6.1}) {
    try {
      const auto vc = constrained_flow_volume_check(e.system, e.mechanics, one, x0, T, {});
      if (vc.impacts >= 1) return vc;
    } catch (const std::runtime_error&) {
    }
  }
  throw std::runtime_error("no admissible horizon for " + e.name);
}

std::string grid_bytes(const DensityGrid& g) {
  std::ostringstream os;
  write_grid_csv(os, g);
  os << grid_sidecar(g).dump();
  return os.str();
}

}  // namespace

int main() {
  criterion(1, "Zeno time of the alpha = 2 bouncer", 1.0, [] {
    Outcome o;
    const ZooEntry e = make_interval_bouncer(2.0);
    Vec x0(2);
    x0 << 0.0, 1.0;
    const auto tr = hybrid_flow(e.system, x0, 3.0, {});
    o.require(tr.events.size() >= 40, std::to_string(tr.events.size()) + " impacts");
    if (tr.events.size() >= 40) {
      const double err = std::abs(tr.events[39].t - 2.0);
      o.require(err <= 1e-6, "|t_40 - 2| = " + num(err));
    }
    return o;
  });

  criterion(2, "hybrid Jacobian of the planar box", 1.0, [] {
    Outcome o;
    for (auto [a, b] : {std::pair{2.0, 1.0}, std::pair{2.0, 0.25}, std::pair{1.0, 1.0}}) {
      const ZooEntry e = make_planar_box(a, b);
      double err = 0;
      for (const auto& pt : sample_impacts(e, 20, 2))
        err = std::max(err, std::abs(hybrid_jacobian(e.system, one, pt) - a * a * b));
      o.require(err <= 1e-8, "(" + num(a) + "," + num(b) + ") err " + num(err));
    }
    return o;
  });

  criterion(3, "nonholonomic Jacobian equals one", 30.0, [] {
    Outcome o;
    for (const char* name : {"chaplygin-sleigh", "vertical-disk", "rolling-ball", "heisenberg-toy"}) {
      const ZooEntry e = make_zoo_entry(name);
      const std::size_t n = e.mechanics->dimension();
      const NaturalHamiltonian H(e.mechanics);
      double closed = 0, numeric = 0;
      for (const auto& pt : sample_impacts(e, 1000, 3)) {
        const Vec q = pt.state.head(n);
        const double jc = nonholonomic_jacobian_closed_form(*e.mechanics, H, e.surfaces[pt.guard], q, pt.state.tail(n));
        const auto ch = ConstrainedChart::best_at(e.mechanics, q);
        const double jn = hybrid_jacobian(ch.reduce(e.system), ch.reduce_density(one), {pt.guard, ch.project(pt.state)});
        closed = std::max(closed, std::abs(jc - 1));
        numeric = std::max(numeric, std::abs(jn - jc));
      }
      o.require(closed <= 1e-10 && numeric <= 1e-6,
                std::string(name) + " |J-1| " + num(closed) + ", |J_num-J| " + num(numeric));
    }
    return o;
  });

  criterion(4, "corner-condition properties", 60.0, [] {
    Outcome o;
    for (const char* name : {"elliptic-billiard", "chaplygin-sleigh", "vertical-disk", "rolling-ball", "heisenberg-toy"}) {
      const ZooEntry e = make_zoo_entry(name);
      const MechanicalSystem& s = *e.mechanics;
      const std::size_t n = s.dimension(), m = e.constraint_count();
      const NaturalHamiltonian H(e.mechanics);
      double energy = 0, eta = 0, normal = 0, span = 0, oracle = 0;
      std::size_t idx = 0;
      for (const auto& pt : sample_impacts(e, 1000, 4)) {
        const Vec q = pt.state.head(n);
        const Vec qd = H.dp(q, pt.state.tail(n));
        const ImpactSurface& w = e.surfaces[pt.guard];
        const Vec dh = w.h.gradient(q);
        const auto out = nonholonomic_impact(s, w, q, qd);
        const Vec post = e.system.impact(pt.guard, pt.state).state;
        energy = std::max(energy, std::abs(e.system.energy(post) - e.system.energy(pt.state)));
        if (m) eta = std::max(eta, (s.constraints(q) * out.qdot).cwiseAbs().maxCoeff());
        normal = std::max(normal, std::abs(dh.dot(out.qdot) + dh.dot(qd)));
        Mat B(n, 1 + m);
        B.col(0) = dh;
        if (m) B.rightCols(m) = s.constraints(q).transpose();
        span = std::max(span, testing::span_residual(B, post.tail(n) - pt.state.tail(n)));
        if (idx++ < 100) {
          const auto r = testing::corner_condition_root(s, w, q, qd);
          oracle = std::max(oracle, std::abs(r.epsilon - out.epsilon) / std::max(1.0, std::abs(out.epsilon)));
          if (m) oracle = std::max(oracle, (r.lambda - out.lambda).norm() / std::max(1.0, out.lambda.norm()));
        }
      }
      const double worst = std::max({energy, eta, normal, span, oracle});
      o.require(worst <= 1e-9, std::string(name) + " " + num(worst));
    }
    return o;
  });

  criterion(5, "billiard volume and symplectic form across an impact", 10.0, [] {
    Outcome o;
    const ZooEntry e = make_elliptic_billiard();
    const double T = one_impact_horizon(e.system, e.default_state);
    const auto vc = flow_volume_check(e.system, one, e.default_state, T, {});
    o.require(vc.impacts == 1, std::to_string(vc.impacts) + " impact");
    o.require(std::abs(vc.determinant - 1) <= 1e-4, "|det - 1| " + num(std::abs(vc.determinant - 1)));
    const double sd = symplectic_defect(e.system, e.default_state, T, {});
    o.require(sd <= 1e-4, "|J^T Omega J - Omega| " + num(sd));
    return o;
  });

  criterion(6, "configuration-only density for disk and ball on two tables", 60.0, [] {
    Outcome o;
    const Density zero = [](const Vec&) { return 0.0; };
    for (const char* name : {"vertical-disk", "rolling-ball"})
      for (auto [a, b] : {std::pair{2.0, 2.0}, std::pair{4.0, 2.0}}) {
        const ZooEntry e = make_zoo_entry(name, {{"table_a", a}, {"table_b", b}});
        const auto r = constrained_cohomology_residual(e.system, e.mechanics, zero, one, sample_states(e, 200, 6),
                                                       sample_impacts(e, 200, 7));
        const auto vc = constrained_volume(e, e.default_state);
        o.require(r.continuous <= 1e-5 && r.impact <= 1e-5 && std::abs(vc.deviation) <= 1e-3,
                  std::string(name) + " " + num(a) + "x" + num(b) + " cohomology " + num(std::max(r.continuous, r.impact)) +
                      ", volume dev " + num(vc.deviation) + " over " + std::to_string(vc.impacts) + " impacts");
      }
    return o;
  });

  criterion(7, "sleigh density candidates", 30.0, [] {
    Outcome o;
    const ZooEntry e = make_zoo_entry("chaplygin-sleigh");
    const auto states = sample_states(e, 200, 8);
    const auto impacts = sample_impacts(e, 200, 9);
    const Density f = e.density("p_theta^-3").density;
    const auto a = audit_density(e, f, states, impacts);
    o.require(a.divergence <= 1e-5, "p_theta^-3 divergence " + num(a.divergence));
    double jump = 0;
    if (e.certificate) {
      const Vec post = e.system.impact(e.certificate->guard, e.certificate->state).state;
      jump = std::abs(f(post) - f(e.certificate->state)) / f(e.certificate->state);
    }
    for (const auto& pt : impacts) {
      const Vec post = e.system.impact(pt.guard, pt.state).state;
      jump = std::max(jump, std::abs(f(post) - f(pt.state)) / f(pt.state));
    }
    o.require(jump >= 0.01, "impact |f o Delta - f|/f " + num(jump));
    for (const auto& cand : e.densities) {
      if (cand.name.rfind("config:", 0) != 0 && cand.name != "uniform") continue;
      const auto c = audit_density(e, cand.density, states, {});
      o.require(c.divergence >= 1e-3, cand.name + " divergence " + num(c.divergence));
    }
    return o;
  });

  criterion(8, "Zeno classification", 10.0, [] {
    Outcome o;
    Vec x0(2);
    x0 << 0.0, 1.0;
    {
      const ZooEntry e = make_interval_bouncer(0.5);
      const auto z = detect_zeno(hybrid_flow(e.system, x0, 50.0, {}), e.system);
      o.require(z.classification == ZenoClass::None, "alpha 0.5 " + to_string(z.classification));
    }
    {
      const ZooEntry e = make_interval_bouncer(2.0);
      const auto z = detect_zeno(hybrid_flow(e.system, x0, 3.0, {}), e.system);
      o.require(z.classification == ZenoClass::SuspectedSteady, "alpha 2 " + to_string(z.classification));
      const double err = z.t_infinity ? std::abs(*z.t_infinity - 2.0) : INFINITY;
      o.require(err <= 1e-4, "t_inf error " + num(err));
    }
    {
      const ZooEntry e = make_planar_box(2.0, 0.25);
      const auto z = detect_zeno(hybrid_flow(e.system, e.default_state, 5.0, {}), e.system);
      o.require(z.classification == ZenoClass::SuspectedSpasmodic, "box " + to_string(z.classification));
    }
    {
      const ZooEntry e = make_tan_escape();
      IntegratorConfig c;
      c.domain_bound = 1e8;
      const auto tr = hybrid_flow(e.system, e.default_state, 3.0, c);
      o.require(tr.reason == Termination::DomainExit && tr.final_time < std::numbers::pi / 2,
                "tan-escape " + to_string(tr.reason) + " at t = " + format_number(tr.final_time));
    }
    return o;
  });

  criterion(9, "sleigh density pipeline", 600.0, [] {
    Outcome o;
    const ZooEntry e = make_zoo_entry("chaplygin-sleigh");
    DensityRun run;
    run.iterations = 10000;
    run.burn_in = 1000;
    run.seed = 1;
    run.grid = {e.table->a, e.table->b, 100, 100};
    const auto go = [&] {
      return ensemble_density(e.system, e.planar_position, e.sample_state, 1, run, {}, 1);
    };
    const auto g1 = go();
    const auto g2 = go();
    o.require(g1.complete, "complete");
    o.require(std::abs(g1.total_mass() - 1) <= 1e-12, "mass - 1 = " + num(g1.total_mass() - 1));
    o.require(grid_bytes(g1) == grid_bytes(g2), "identical reruns");
    o.require(g1.occupied() > 50, std::to_string(g1.occupied()) + " occupied cells");
    return o;
  });

  criterion(10, "invariant forms of the billiard", 30.0, [] {
    Outcome o;
    const ZooEntry e = make_elliptic_billiard();
    const auto pts = sample_states(e, 100, 10);
    const auto ips = sample_impacts(e, 100, 11);
    const auto w = SampledKForm::symplectic(2);
    const auto ixw = interior(e.system.field, w);
    const auto ww = wedge(w, w);
    for (auto [label, form] : {std::pair{"omega", &w}, std::pair{"i_X omega", &ixw}, std::pair{"omega^omega", &ww}}) {
      const auto r = check_invariance(*form, e.system, pts, ips, 1e-5);
      o.require(r.pass(), std::string(label) + " " + num(std::max({r.lie, r.energy, r.specular})));
    }
    // i_X omega against dH = p . dp on random vectors
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    double err = 0;
    for (const Vec& x : pts) {
      Mat u(4, 1);
      for (int i = 0; i < 4; ++i) u(i, 0) = nd(rng);
      err = std::max(err, std::abs(ixw(x, u) - x.tail(2).dot(u.col(0).tail(2))));
    }
    o.require(err <= 1e-5, "|i_X omega - dH| " + num(err));
    return o;
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
