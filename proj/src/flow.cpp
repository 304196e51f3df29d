#include "hybrid/flow.hpp"

#include "hybrid/integrator.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hybrid {

void IntegratorConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0)) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  positive(rtol, "rtol");
  positive(atol, "atol");
  positive(event_tolerance, "event tolerance");
  positive(min_impact_gap, "minimum impact gap");
  positive(domain_bound, "domain bound");
  if (max_step < 0) throw std::invalid_argument("max step must be non-negative");
  if (sample_interval < 0) throw std::invalid_argument("sample interval must be non-negative");
  if (max_impacts < 1) throw std::invalid_argument("max impacts must be at least 1");
  if (zeno_window < 2) throw std::invalid_argument("zeno window must be at least 2");
  if (interior_samples < 1) throw std::invalid_argument("interior samples must be at least 1");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::TimeHorizon: return "time-horizon";
    case Termination::ZenoGuard: return "zeno-guard";
    case Termination::Grazing: return "grazing";
    case Termination::DomainExit: return "domain-exit";
    case Termination::Error: return "error";
  }
  return "unknown";
}

std::string to_string(ZenoClass z) {
  switch (z) {
    case ZenoClass::None: return "none";
    case ZenoClass::SuspectedSteady: return "suspected-steady";
    case ZenoClass::SuspectedSpasmodic: return "suspected-spasmodic";
  }
  return "unknown";
}

namespace {

bool outside_domain(const Vec& x, double bound) {
  return !x.allFinite() || x.norm() > bound;
}

// Locates the root of phi on [a, b] with phi(a) > 0 >= phi(b) to full
// double precision in the step-relative variable.
template <class F>
double refine_root(const F& phi, double a, double b, double fa, double fb) {
  if (fb == 0.0) return b;
  auto tol = [](double lo, double hi) {
    return std::abs(hi - lo) <= 4 * std::numeric_limits<double>::epsilon() *
                                     std::max(std::abs(lo), std::abs(hi));
  };
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(phi, a, b, fa, fb, tol, iters);
  const double pa = phi(r.first), pb = phi(r.second);
  // Prefer the side still inside the domain when both are equally close.
  return std::abs(pa) <= std::abs(pb) ? r.first : r.second;
}

}  // namespace

ArcResult integrate_arc(const HybridSystem& sys, const Vec& x0, double t0, double t_max,
                        std::vector<bool> armed, const IntegratorConfig& cfg) {
  ArcResult res;
  const std::size_t ng = sys.guards.size();
  armed.resize(ng, true);
  auto record = [&](double t, const Vec& x) {
    if (!cfg.record_arcs) return;
    res.arc.times.push_back(t);
    res.arc.states.push_back(x);
  };
  auto finish = [&](double t, const Vec& x) {
    res.t_end = t;
    res.end_state = x;
    if (!cfg.record_arcs || res.arc.times.empty() || res.arc.times.back() != t) record(t, x);
  };

  Vec y = x0;
  double t = t0;
  if (outside_domain(y, cfg.domain_bound)) {
    res.stop = Termination::DomainExit;
    res.detail = "initial state outside domain";
    finish(t, y);
    return res;
  }
  std::vector<double> hv(ng);
  for (std::size_t k = 0; k < ng; ++k) {
    hv[k] = sys.guards[k].value(y);
    if (hv[k] <= cfg.event_tolerance) armed[k] = false;
  }
  record(t, y);

  const auto& f = sys.field;
  Vec f0 = f(y);
  double h = DormandPrince::initial_step(f, y, f0, cfg.rtol, cfg.atol);
  double next_sample = cfg.sample_interval > 0 ? t0 + cfg.sample_interval : 0.0;

  while (t < t_max) {
    if (cfg.max_step > 0) h = std::min(h, cfg.max_step);
    bool last = false;
    if (h >= t_max - t) {
      h = t_max - t;
      last = true;
    }
    // Smallest step that still advances t in floating point.
    const double hmin = 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < hmin && !last) h = hmin;
    DormandPrince::Step st = DormandPrince::attempt(f, y, f0, h, cfg.rtol, cfg.atol);
    if (!(st.error <= 1.0)) {
      if (h <= hmin) {
        res.stop = Termination::Error;
        res.detail = "step size underflow";
        finish(t, y);
        return res;
      }
      h = std::isfinite(st.error) ? DormandPrince::next_step(h, st.error) : 0.25 * h;
      continue;
    }
    ++res.steps;

    // Guard scan over the step, including interior dense-output probes.
    const int S = cfg.interior_samples;
    std::optional<Crossing> best;
    double best_tau = std::numeric_limits<double>::infinity();
    std::vector<double> taus(ng, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < ng; ++k) {
      if (!armed[k]) continue;
      const auto& gk = sys.guards[k].value;
      double prev_theta = 0.0, prev = hv[k];
      double ta = -1, tb = -1;
      for (int j = 1; j <= S; ++j) {
        const double theta = static_cast<double>(j) / S;
        const double v = j == S ? gk(st.y1) : gk(st.interpolate(theta));
        if (prev > 0 && v <= 0) {
          ta = prev_theta;
          tb = theta;
          break;
        }
        prev_theta = theta;
        prev = v;
      }
      if (ta < 0) continue;
      auto phi = [&](double tau) { return gk(DormandPrince::advance(f, y, f0, tau)); };
      double a = ta * h, b = tb * h;
      double fa = ta == 0.0 ? hv[k] : phi(a);
      double fb = tb == 1.0 ? gk(st.y1) : phi(b);
      if (fa <= 0) {
        b = a;
        fb = fa;
        a = 0;
        fa = hv[k];
      }
      double tau;
      if (fb <= 0) {
        tau = refine_root(phi, a, b, fa, fb);
      } else {
        // Exact substep disagrees with the interpolant; refine on the latter.
        auto psi = [&](double s) { return gk(st.interpolate(s / h)); };
        tau = refine_root(psi, a, b, psi(a), psi(b));
      }
      taus[k] = tau;
      if (tau < best_tau) {
        best_tau = tau;
        best = Crossing{k, 0.0, Vec()};
      }
    }

    if (best) {
      const std::size_t k = best->guard;
      for (std::size_t j = 0; j < ng; ++j) {
        if (j != k && std::abs(taus[j] - best_tau) <= 1e-12 * std::max(h, 1e-300)) {
          res.stop = Termination::Error;
          res.detail = "simultaneous impact on '" + sys.guards[k].label + "' and '" +
                       sys.guards[j].label + "'";
          finish(t + best_tau, DormandPrince::advance(f, y, f0, best_tau));
          return res;
        }
      }
      best->state = DormandPrince::advance(f, y, f0, best_tau);
      best->t = t + best_tau;
      if (cfg.sample_interval > 0) {
        while (next_sample < best->t) {
          record(next_sample, st.interpolate((next_sample - t) / h));
          next_sample += cfg.sample_interval;
        }
      }
      for (std::size_t j = 0; j < ng; ++j) {
        if (j != k && std::abs(sys.guards[j].value(best->state)) <= cfg.event_tolerance) {
          res.stop = Termination::Error;
          res.detail = "corner hit at '" + sys.guards[k].label + "' and '" +
                       sys.guards[j].label + "'";
          finish(best->t, best->state);
          return res;
        }
      }
      res.hit = best;
      finish(best->t, best->state);
      return res;
    }

    const double t1 = last ? t_max : t + h;
    if (cfg.sample_interval > 0) {
      while (next_sample <= t1 && next_sample < t_max) {
        record(next_sample, st.interpolate((next_sample - t) / h));
        next_sample += cfg.sample_interval;
      }
    }
    y = st.y1;
    f0 = st.k7;
    t = t1;
    if (cfg.sample_interval == 0.0 && t < t_max) record(t, y);
    if (outside_domain(y, cfg.domain_bound)) {
      res.stop = Termination::DomainExit;
      std::ostringstream os;
      os << "state norm exceeded " << cfg.domain_bound;
      res.detail = os.str();
      finish(t, y);
      return res;
    }
    for (std::size_t k = 0; k < ng; ++k) {
      hv[k] = sys.guards[k].value(y);
      if (!armed[k] && hv[k] > cfg.event_tolerance) armed[k] = true;
    }
    h = DormandPrince::next_step(h, st.error);
  }
  finish(t, y);
  return res;
}

HybridTrajectory hybrid_flow(const HybridSystem& sys, const Vec& x0, double T,
                             const IntegratorConfig& cfg) {
  cfg.validate();
  HybridTrajectory traj;
  double t = 0.0;
  Vec x = x0;
  const std::size_t ng = sys.guards.size();
  std::vector<bool> armed(ng);
  for (std::size_t k = 0; k < ng; ++k)
    armed[k] = sys.guards[k].value(x) > cfg.event_tolerance;

  auto end = [&](Termination r, std::string detail, double tf, const Vec& xf) {
    traj.reason = r;
    traj.detail = std::move(detail);
    traj.final_time = tf;
    traj.final_state = xf;
    return traj;
  };

  while (true) {
    ArcResult a;
    try {
      a = integrate_arc(sys, x, t, T, armed, cfg);
    } catch (const ModelError& e) {
      return end(Termination::Error, e.what(), t, x);
    }
    traj.steps += a.steps;
    if (cfg.record_arcs) traj.arcs.push_back(std::move(a.arc));
    if (a.stop) return end(*a.stop, a.detail, a.t_end, a.end_state);
    if (!a.hit) return end(Termination::TimeHorizon, "", a.t_end, a.end_state);

    const Crossing& c = *a.hit;
    ImpactEvent ev;
    ev.t = c.t;
    ev.guard = c.guard;
    ev.label = sys.guards[c.guard].label;
    ev.pre = c.state;
    ImpactResult ir;
    try {
      ir = sys.impact(c.guard, c.state);
    } catch (const ModelError& e) {
      return end(Termination::Error, e.what(), c.t, c.state);
    }
    ev.post = ir.state;
    ev.epsilon = ir.epsilon;
    ev.lambda = ir.lambda;
    ev.grazing = ir.grazing;
    if (ir.grazing) {
      traj.events.push_back(ev);
      return end(Termination::Grazing, "tangential contact with '" + ev.label + "'", c.t,
                 c.state);
    }
    if (!ir.state.allFinite())
      return end(Termination::Error, "non-finite post-impact state", c.t, c.state);
    ev.separating = sys.guard_rate(c.guard, ir.state) > 0;
    traj.events.push_back(ev);

    const std::size_t n = traj.events.size();
    if (n >= cfg.max_impacts)
      return end(Termination::ZenoGuard, "impact limit reached", c.t, ir.state);
    if (n >= 2 && c.t - traj.events[n - 2].t < cfg.min_impact_gap)
      return end(Termination::ZenoGuard, "inter-impact gap below resolvable scale", c.t,
                 ir.state);
    if (c.t >= T) return end(Termination::TimeHorizon, "", c.t, ir.state);

    x = ir.state;
    t = c.t;
    for (std::size_t k = 0; k < ng; ++k)
      armed[k] = sys.guards[k].value(x) > cfg.event_tolerance;
    armed[c.guard] = false;
  }
}

Vec time_1_map(const HybridSystem& sys, const Vec& x, const IntegratorConfig& config) {
  IntegratorConfig cfg = config;
  cfg.record_arcs = false;
  const HybridTrajectory tr = hybrid_flow(sys, x, 1.0, cfg);
  if (tr.reason != Termination::TimeHorizon) throw FlowTerminated(tr.reason, tr.detail);
  return tr.final_state;
}

ZenoReport detect_zeno(const HybridTrajectory& traj, const HybridSystem& sys,
                       const ZenoOptions& opt) {
  ZenoReport rep;
  for (const auto& e : traj.events) {
    rep.impact_times.push_back(e.t);
    rep.max_state_norm = std::max({rep.max_state_norm, e.pre.norm(), e.post.norm()});
    const Vec dh = sys.guards[e.guard].gradient(e.pre);
    const double n = dh.norm();
    rep.tangency_distance.push_back(n > 0 ? std::abs(dh.dot(sys.field(e.pre))) / n : 0.0);
  }
  for (std::size_t i = 1; i < rep.impact_times.size(); ++i)
    rep.gaps.push_back(rep.impact_times[i] - rep.impact_times[i - 1]);
  if (rep.impact_times.size() < 3) return rep;

  const std::size_t ng = rep.gaps.size();
  const std::size_t w = std::min(opt.window, ng);
  double log_sum = 0;
  std::size_t used = 0;
  for (std::size_t i = ng - w + 1; i < ng; ++i) {
    if (rep.gaps[i] <= 0 || rep.gaps[i - 1] <= 0) continue;
    log_sum += std::log(rep.gaps[i] / rep.gaps[i - 1]);
    ++used;
  }
  if (used == 0) return rep;
  const double r = std::exp(log_sum / static_cast<double>(used));
  rep.ratio = r;
  if (!(r < 1.0 - opt.ratio_tolerance)) return rep;

  rep.t_infinity = rep.impact_times.back() + rep.gaps.back() * r / (1.0 - r);
  double window_norm = 0;
  for (std::size_t i = traj.events.size() - w; i < traj.events.size(); ++i)
    window_norm = std::max({window_norm, traj.events[i].pre.norm(), traj.events[i].post.norm()});
  window_norm = std::max(window_norm, traj.final_state.size() ? traj.final_state.norm() : 0.0);
  rep.classification = window_norm > opt.escape_threshold ? ZenoClass::SuspectedSpasmodic
                                                           : ZenoClass::SuspectedSteady;
  return rep;
}

}  // namespace hybrid
