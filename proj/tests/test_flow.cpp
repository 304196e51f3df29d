#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybrid/dynamics.hpp"
#include "hybrid/flow.hpp"
#include "hybrid/zoo.hpp"

#include <cmath>
#include <numbers>

using namespace hybrid;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

// Particle on a line, state (q, v), with one wall at q = 0 approached from
// below (interior q < 0).
HybridSystem line_with_wall() {
  HybridSystem s;
  s.name = "line";
  s.state_names = {"q", "v"};
  s.config_dimension = 1;
  s.field = [](const Vec& x) { return v({x[1], 0.0}); };
  s.guards.push_back({"q=0", [](const Vec& x) { return -x[0]; }, [](const Vec&) { return v({-1, 0}); }});
  s.impact = [](std::size_t, const Vec& x) {
    ImpactResult r;
    r.state = v({x[0], -x[1]});
    return r;
  };
  return s;
}

// Unit square corner: walls x = 1 and y = 1.
HybridSystem square_corner() {
  HybridSystem s;
  s.state_names = {"x", "y", "vx", "vy"};
  s.config_dimension = 2;
  s.field = [](const Vec& x) { return v({x[2], x[3], 0, 0}); };
  s.guards.push_back({"x=1", [](const Vec& x) { return 1 - x[0]; }, [](const Vec&) { return v({-1, 0, 0, 0}); }});
  s.guards.push_back({"y=1", [](const Vec& x) { return 1 - x[1]; }, [](const Vec&) { return v({0, -1, 0, 0}); }});
  s.impact = [](std::size_t k, const Vec& x) {
    ImpactResult r;
    r.state = x;
    r.state[2 + k] = -x[2 + k];
    return r;
  };
  return s;
}

}  // namespace

TEST_CASE("configuration validation") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  c.rtol = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_impacts = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.event_tolerance = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("arc stops at the first crossing") {
  const auto s = line_with_wall();
  const auto a = integrate_arc(s, v({-1, 1}), 0.0, 5.0, {true}, {});
  REQUIRE(a.hit);
  CHECK(std::abs(a.hit->t - 1.0) < 1e-9);
  CHECK(std::abs(a.hit->state[0]) <= 1e-10);
}

TEST_CASE("arc without crossings reaches t_max") {
  HybridSystem s;
  s.state_names = {"q", "p"};
  s.config_dimension = 1;
  s.field = [](const Vec& x) { return v({x[1], -x[0]}); };
  s.guards.push_back({"q=2", [](const Vec& x) { return 2 - x[0]; }, [](const Vec&) { return v({-1, 0}); }});
  s.impact = [](std::size_t, const Vec& x) { return ImpactResult{x, 0, Vec(), false}; };
  const auto a = integrate_arc(s, v({1, 0}), 0.0, 7.0, {true}, {});
  CHECK_FALSE(a.hit);
  CHECK_FALSE(a.stop);
  CHECK(a.t_end == 7.0);
  CHECK(std::abs(a.end_state[0] - std::cos(7.0)) < 1e-9);
}

TEST_CASE("tan-escape hits x = 1 at pi/4") {
  const ZooEntry e = make_tan_escape();
  const auto tr = hybrid_flow(e.system, e.default_state, 1.0, {});
  REQUIRE(tr.events.size() == 1);
  CHECK(std::abs(tr.events[0].t - std::numbers::pi / 4) < 1e-9);
  CHECK(tr.events[0].label == "x=1");
}

TEST_CASE("tan-escape leaves every bounded set before pi/2") {
  const ZooEntry e = make_tan_escape();
  IntegratorConfig c;
  c.domain_bound = 1e8;
  const auto tr = hybrid_flow(e.system, e.default_state, 3.0, c);
  CHECK(tr.reason == Termination::DomainExit);
  CHECK(tr.final_time < std::numbers::pi / 2);
  CHECK(tr.final_time > std::numbers::pi / 2 - 1e-7);
}

TEST_CASE("elastic bouncer impacts every unit of time") {
  const ZooEntry e = make_interval_bouncer(1.0);
  const auto tr = hybrid_flow(e.system, v({0.0, 1.0}), 10.5, {});
  CHECK(tr.reason == Termination::TimeHorizon);
  REQUIRE(tr.events.size() == 10);
  for (std::size_t i = 0; i < tr.events.size(); ++i) CHECK(std::abs(tr.events[i].t - (i + 1.0)) < 1e-9);
}

TEST_CASE("super-elastic bouncer accumulates at t = 2") {
  const ZooEntry e = make_interval_bouncer(2.0);
  const auto tr = hybrid_flow(e.system, v({0.0, 1.0}), 3.0, {});
  CHECK(tr.reason == Termination::ZenoGuard);
  REQUIRE(tr.events.size() >= 40);
  // t_k = 2 - 2^(1-k)
  for (std::size_t k = 1; k <= 40; ++k) CHECK(std::abs(tr.events[k - 1].t - (2.0 - std::pow(2.0, 1.0 - k))) < 1e-9);
  CHECK(std::abs(tr.events[39].t - 2.0) < 1e-6);
}

TEST_CASE("event localization and separation at every impact") {
  for (const char* name : {"elliptic-billiard", "chaplygin-sleigh", "vertical-disk", "rolling-ball", "heisenberg-toy", "planar-box"}) {
    const ZooEntry e = make_zoo_entry(name);
    const auto tr = hybrid_flow(e.system, e.default_state, 30.0, {});
    CHECK(tr.reason == Termination::TimeHorizon);
    CHECK(!tr.events.empty());
    double prev = -1;
    for (const auto& ev : tr.events) {
      CHECK(std::abs(e.system.guards[ev.guard].value(ev.pre)) <= 1e-10);
      CHECK(e.system.guard_rate(ev.guard, ev.pre) < 0);
      CHECK(ev.separating);
      CHECK(ev.t > prev);
      prev = ev.t;
    }
  }
}

TEST_CASE("identical inputs give identical trajectories") {
  const ZooEntry e = make_zoo_entry("chaplygin-sleigh");
  const auto a = hybrid_flow(e.system, e.default_state, 20.0, {});
  const auto b = hybrid_flow(e.system, e.default_state, 20.0, {});
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].t == b.events[i].t);
    CHECK((a.events[i].post - b.events[i].post).norm() == 0.0);
  }
  CHECK((a.final_state - b.final_state).norm() == 0.0);
}

TEST_CASE("sleigh energy over a thousand impacts") {
  const ZooEntry e = make_zoo_entry("chaplygin-sleigh");
  IntegratorConfig c;
  c.record_arcs = false;
  HybridTrajectory tr;
  double T = 500;
  do {
    tr = hybrid_flow(e.system, e.default_state, T, c);
    T *= 2;
  } while (tr.events.size() < 1000 && tr.reason == Termination::TimeHorizon);
  REQUIRE(tr.events.size() >= 1000);
  const double H0 = e.system.energy(e.default_state);
  double drift = 0;
  for (const auto& ev : tr.events) drift = std::max(drift, std::abs(e.system.energy(ev.post) - H0));
  CHECK(drift <= 1e-7);
}

TEST_CASE("time-1 map") {
  const ZooEntry b = make_interval_bouncer(1.0);
  const Vec x = time_1_map(b.system, v({0.5, 1.0}), {});
  CHECK(std::abs(x[0] - 0.5) < 1e-9);
  CHECK(std::abs(x[1] + 1.0) < 1e-12);

  const ZooEntry bill = make_elliptic_billiard();
  const Vec rest = v({0.3, -0.2, 0.0, 0.0});
  CHECK((time_1_map(bill.system, rest, {}) - rest).norm() == 0.0);
  const Vec slow = v({0.0, 0.0, 0.1, 0.05});
  const Vec moved = time_1_map(bill.system, slow, {});
  CHECK((moved - v({0.1, 0.05, 0.1, 0.05})).norm() < 1e-12);

  const ZooEntry z = make_interval_bouncer(2.0);
  CHECK_THROWS_AS(time_1_map(z.system, v({0.5, 4.0}), {}), FlowTerminated);
}

TEST_CASE("corner hits terminate with an error") {
  const auto s = square_corner();
  const auto tr = hybrid_flow(s, v({0, 0, 1, 1}), 3.0, {});
  CHECK(tr.reason == Termination::Error);
  CHECK(tr.events.empty());
  CHECK(std::abs(tr.final_time - 1.0) < 1e-9);
}

TEST_CASE("grazing impacts stop the flow") {
  auto s = line_with_wall();
  s.impact = [](std::size_t, const Vec& x) { return ImpactResult{x, 0, Vec(), true}; };
  const auto tr = hybrid_flow(s, v({-1, 1}), 3.0, {});
  CHECK(tr.reason == Termination::Grazing);
  CHECK(tr.events.size() == 1);
}

TEST_CASE("impact limit") {
  IntegratorConfig c;
  c.max_impacts = 5;
  const ZooEntry e = make_interval_bouncer(1.0);
  const auto tr = hybrid_flow(e.system, v({0.0, 1.0}), 100.0, c);
  CHECK(tr.reason == Termination::ZenoGuard);
  CHECK(tr.events.size() == 5);
}

TEST_CASE("Zeno detection") {
  SUBCASE("super-elastic bouncer") {
    const ZooEntry e = make_interval_bouncer(2.0);
    const auto tr = hybrid_flow(e.system, v({0.0, 1.0}), 3.0, {});
    const auto z = detect_zeno(tr, e.system);
    CHECK(z.classification != ZenoClass::None);
    REQUIRE(z.t_infinity);
    CHECK(std::abs(*z.t_infinity - 2.0) < 1e-4);
    REQUIRE(z.ratio);
    CHECK(*z.ratio == doctest::Approx(0.5).epsilon(1e-6));
    // the speed doubles at every impact, so the states escape
    CHECK(z.classification == ZenoClass::SuspectedSpasmodic);
  }
  SUBCASE("elastic and sub-elastic bouncers") {
    for (double a : {1.0, 0.5}) {
      const ZooEntry e = make_interval_bouncer(a);
      const auto tr = hybrid_flow(e.system, v({0.0, 1.0}), 60.0, {});
      CHECK(detect_zeno(tr, e.system).classification == ZenoClass::None);
    }
  }
  SUBCASE("volume-preserving box escapes") {
    const ZooEntry e = make_planar_box(2.0, 0.25);
    const auto tr = hybrid_flow(e.system, e.default_state, 5.0, {});
    const auto z = detect_zeno(tr, e.system);
    CHECK(z.classification == ZenoClass::SuspectedSpasmodic);
  }
  SUBCASE("bounded shrinking gaps are steady") {
    // gaps shrink geometrically while the state stays bounded
    HybridTrajectory tr;
    double t = 0;
    for (int k = 0; k < 20; ++k) {
      t += std::pow(0.5, k);
      ImpactEvent ev;
      ev.t = t;
      ev.pre = ev.post = v({0.0, 1.0});
      tr.events.push_back(ev);
    }
    tr.final_state = v({0.0, 1.0});
    const auto s = line_with_wall();
    const auto z = detect_zeno(tr, s);
    CHECK(z.classification == ZenoClass::SuspectedSteady);
    CHECK(std::abs(*z.t_infinity - 2.0) < 1e-9);
  }
  SUBCASE("too few impacts") {
    HybridTrajectory tr;
    CHECK(detect_zeno(tr, line_with_wall()).classification == ZenoClass::None);
  }
}
