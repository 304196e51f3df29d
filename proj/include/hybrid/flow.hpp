#pragma once

// The hybrid flow: adaptive integration between impacts, guard-crossing
// location, impact application and Zeno bookkeeping.

#include "hybrid/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hybrid {

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = 0.0;  // 0 means unbounded
  double event_tolerance = 1e-10;
  int interior_samples = 8;  // dense-output probes per step for double crossings
  std::size_t max_impacts = 100000;
  double min_impact_gap = 1e-13;
  std::size_t zeno_window = 8;
  double domain_bound = 1e15;  // state norm treated as an escape
  double sample_interval = 0.0;  // 0 records every accepted step
  bool record_arcs = true;

  void validate() const;  // throws std::invalid_argument
};

enum class Termination { TimeHorizon, ZenoGuard, Grazing, DomainExit, Error };

std::string to_string(Termination t);

struct Arc {
  std::vector<double> times;
  std::vector<Vec> states;
};

struct ImpactEvent {
  double t = 0;
  std::size_t guard = 0;
  std::string label;
  Vec pre, post;  // full states
  double epsilon = 0;
  Vec lambda;
  bool grazing = false;
  bool separating = true;  // guard rate after the impact is positive
};

struct HybridTrajectory {
  std::vector<Arc> arcs;
  std::vector<ImpactEvent> events;
  Termination reason = Termination::TimeHorizon;
  std::string detail;
  double final_time = 0;
  Vec final_state;
  std::size_t steps = 0;
};

struct Crossing {
  std::size_t guard = 0;
  double t = 0;
  Vec state;
};

struct ArcResult {
  Arc arc;
  std::optional<Crossing> hit;
  std::optional<Termination> stop;  // set when the arc ended abnormally
  std::string detail;
  double t_end = 0;
  Vec end_state;
  std::size_t steps = 0;
};

/// Integrates until t_max or the first armed guard crossing (h going from
/// positive to non-positive). `armed[k]` false suppresses guard k until h_k
/// exceeds the event tolerance.
ArcResult integrate_arc(const HybridSystem& sys, const Vec& x0, double t0, double t_max,
                        std::vector<bool> armed, const IntegratorConfig& config);

HybridTrajectory hybrid_flow(const HybridSystem& sys, const Vec& x0, double T,
                             const IntegratorConfig& config);

class FlowTerminated : public std::runtime_error {
 public:
  FlowTerminated(Termination reason, const std::string& detail)
      : std::runtime_error(to_string(reason) + ": " + detail), reason_(reason) {}
  Termination reason() const { return reason_; }

 private:
  Termination reason_;
};

/// phi^H(1, x). Throws FlowTerminated unless the unit interval completes.
Vec time_1_map(const HybridSystem& sys, const Vec& x, const IntegratorConfig& config);

enum class ZenoClass { None, SuspectedSteady, SuspectedSpasmodic };
std::string to_string(ZenoClass z);

struct ZenoOptions {
  std::size_t window = 8;
  double ratio_tolerance = 1e-3;
  double escape_threshold = 1e6;
};

struct ZenoReport {
  std::vector<double> impact_times;
  std::vector<double> gaps;
  std::optional<double> ratio;
  std::optional<double> t_infinity;
  ZenoClass classification = ZenoClass::None;
  double max_state_norm = 0;
  // |dh(X)| / |dh| at each impact: distance proxy to the tangency set.
  std::vector<double> tangency_distance;
};

ZenoReport detect_zeno(const HybridTrajectory& traj, const HybridSystem& sys,
                       const ZenoOptions& options = {});

}  // namespace hybrid
