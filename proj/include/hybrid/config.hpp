#pragma once

// Run configuration read from YAML. Unknown keys are rejected with their
// line number.

#include "hybrid/flow.hpp"
#include "hybrid/stats.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybrid {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string system;
  std::map<std::string, double> parameters;
  IntegratorConfig integrator;

  // Initial state: a full state, or configuration plus velocity for
  // mechanical systems (the velocity is projected onto the constraints).
  std::optional<std::vector<double>> state;
  std::optional<std::vector<double>> position;
  std::optional<std::vector<double>> velocity;

  double horizon = 10.0;
  std::uint64_t seed = 1;
  std::uint64_t iterations = 10000;
  std::uint64_t burn_in = 1000;
  std::size_t trajectories = 1;
  unsigned workers = 0;
  GridSpec grid{0.0, 0.0, 100, 100};  // zero bounds take the table's

  std::string density;  // empty: the entry's first candidate
  std::size_t samples = 200;
  std::size_t impact_samples = 200;
  double tolerance = 1e-5;
  ZenoOptions zeno;

  std::string out_dir = ".";
  std::string prefix;  // empty: the system name
};

/// Throws ConfigError with a "line N" reference on schema errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace hybrid
