#pragma once

// Dormand-Prince 5(4) embedded pair with its fourth-order continuous extension.

#include "hybrid/types.hpp"

#include <array>
#include <functional>

namespace hybrid {

class DormandPrince {
 public:
  using Rhs = std::function<Vec(const Vec&)>;

  struct Step {
    double h = 0;
    Vec y0, y1;
    Vec k1, k7;  // field at both ends (FSAL)
    double error = 0;  // scaled RMS norm; accept when <= 1
    std::array<Vec, 5> rcont;

    // theta in [0,1]
    Vec interpolate(double theta) const;
  };

  static Step attempt(const Rhs& f, const Vec& y0, const Vec& k1, double h, double rtol,
                      double atol);

  // Fifth-order solution only (no error estimate, no dense output).
  static Vec advance(const Rhs& f, const Vec& y0, const Vec& k1, double h);

  static double initial_step(const Rhs& f, const Vec& y0, const Vec& f0, double rtol,
                             double atol);

  // New step size from an error norm, safety 0.9, growth in [0.2, 5].
  static double next_step(double h, double error);
};

}  // namespace hybrid
