#include "hybrid/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybrid {

namespace {

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Stages {
  Vec k2, k3, k4, k5, k6, y1;
};

Stages stages(const DormandPrince::Rhs& f, const Vec& y0, const Vec& k1, double h) {
  Stages s;
  s.k2 = f(y0 + h * a21 * k1);
  s.k3 = f(y0 + h * (a31 * k1 + a32 * s.k2));
  s.k4 = f(y0 + h * (a41 * k1 + a42 * s.k2 + a43 * s.k3));
  s.k5 = f(y0 + h * (a51 * k1 + a52 * s.k2 + a53 * s.k3 + a54 * s.k4));
  s.k6 = f(y0 + h * (a61 * k1 + a62 * s.k2 + a63 * s.k3 + a64 * s.k4 + a65 * s.k5));
  s.y1 = y0 + h * (a71 * k1 + a73 * s.k3 + a74 * s.k4 + a75 * s.k5 + a76 * s.k6);
  return s;
}

double scaled_norm(const Vec& e, const Vec& y0, const Vec& y1, double rtol, double atol) {
  double acc = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    acc += (e[i] / sc) * (e[i] / sc);
  }
  return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, e.size())));
}

}  // namespace

Vec DormandPrince::Step::interpolate(double theta) const {
  const double t1 = 1.0 - theta;
  return rcont[0] + theta * (rcont[1] + t1 * (rcont[2] + theta * (rcont[3] + t1 * rcont[4])));
}

DormandPrince::Step DormandPrince::attempt(const Rhs& f, const Vec& y0, const Vec& k1,
                                           double h, double rtol, double atol) {
  Stages s = stages(f, y0, k1, h);
  Step st;
  st.h = h;
  st.y0 = y0;
  st.k1 = k1;
  st.k7 = f(s.y1);
  const Vec err = h * (e1 * k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 + e6 * s.k6 + e7 * st.k7);
  st.error = err.allFinite() && s.y1.allFinite() ? scaled_norm(err, y0, s.y1, rtol, atol)
                                                 : std::numeric_limits<double>::infinity();
  const Vec ydiff = s.y1 - y0;
  const Vec bspl = h * k1 - ydiff;
  st.rcont[0] = y0;
  st.rcont[1] = ydiff;
  st.rcont[2] = bspl;
  st.rcont[3] = ydiff - h * st.k7 - bspl;
  st.rcont[4] = h * (d1 * k1 + d3 * s.k3 + d4 * s.k4 + d5 * s.k5 + d6 * s.k6 + d7 * st.k7);
  st.y1 = std::move(s.y1);
  return st;
}

Vec DormandPrince::advance(const Rhs& f, const Vec& y0, const Vec& k1, double h) {
  return stages(f, y0, k1, h).y1;
}

double DormandPrince::initial_step(const Rhs& f, const Vec& y0, const Vec& f0, double rtol,
                                   double atol) {
  auto norm = [&](const Vec& v) { return scaled_norm(v, y0, y0, rtol, atol); };
  const double dn0 = norm(y0), dn1 = norm(f0);
  double h = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
  const Vec f1 = f(y0 + h * f0);
  const double dn2 = norm(f1 - f0) / h;
  const double dmax = std::max(dn1, dn2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min(100 * h, h1);
}

double DormandPrince::next_step(double h, double error) {
  double fac = error == 0.0 ? 5.0 : 0.9 * std::pow(error, -0.2);
  fac = std::clamp(fac, 0.2, 5.0);
  return h * fac;
}

}  // namespace hybrid
