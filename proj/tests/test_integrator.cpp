#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybrid/integrator.hpp"

#include <cmath>

using namespace hybrid;

namespace {

// y' = A y for a rotation generator; exact solution is a rotation.
Vec rotate(const Vec& y0, double t) {
  Vec y(2);
  y << std::cos(t) * y0[0] - std::sin(t) * y0[1], std::sin(t) * y0[0] + std::cos(t) * y0[1];
  return y;
}

const DormandPrince::Rhs rot = [](const Vec& y) {
  Vec d(2);
  d << -y[1], y[0];
  return d;
};

}  // namespace

TEST_CASE("single step converges at fifth order") {
  const Vec y0 = (Vec(2) << 1.0, 0.5).finished();
  double prev = 0;
  for (int i = 0; i < 4; ++i) {
    const double h = 0.4 / std::pow(2.0, i);
    const Vec y1 = DormandPrince::advance(rot, y0, rot(y0), h);
    const double err = (y1 - rotate(y0, h)).norm();
    if (i > 0) CHECK(std::log2(prev / err) > 5.5);  // local error is O(h^6)
    prev = err;
  }
}

TEST_CASE("attempt matches advance and reports a small error") {
  const Vec y0 = (Vec(2) << 1.0, 0.0).finished();
  const auto st = DormandPrince::attempt(rot, y0, rot(y0), 0.1, 1e-10, 1e-12);
  CHECK((st.y1 - DormandPrince::advance(rot, y0, rot(y0), 0.1)).norm() == 0.0);
  CHECK((st.k7 - rot(st.y1)).norm() < 1e-15);
  CHECK(st.error > 0);
  CHECK((st.interpolate(0.0) - y0).norm() < 1e-15);
  CHECK((st.interpolate(1.0) - st.y1).norm() < 1e-15);
}

TEST_CASE("dense output is accurate inside the step") {
  const Vec y0 = (Vec(2) << 0.3, -1.0).finished();
  const double h = 0.1;
  const auto st = DormandPrince::attempt(rot, y0, rot(y0), h, 1e-8, 1e-10);
  for (double th : {0.1, 0.25, 0.5, 0.8}) CHECK((st.interpolate(th) - rotate(y0, th * h)).norm() < 1e-8);
}

TEST_CASE("exponential decay to a tolerance") {
  const DormandPrince::Rhs f = [](const Vec& y) { return Vec(-2.0 * y); };
  Vec y = Vec::Constant(1, 1.0), k = f(y);
  double t = 0, h = DormandPrince::initial_step(f, y, k, 1e-10, 1e-12);
  CHECK(h > 0);
  int rejected = 0;
  while (t < 3.0) {
    h = std::min(h, 3.0 - t);
    const auto st = DormandPrince::attempt(f, y, k, h, 1e-10, 1e-12);
    if (st.error <= 1) {
      t += h;
      y = st.y1;
      k = st.k7;
    } else {
      ++rejected;
    }
    h = DormandPrince::next_step(h, st.error);
  }
  CHECK(std::abs(y[0] - std::exp(-6.0)) < 1e-10);
  CHECK(rejected < 10);
}

TEST_CASE("step-size controller limits") {
  CHECK(DormandPrince::next_step(1.0, 0.0) == doctest::Approx(5.0));
  CHECK(DormandPrince::next_step(1.0, 1e12) == doctest::Approx(0.2));
  CHECK(DormandPrince::next_step(1.0, 1.0) == doctest::Approx(0.9));
}
