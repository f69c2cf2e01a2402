#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lcs/flow_models.hpp"

using namespace lcs;

namespace {

Tensor2 fd_jacobian(const FlowModel& m, const Vec2& x, double t, double h = 1e-5) {
  const Vec2 vx1p = velocity(m, {x.x1 + h, x.x2}, t);
  const Vec2 vx1m = velocity(m, {x.x1 - h, x.x2}, t);
  const Vec2 vx2p = velocity(m, {x.x1, x.x2 + h}, t);
  const Vec2 vx2m = velocity(m, {x.x1, x.x2 - h}, t);
  return {(vx1p.x1 - vx1m.x1) / (2 * h), (vx2p.x1 - vx2m.x1) / (2 * h),
          (vx1p.x2 - vx1m.x2) / (2 * h), (vx2p.x2 - vx2m.x2) / (2 * h)};
}

double max_abs_diff(const Tensor2& a, const Tensor2& b) {
  return std::max({std::abs(a.m11 - b.m11), std::abs(a.m12 - b.m12),
                   std::abs(a.m21 - b.m21), std::abs(a.m22 - b.m22)});
}

std::vector<FlowModel> all_models() {
  return {FlowModel::linear_saddle(),    FlowModel::rigid_rotation(),
          FlowModel::transient_saddle(), FlowModel::transition_saddle(),
          FlowModel::double_gyre(),      FlowModel::moving_separation()};
}

}  // namespace

TEST_CASE("smooth transition window values") {
  const TransitionWindow w{0.5, 0.6};
  CHECK(smooth_transition(0.4, w) == 0.0);
  CHECK(smooth_transition(0.5, w) == 0.0);
  CHECK(smooth_transition(0.7, w) == 1.0);
  CHECK(smooth_transition(0.6, w) == 1.0);
  CHECK(smooth_transition(0.55, w) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("smooth transition is monotone across the window") {
  const TransitionWindow w{0.5, 0.6};
  double prev = -1.0;
  for (int k = 0; k <= 10000; ++k) {
    const double t = 0.5 + 0.1 * k / 10000.0;
    const double s = smooth_transition(t, w);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("velocity spot values") {
  CHECK(velocity(FlowModel::double_gyre(), {0.5, 0.5}, 3.7).x1 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(velocity(FlowModel::double_gyre(), {0.5, 0.5}, 3.7).x2 == doctest::Approx(0.0).epsilon(1e-15));

  const Vec2 v = velocity(FlowModel::transient_saddle(), {1.0, 1.0}, 0.0);
  CHECK(v.x1 == doctest::Approx(-1.0));
  CHECK(v.x2 == doctest::Approx(1.0));

  // Free-slip wall: zero normal flow on the x2 = 0 axis for all t.
  const FlowModel ms = FlowModel::moving_separation();
  for (double x1 : {-1.0, 0.0, 0.7, 2.0})
    for (double t : {0.0, 0.05, 0.3}) CHECK(velocity(ms, {x1, 0.0}, t).x2 == 0.0);
}

TEST_CASE("velocity gradient spot values") {
  const Tensor2 ls = velocity_gradient(FlowModel::linear_saddle(), {0.3, -2.0}, 1.0);
  CHECK(ls.m11 == -1.0);
  CHECK(ls.m12 == 0.0);
  CHECK(ls.m21 == 0.0);
  CHECK(ls.m22 == 1.0);

  // Transient saddle past the window: constant-coefficient, zero Jacobian.
  const Tensor2 ts = velocity_gradient(FlowModel::transient_saddle(), {0.4, 0.2}, 0.8);
  CHECK(max_abs_diff(ts, Tensor2{0, 0, 0, 0}) == 0.0);

  const FlowModel dg = FlowModel::double_gyre();
  CHECK(max_abs_diff(velocity_gradient(dg, {0.25, 0.25}, 0.0),
                     fd_jacobian(dg, {0.25, 0.25}, 0.0)) <= 1e-8);
}

TEST_CASE("analytic Jacobian matches finite differences on random samples") {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::uniform_real_distribution<double> time(0.0, 2.0);
  for (const auto& m : all_models()) {
    for (int k = 0; k < 1000; ++k) {
      Vec2 x{coord(rng), coord(rng)};
      if (m.kind == FlowKind::DoubleGyre) x = {unit(rng), unit(rng)};
      const double t = time(rng);
      CHECK(max_abs_diff(velocity_gradient(m, x, t), fd_jacobian(m, x, t)) <= 1e-6);
    }
  }
}

TEST_CASE("incompressible models are divergence-free") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> time(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double t = time(rng);
    CHECK(std::abs(velocity_gradient(FlowModel::double_gyre(), {unit(rng), unit(rng)}, t)
                       .trace()) <= 1e-14);
    CHECK(std::abs(
              velocity_gradient(FlowModel::moving_separation(), {coord(rng), coord(rng)}, t)
                  .trace()) <= 1e-13);
  }
}

TEST_CASE("rate of strain") {
  const SymmetricTensor2 s = rate_of_strain(FlowModel::linear_saddle(), {1.0, 1.0}, 0.0);
  CHECK(s.c11 == -1.0);
  CHECK(s.c12 == 0.0);
  CHECK(s.c22 == 1.0);

  const SymmetricTensor2 rot = rate_of_strain(FlowModel::rigid_rotation(), {0.4, -0.3}, 2.0);
  CHECK(rot.c11 == 0.0);
  CHECK(rot.c12 == 0.0);
  CHECK(rot.c22 == 0.0);

  const Tensor2 g = velocity_gradient(FlowModel::double_gyre(), {0.25, 0.25}, 0.0);
  const SymmetricTensor2 sg = rate_of_strain(FlowModel::double_gyre(), {0.25, 0.25}, 0.0);
  CHECK(sg.c11 == doctest::Approx(g.m11));
  CHECK(sg.c12 == doctest::Approx(0.5 * (g.m12 + g.m21)));
  CHECK(sg.c22 == doctest::Approx(g.m22));
}

TEST_CASE("stream-function convention: wall convergence toward x1 = ct and upwelling") {
  const FlowModel ms = FlowModel::moving_separation();
  const double t = 0.1, xc = ms.c * t;
  // On the wall, flow points toward the moving separation point.
  CHECK(velocity(ms, {xc - 0.3, 0.0}, t).x1 > 0.0);
  CHECK(velocity(ms, {xc + 0.3, 0.0}, t).x1 < 0.0);
  // Just above the wall at the separation point: upwelling.
  CHECK(velocity(ms, {xc, 0.05}, t).x2 > 0.0);
  // Flipping the convention mirrors the field.
  FlowModel flipped = ms;
  flipped.hamiltonian_sign = -1.0;
  CHECK(velocity(flipped, {xc, 0.05}, t).x2 < 0.0);
}

TEST_CASE("string addressing") {
  CHECK(flow_ids().size() == 6);
  const FlowModel m = make_flow("moving-separation", {{"L", 2.0}, {"c", 5.0}});
  CHECK(m.L == 2.0);
  CHECK(m.c == 5.0);
  CHECK(m.q1 == 5.0);
  CHECK_THROWS_AS(make_flow("moving-separation", {{"bogus", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_flow("no-such-flow"), std::invalid_argument);
  CHECK_THROWS_AS(make_flow("transition-saddle", {{"a", 0.7}, {"b", 0.6}}),
                  std::invalid_argument);
}
