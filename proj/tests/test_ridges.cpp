#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lcs/ridges.hpp"

using namespace lcs;

namespace {

template <class F>
ScalarGrid sample(const GridSpec& spec, const F& f) {
  ScalarGrid g(spec);
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) g.at(i, j) = f(spec.x1(i), spec.x2(j));
  return g;
}

double ridge_field(double x1, double x2) {
  const double q = x1 * x1 - 1.0;
  return std::exp(-x2 * x2) * (1.0 - 0.25 * q * q);
}

double bowl(double x1, double x2) { return -(x1 * x1 + x2 * x2); }

double segment_deviation(const std::vector<Vec2>& pts) {
  // Max distance from the segment {x2 = 0, |x1| <= 1}.
  double worst = 0.0;
  for (const auto& p : pts) {
    const double dx1 = std::max(0.0, std::abs(p.x1) - 1.0);
    worst = std::max(worst, std::hypot(dx1, p.x2));
  }
  return worst;
}

}  // namespace

TEST_CASE("lyapunov_type_number") {
  REQUIRE(lyapunov_type_number({-4.0, 0.0, -1.0}).has_value());
  CHECK(*lyapunov_type_number({-4.0, 0.0, -1.0}) == doctest::Approx(4.0));
  CHECK_FALSE(lyapunov_type_number({-1.0, 0.0, -1.0}).has_value());  // degenerate
  CHECK_FALSE(lyapunov_type_number({-1.0, 0.0, 2.0}).has_value());   // not a maximum
  CHECK_FALSE(lyapunov_type_number({1.0, 0.0, 2.0}).has_value());
}

TEST_CASE("gradient flow trajectory on a bowl converges to the origin") {
  const GridSpec spec{-1.0, 1.0, -1.0, 1.0, 101, 101};
  const ScalarGrid g = sample(spec, bowl);
  const auto traj = gradient_flow_trajectory(g, {0.5, 0.5}, 0.05, 1000, 1e-5);
  REQUIRE(traj.size() > 1);
  CHECK(norm(traj.back()) <= 1e-4);
}

TEST_CASE("gradient flow respects even symmetry: axis trajectories stay on the axis") {
  const GridSpec spec{-2.0, 2.0, -2.0, 2.0, 201, 201};
  const ScalarGrid g = sample(spec, ridge_field);
  const auto traj = gradient_flow_trajectory(g, {0.3, 0.0}, 0.05, 2000);
  for (const auto& p : traj) CHECK(std::abs(p.x2) <= 1e-6);
}

TEST_CASE("gradient flow from near the saddle reaches the maximum at (1,0)") {
  const GridSpec spec{-2.0, 2.0, -2.0, 2.0, 201, 201};
  const ScalarGrid g = sample(spec, ridge_field);
  const auto traj = gradient_flow_trajectory(g, {0.05, 0.0}, 0.05, 5000, 1e-4);
  CHECK(norm(traj.back() - Vec2{1.0, 0.0}) <= 0.01);
}

TEST_CASE("extract_ridges on the test ridge field finds exactly the analytic ridge") {
  const GridSpec spec{-2.0, 2.0, -2.0, 2.0, 201, 201};
  const ScalarGrid g = sample(spec, ridge_field);
  const auto curves = extract_ridges(g, g.default_tol_grad());
  REQUIRE(curves.size() == 1);
  const RidgeCurve& c = curves[0];
  CHECK(c.points.size() >= 3);
  CHECK(segment_deviation(c.points) <= std::max(spec.h1(), spec.h2()));
  CHECK(c.endpoints[0].kind == CriticalKind::Max);
  CHECK(c.endpoints[1].kind == CriticalKind::Max);
  REQUIRE(c.interior_criticals.size() == 1);
  CHECK(c.interior_criticals[0].kind == CriticalKind::Saddle);
}

TEST_CASE("extract_ridges on a bowl finds nothing") {
  const GridSpec spec{-1.0, 1.0, -1.0, 1.0, 101, 101};
  const ScalarGrid g = sample(spec, bowl);
  CHECK(extract_ridges(g, g.default_tol_grad()).empty());
}

TEST_CASE("extracted ridge is invariant under the gradient flow") {
  const GridSpec spec{-2.0, 2.0, -2.0, 2.0, 201, 201};
  const ScalarGrid g = sample(spec, ridge_field);
  const auto curves = extract_ridges(g, g.default_tol_grad());
  REQUIRE(curves.size() == 1);
  const auto& pts = curves[0].points;
  const double cell = 2.0 * std::max(spec.h1(), spec.h2());
  for (std::size_t k = pts.size() / 5; k < pts.size(); k += pts.size() / 5) {
    const auto traj = gradient_flow_trajectory(g, pts[k], 0.05, 3000, 1e-4);
    for (const auto& p : traj)
      CHECK(detail::point_polyline_distance(p, pts) <= cell);
  }
}

TEST_CASE("interior critical points align with the ridge tangent (Hessian invariance)") {
  const GridSpec spec{-2.0, 2.0, -2.0, 2.0, 201, 201};
  const ScalarGrid g = sample(spec, ridge_field);
  const auto curves = extract_ridges(g, g.default_tol_grad());
  REQUIRE(curves.size() == 1);
  for (const auto& cp : curves[0].interior_criticals) {
    const EigenPair2 e = eig_sym2(cp.hessian);
    Vec2 tangent;
    detail::point_polyline_distance(cp.x, curves[0].points, &tangent);
    // One Hessian eigenvector must be tangent within 5 degrees.
    const double ang = std::min(detail::tangent_angle(e.e_min, tangent),
                                detail::tangent_angle(e.e_max, tangent));
    CHECK(ang <= 5.0 * std::numbers::pi / 180.0);
  }
}

TEST_CASE("verify_ridge passes on the test ridge field across resolutions") {
  for (int n : {101, 201, 401}) {
    const GridSpec spec{-2.0, 2.0, -2.0, 2.0, n, n};
    const ScalarGrid g = sample(spec, ridge_field);
    const auto curves = extract_ridges(g, g.default_tol_grad());
    REQUIRE(curves.size() == 1);
    const RidgeReport rep = verify_ridge(g, curves[0]);
    CHECK(rep.pass);
    CHECK(rep.endpoint_ok);
    CHECK(rep.interior_ok);
    CHECK(rep.min_alignment >= 0.99);
    for (double nu : rep.lyapunov_numbers) CHECK(nu > 1.0);
    CHECK(rep.tangency_error <= 1e-3);
  }
}

TEST_CASE("verify_ridge fails on a segment that is no ridge") {
  const GridSpec spec{-1.0, 1.0, -1.0, 1.0, 101, 101};
  const ScalarGrid g = sample(spec, bowl);
  RidgeCurve fake;
  for (int k = 0; k <= 20; ++k) fake.points.push_back({-0.5 + 0.05 * k, 0.5});
  fake.endpoints[0] = detail::synthesize_critical(g, fake.points.front());
  fake.endpoints[1] = detail::synthesize_critical(g, fake.points.back());
  fake.interior_criticals.push_back(detail::synthesize_critical(g, {0.0, 0.5}));
  const RidgeReport rep = verify_ridge(g, fake);
  CHECK(rep.tangency_error > 0.05);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("smoothness degree honors the configured s and p") {
  const GridSpec spec{-2.0, 2.0, -2.0, 2.0, 201, 201};
  const ScalarGrid g = sample(spec, ridge_field);
  const auto curves = extract_ridges(g, g.default_tol_grad());
  REQUIRE(curves.size() == 1);
  // Endpoint ratios are ~1, so Int[ratio] = 1 dominates for large s, p.
  CHECK(verify_ridge(g, curves[0], 5, 7).smoothness_degree_q == 1);
  // Tiny s wins.
  CHECK(verify_ridge(g, curves[0], 1, 7).smoothness_degree_q == 0);
}

TEST_CASE("plateau ridges are recovered: transitioning-saddle FTLE crest at x2 = 0") {
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  const GridSpec grid{-1.0, 1.0, -1.0, 1.0, 101, 101};
  SeparationParams p;
  const auto g = compute_field(FieldKind::FTLE, FlowModel::transition_saddle({0.5, 0.6}),
                               grid, 0.0, 1.0, p, cfg);
  const auto curves = extract_ridges(g, g.default_tol_grad());
  REQUIRE(curves.size() >= 1);
  bool found = false;
  for (const auto& c : curves) {
    double worst = 0.0;
    for (const auto& pt : c.points) worst = std::max(worst, std::abs(pt.x2));
    if (worst <= grid.h2() && c.points.size() >= 20) found = true;
  }
  CHECK(found);
}

TEST_CASE("a tiny perturbation leaves the extracted ridge in place") {
  const GridSpec spec{-2.0, 2.0, -2.0, 2.0, 201, 201};
  const ScalarGrid a = sample(spec, ridge_field);
  const ScalarGrid b = sample(spec, [](double x1, double x2) {
    return ridge_field(x1, x2) + 1e-6 * std::sin(3.0 * x1 + 2.0 * x2);
  });
  const auto ca = extract_ridges(a, a.default_tol_grad());
  const auto cb = extract_ridges(b, b.default_tol_grad());
  REQUIRE(ca.size() == 1);
  REQUIRE(cb.size() == 1);
  const auto [d0, ang] = curve_c1_distance(ca[0].points, cb[0].points);
  CHECK(d0 <= std::max(spec.h1(), spec.h2()));
  CHECK(ang <= 0.1);
}

TEST_CASE("crest_curve builds a polyline along a non-flat crest") {
  const GridSpec spec{0.0, 2.0, -1.0, 1.0, 101, 101};
  // Crest along x2 = 0 whose height decays with x1: no critical points,
  // no flat plateau, but a well-defined per-column maximum.
  const ScalarGrid g = sample(spec, [](double x1, double x2) {
    return (2.0 - 0.5 * x1) * std::exp(-4.0 * x2 * x2);
  });
  const auto c = crest_curve(g);
  REQUIRE(c.has_value());
  CHECK(c->points.size() >= 50);
  for (const auto& p : c->points) CHECK(std::abs(p.x2) <= spec.h2());
}
