#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "lcs/scalar_field.hpp"
#include "lcs/separation.hpp"

namespace lcs {

/// A candidate ridge: a polyline that is (numerically) invariant under the
/// gradient flow of the field, bounded by two critical points.
struct RidgeCurve {
  std::vector<Vec2> points;  // ordered, >= 3 points
  std::array<CriticalPoint, 2> endpoints{};
  std::vector<CriticalPoint> interior_criticals;
};

struct RidgeReport {
  double tangency_error = 0.0;  // max |<grad f, n>| / |grad f| over samples
  bool endpoint_ok = false;
  bool interior_ok = false;
  std::vector<double> lyapunov_numbers;  // lambda_min/lambda_max ratios
  int smoothness_degree_q = 0;
  double min_alignment = 1.0;  // min |<e_min, n>| over interior criticals
  bool pass = false;
};

struct ContinuationReport {
  double tau_bar = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double rho = 0.0;
  bool matched = false;
  double hausdorff_c0 = std::numeric_limits<double>::infinity();
  double c1_angle = std::numeric_limits<double>::infinity();  // radians
  bool degenerate_neighborhood = false;
  int undefined_points = 0;
  double grid_h = 0.0;  // spacing of the comparison FTLE grid
};

/// Hessian quotient lambda_min/lambda_max at a candidate ridge critical
/// point; defined only when both eigenvalues are strictly negative and
/// distinct (otherwise the point is outside Z0 and nullopt is returned).
inline std::optional<double> lyapunov_type_number(const SymmetricTensor2& h) {
  const EigenPair2 e = eig_sym2(h);
  if (e.degenerate || e.lambda_max >= 0.0) return std::nullopt;
  return e.lambda_min / e.lambda_max;
}

// ---------------------------------------------------------------------------
// Polyline utilities.

namespace detail {

inline double polyline_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) len += norm(pts[k] - pts[k - 1]);
  return len;
}

/// n equally spaced (by arc length) samples of a polyline.
inline std::vector<Vec2> resample_polyline(const std::vector<Vec2>& pts, int n) {
  std::vector<Vec2> out;
  if (pts.size() < 2 || n < 2) return pts;
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k)
    cum[k] = cum[k - 1] + norm(pts[k] - pts[k - 1]);
  const double total = cum.back();
  if (total <= 0.0) return pts;
  out.reserve(n);
  std::size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double s = total * k / (n - 1);
    while (seg + 2 < pts.size() && cum[seg + 1] < s) ++seg;
    const double ds = cum[seg + 1] - cum[seg];
    const double u = ds > 0.0 ? (s - cum[seg]) / ds : 0.0;
    out.push_back(pts[seg] + (pts[seg + 1] - pts[seg]) * u);
  }
  return out;
}

/// Unit tangent at sample k of a polyline (central differences).
inline Vec2 polyline_tangent(const std::vector<Vec2>& pts, std::size_t k) {
  const std::size_t a = k == 0 ? 0 : k - 1;
  const std::size_t b = k + 1 < pts.size() ? k + 1 : k;
  const Vec2 d = pts[b] - pts[a];
  const double n = norm(d);
  return n > 0.0 ? d * (1.0 / n) : Vec2{1.0, 0.0};
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b,
                                     Vec2* tangent = nullptr) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double u = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  if (tangent) {
    const double n = std::sqrt(len2);
    *tangent = n > 0.0 ? ab * (1.0 / n) : Vec2{1.0, 0.0};
  }
  return norm(p - (a + ab * u));
}

inline double point_polyline_distance(const Vec2& p, const std::vector<Vec2>& poly,
                                      Vec2* tangent = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_t{1.0, 0.0};
  for (std::size_t k = 1; k < poly.size(); ++k) {
    Vec2 t;
    const double d = point_segment_distance(p, poly[k - 1], poly[k], &t);
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  if (tangent) *tangent = best_t;
  return best;
}

/// Undirected angle between two unit tangents, in [0, pi/2].
inline double tangent_angle(const Vec2& a, const Vec2& b) {
  return std::acos(std::clamp(std::abs(dot(a, b)), 0.0, 1.0));
}

}  // namespace detail

/// One-sided C0/C1 distance from curve a to curve b: max over samples of a
/// of the distance to b, and the max tangent-direction angle at the
/// nearest segment.
inline std::pair<double, double> curve_c1_distance(const std::vector<Vec2>& a,
                                                   const std::vector<Vec2>& b,
                                                   int n_samples = 41) {
  const auto samples = detail::resample_polyline(a, n_samples);
  double d0 = 0.0, ang = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    Vec2 tb;
    d0 = std::max(d0, detail::point_polyline_distance(samples[k], b, &tb));
    ang = std::max(ang, detail::tangent_angle(detail::polyline_tangent(samples, k), tb));
  }
  return {d0, ang};
}

// ---------------------------------------------------------------------------
// Gradient-flow integration.

/// Fixed-step RK4 trajectory of x' = grad f(x) on the interpolated field.
/// Stops when |grad f| <= tol_grad, on leaving the grid, on touching
/// missing data, or after max_steps.
inline std::vector<Vec2> gradient_flow_trajectory(const ScalarGrid& g,
                                                  const Vec2& x_start, double step,
                                                  int max_steps,
                                                  double tol_grad = -1.0) {
  if (tol_grad < 0.0) tol_grad = g.default_tol_grad();
  std::vector<Vec2> traj{x_start};
  Vec2 x = x_start;
  try {
    for (int k = 0; k < max_steps; ++k) {
      const Vec2 k1 = gradient_at(g, x);
      if (norm(k1) <= tol_grad) break;
      const Vec2 k2 = gradient_at(g, x + k1 * (0.5 * step));
      const Vec2 k3 = gradient_at(g, x + k2 * (0.5 * step));
      const Vec2 k4 = gradient_at(g, x + k3 * step);
      x = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
      traj.push_back(x);
    }
  } catch (const OutOfBoundsError&) {
  } catch (const MissingDataError&) {
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Ridge extraction.

namespace detail {

struct AscentResult {
  std::vector<Vec2> path;  // excludes the start point, ends at the max
  std::size_t max_index = 0;
};

/// Marches uphill along the normalized gradient from `start` until it
/// snaps to one of the supplied maxima.  Arc-length steps keep the march
/// stable regardless of the field's curvature scale.
inline std::optional<AscentResult> ascend_to_max(const ScalarGrid& g, const Vec2& start,
                                                 const std::vector<CriticalPoint>& maxima,
                                                 double tol_grad) {
  const double h = std::min(g.spec.h1(), g.spec.h2());
  const double ds = 0.25 * h;
  const double snap = 2.0 * std::max(g.spec.h1(), g.spec.h2());
  const int max_steps = 20 * (g.spec.nx + g.spec.ny);
  AscentResult res;
  Vec2 x = start;
  try {
    for (int k = 0; k < max_steps; ++k) {
      for (std::size_t mi = 0; mi < maxima.size(); ++mi) {
        if (norm(x - maxima[mi].x) <= snap) {
          res.path.push_back(maxima[mi].x);
          res.max_index = mi;
          return res;
        }
      }
      const Vec2 g1 = gradient_at(g, x);
      const double n1 = norm(g1);
      if (n1 <= tol_grad) return std::nullopt;  // stalled away from any max
      const Vec2 v1 = g1 * (1.0 / n1);
      const Vec2 g2 = gradient_at(g, x + v1 * ds);
      const double n2 = norm(g2);
      const Vec2 v2 = n2 > 0.0 ? g2 * (1.0 / n2) : v1;
      x = x + (v1 + v2) * (0.5 * ds);
      res.path.push_back(x);
    }
  } catch (const OutOfBoundsError&) {
  } catch (const MissingDataError&) {
  }
  return std::nullopt;
}

inline CriticalPoint synthesize_critical(const ScalarGrid& g, const Vec2& x) {
  CriticalPoint cp;
  cp.x = x;
  try {
    cp.hessian = hessian_at(g, x);
    cp.kind = classify(eig_sym2(cp.hessian));
  } catch (const MissingDataError&) {
  } catch (const OutOfBoundsError&) {
  }
  return cp;
}

struct CrestRun {
  std::vector<Vec2> points;
  double flatness = 0.0;  // max-min of field values along the crest
};

/// Per-column (or per-row when transposed) interior argmax crest lines
/// with sub-cell parabolic refinement, split where the crest jumps by
/// more than one node between neighbors.
inline std::vector<CrestRun> crest_runs(const ScalarGrid& g, bool transposed,
                                        int min_len) {
  const GridSpec& s = g.spec;
  const int n_outer = transposed ? s.ny : s.nx;
  const int n_inner = transposed ? s.nx : s.ny;
  auto value = [&](int o, int in) { return transposed ? g.at(in, o) : g.at(o, in); };
  auto coord = [&](int o, double in) {
    return transposed ? Vec2{s.x1min + in * s.h1(), s.x2(o)}
                      : Vec2{s.x1(o), s.x2min + in * s.h2()};
  };
  const auto [lo, hi] = g.value_range();
  const double range = hi - lo;
  if (range <= 0.0) return {};
  const double curv_tol = 1e-9 * range;

  struct Crest {
    bool ok = false;
    int j = 0;
    double pos = 0.0;  // fractional inner index
    double val = 0.0;
  };
  std::vector<Crest> crest(n_outer);
  for (int o = 0; o < n_outer; ++o) {
    int best = -1;
    for (int in = 0; in < n_inner; ++in) {
      const double v = value(o, in);
      if (ScalarGrid::missing(v)) continue;
      if (best < 0 || v > value(o, best)) best = in;
    }
    if (best <= 0 || best >= n_inner - 1) continue;
    const double vm = value(o, best - 1), v0 = value(o, best), vp = value(o, best + 1);
    if (ScalarGrid::missing(vm) || ScalarGrid::missing(vp)) continue;
    const double d2 = vp - 2.0 * v0 + vm;
    if (!(d2 <= -curv_tol)) continue;
    crest[o] = {true, best, best + 0.5 * (vm - vp) / d2, v0};
  }

  std::vector<CrestRun> runs;
  int start = -1;
  auto flush = [&](int end) {  // [start, end)
    if (start < 0 || end - start < min_len) {
      start = -1;
      return;
    }
    CrestRun run;
    double vlo = crest[start].val, vhi = crest[start].val;
    for (int o = start; o < end; ++o) {
      run.points.push_back(coord(o, crest[o].pos));
      vlo = std::min(vlo, crest[o].val);
      vhi = std::max(vhi, crest[o].val);
    }
    run.flatness = vhi - vlo;
    runs.push_back(std::move(run));
    start = -1;
  };
  for (int o = 0; o < n_outer; ++o) {
    if (!crest[o].ok) {
      flush(o);
      continue;
    }
    if (start < 0) {
      start = o;
    } else if (std::abs(crest[o].j - crest[o - 1].j) > 1) {
      flush(o);
      start = o;
    }
  }
  flush(n_outer);
  return runs;
}

}  // namespace detail

/// Longest crest line of the field (per-column argmax with sub-cell
/// refinement), packaged as a RidgeCurve with synthesized critical-point
/// records.  Useful for building candidate curves on fields whose ridge
/// carries a nonzero along-ridge gradient.
inline std::optional<RidgeCurve> crest_curve(const ScalarGrid& g,
                                             bool transposed = false) {
  const int min_len = std::max(5, (transposed ? g.spec.ny : g.spec.nx) / 4);
  auto runs = detail::crest_runs(g, transposed, min_len);
  if (runs.empty()) return std::nullopt;
  const auto longest = std::max_element(
      runs.begin(), runs.end(),
      [](const auto& a, const auto& b) { return a.points.size() < b.points.size(); });
  RidgeCurve c;
  c.points = std::move(longest->points);
  c.endpoints[0] = detail::synthesize_critical(g, c.points.front());
  c.endpoints[1] = detail::synthesize_critical(g, c.points.back());
  c.interior_criticals.push_back(
      detail::synthesize_critical(g, c.points[c.points.size() / 2]));
  return c;
}

/// Ridge extraction by heteroclinic chaining: every saddle launches two
/// uphill marches along the eigenvector of its positive Hessian
/// eigenvalue; chains that terminate at maxima become curves.  Level
/// crest lines (plateau ridges, where the field is constant along the
/// ridge and the chaining has no saddle to start from) are recovered by a
/// per-column crest scan restricted to flat runs.
inline std::vector<RidgeCurve> extract_ridges(const ScalarGrid& g, double tol_grad,
                                              int* discarded_chains = nullptr) {
  int discarded = 0;
  std::vector<RidgeCurve> curves;
  const auto cps = find_critical_points(g, tol_grad);
  std::vector<CriticalPoint> maxima;
  for (const auto& cp : cps)
    if (cp.kind == CriticalKind::Max) maxima.push_back(cp);

  const double launch = 0.5 * std::min(g.spec.h1(), g.spec.h2());
  for (const auto& cp : cps) {
    if (cp.kind != CriticalKind::Saddle) continue;
    const EigenPair2 e = eig_sym2(cp.hessian);
    // Unstable direction of the gradient flow at the saddle.
    const Vec2 u = e.e_max;
    auto plus = detail::ascend_to_max(g, cp.x + u * launch, maxima, tol_grad);
    auto minus = detail::ascend_to_max(g, cp.x - u * launch, maxima, tol_grad);
    if (!plus || !minus) {
      ++discarded;
      continue;
    }
    RidgeCurve c;
    c.points.assign(minus->path.rbegin(), minus->path.rend());
    c.points.push_back(cp.x);
    c.points.insert(c.points.end(), plus->path.begin(), plus->path.end());
    c.endpoints[0] = maxima[minus->max_index];
    c.endpoints[1] = maxima[plus->max_index];
    c.interior_criticals.push_back(cp);
    curves.push_back(std::move(c));
  }

  // Plateau fallback: flat crest runs not already covered by a chain.
  const auto [lo, hi] = g.value_range();
  const double flat_tol = 1e-3 * (hi - lo);
  const double near = 2.0 * std::max(g.spec.h1(), g.spec.h2());
  for (bool transposed : {false, true}) {
    const int min_len = std::max(5, (transposed ? g.spec.ny : g.spec.nx) / 4);
    for (auto& run : detail::crest_runs(g, transposed, min_len)) {
      if (run.flatness > flat_tol) continue;
      bool covered = false;
      for (const auto& c : curves) {
        std::size_t inside = 0;
        for (const auto& p : run.points)
          if (detail::point_polyline_distance(p, c.points) <= near) ++inside;
        if (2 * inside >= run.points.size()) {
          covered = true;
          break;
        }
      }
      if (covered) continue;
      RidgeCurve c;
      c.points = std::move(run.points);
      c.endpoints[0] = detail::synthesize_critical(g, c.points.front());
      c.endpoints[1] = detail::synthesize_critical(g, c.points.back());
      c.interior_criticals.push_back(
          detail::synthesize_critical(g, c.points[c.points.size() / 2]));
      curves.push_back(std::move(c));
    }
  }
  if (discarded_chains) *discarded_chains = discarded;
  return curves;
}

// ---------------------------------------------------------------------------
// Ridge verification.

inline RidgeReport verify_ridge(const ScalarGrid& g, const RidgeCurve& curve, int s = 2,
                                int p = 2) {
  RidgeReport rep;
  const int n_samples = std::max<int>(41, static_cast<int>(curve.points.size()));
  const auto samples = detail::resample_polyline(curve.points, n_samples);
  const double skip_dist = 2.0 * std::max(g.spec.h1(), g.spec.h2());
  const auto [lo, hi] = g.value_range();
  const double grad_floor = 1e-6 * (hi - lo) / std::min(g.spec.h1(), g.spec.h2());

  auto near_critical = [&](const Vec2& x) {
    for (const auto& cp : curve.endpoints)
      if (norm(x - cp.x) <= skip_dist) return true;
    for (const auto& cp : curve.interior_criticals)
      if (norm(x - cp.x) <= skip_dist) return true;
    return false;
  };

  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (near_critical(samples[k])) continue;
    Vec2 grad;
    try {
      grad = gradient_at(g, samples[k]);
    } catch (const OutOfBoundsError&) {
      continue;
    }
    const double gn = norm(grad);
    if (gn <= grad_floor) continue;  // plateau: tangency holds trivially
    const Vec2 n = perp(detail::polyline_tangent(samples, k));
    rep.tangency_error = std::max(rep.tangency_error, std::abs(dot(grad, n)) / gn);
  }

  rep.endpoint_ok = true;
  for (const auto& cp : curve.endpoints) {
    const EigenPair2 e = eig_sym2(cp.hessian);
    if (!(e.lambda_max < 0.0)) rep.endpoint_ok = false;
  }

  rep.interior_ok = !curve.interior_criticals.empty();
  for (const auto& cp : curve.interior_criticals) {
    const EigenPair2 e = eig_sym2(cp.hessian);
    if (!(e.lambda_min < 0.0)) rep.interior_ok = false;
    // Nearest polyline normal at the critical point.
    std::size_t kbest = 0;
    double dbest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double d = norm(samples[k] - cp.x);
      if (d < dbest) {
        dbest = d;
        kbest = k;
      }
    }
    const Vec2 n = perp(detail::polyline_tangent(samples, kbest));
    const double align = std::abs(dot(e.e_min, n));
    rep.min_alignment = std::min(rep.min_alignment, align);
    if (align < 0.99) rep.interior_ok = false;
  }

  for (const auto& cp : curve.endpoints)
    if (auto nu = lyapunov_type_number(cp.hessian)) rep.lyapunov_numbers.push_back(*nu);
  for (const auto& cp : curve.interior_criticals)
    if (auto nu = lyapunov_type_number(cp.hessian)) rep.lyapunov_numbers.push_back(*nu);

  int q = std::min(s - 1, p);
  for (double nu : rep.lyapunov_numbers)
    q = std::min(q, static_cast<int>(std::floor(nu)));
  rep.smoothness_degree_q = q;

  bool lyap_ok = true;
  for (double nu : rep.lyapunov_numbers)
    if (!(nu > 1.0)) lyap_ok = false;
  rep.pass = rep.tangency_error <= 0.05 && rep.endpoint_ok && rep.interior_ok && lyap_ok;
  return rep;
}

// ---------------------------------------------------------------------------
// FSLE -> FTLE ridge continuation.

struct ContinuationConfig {
  double t0 = 0.0;
  int n_along = 31;   // tube samples along the curve
  int n_across = 7;   // tube samples across the curve
  int ftle_nx = 101;  // comparison-field resolution over the tube
  int ftle_ny = 101;
  int threads = 1;
};

/// Samples the infinitesimal separation time tau_0 on a tube of half-width
/// rho around the curve, forms the discrete C2 deviation from its tube
/// mean, then computes the FTLE field at horizon tau_bar over the tube and
/// checks whether an FTLE ridge matches the input curve.
inline ContinuationReport continue_fsle_ridge(const FlowModel& m,
                                              const SeparationParams& p,
                                              const RidgeCurve& curve, double rho,
                                              const ContinuationConfig& cc,
                                              const IntegratorConfig& cfg) {
  ContinuationReport rep;
  rep.rho = rho;
  const auto axis = detail::resample_polyline(curve.points, cc.n_along);
  const int na = static_cast<int>(axis.size());
  const int nc = cc.n_across;

  // Tube lattice of tau_0 values.
  std::vector<double> tau(static_cast<std::size_t>(na) * nc,
                          std::numeric_limits<double>::quiet_NaN());
  std::vector<Vec2> lattice(tau.size());
  for (int ia = 0; ia < na; ++ia) {
    const Vec2 n = perp(detail::polyline_tangent(axis, ia));
    for (int ic = 0; ic < nc; ++ic) {
      const double off = nc > 1 ? -rho + 2.0 * rho * ic / (nc - 1) : 0.0;
      lattice[static_cast<std::size_t>(ia) * nc + ic] = axis[ia] + n * off;
    }
  }
  std::atomic<int> undefined{0};
  std::atomic<bool> degenerate{false};
  parallel_for(tau.size(), cc.threads, [&](std::size_t k) {
    try {
      const SeparationOutcome o = isle_tau0(m, lattice[k], cc.t0, p, cfg);
      if (o.status == SeparationStatus::Undefined) {
        ++undefined;
        return;
      }
      if (o.status == SeparationStatus::Degenerate) degenerate = true;
      tau[k] = o.tau;
    } catch (const NonFiniteError&) {
      ++undefined;
    }
  });
  rep.undefined_points = undefined;
  rep.degenerate_neighborhood = degenerate;

  double sum = 0.0;
  int count = 0;
  for (double t : tau)
    if (std::isfinite(t)) {
      sum += t;
      ++count;
    }
  if (count == 0) return rep;
  rep.tau_bar = sum / count;

  // Discrete C2 seminorm of tau_0 - tau_bar on the lattice: max of the
  // deviations, their first differences, and their second differences.
  auto d = [&](int ia, int ic) { return tau[static_cast<std::size_t>(ia) * nc + ic] - rep.tau_bar; };
  double eps = 0.0;
  auto take = [&](double v) {
    if (std::isfinite(v)) eps = std::max(eps, std::abs(v));
  };
  for (int ia = 0; ia < na; ++ia)
    for (int ic = 0; ic < nc; ++ic) {
      take(d(ia, ic));
      if (ia + 1 < na) take(d(ia + 1, ic) - d(ia, ic));
      if (ic + 1 < nc) take(d(ia, ic + 1) - d(ia, ic));
      if (ia + 2 < na) take(d(ia + 2, ic) - 2.0 * d(ia + 1, ic) + d(ia, ic));
      if (ic + 2 < nc) take(d(ia, ic + 2) - 2.0 * d(ia, ic + 1) + d(ia, ic));
    }
  rep.epsilon = eps;

  // FTLE field at horizon tau_bar over the tube's bounding box.
  GridSpec fs;
  fs.x1min = fs.x2min = std::numeric_limits<double>::infinity();
  fs.x1max = fs.x2max = -std::numeric_limits<double>::infinity();
  for (const auto& x : lattice) {
    fs.x1min = std::min(fs.x1min, x.x1);
    fs.x1max = std::max(fs.x1max, x.x1);
    fs.x2min = std::min(fs.x2min, x.x2);
    fs.x2max = std::max(fs.x2max, x.x2);
  }
  const double pad1 = std::max(1e-6, 0.02 * (fs.x1max - fs.x1min + rho));
  const double pad2 = std::max(1e-6, 0.02 * (fs.x2max - fs.x2min + rho));
  fs.x1min -= pad1;
  fs.x1max += pad1;
  fs.x2min -= pad2;
  fs.x2max += pad2;
  fs.nx = cc.ftle_nx;
  fs.ny = cc.ftle_ny;
  rep.grid_h = std::max(fs.h1(), fs.h2());
  const ScalarGrid ftle_field = compute_field(FieldKind::FTLE, m, fs, cc.t0, rep.tau_bar,
                                              p, cfg, cc.threads);
  const auto ftle_ridges = extract_ridges(ftle_field, ftle_field.default_tol_grad());

  for (const auto& fr : ftle_ridges) {
    const auto [d0, ang] = curve_c1_distance(curve.points, fr.points);
    if (d0 < rep.hausdorff_c0) {
      rep.hausdorff_c0 = d0;
      rep.c1_angle = ang;
    }
  }
  rep.matched = rep.hausdorff_c0 <= 3.0 * std::max(fs.h1(), fs.h2());
  return rep;
}

}  // namespace lcs
