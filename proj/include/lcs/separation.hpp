#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lcs/integrator.hpp"
#include "lcs/parallel.hpp"
#include "lcs/scalar_field.hpp"
#include "lcs/strain.hpp"

namespace lcs {

struct SeparationParams {
  double r = 2.0;          // separation factor, > 1
  double delta0 = 1e-3;    // initial separation (finite-size only)
  int n_probes = 8;        // probe ring size (finite-size only)
  double horizon = 10.0;   // maximal separation time searched
  EventMode event_mode = EventMode::Bisection;

  bool valid() const { return r > 1.0 && delta0 > 0.0 && horizon > 0.0 && n_probes >= 4; }
};

enum class SeparationStatus { Separated, Undefined, Degenerate };

struct SeparationOutcome {
  SeparationStatus status = SeparationStatus::Undefined;
  double tau = std::numeric_limits<double>::quiet_NaN();
  double value = std::numeric_limits<double>::quiet_NaN();   // sigma or sigma0
  double margin = std::numeric_limits<double>::quiet_NaN();  // d/dt lambda_max at crossing
};

namespace detail {

inline double lambda_max_of_df(double df11, double df12, double df21, double df22) {
  const double c11 = df11 * df11 + df21 * df21;
  const double c12 = df11 * df12 + df21 * df22;
  const double c22 = df12 * df12 + df22 * df22;
  const double mean = 0.5 * (c11 + c22);
  return mean + std::hypot(0.5 * (c11 - c22), c12);
}

// Degenerate-classification threshold: derivative scale lambda_max / T.
inline double degeneracy_tol(const SeparationParams& p) {
  return 1e-6 * (p.r * p.r / p.horizon);
}

}  // namespace detail

/// Infinitesimal separation time: first t with lambda_max(C_{t0}^{t}) = r^2,
/// monitored along the augmented (x, DF) trajectory.
inline SeparationOutcome isle_tau0(const FlowModel& m, const Vec2& x0, double t0,
                                   const SeparationParams& p,
                                   const IntegratorConfig& cfg) {
  auto monitor = [](const std::vector<double>& y, double) {
    return detail::lambda_max_of_df(y[2], y[3], y[4], y[5]);
  };
  const EventResult ev =
      integrate_until(detail::AugmentedRhs{m}, detail::pack_augmented(x0), t0, p.horizon,
                      cfg, monitor, p.r * p.r, p.event_mode);
  SeparationOutcome out;
  if (!ev.crossed) return out;
  out.tau = ev.t - t0;
  out.value = out.tau > 0.0 ? std::log(p.r) / out.tau
                            : std::numeric_limits<double>::infinity();
  const FlowSample sample = detail::unpack_augmented(ev.state);
  try {
    out.margin = lambda_max_time_derivative(m, sample, ev.t);
  } catch (const DegenerateEigenvalueError&) {
    out.status = SeparationStatus::Degenerate;
    return out;
  }
  out.status = std::abs(out.margin) <= detail::degeneracy_tol(p)
                   ? SeparationStatus::Degenerate
                   : SeparationStatus::Separated;
  return out;
}

/// ISLE sigma_0 = log r / tau_0.
inline SeparationOutcome isle(const FlowModel& m, const Vec2& x0, double t0,
                              const SeparationParams& p, const IntegratorConfig& cfg) {
  return isle_tau0(m, x0, t0, p, cfg);
}

/// Finite-size separation time: the base point and a delta0-ring of probes
/// are advected as independent trajectories; tau is the first time any
/// probe distance reaches r * delta0.
inline SeparationOutcome fsle_tau(const FlowModel& m, const Vec2& x0, double t0,
                                  const SeparationParams& p,
                                  const IntegratorConfig& cfg) {
  const int np = p.n_probes;
  std::vector<double> y(2 * (np + 1));
  y[0] = x0.x1;
  y[1] = x0.x2;
  for (int k = 0; k < np; ++k) {
    const double th = 2.0 * std::numbers::pi * k / np;
    y[2 + 2 * k] = x0.x1 + p.delta0 * std::cos(th);
    y[3 + 2 * k] = x0.x2 + p.delta0 * std::sin(th);
  }
  struct EnsembleRhs {
    const FlowModel& m;
    int np;
    void operator()(double t, const std::vector<double>& y,
                    std::vector<double>& dy) const {
      for (int k = 0; k <= np; ++k) {
        const Vec2 v = velocity(m, {y[2 * k], y[2 * k + 1]}, t);
        dy[2 * k] = v.x1;
        dy[2 * k + 1] = v.x2;
      }
    }
  };
  auto monitor = [np](const std::vector<double>& y, double) {
    double best = 0.0;
    for (int k = 1; k <= np; ++k)
      best = std::max(best, std::hypot(y[2 * k] - y[0], y[2 * k + 1] - y[1]));
    return best;
  };
  const EventResult ev = integrate_until(EnsembleRhs{m, np}, std::move(y), t0, p.horizon,
                                         cfg, monitor, p.r * p.delta0, p.event_mode);
  SeparationOutcome out;
  if (!ev.crossed) return out;
  out.status = SeparationStatus::Separated;
  out.tau = ev.t - t0;
  out.value = out.tau > 0.0 ? std::log(p.r) / out.tau
                            : std::numeric_limits<double>::infinity();
  return out;
}

/// FSLE sigma = log r / tau.
inline SeparationOutcome fsle(const FlowModel& m, const Vec2& x0, double t0,
                              const SeparationParams& p, const IntegratorConfig& cfg) {
  return fsle_tau(m, x0, t0, p, cfg);
}

// ---------------------------------------------------------------------------
// Grid drivers.

enum class FieldKind { FTLE, FSLE, ISLE, TauFinite, Tau0, Margin };

/// Per-point ISLE outcomes over a grid, in row-major order (x1 fastest).
inline std::vector<SeparationOutcome> isle_outcomes(const FlowModel& m,
                                                    const GridSpec& grid, double t0,
                                                    const SeparationParams& p,
                                                    const IntegratorConfig& cfg,
                                                    int threads = 1) {
  std::vector<SeparationOutcome> out(static_cast<std::size_t>(grid.nx) * grid.ny);
  parallel_for(out.size(), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) % grid.nx;
    const int j = static_cast<int>(idx) / grid.nx;
    try {
      out[idx] = isle_tau0(m, {grid.x1(i), grid.x2(j)}, t0, p, cfg);
    } catch (const NonFiniteError&) {
      out[idx] = SeparationOutcome{};
    }
  });
  return out;
}

inline ScalarGrid compute_field(FieldKind kind, const FlowModel& m, const GridSpec& grid,
                                double t0, double ftle_horizon,
                                const SeparationParams& p, const IntegratorConfig& cfg,
                                int threads = 1) {
  ScalarGrid g(grid);
  parallel_for(g.values.size(), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) % grid.nx;
    const int j = static_cast<int>(idx) / grid.nx;
    const Vec2 x{grid.x1(i), grid.x2(j)};
    try {
      switch (kind) {
        case FieldKind::FTLE: {
          const FlowSample s = flow_map_with_gradient(m, x, t0, t0 + ftle_horizon, cfg);
          g.values[idx] = ftle(eig_sym2(cauchy_green(s.df)).lambda_max, t0,
                               t0 + ftle_horizon);
          break;
        }
        case FieldKind::FSLE:
        case FieldKind::TauFinite: {
          const SeparationOutcome o = fsle_tau(m, x, t0, p, cfg);
          if (o.status == SeparationStatus::Separated)
            g.values[idx] = kind == FieldKind::FSLE ? o.value : o.tau;
          break;
        }
        case FieldKind::ISLE:
        case FieldKind::Tau0:
        case FieldKind::Margin: {
          const SeparationOutcome o = isle_tau0(m, x, t0, p, cfg);
          if (kind == FieldKind::Margin) {
            if (o.status != SeparationStatus::Undefined) g.values[idx] = o.margin;
          } else if (o.status == SeparationStatus::Separated) {
            g.values[idx] = kind == FieldKind::ISLE ? o.value : o.tau;
          }
          break;
        }
      }
    } catch (const NonFiniteError&) {
      // leave missing
    }
  });
  return g;
}

// ---------------------------------------------------------------------------
// Degeneracy-curve scan (jump-discontinuity detection).

struct DegeneracyFlag {
  Vec2 location;            // midpoint of the flagged adjacent pair
  double tau_before = 0.0;  // tau_0 on either side of the pair
  double tau_after = 0.0;
  double margin_before = 0.0;
  double margin_after = 0.0;
  double d2_lambda_dt2 = 0.0;    // centered FD in t at the crossing
  double grad_lambda_norm = 0.0; // centered FD in space at the crossing
};

namespace detail {

inline double lambda_max_at(const FlowModel& m, const Vec2& x0, double t0, double t,
                            const IntegratorConfig& cfg) {
  const FlowSample s = flow_map_with_gradient(m, x0, t0, t, cfg);
  return eig_sym2(cauchy_green(s.df)).lambda_max;
}

}  // namespace detail

/// Flags adjacent grid-point pairs across which the separation time tau_0
/// jumps (or the non-degeneracy margin changes sign / collapses), and
/// reports the jump-condition diagnostics at each flag.
inline std::vector<DegeneracyFlag> degeneracy_scan(const FlowModel& m,
                                                   const GridSpec& grid, double t0,
                                                   const SeparationParams& p,
                                                   const IntegratorConfig& cfg,
                                                   int threads = 1) {
  const auto outcomes = isle_outcomes(m, grid, t0, p, cfg, threads);
  auto at = [&](int i, int j) -> const SeparationOutcome& {
    return outcomes[static_cast<std::size_t>(j) * grid.nx + i];
  };

  // Reference scale for "a jump": median adjacent tau variation.
  std::vector<double> dtaus;
  auto collect = [&](const SeparationOutcome& a, const SeparationOutcome& b) {
    if (a.status != SeparationStatus::Undefined && b.status != SeparationStatus::Undefined)
      dtaus.push_back(std::abs(b.tau - a.tau));
  };
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i + 1 < grid.nx; ++i) collect(at(i, j), at(i + 1, j));
  for (int j = 0; j + 1 < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) collect(at(i, j), at(i, j + 1));
  if (dtaus.empty()) return {};
  std::vector<double> sorted = dtaus;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median_dtau = sorted[sorted.size() / 2];
  const double jump_tol = std::max(10.0 * median_dtau, 10.0 * cfg.dt);

  std::vector<DegeneracyFlag> flags;
  auto consider = [&](int i0, int j0, int i1, int j1) {
    const SeparationOutcome& a = at(i0, j0);
    const SeparationOutcome& b = at(i1, j1);
    if (a.status == SeparationStatus::Undefined || b.status == SeparationStatus::Undefined)
      return;
    const bool sign_change = a.margin * b.margin < 0.0;
    const bool degenerate = a.status == SeparationStatus::Degenerate ||
                            b.status == SeparationStatus::Degenerate;
    const bool jump = std::abs(b.tau - a.tau) > jump_tol;
    if (!(sign_change || degenerate || jump)) return;

    DegeneracyFlag f;
    f.location = {0.5 * (grid.x1(i0) + grid.x1(i1)), 0.5 * (grid.x2(j0) + grid.x2(j1))};
    f.tau_before = a.tau;
    f.tau_after = b.tau;
    f.margin_before = a.margin;
    f.margin_after = b.margin;

    // Jump-condition diagnostics at the earlier crossing of the pair.
    const double t_star = t0 + std::min(a.tau, b.tau);
    const double ht = 1e-3;
    try {
      const double lm = detail::lambda_max_at(m, f.location, t0, t_star, cfg);
      const double lp = detail::lambda_max_at(m, f.location, t0, t_star + ht, cfg);
      const double lq = detail::lambda_max_at(m, f.location, t0,
                                              std::max(t0, t_star - ht), cfg);
      f.d2_lambda_dt2 = (lp - 2.0 * lm + lq) / (ht * ht);
      double g1 = 0.0, g2 = 0.0;
      if (grid.nx > 1) {
        const double h1 = grid.h1();
        g1 = (detail::lambda_max_at(m, {f.location.x1 + h1, f.location.x2}, t0, t_star,
                                    cfg) -
              detail::lambda_max_at(m, {f.location.x1 - h1, f.location.x2}, t0, t_star,
                                    cfg)) /
             (2.0 * h1);
      }
      if (grid.ny > 1) {
        const double h2 = grid.h2();
        g2 = (detail::lambda_max_at(m, {f.location.x1, f.location.x2 + h2}, t0, t_star,
                                    cfg) -
              detail::lambda_max_at(m, {f.location.x1, f.location.x2 - h2}, t0, t_star,
                                    cfg)) /
             (2.0 * h2);
      }
      f.grad_lambda_norm = std::hypot(g1, g2);
    } catch (const NonFiniteError&) {
    }
    flags.push_back(f);
  };
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i + 1 < grid.nx; ++i) consider(i, j, i + 1, j);
  for (int j = 0; j + 1 < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) consider(i, j, i, j + 1);
  return flags;
}

}  // namespace lcs
