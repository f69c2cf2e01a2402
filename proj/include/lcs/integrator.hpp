#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "lcs/flow_models.hpp"
#include "lcs/strain.hpp"
#include "lcs/types.hpp"

namespace lcs {

enum class Scheme { RK4 };
enum class EventMode { StepResolution, Bisection };

struct IntegratorConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::RK4;
  std::int64_t max_steps = 200'000'000;
};

/// Flow-map image of a point together with its deformation gradient.
struct FlowSample {
  Vec2 x1;
  Tensor2 df = Tensor2::identity();
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<FlowSample> states;
  std::size_t size() const { return times.size(); }
};

// Relative bisection tolerance on event times, scaled by the horizon.
constexpr double kEventTimeTol = 1e-9;

namespace detail {

// One classical RK4 step on a flat state vector; k1..k4 and tmp are
// caller-provided scratch of the same size as y.
template <class Rhs>
void rk4_step(const Rhs& rhs, double t, double h, std::vector<double>& y,
              std::vector<double>& k1, std::vector<double>& k2,
              std::vector<double>& k3, std::vector<double>& k4,
              std::vector<double>& tmp) {
  const std::size_t n = y.size();
  rhs(t, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(t + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(t + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(t + h, tmp, k4);
  for (std::size_t i = 0; i < n; ++i)
    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

template <class Rhs>
struct Rk4Workspace {
  std::vector<double> k1, k2, k3, k4, tmp;
  explicit Rk4Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

inline void check_finite(const std::vector<double>& y) {
  for (double v : y)
    if (!std::isfinite(v)) throw NonFiniteError("state left floating-point range");
}

// Plain 2-D right-hand side.
struct PointRhs {
  const FlowModel& m;
  void operator()(double t, const std::vector<double>& y, std::vector<double>& dy) const {
    const Vec2 v = velocity(m, {y[0], y[1]}, t);
    dy[0] = v.x1;
    dy[1] = v.x2;
  }
};

// Augmented (x, DF) system: DF' = grad v (x, t) DF, DF(t0) = I.
struct AugmentedRhs {
  const FlowModel& m;
  void operator()(double t, const std::vector<double>& y, std::vector<double>& dy) const {
    const Vec2 x{y[0], y[1]};
    const Vec2 v = velocity(m, x, t);
    const Tensor2 g = velocity_gradient(m, x, t);
    dy[0] = v.x1;
    dy[1] = v.x2;
    dy[2] = g.m11 * y[2] + g.m12 * y[4];  // df11
    dy[3] = g.m11 * y[3] + g.m12 * y[5];  // df12
    dy[4] = g.m21 * y[2] + g.m22 * y[4];  // df21
    dy[5] = g.m21 * y[3] + g.m22 * y[5];  // df22
  }
};

inline std::vector<double> pack_augmented(const Vec2& x0) {
  return {x0.x1, x0.x2, 1.0, 0.0, 0.0, 1.0};
}

inline FlowSample unpack_augmented(const std::vector<double>& y) {
  FlowSample s;
  s.x1 = {y[0], y[1]};
  s.df = {y[2], y[3], y[4], y[5]};
  return s;
}

}  // namespace detail

/// F_{t0}^{t1}(x0) by fixed-step RK4; a trailing shortened step covers
/// horizons that are not multiples of dt.
template <class Rhs>
std::vector<double> integrate_fixed(const Rhs& rhs, std::vector<double> y, double t0,
                                    double t1, const IntegratorConfig& cfg) {
  if (t1 < t0) throw InvalidHorizonError("integrate_fixed requires t1 >= t0");
  detail::Rk4Workspace<Rhs> ws(y.size());
  const double span = t1 - t0;
  const auto n_full = static_cast<std::int64_t>(std::floor(span / cfg.dt));
  double t = t0;
  for (std::int64_t i = 0; i < n_full; ++i) {
    detail::rk4_step(rhs, t, cfg.dt, y, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
    t = t0 + static_cast<double>(i + 1) * cfg.dt;
  }
  if (t1 - t > 0.0) {
    detail::rk4_step(rhs, t, t1 - t, y, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
  }
  detail::check_finite(y);
  return y;
}

inline Vec2 flow_map(const FlowModel& m, const Vec2& x0, double t0, double t1,
                     const IntegratorConfig& cfg) {
  const auto y = integrate_fixed(detail::PointRhs{m}, {x0.x1, x0.x2}, t0, t1, cfg);
  return {y[0], y[1]};
}

inline FlowSample flow_map_with_gradient(const FlowModel& m, const Vec2& x0, double t0,
                                         double t1, const IntegratorConfig& cfg) {
  const auto y =
      integrate_fixed(detail::AugmentedRhs{m}, detail::pack_augmented(x0), t0, t1, cfg);
  return detail::unpack_augmented(y);
}

/// Augmented trajectory sampled at every accepted step up to t0 + horizon.
inline TrajectoryRecord record_trajectory(const FlowModel& m, const Vec2& x0, double t0,
                                          double horizon, const IntegratorConfig& cfg) {
  if (horizon < 0.0) throw InvalidHorizonError("record_trajectory requires horizon >= 0");
  TrajectoryRecord rec;
  detail::AugmentedRhs rhs{m};
  auto y = detail::pack_augmented(x0);
  detail::Rk4Workspace<detail::AugmentedRhs> ws(y.size());
  rec.times.push_back(t0);
  rec.states.push_back(detail::unpack_augmented(y));
  const auto n_full = static_cast<std::int64_t>(std::floor(horizon / cfg.dt));
  double t = t0;
  for (std::int64_t i = 0; i < n_full && i < cfg.max_steps; ++i) {
    detail::rk4_step(rhs, t, cfg.dt, y, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
    t = t0 + static_cast<double>(i + 1) * cfg.dt;
    detail::check_finite(y);
    rec.times.push_back(t);
    rec.states.push_back(detail::unpack_augmented(y));
  }
  const double t_end = t0 + horizon;
  if (t_end - t > 0.0) {
    detail::rk4_step(rhs, t, t_end - t, y, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
    detail::check_finite(y);
    rec.times.push_back(t_end);
    rec.states.push_back(detail::unpack_augmented(y));
  }
  return rec;
}

/// First time the monitor reaches the threshold along a recorded
/// trajectory.  StepResolution answers at the record's own resolution;
/// Bisection re-integrates from the preceding sample and refines the
/// bracket to kEventTimeTol times the record span.
template <class Monitor>
std::optional<double> refine_crossing(const FlowModel& m, const TrajectoryRecord& rec,
                                      const Monitor& monitor, double threshold,
                                      EventMode mode,
                                      const IntegratorConfig& cfg = {}) {
  if (rec.size() == 0) return std::nullopt;
  if (monitor(rec.states.front(), rec.times.front()) >= threshold)
    return rec.times.front();
  for (std::size_t k = 1; k < rec.size(); ++k) {
    if (monitor(rec.states[k], rec.times[k]) < threshold) continue;
    if (mode == EventMode::StepResolution) return rec.times[k];

    const double t_prev = rec.times[k - 1];
    const FlowSample& prev = rec.states[k - 1];
    std::vector<double> y0 = {prev.x1.x1, prev.x1.x2, prev.df.m11,
                              prev.df.m12, prev.df.m21, prev.df.m22};
    detail::AugmentedRhs rhs{m};
    detail::Rk4Workspace<detail::AugmentedRhs> ws(y0.size());
    auto eval = [&](double tm) {
      std::vector<double> y = y0;
      if (tm > t_prev)
        detail::rk4_step(rhs, t_prev, tm - t_prev, y, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
      return monitor(detail::unpack_augmented(y), tm);
    };
    const double span = rec.times.back() - rec.times.front();
    const double tol = kEventTimeTol * std::max(span, 1e-30);
    double lo = t_prev, hi = rec.times[k];
    while (hi - lo > tol) {
      const double tm = 0.5 * (lo + hi);
      if (eval(tm) >= threshold)
        hi = tm;
      else
        lo = tm;
    }
    return hi;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Streaming event detection: same stepping as record_trajectory, without
// materializing the record.  Used by the grid drivers.

struct EventResult {
  bool crossed = false;
  double t = 0.0;
  std::vector<double> state;  // state at the reported time
};

template <class Rhs, class Monitor>
EventResult integrate_until(const Rhs& rhs, std::vector<double> y, double t0,
                            double horizon, const IntegratorConfig& cfg,
                            const Monitor& monitor, double threshold, EventMode mode) {
  EventResult res;
  if (monitor(y, t0) >= threshold) {
    res.crossed = true;
    res.t = t0;
    res.state = std::move(y);
    return res;
  }
  detail::Rk4Workspace<Rhs> ws(y.size());
  std::vector<double> y_prev = y;
  const double tol = kEventTimeTol * std::max(horizon, 1e-30);

  auto handle_crossing = [&](double t_prev, double t_k) {
    if (mode == EventMode::StepResolution) {
      res.crossed = true;
      res.t = t_k;
      res.state = y;
      return;
    }
    detail::Rk4Workspace<Rhs> bws(y.size());
    auto eval = [&](double tm, std::vector<double>& out) {
      out = y_prev;
      if (tm > t_prev)
        detail::rk4_step(rhs, t_prev, tm - t_prev, out, bws.k1, bws.k2, bws.k3, bws.k4,
                         bws.tmp);
      return monitor(out, tm);
    };
    double lo = t_prev, hi = t_k;
    std::vector<double> trial(y.size());
    while (hi - lo > tol) {
      const double tm = 0.5 * (lo + hi);
      if (eval(tm, trial) >= threshold)
        hi = tm;
      else
        lo = tm;
    }
    eval(hi, trial);
    res.crossed = true;
    res.t = hi;
    res.state = std::move(trial);
  };

  const auto n_full = static_cast<std::int64_t>(std::floor(horizon / cfg.dt));
  double t = t0;
  for (std::int64_t i = 0; i < n_full && i < cfg.max_steps; ++i) {
    y_prev = y;
    const double t_prev = t;
    detail::rk4_step(rhs, t, cfg.dt, y, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
    t = t0 + static_cast<double>(i + 1) * cfg.dt;
    detail::check_finite(y);
    if (monitor(y, t) >= threshold) {
      handle_crossing(t_prev, t);
      return res;
    }
  }
  const double t_end = t0 + horizon;
  if (t_end - t > 0.0) {
    y_prev = y;
    const double t_prev = t;
    detail::rk4_step(rhs, t, t_end - t, y, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
    detail::check_finite(y);
    if (monitor(y, t_end) >= threshold) {
      handle_crossing(t_prev, t_end);
      return res;
    }
  }
  res.crossed = false;
  res.t = t_end;
  res.state = std::move(y);
  return res;
}

inline double lambda_max_time_derivative(const FlowModel& m, const FlowSample& sample,
                                         double t) {
  return lambda_max_time_derivative(m, sample.x1, sample.df, t);
}

}  // namespace lcs
