#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcs/types.hpp"

namespace lcs {

/// Smooth switch window [a, b] for the time-dependent benchmark flows.
struct TransitionWindow {
  double a = 0.5;
  double b = 0.6;

  bool valid() const { return 0.0 < a && a < b; }
};

/// C-infinity bump quotient: 0 for t <= a, 1 for t >= b, strictly
/// increasing in between.
inline double smooth_transition(double t, const TransitionWindow& w) {
  if (t <= w.a) return 0.0;
  if (t >= w.b) return 1.0;
  const double u = (t - w.a) / (w.b - w.a);
  const double g = std::exp(-1.0 / u);
  const double gc = std::exp(-1.0 / (1.0 - u));
  return g / (g + gc);
}

enum class FlowKind {
  TransientSaddle,
  TransitionSaddle,
  DoubleGyre,
  MovingSeparation,
  LinearSaddle,
  RigidRotation,
};

/// Analytic 2-D benchmark velocity field with exact Jacobian.
struct FlowModel {
  FlowKind kind = FlowKind::LinearSaddle;

  TransitionWindow window;  // TransientSaddle, TransitionSaddle
  double mu = 1.0;          // LinearSaddle, RigidRotation rate

  // Moving separation: stream function -L tanh(q2 x2) tanh(q1 (x1 - c t)).
  double L = 4.0;
  double q1 = 5.0;
  double q2 = 1.0;
  double c = 10.0;
  // Hamiltonian sign convention; -1 flips x1' = dH/dx2, x2' = -dH/dx1.
  double hamiltonian_sign = 1.0;

  static constexpr double gyre_amplitude = 0.1;

  static FlowModel linear_saddle(double rate = 1.0) {
    FlowModel m;
    m.kind = FlowKind::LinearSaddle;
    m.mu = rate;
    return m;
  }
  static FlowModel rigid_rotation(double rate = 1.0) {
    FlowModel m;
    m.kind = FlowKind::RigidRotation;
    m.mu = rate;
    return m;
  }
  static FlowModel transient_saddle(TransitionWindow w = {}) {
    FlowModel m;
    m.kind = FlowKind::TransientSaddle;
    m.window = w;
    return m;
  }
  static FlowModel transition_saddle(TransitionWindow w = {}) {
    FlowModel m;
    m.kind = FlowKind::TransitionSaddle;
    m.window = w;
    return m;
  }
  static FlowModel double_gyre() {
    FlowModel m;
    m.kind = FlowKind::DoubleGyre;
    return m;
  }
  static FlowModel moving_separation(double L = 4.0, double q1 = 5.0, double q2 = 1.0,
                                     double c = 10.0) {
    FlowModel m;
    m.kind = FlowKind::MovingSeparation;
    m.L = L;
    m.q1 = q1;
    m.q2 = q2;
    m.c = c;
    return m;
  }
};

inline Vec2 velocity(const FlowModel& m, const Vec2& x, double t) {
  using std::numbers::pi;
  switch (m.kind) {
    case FlowKind::LinearSaddle:
      return {-m.mu * x.x1, m.mu * x.x2};
    case FlowKind::RigidRotation:
      return {-m.mu * x.x2, m.mu * x.x1};
    case FlowKind::TransientSaddle: {
      const double s = smooth_transition(t, m.window);
      return {-x.x1 + s * (1.0 + x.x1), x.x2 - s * x.x2};
    }
    case FlowKind::TransitionSaddle: {
      const double s = smooth_transition(t, m.window);
      const double ch = std::cosh(x.x2);
      return {-x.x1 - s * x.x1 / (ch * ch), x.x2 + s * std::tanh(x.x2)};
    }
    case FlowKind::DoubleGyre: {
      const double A = FlowModel::gyre_amplitude;
      return {-A * pi * std::sin(pi * x.x1) * std::cos(pi * x.x2),
              A * pi * std::cos(pi * x.x1) * std::sin(pi * x.x2)};
    }
    case FlowKind::MovingSeparation: {
      const double th2 = std::tanh(m.q2 * x.x2);
      const double sh2 = 1.0 - th2 * th2;  // sech^2(q2 x2)
      const double arg = m.q1 * (x.x1 - m.c * t);
      const double th1 = std::tanh(arg);
      const double sh1 = 1.0 - th1 * th1;  // sech^2(q1 (x1 - c t))
      const double sgn = m.hamiltonian_sign;
      return {sgn * (-m.L * m.q2 * sh2 * th1), sgn * (m.L * m.q1 * th2 * sh1)};
    }
  }
  throw std::logic_error("velocity: unknown flow kind");
}

inline Tensor2 velocity_gradient(const FlowModel& m, const Vec2& x, double t) {
  using std::numbers::pi;
  switch (m.kind) {
    case FlowKind::LinearSaddle:
      return {-m.mu, 0.0, 0.0, m.mu};
    case FlowKind::RigidRotation:
      return {0.0, -m.mu, m.mu, 0.0};
    case FlowKind::TransientSaddle: {
      const double s = smooth_transition(t, m.window);
      return {-1.0 + s, 0.0, 0.0, 1.0 - s};
    }
    case FlowKind::TransitionSaddle: {
      const double s = smooth_transition(t, m.window);
      const double th = std::tanh(x.x2);
      const double sh = 1.0 - th * th;  // sech^2
      return {-1.0 - s * sh, 2.0 * s * x.x1 * sh * th, 0.0, 1.0 + s * sh};
    }
    case FlowKind::DoubleGyre: {
      const double A = FlowModel::gyre_amplitude;
      const double s1 = std::sin(pi * x.x1), c1 = std::cos(pi * x.x1);
      const double s2 = std::sin(pi * x.x2), c2 = std::cos(pi * x.x2);
      const double k = A * pi * pi;
      return {-k * c1 * c2, k * s1 * s2, -k * s1 * s2, k * c1 * c2};
    }
    case FlowKind::MovingSeparation: {
      const double th2 = std::tanh(m.q2 * x.x2);
      const double sh2 = 1.0 - th2 * th2;
      const double arg = m.q1 * (x.x1 - m.c * t);
      const double th1 = std::tanh(arg);
      const double sh1 = 1.0 - th1 * th1;
      const double sgn = m.hamiltonian_sign;
      const double d11 = -m.L * m.q1 * m.q2 * sh2 * sh1;
      const double d12 = 2.0 * m.L * m.q2 * m.q2 * sh2 * th2 * th1;
      const double d21 = -2.0 * m.L * m.q1 * m.q1 * th2 * sh1 * th1;
      const double d22 = m.L * m.q1 * m.q2 * sh2 * sh1;
      return {sgn * d11, sgn * d12, sgn * d21, sgn * d22};
    }
  }
  throw std::logic_error("velocity_gradient: unknown flow kind");
}

/// Eulerian rate-of-strain tensor S = (grad v + grad v^T) / 2.
inline SymmetricTensor2 rate_of_strain(const FlowModel& m, const Vec2& x, double t) {
  const Tensor2 g = velocity_gradient(m, x, t);
  return {g.m11, 0.5 * (g.m12 + g.m21), g.m22};
}

// ---------------------------------------------------------------------------
// String addressing for the CLI.

inline std::vector<std::string> flow_ids() {
  return {"linear-saddle", "rigid-rotation", "transient-saddle",
          "transition-saddle", "double-gyre", "moving-separation"};
}

inline FlowModel make_flow(const std::string& id,
                           const std::map<std::string, double>& params = {}) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto check_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* a : allowed)
        if (k == a) ok = true;
      if (!ok) throw std::invalid_argument("unknown parameter '" + k + "' for flow " + id);
    }
  };
  if (id == "linear-saddle") {
    check_keys({"mu"});
    return FlowModel::linear_saddle(get("mu", 1.0));
  }
  if (id == "rigid-rotation") {
    check_keys({"mu"});
    return FlowModel::rigid_rotation(get("mu", 1.0));
  }
  if (id == "transient-saddle" || id == "transition-saddle") {
    check_keys({"a", "b"});
    TransitionWindow w{get("a", 0.5), get("b", 0.6)};
    if (!w.valid()) throw std::invalid_argument("transition window requires 0 < a < b");
    return id == "transient-saddle" ? FlowModel::transient_saddle(w)
                                    : FlowModel::transition_saddle(w);
  }
  if (id == "double-gyre") {
    check_keys({});
    return FlowModel::double_gyre();
  }
  if (id == "moving-separation") {
    check_keys({"L", "q1", "q2", "c"});
    return FlowModel::moving_separation(get("L", 4.0), get("q1", 5.0), get("q2", 1.0),
                                        get("c", 10.0));
  }
  throw std::invalid_argument("unknown flow id: " + id);
}

}  // namespace lcs
