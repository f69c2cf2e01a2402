#pragma once

#include <cmath>

#include "lcs/flow_models.hpp"
#include "lcs/types.hpp"

namespace lcs {

constexpr double kEigenDegeneracyTol = 1e-12;

/// Eigendecomposition of a symmetric 2x2 tensor. Eigenvectors are unit
/// length, mutually orthogonal, and sign-fixed so the first nonzero
/// component is positive.
struct EigenPair2 {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  Vec2 e_min{1.0, 0.0};
  Vec2 e_max{0.0, 1.0};
  bool degenerate = false;
};

inline SymmetricTensor2 cauchy_green(const Tensor2& df) {
  return {df.m11 * df.m11 + df.m21 * df.m21,
          df.m11 * df.m12 + df.m21 * df.m22,
          df.m12 * df.m12 + df.m22 * df.m22};
}

namespace detail {
inline Vec2 fix_sign(Vec2 v) {
  if (v.x1 < 0.0 || (v.x1 == 0.0 && v.x2 < 0.0)) return -v;
  return v;
}
}  // namespace detail

inline EigenPair2 eig_sym2(const SymmetricTensor2& c) {
  EigenPair2 out;
  const double mean = 0.5 * (c.c11 + c.c22);
  const double half_diff = 0.5 * (c.c11 - c.c22);
  const double radius = std::hypot(half_diff, c.c12);
  out.lambda_min = mean - radius;
  out.lambda_max = mean + radius;

  const double gap = out.lambda_max - out.lambda_min;
  if (gap <= kEigenDegeneracyTol * std::max(1.0, std::abs(out.lambda_max))) {
    out.degenerate = true;
    out.e_min = {1.0, 0.0};
    out.e_max = {0.0, 1.0};
    return out;
  }

  // Pick the better-conditioned column of (C - lambda_max I) to build e_max.
  Vec2 emax;
  if (std::abs(half_diff + radius) >= std::abs(half_diff - radius)) {
    // c11 - lambda_min = half_diff + radius dominates: use (c12, lmax - c11)
    emax = {c.c12, out.lambda_max - c.c11};
  } else {
    emax = {out.lambda_max - c.c22, c.c12};
  }
  if (norm(emax) == 0.0) {
    emax = c.c11 >= c.c22 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  }
  out.e_max = detail::fix_sign(normalized(emax));
  out.e_min = detail::fix_sign(perp(out.e_max));
  return out;
}

/// FTLE: log of the dominant Cauchy-Green eigenvalue over twice the horizon.
inline double ftle(double lambda_max, double t0, double t) {
  if (!(t > t0)) throw InvalidHorizonError("ftle requires t > t0");
  return std::log(lambda_max) / (2.0 * (t - t0));
}

/// d/dt lambda_max(C_{t0}^{t}) evaluated from the rate-of-strain tensor:
/// 2 <DF e_max, S(F(x0), t) DF e_max>.  Requires a simple lambda_max.
inline double lambda_max_time_derivative(const FlowModel& m, const Vec2& image,
                                         const Tensor2& df, double t) {
  const EigenPair2 eig = eig_sym2(cauchy_green(df));
  if (eig.degenerate)
    throw DegenerateEigenvalueError("lambda_max is not simple");
  const Vec2 w = df * eig.e_max;
  const SymmetricTensor2 s = rate_of_strain(m, image, t);
  return 2.0 * dot(w, s * w);
}

}  // namespace lcs
