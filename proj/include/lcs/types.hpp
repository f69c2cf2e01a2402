#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace lcs {

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  Vec2() = default;
  Vec2(double a, double b) : x1(a), x2(b) {}

  Vec2 operator+(const Vec2& o) const { return {x1 + o.x1, x2 + o.x2}; }
  Vec2 operator-(const Vec2& o) const { return {x1 - o.x1, x2 - o.x2}; }
  Vec2 operator*(double s) const { return {x1 * s, x2 * s}; }
  Vec2 operator-() const { return {-x1, -x2}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double norm(const Vec2& v) { return std::hypot(v.x1, v.x2); }
inline Vec2 perp(const Vec2& v) { return {-v.x2, v.x1}; }

inline Vec2 normalized(const Vec2& v) {
  const double n = norm(v);
  return n > 0.0 ? Vec2{v.x1 / n, v.x2 / n} : Vec2{0.0, 0.0};
}

/// General 2x2 tensor (velocity gradients, deformation gradients).
struct Tensor2 {
  double m11 = 0.0, m12 = 0.0;
  double m21 = 0.0, m22 = 0.0;

  static Tensor2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Vec2 operator*(const Vec2& v) const {
    return {m11 * v.x1 + m12 * v.x2, m21 * v.x1 + m22 * v.x2};
  }
  Tensor2 operator*(const Tensor2& o) const {
    return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
            m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
  }
  Tensor2 operator+(const Tensor2& o) const {
    return {m11 + o.m11, m12 + o.m12, m21 + o.m21, m22 + o.m22};
  }
  Tensor2 operator*(double s) const { return {m11 * s, m12 * s, m21 * s, m22 * s}; }

  double det() const { return m11 * m22 - m12 * m21; }
  double trace() const { return m11 + m22; }
  Tensor2 transposed() const { return {m11, m21, m12, m22}; }

  bool finite() const {
    return std::isfinite(m11) && std::isfinite(m12) && std::isfinite(m21) &&
           std::isfinite(m22);
  }
};

/// Symmetric 2x2 tensor (Cauchy-Green, rate-of-strain, Hessians).
struct SymmetricTensor2 {
  double c11 = 0.0, c12 = 0.0, c22 = 0.0;

  static SymmetricTensor2 identity() { return {1.0, 0.0, 1.0}; }

  Vec2 operator*(const Vec2& v) const {
    return {c11 * v.x1 + c12 * v.x2, c12 * v.x1 + c22 * v.x2};
  }
  double trace() const { return c11 + c22; }
  double det() const { return c11 * c22 - c12 * c12; }
  double frobenius() const {
    return std::sqrt(c11 * c11 + 2.0 * c12 * c12 + c22 * c22);
  }
};

struct NonFiniteError : std::runtime_error {
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidHorizonError : std::invalid_argument {
  explicit InvalidHorizonError(const std::string& what) : std::invalid_argument(what) {}
};

struct OutOfBoundsError : std::out_of_range {
  explicit OutOfBoundsError(const std::string& what) : std::out_of_range(what) {}
};

struct MissingDataError : std::runtime_error {
  explicit MissingDataError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateEigenvalueError : std::runtime_error {
  explicit DegenerateEigenvalueError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace lcs
