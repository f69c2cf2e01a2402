#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lcs/strain.hpp"
#include "lcs/types.hpp"

namespace lcs {

struct GridSpec {
  double x1min = 0.0, x1max = 1.0;
  double x2min = 0.0, x2max = 1.0;
  int nx = 2, ny = 2;

  // nx or ny of 1 denotes a transect (single row/column); spacing is 0 and
  // the corresponding min/max must coincide.
  bool valid() const {
    const bool ok1 = nx >= 2 ? x1min < x1max : nx == 1 && x1min == x1max;
    const bool ok2 = ny >= 2 ? x2min < x2max : ny == 1 && x2min == x2max;
    return ok1 && ok2 && nx * ny >= 2;
  }
  double h1() const { return nx > 1 ? (x1max - x1min) / (nx - 1) : 0.0; }
  double h2() const { return ny > 1 ? (x2max - x2min) / (ny - 1) : 0.0; }
  double x1(int i) const { return x1min + i * h1(); }
  double x2(int j) const { return x2min + j * h2(); }
  bool contains(const Vec2& p) const {
    const double eps1 = 1e-12 * (x1max - x1min), eps2 = 1e-12 * (x2max - x2min);
    return p.x1 >= x1min - eps1 && p.x1 <= x1max + eps1 && p.x2 >= x2min - eps2 &&
           p.x2 <= x2max + eps2;
  }
};

enum class Interpolation { Bilinear, Bicubic };

/// Uniform rectilinear scalar grid; missing entries are NaN.
/// Values are row-major with x1 fastest.
struct ScalarGrid {
  GridSpec spec;
  std::vector<double> values;

  ScalarGrid() = default;
  explicit ScalarGrid(const GridSpec& s)
      : spec(s),
        values(static_cast<std::size_t>(s.nx) * s.ny,
               std::numeric_limits<double>::quiet_NaN()) {}

  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * spec.nx + i]; }
  double at(int i, int j) const {
    return values[static_cast<std::size_t>(j) * spec.nx + i];
  }
  static bool missing(double v) { return !std::isfinite(v); }

  /// min/max over present values; returns {0,0} if all missing.
  std::pair<double, double> value_range() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : values)
      if (!missing(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    if (lo > hi) return {0.0, 0.0};
    return {lo, hi};
  }

  double default_tol_grad() const {
    auto [lo, hi] = value_range();
    return 1e-8 * (hi - lo) / std::min(spec.h1(), spec.h2());
  }
};

struct CriticalKind {
  enum Value { Max, Min, Saddle, Degenerate };
};

struct CriticalPoint {
  Vec2 x;
  SymmetricTensor2 hessian;
  CriticalKind::Value kind = CriticalKind::Degenerate;
};

namespace detail {

// Catmull-Rom (Keys a = -1/2) basis and derivatives in the unit cell.
inline std::array<double, 4> cr_weights(double s) {
  const double s2 = s * s, s3 = s2 * s;
  return {0.5 * (-s3 + 2.0 * s2 - s), 0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
          0.5 * (-3.0 * s3 + 4.0 * s2 + s), 0.5 * (s3 - s2)};
}
inline std::array<double, 4> cr_dweights(double s) {
  const double s2 = s * s;
  return {0.5 * (-3.0 * s2 + 4.0 * s - 1.0), 0.5 * (9.0 * s2 - 10.0 * s),
          0.5 * (-9.0 * s2 + 8.0 * s + 1.0), 0.5 * (3.0 * s2 - 2.0 * s)};
}
inline std::array<double, 4> cr_ddweights(double s) {
  return {0.5 * (-6.0 * s + 4.0), 0.5 * (18.0 * s - 10.0), 0.5 * (-18.0 * s + 8.0),
          0.5 * (6.0 * s - 2.0)};
}

// Stencil value with linear extrapolation past the boundary; keeps the
// interpolant exact for affine data in edge cells.  Stencils reach at
// most one node beyond the grid.
inline double ghosted(const ScalarGrid& g, int i, int j) {
  const int nx = g.spec.nx, ny = g.spec.ny;
  auto row = [&](int ii) {
    if (j >= 0 && j < ny) return g.at(ii, j);
    if (j < 0) return 2.0 * g.at(ii, 0) - g.at(ii, 1);
    return 2.0 * g.at(ii, ny - 1) - g.at(ii, ny - 2);
  };
  if (i >= 0 && i < nx) return row(i);
  if (i < 0) return 2.0 * row(0) - row(1);
  return 2.0 * row(nx - 1) - row(nx - 2);
}

struct CellCoords {
  int i0, j0;      // lower-left node of the cell
  double s1, s2;   // local coordinates in [0, 1]
};

inline CellCoords locate(const GridSpec& spec, const Vec2& x) {
  if (!spec.contains(x)) throw OutOfBoundsError("interpolation point outside grid");
  const double u = (x.x1 - spec.x1min) / spec.h1();
  const double v = (x.x2 - spec.x2min) / spec.h2();
  int i0 = std::clamp(static_cast<int>(std::floor(u)), 0, spec.nx - 2);
  int j0 = std::clamp(static_cast<int>(std::floor(v)), 0, spec.ny - 2);
  return {i0, j0, u - i0, v - j0};
}

}  // namespace detail

inline double interpolate(const ScalarGrid& g, const Vec2& x,
                          Interpolation method = Interpolation::Bicubic) {
  const auto c = detail::locate(g.spec, x);
  if (method == Interpolation::Bilinear) {
    const double v00 = g.at(c.i0, c.j0), v10 = g.at(c.i0 + 1, c.j0);
    const double v01 = g.at(c.i0, c.j0 + 1), v11 = g.at(c.i0 + 1, c.j0 + 1);
    if (ScalarGrid::missing(v00) || ScalarGrid::missing(v10) ||
        ScalarGrid::missing(v01) || ScalarGrid::missing(v11))
      throw MissingDataError("bilinear stencil touches a missing node");
    return (1 - c.s1) * (1 - c.s2) * v00 + c.s1 * (1 - c.s2) * v10 +
           (1 - c.s1) * c.s2 * v01 + c.s1 * c.s2 * v11;
  }
  const auto w1 = detail::cr_weights(c.s1);
  const auto w2 = detail::cr_weights(c.s2);
  double acc = 0.0;
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a) {
      const double v = detail::ghosted(g, c.i0 - 1 + a, c.j0 - 1 + b);
      if (ScalarGrid::missing(v))
        throw MissingDataError("bicubic stencil touches a missing node");
      acc += w1[a] * w2[b] * v;
    }
  return acc;
}

inline Vec2 gradient_at(const ScalarGrid& g, const Vec2& x) {
  const auto c = detail::locate(g.spec, x);
  const auto w1 = detail::cr_weights(c.s1), w2 = detail::cr_weights(c.s2);
  const auto d1 = detail::cr_dweights(c.s1), d2 = detail::cr_dweights(c.s2);
  double gx = 0.0, gy = 0.0;
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a) {
      const double v = detail::ghosted(g, c.i0 - 1 + a, c.j0 - 1 + b);
      if (ScalarGrid::missing(v))
        throw MissingDataError("bicubic stencil touches a missing node");
      gx += d1[a] * w2[b] * v;
      gy += w1[a] * d2[b] * v;
    }
  return {gx / g.spec.h1(), gy / g.spec.h2()};
}

inline SymmetricTensor2 hessian_at(const ScalarGrid& g, const Vec2& x) {
  const auto c = detail::locate(g.spec, x);
  const auto w1 = detail::cr_weights(c.s1), w2 = detail::cr_weights(c.s2);
  const auto d1 = detail::cr_dweights(c.s1), d2 = detail::cr_dweights(c.s2);
  const auto q1 = detail::cr_ddweights(c.s1), q2 = detail::cr_ddweights(c.s2);
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a) {
      const double v = detail::ghosted(g, c.i0 - 1 + a, c.j0 - 1 + b);
      if (ScalarGrid::missing(v))
        throw MissingDataError("bicubic stencil touches a missing node");
      hxx += q1[a] * w2[b] * v;
      hxy += d1[a] * d2[b] * v;
      hyy += w1[a] * q2[b] * v;
    }
  const double h1 = g.spec.h1(), h2 = g.spec.h2();
  return {hxx / (h1 * h1), hxy / (h1 * h2), hyy / (h2 * h2)};
}

namespace detail {

inline CriticalKind::Value classify(const EigenPair2& e) {
  const double scale = std::max({std::abs(e.lambda_min), std::abs(e.lambda_max), 1e-300});
  const double tol = 1e-9 * scale;
  // Degenerate means a singular Hessian; repeated eigenvalues are fine.
  if (std::abs(e.lambda_min) <= tol || std::abs(e.lambda_max) <= tol)
    return CriticalKind::Degenerate;
  if (e.lambda_max < 0.0) return CriticalKind::Max;
  if (e.lambda_min > 0.0) return CriticalKind::Min;
  return CriticalKind::Saddle;
}

}  // namespace detail

/// Cell-wise sign-change candidates refined by Newton iteration on the
/// interpolated gradient.  Non-converged candidates are dropped and counted.
inline std::vector<CriticalPoint> find_critical_points(const ScalarGrid& g,
                                                       double tol_grad,
                                                       int* dropped_count = nullptr) {
  std::vector<CriticalPoint> found;
  int dropped = 0;
  const GridSpec& s = g.spec;
  const double h1 = s.h1(), h2 = s.h2();
  const double merge_dist = std::max(h1, h2);

  // Node gradients (skip cells touching missing data).
  std::vector<Vec2> node_grad(static_cast<std::size_t>(s.nx) * s.ny);
  std::vector<char> node_ok(static_cast<std::size_t>(s.nx) * s.ny, 0);
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      try {
        node_grad[static_cast<std::size_t>(j) * s.nx + i] =
            gradient_at(g, {s.x1(i), s.x2(j)});
        node_ok[static_cast<std::size_t>(j) * s.nx + i] = 1;
      } catch (const MissingDataError&) {
      }
    }

  auto sign_change = [](double a, double b, double c, double d) {
    const double lo = std::min({a, b, c, d}), hi = std::max({a, b, c, d});
    return lo <= 0.0 && hi >= 0.0;
  };

  for (int j = 0; j + 1 < s.ny; ++j)
    for (int i = 0; i + 1 < s.nx; ++i) {
      const std::size_t k00 = static_cast<std::size_t>(j) * s.nx + i;
      const std::size_t k10 = k00 + 1;
      const std::size_t k01 = k00 + s.nx;
      const std::size_t k11 = k01 + 1;
      if (!(node_ok[k00] && node_ok[k10] && node_ok[k01] && node_ok[k11])) continue;
      if (!sign_change(node_grad[k00].x1, node_grad[k10].x1, node_grad[k01].x1,
                       node_grad[k11].x1) ||
          !sign_change(node_grad[k00].x2, node_grad[k10].x2, node_grad[k01].x2,
                       node_grad[k11].x2))
        continue;

      Vec2 x{s.x1(i) + 0.5 * h1, s.x2(j) + 0.5 * h2};
      bool converged = false;
      try {
        for (int it = 0; it < 50; ++it) {
          const Vec2 grad = gradient_at(g, x);
          if (norm(grad) <= tol_grad) {
            converged = true;
            break;
          }
          const SymmetricTensor2 h = hessian_at(g, x);
          const double det = h.det();
          if (std::abs(det) < 1e-300) break;
          Vec2 step{(h.c22 * grad.x1 - h.c12 * grad.x2) / det,
                    (h.c11 * grad.x2 - h.c12 * grad.x1) / det};
          const double cap = 2.0 * merge_dist;
          if (norm(step) > cap) step = step * (cap / norm(step));
          Vec2 next = x - step;
          if (!s.contains(next)) break;
          x = next;
        }
      } catch (const OutOfBoundsError&) {
      } catch (const MissingDataError&) {
      }
      if (!converged) {
        ++dropped;
        continue;
      }
      bool duplicate = false;
      for (const auto& cp : found)
        if (norm(cp.x - x) < merge_dist) {
          duplicate = true;
          break;
        }
      if (duplicate) continue;

      CriticalPoint cp;
      cp.x = x;
      cp.hessian = hessian_at(g, x);
      cp.kind = detail::classify(eig_sym2(cp.hessian));
      found.push_back(cp);
    }

  std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    return a.x.x2 != b.x.x2 ? a.x.x2 < b.x.x2 : a.x.x1 < b.x.x1;
  });
  if (dropped_count) *dropped_count = dropped;
  return found;
}

// ---------------------------------------------------------------------------
// File formats.  Grid files are bit-exact: one header line, then nx*ny
// lines "x1,x2,value" with %.17g floats and "nan" for missing entries,
// row-major with x1 fastest.

inline void write_grid(const ScalarGrid& g, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_grid: cannot open " + path);
  const GridSpec& s = g.spec;
  std::fprintf(f, "# grid nx=%d ny=%d x1min=%.17g x1max=%.17g x2min=%.17g x2max=%.17g\n",
               s.nx, s.ny, s.x1min, s.x1max, s.x2min, s.x2max);
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      const double v = g.at(i, j);
      if (ScalarGrid::missing(v))
        std::fprintf(f, "%.17g,%.17g,nan\n", s.x1(i), s.x2(j));
      else
        std::fprintf(f, "%.17g,%.17g,%.17g\n", s.x1(i), s.x2(j), v);
    }
  std::fclose(f);
}

inline ScalarGrid read_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_grid: cannot open " + path);
  std::string header;
  std::getline(in, header);
  GridSpec s;
  if (std::sscanf(header.c_str(),
                  "# grid nx=%d ny=%d x1min=%lg x1max=%lg x2min=%lg x2max=%lg", &s.nx,
                  &s.ny, &s.x1min, &s.x1max, &s.x2min, &s.x2max) != 6 ||
      !s.valid())
    throw std::runtime_error("read_grid: malformed header in " + path);
  ScalarGrid g(s);
  std::string line;
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      if (!std::getline(in, line))
        throw std::runtime_error("read_grid: truncated file " + path);
      const auto p2 = line.rfind(',');
      if (p2 == std::string::npos)
        throw std::runtime_error("read_grid: malformed line in " + path);
      const std::string tok = line.substr(p2 + 1);
      if (tok == "nan" || tok == "NAN" || tok == "NaN")
        g.at(i, j) = std::numeric_limits<double>::quiet_NaN();
      else
        g.at(i, j) = std::stod(tok);
    }
  return g;
}

/// Binary PGM (P5), maxval 255, top row at x2max; missing values map to 0.
inline void write_image(const ScalarGrid& g, const std::string& path, double lo,
                        double hi) {
  if (!(lo < hi)) throw std::invalid_argument("write_image requires lo < hi");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_image: cannot open " + path);
  std::fprintf(f, "P5\n%d %d\n255\n", g.spec.nx, g.spec.ny);
  for (int j = g.spec.ny - 1; j >= 0; --j)
    for (int i = 0; i < g.spec.nx; ++i) {
      const double v = g.at(i, j);
      unsigned char px = 0;
      if (!ScalarGrid::missing(v)) {
        const double u = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        px = static_cast<unsigned char>(std::lround(255.0 * u));
      }
      std::fputc(px, f);
    }
  std::fclose(f);
}

}  // namespace lcs
