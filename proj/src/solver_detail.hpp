#pragma once

// Shared pieces of the two least-squares solvers: 2x2 symmetric algebra for
// the normal equations and guarded residual evaluation.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "respfit/errors.hpp"
#include "respfit/nlls.hpp"

namespace respfit::detail {

struct Vec2 {
  double a = 0.0;
  double b = 0.0;
};

inline double dot(const Vec2 &u, const Vec2 &v) { return u.a * v.a + u.b * v.b; }
inline double norm(const Vec2 &v) { return std::hypot(v.a, v.b); }
inline double norm_inf(const Vec2 &v) {
  return std::max(std::abs(v.a), std::abs(v.b));
}

/// [[aa, ab], [ab, bb]]
struct Sym2 {
  double aa = 0.0;
  double ab = 0.0;
  double bb = 0.0;

  Vec2 operator*(const Vec2 &v) const {
    return {aa * v.a + ab * v.b, ab * v.a + bb * v.b};
  }
};

/// J^T J for a two-column Jacobian.
inline Sym2 gram(const Jacobian &jac) {
  Sym2 m;
  for (std::size_t i = 0; i < jac.d_alpha.size(); ++i) {
    m.aa += jac.d_alpha[i] * jac.d_alpha[i];
    m.ab += jac.d_alpha[i] * jac.d_beta[i];
    m.bb += jac.d_beta[i] * jac.d_beta[i];
  }
  return m;
}

/// J^T r.
inline Vec2 project(const Jacobian &jac, const std::vector<double> &r) {
  Vec2 v;
  for (std::size_t i = 0; i < r.size(); ++i) {
    v.a += jac.d_alpha[i] * r[i];
    v.b += jac.d_beta[i] * r[i];
  }
  return v;
}

/// Solves m x = rhs by Cramer's rule; nullopt when numerically singular.
inline std::optional<Vec2> solve(const Sym2 &m, const Vec2 &rhs) {
  const double det = m.aa * m.bb - m.ab * m.ab;
  const double scale = std::abs(m.aa * m.bb) + m.ab * m.ab;
  if (!std::isfinite(det) || scale == 0.0 || std::abs(det) <= 1e-14 * scale)
    return std::nullopt;
  return Vec2{(m.bb * rhs.a - m.ab * rhs.b) / det,
              (m.aa * rhs.b - m.ab * rhs.a) / det};
}

inline ParameterPair operator+(const ParameterPair &p, const Vec2 &d) {
  return {p.alpha + d.a, p.beta + d.b};
}

inline double norm(const ParameterPair &p) { return std::hypot(p.alpha, p.beta); }

inline double relative_step(const Vec2 &step, const ParameterPair &p) {
  return norm(step) / std::max(norm(p), 1.0);
}

/// Residuals at a trial point; nullopt when the trajectory blows up there.
inline std::optional<std::vector<double>>
try_residuals(const ResidualProblem &problem, const ParameterPair &p) {
  try {
    return residuals(problem, p);
  } catch (const NonFinite &) {
    return std::nullopt;
  }
}

} // namespace respfit::detail
