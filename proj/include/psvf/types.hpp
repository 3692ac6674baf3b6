#pragma once

#include <array>
#include <cmath>
#include <string>

#include "psvf/errors.hpp"

namespace psvf {

namespace detail {
inline void require_finite(double a, double b, double c, const char* what) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw PreconditionError(std::string(what) + " requires finite components");
  }
}
}  // namespace detail

/// A point of phase space R^3. The switching plane is z = 0.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3() = default;
  Point3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
    detail::require_finite(x, y, z, "Point3");
  }

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Value of a vector field. `v3` is the component normal to the switching
/// plane.
struct VectorValue {
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;

  VectorValue() = default;
  VectorValue(double a, double b, double c) : v1(a), v2(b), v3(c) {
    detail::require_finite(a, b, c, "VectorValue");
  }

  double norm_inf() const {
    return std::fmax(std::fabs(v1), std::fmax(std::fabs(v2), std::fabs(v3)));
  }
  friend bool operator==(const VectorValue&, const VectorValue&) = default;
};

/// Point or vector in the switching plane, coordinates (x, y).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  double norm_inf() const { return std::fmax(std::fabs(x), std::fabs(y)); }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Point3 on_sigma(const Vec2& q) { return Point3(q.x, q.y, 0.0); }
inline Vec2 planar(const Point3& p) { return {p.x, p.y}; }

}  // namespace psvf
