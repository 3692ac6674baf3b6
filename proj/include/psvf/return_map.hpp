#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "psvf/core.hpp"

namespace psvf {

enum class Field { X, Y };

/// Exact flow of one half-system of the normal form:
/// x(t) = x0 + vx t, y(t) = y0 + vy t, z(t) = sum z[k] t^k.
struct PolyFlow {
  double x0 = 0.0;
  double vx = 0.0;
  double y0 = 0.0;
  double vy = 0.0;
  std::array<double, 4> z{};

  Point3 at(double t) const;
  double height(double t) const;
};

PolyFlow poly_flow(const ParamSet& params, Field field, const Point3& p0);
Point3 flow_X(const ParamSet& params, const Point3& p0, double t);
Point3 flow_Y(const ParamSet& params, const Point3& p0, double t);

/// Real roots of c[0] + c[1] t + ... + c[degree] t^degree, ascending. Handles
/// degree <= 3; leading zero coefficients lower the degree.
std::vector<double> real_roots(const std::array<double, 4>& c);

/// Smallest t > t_min with z(t) = 0 along the field's flow from p0. When p0
/// lies on the switching plane the root t = 0 is deflated first. Throws
/// DegenerateContact when z(t) vanishes identically.
std::optional<double> return_time(const ParamSet& params, Field field,
                                  const Point3& p0, double t_min = 1e-12);

/// Other end, on the switching plane, of the orbit arc through p that lies
/// in the field's half-space (z >= 0 for X, z <= 0 for Y); the arc runs
/// backward in time when the field leaves p to the wrong side, which makes
/// both maps involutions. Off the plane: next forward intersection. z is
/// snapped to 0. Throws NoReturn when there is no such arc end.
Point3 half_return_X(const ParamSet& params, const Point3& p);
Point3 half_return_Y(const ParamSet& params, const Point3& p);

struct ReturnMapResult {
  Vec2 image;
  double delta1 = 0.0;
  double radicand = 0.0;
  /// Set when gamma_Y(gamma_X(q)) is a genuine Filippov path (start in the
  /// closure of CrossingPlus, midpoint in the closure of CrossingMinus) that
  /// lands on `image`.
  std::optional<std::array<double, 2>> flight_times;
  bool realizable = false;
};

/// radicand = 9 l^2 + 36 a l x - 12 a^2 (x^2 + 4 y)
double return_map_radicand(const ParamSet& params, const Vec2& q);

/// Closed-form first-return map with the principal square root. Throws
/// ComplexBranch when the radicand is negative.
ReturnMapResult first_return_map(const ParamSet& params, const Vec2& q);

/// Image only; skips the realizability check.
Vec2 return_map_image(const ParamSet& params, const Vec2& q);

struct ReturnMapEigen {
  double delta2 = 0.0;
  double xi_plus = 0.0;
  double xi_minus = 0.0;
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  PlanarLine line_plus;   // x = omega_plus y
  PlanarLine line_minus;
  LineLocation location_plus;
  LineLocation location_minus;
};

/// Eigenvalues xi = (2ad - c l +- 2 sqrt(delta2)) / (c l) of the return map
/// at the origin and their eigenlines x = omega y, omega = ac / (ad +- sqrt
/// delta2). Throws LambdaZero at l = 0, ComplexEigenvalues when delta2 < 0.
ReturnMapEigen return_map_eigen_origin(const ParamSet& params);

enum class OrbitStatus { FixedPoint, ReachedSliding, LeftRadius, ComplexBranch, MaxIter, Stopped };

std::string_view to_string(OrbitStatus s);

struct OrbitOptions {
  std::size_t max_iter = 1000;
  double radius = std::numeric_limits<double>::infinity();
  /// Replaces the default stop test (entering the closure of the sliding
  /// region). Called on q_n for n >= 1.
  std::function<bool(const Vec2&)> stop;
};

struct Orbit {
  std::vector<Vec2> points;  // q_0 .. q_N
  OrbitStatus status = OrbitStatus::MaxIter;
  double radicand = 0.0;     // of the failing step when status is ComplexBranch
};

/// X3 <= 0 and Y3 >= 0.
bool in_sliding_closure(const ParamSet& params, const Vec2& q);

Orbit iterate_return_map(const ParamSet& params, const Vec2& q0,
                         const OrbitOptions& options = {});

}  // namespace psvf
