#include "psvf/return_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace psvf {

Point3 PolyFlow::at(double t) const {
  return {x0 + vx * t, y0 + vy * t, height(t)};
}

double PolyFlow::height(double t) const {
  return z[0] + t * (z[1] + t * (z[2] + t * z[3]));
}

PolyFlow poly_flow(const ParamSet& k, Field field, const Point3& p) {
  PolyFlow f;
  f.x0 = p.x;
  f.y0 = p.y;
  if (field == Field::X) {
    // z' = b (y0 + l t + (x0 + a t)^2)
    f.vx = k.a;
    f.vy = k.lambda;
    f.z = {p.z, k.b * (p.y + p.x * p.x), k.b * (k.lambda / 2.0 + k.a * p.x),
           k.b * k.a * k.a / 3.0};
  } else {
    f.vx = k.c;
    f.vy = k.d;
    f.z = {p.z, p.x, k.c / 2.0, 0.0};
  }
  return f;
}

Point3 flow_X(const ParamSet& params, const Point3& p0, double t) {
  return poly_flow(params, Field::X, p0).at(t);
}

Point3 flow_Y(const ParamSet& params, const Point3& p0, double t) {
  return poly_flow(params, Field::Y, p0).at(t);
}

namespace {

double poly_eval(const std::array<double, 4>& c, double t) {
  return c[0] + t * (c[1] + t * (c[2] + t * c[3]));
}

double poly_slope(const std::array<double, 4>& c, double t) {
  return c[1] + t * (2.0 * c[2] + t * 3.0 * c[3]);
}

double newton_polish(const std::array<double, 4>& c, double t) {
  for (int i = 0; i < 3; ++i) {
    const double s = poly_slope(c, t);
    if (s == 0.0) break;
    const double next = t - poly_eval(c, t) / s;
    if (!std::isfinite(next)) break;
    if (std::fabs(poly_eval(c, next)) >= std::fabs(poly_eval(c, t))) break;
    t = next;
  }
  return t;
}

std::vector<double> quadratic_roots(double a, double b, double c) {
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    // A double root perturbed by rounding.
    if (disc > -1e-14 * b * b) return {-b / (2.0 * a)};
    return {};
  }
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  if (q == 0.0) return {0.0, 0.0};
  return {q / a, c / q};
}

std::vector<double> cubic_roots(const std::array<double, 4>& c) {
  const double b = c[2] / c[3];
  const double cc = c[1] / c[3];
  const double d = c[0] / c[3];
  // t = s - b/3 gives s^3 + p s + q = 0
  const double p = cc - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
  const double shift = -b / 3.0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  std::vector<double> out;
  if (p == 0.0 && q == 0.0) {
    out = {shift, shift, shift};
  } else if (disc > 0.0) {
    const double u = std::cbrt(-q / 2.0 + std::sqrt(disc));
    const double v = std::cbrt(-q / 2.0 - std::sqrt(disc));
    out = {u + v + shift};
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      out.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
    }
  }
  return out;
}

}  // namespace

std::vector<double> real_roots(const std::array<double, 4>& c) {
  double scale = 0.0;
  for (double v : c) scale = std::fmax(scale, std::fabs(v));
  if (scale == 0.0) return {};
  int degree = 3;
  while (degree > 0 && std::fabs(c[static_cast<std::size_t>(degree)]) <= 1e-14 * scale) {
    --degree;
  }
  std::vector<double> roots;
  switch (degree) {
    case 0: return {};
    case 1: roots = {-c[0] / c[1]}; break;
    case 2: roots = quadratic_roots(c[2], c[1], c[0]); break;
    default: roots = cubic_roots(c); break;
  }
  std::array<double, 4> trimmed = c;
  for (std::size_t k = static_cast<std::size_t>(degree) + 1; k < 4; ++k) trimmed[k] = 0.0;
  for (double& r : roots) r = newton_polish(trimmed, r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::optional<double> return_time(const ParamSet& params, Field field,
                                  const Point3& p0, double t_min) {
  const PolyFlow f = poly_flow(params, field, p0);
  std::array<double, 4> c = f.z;
  if (p0.z == 0.0) c = {f.z[1], f.z[2], f.z[3], 0.0};
  double scale = 0.0;
  for (double v : c) scale = std::fmax(scale, std::fabs(v));
  if (scale <= 1e-14) {
    throw DegenerateContact("return_time: the flow stays in the switching plane");
  }
  for (double t : real_roots(c)) {
    if (t > t_min) return t;
  }
  return std::nullopt;
}

namespace {

// Signed flight time of the arc that lies in the field's own half-space
// (z >= 0 for X, z <= 0 for Y). From a point of the plane that arc runs
// forward or backward in time depending on which side the field leaves to.
std::optional<double> arc_time(const ParamSet& params, Field field, const Point3& p) {
  if (p.z != 0.0) return return_time(params, field, p);
  const PolyFlow f = poly_flow(params, field, p);
  const std::array<double, 4> c = {f.z[1], f.z[2], f.z[3], 0.0};
  double scale = 0.0;
  for (double v : c) scale = std::fmax(scale, std::fabs(v));
  if (scale <= 1e-14) {
    throw DegenerateContact("half_return: the flow stays in the switching plane");
  }
  // z(t) ~ c_k t^(k+1) near t = 0 for the first coefficient above noise.
  std::size_t k = 0;
  while (k < 2 && std::fabs(c[k]) <= 1e-14 * scale) ++k;
  const double side = field == Field::X ? 1.0 : -1.0;
  const bool forward = side * c[k] > 0.0;
  const std::vector<double> roots = real_roots(c);
  if (forward) {
    for (double t : roots) {
      if (t > 1e-12) return t;
    }
  } else {
    for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
      if (*it < -1e-12) return *it;
    }
  }
  return std::nullopt;
}

Point3 half_return(const ParamSet& params, Field field, const Point3& p) {
  const auto t = arc_time(params, field, p);
  if (!t) {
    throw NoReturn(field == Field::X ? "half_return_X: no return to the plane"
                                     : "half_return_Y: no return to the plane");
  }
  const Point3 q = poly_flow(params, field, p).at(*t);
  return {q.x, q.y, 0.0};
}

}  // namespace

Point3 half_return_X(const ParamSet& params, const Point3& p) {
  return half_return(params, Field::X, p);
}

Point3 half_return_Y(const ParamSet& params, const Point3& p) {
  return half_return(params, Field::Y, p);
}

double return_map_radicand(const ParamSet& k, const Vec2& q) {
  const double a = k.a;
  const double l = k.lambda;
  return 9.0 * l * l + 36.0 * a * l * q.x - 12.0 * a * a * (q.x * q.x + 4.0 * q.y);
}

namespace {

Vec2 image_from(const ParamSet& k, const Vec2& q, double delta1) {
  const double a = k.a;
  const double s = 2.0 * a * q.x + delta1;
  return {s / (4.0 * a),
          q.y + k.d * s / (2.0 * a * k.c) +
              k.lambda * (-6.0 * a * q.x - delta1) / (4.0 * a * a)};
}

double compute_delta1(const ParamSet& k, const Vec2& q, double& radicand) {
  if (k.a == 0.0) throw PreconditionError("first return map requires a != 0");
  radicand = return_map_radicand(k, q);
  if (radicand < 0.0) throw ComplexBranch(radicand);
  return 3.0 * k.lambda - std::sqrt(radicand);
}

}  // namespace

Vec2 return_map_image(const ParamSet& params, const Vec2& q) {
  double radicand = 0.0;
  return image_from(params, q, compute_delta1(params, q, radicand));
}

ReturnMapResult first_return_map(const ParamSet& params, const Vec2& q) {
  ReturnMapResult out;
  out.delta1 = compute_delta1(params, q, out.radicand);
  out.image = image_from(params, q, out.delta1);

  const Point3 p0 = on_sigma(q);
  const VectorValue x0 = eval_normal_form_X(params, p0);
  const VectorValue y0 = eval_normal_form_Y(params, p0);
  const double tol0 = 1e-12 * (1.0 + std::fmax(x0.norm_inf(), y0.norm_inf()));
  if (x0.v3 < -tol0 || y0.v3 < -tol0) return out;
  const auto t1 = return_time(params, Field::X, p0);
  if (!t1) return out;
  const Point3 p1 = half_return_X(params, p0);
  const VectorValue x1 = eval_normal_form_X(params, p1);
  const VectorValue y1 = eval_normal_form_Y(params, p1);
  const double tol1 = 1e-12 * (1.0 + std::fmax(x1.norm_inf(), y1.norm_inf()));
  if (x1.v3 > tol1 || y1.v3 > tol1) return out;
  const auto t2 = return_time(params, Field::Y, p1);
  if (!t2) return out;
  const Point3 p2 = half_return_Y(params, p1);
  const double gap = std::hypot(p2.x - out.image.x, p2.y - out.image.y);
  if (gap > 1e-9 * (1.0 + out.image.norm())) return out;
  out.flight_times = std::array<double, 2>{*t1, *t2};
  out.realizable = true;
  return out;
}

ReturnMapEigen return_map_eigen_origin(const ParamSet& k) {
  if (k.lambda == 0.0) throw LambdaZero();
  ReturnMapEigen out;
  const double ad = k.a * k.d;
  const double cl = k.c * k.lambda;
  out.delta2 = ad * ad - ad * cl;
  if (out.delta2 < 0.0) throw ComplexEigenvalues(out.delta2);
  const double root = std::sqrt(out.delta2);
  out.xi_plus = (2.0 * ad - cl + 2.0 * root) / cl;
  out.xi_minus = (2.0 * ad - cl - 2.0 * root) / cl;
  out.omega_plus = k.a * k.c / (ad + root);
  out.omega_minus = k.a * k.c / (ad - root);
  out.line_plus = PlanarLine::through({out.omega_plus, 1.0});
  out.line_minus = PlanarLine::through({out.omega_minus, 1.0});
  const PiecewiseSystem sys(k);
  out.location_plus = locate_line(sys, out.line_plus);
  out.location_minus = locate_line(sys, out.line_minus);
  return out;
}

std::string_view to_string(OrbitStatus s) {
  switch (s) {
    case OrbitStatus::FixedPoint: return "FixedPoint";
    case OrbitStatus::ReachedSliding: return "ReachedSliding";
    case OrbitStatus::LeftRadius: return "LeftRadius";
    case OrbitStatus::ComplexBranch: return "ComplexBranch";
    case OrbitStatus::MaxIter: return "MaxIter";
    case OrbitStatus::Stopped: return "Stopped";
  }
  return "?";
}

bool in_sliding_closure(const ParamSet& k, const Vec2& q) {
  return k.b * (q.y + q.x * q.x) <= 0.0 && q.x >= 0.0;
}

Orbit iterate_return_map(const ParamSet& params, const Vec2& q0,
                         const OrbitOptions& options) {
  Orbit orbit;
  orbit.points.push_back(q0);
  for (;;) {
    const Vec2 q = orbit.points.back();
    const std::size_t n = orbit.points.size() - 1;
    if (n >= 1) {
      if (options.stop) {
        if (options.stop(q)) {
          orbit.status = OrbitStatus::Stopped;
          return orbit;
        }
      } else if (in_sliding_closure(params, q)) {
        orbit.status = OrbitStatus::ReachedSliding;
        return orbit;
      }
    }
    if (q.norm() > options.radius) {
      orbit.status = OrbitStatus::LeftRadius;
      return orbit;
    }
    if (n >= options.max_iter) {
      orbit.status = OrbitStatus::MaxIter;
      return orbit;
    }
    const double radicand = return_map_radicand(params, q);
    if (radicand < 0.0) {
      orbit.status = OrbitStatus::ComplexBranch;
      orbit.radicand = radicand;
      return orbit;
    }
    const Vec2 next = return_map_image(params, q);
    if (next == q) {
      orbit.status = OrbitStatus::FixedPoint;
      return orbit;
    }
    orbit.points.push_back(next);
  }
}

}  // namespace psvf
