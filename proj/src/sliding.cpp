#include "psvf/sliding.hpp"

#include <cmath>

namespace psvf {

VectorValue sliding_field(const PiecewiseSystem& sys, const Point3& p) {
  const VectorValue x = sys.X(p);
  const VectorValue y = sys.Y(p);
  const double den = y.v3 - x.v3;
  const double scale = 1.0 + std::fmax(x.norm_inf(), y.norm_inf());
  if (std::fabs(den) <= 1e-12 * scale) {
    throw DegenerateDenominator("sliding field: Y3 - X3 vanishes");
  }
  return {(x.v1 * y.v3 - y.v1 * x.v3) / den, (x.v2 * y.v3 - y.v2 * x.v3) / den,
          0.0};
}

Vec2 normalized_sliding_field(const PiecewiseSystem& sys, const Point3& p) {
  const VectorValue x = sys.X(p);
  const VectorValue y = sys.Y(p);
  return {x.v1 * y.v3 - y.v1 * x.v3, x.v2 * y.v3 - y.v2 * x.v3};
}

double sliding_alpha(double x3, double y3) { return y3 / (y3 - x3); }

bool is_pseudo_equilibrium(const PiecewiseSystem& sys, const Point3& p,
                           double tol) {
  return normalized_sliding_field(sys, p).norm_inf() <= tol;
}

std::array<double, 4> sliding_jacobian_origin(const ParamSet& k) {
  return {k.a, -k.b * k.c, k.lambda, -k.d * k.b};
}

namespace {

// Kernel vector of J - e I, taken from whichever row is better conditioned.
Vec2 eigenvector(const std::array<double, 4>& j, double e) {
  const Vec2 r1{j[1], e - j[0]};   // from (j0 - e) vx + j1 vy = 0
  const Vec2 r2{e - j[3], j[2]};   // from j2 vx + (j3 - e) vy = 0
  const Vec2 v = r1.norm() >= r2.norm() ? r1 : r2;
  if (std::fabs(v.y) > 1e-14 * v.norm()) return {v.x / v.y, 1.0};
  return {1.0, 0.0};
}

}  // namespace

SlidingEigen sliding_eigen_origin(const ParamSet& k) {
  const auto j = sliding_jacobian_origin(k);
  SlidingEigen out;
  const double s = k.a + k.b * k.d;
  out.delta3 = s * s - 4.0 * k.b * k.c * k.lambda;
  if (out.delta3 < 0.0) throw ComplexEigenvalues(out.delta3);
  const double root = std::sqrt(out.delta3);
  out.eig1 = (k.a - k.b * k.d - root) / 2.0;
  out.eig2 = (k.a - k.b * k.d + root) / 2.0;
  out.vec1 = eigenvector(j, out.eig1);
  out.vec2 = eigenvector(j, out.eig2);
  out.line1 = PlanarLine::through(out.vec1);
  out.line2 = PlanarLine::through(out.vec2);
  const PiecewiseSystem sys(k);
  out.region1 = locate_line(sys, out.line1);
  out.region2 = locate_line(sys, out.line2);
  return out;
}

}  // namespace psvf
