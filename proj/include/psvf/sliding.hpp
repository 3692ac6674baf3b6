#pragma once

#include "psvf/core.hpp"

namespace psvf {

/// Filippov sliding field: the convex combination alpha X + (1 - alpha) Y
/// tangent to the switching plane, alpha = Y3 / (Y3 - X3). Third component is
/// exactly 0. Throws DegenerateDenominator when Y3 - X3 vanishes.
VectorValue sliding_field(const PiecewiseSystem& sys, const Point3& p);

/// (X1 Y3 - Y1 X3, X2 Y3 - Y2 X3). Polynomial, defined on all of the plane.
Vec2 normalized_sliding_field(const PiecewiseSystem& sys, const Point3& p);

/// Weight alpha of X in the sliding convex combination.
double sliding_alpha(double x3, double y3);

bool is_pseudo_equilibrium(const PiecewiseSystem& sys, const Point3& p,
                           double tol = 1e-9);

struct SlidingEigen {
  double delta3 = 0.0;
  double eig1 = 0.0;  // eig1 <= eig2
  double eig2 = 0.0;
  Vec2 vec1;
  Vec2 vec2;
  PlanarLine line1;
  PlanarLine line2;
  LineLocation region1;
  LineLocation region2;
};

/// Jacobian [[a, -bc], [lambda, -db]] of the normalized sliding field of the
/// normal form at the origin, row major.
std::array<double, 4> sliding_jacobian_origin(const ParamSet& params);

/// Closed-form eigen-analysis of that Jacobian. Eigenvectors are scaled to
/// (v, 1) when possible, else (1, 0). Throws ComplexEigenvalues when
/// delta3 = (a + bd)^2 - 4 bc lambda < 0.
SlidingEigen sliding_eigen_origin(const ParamSet& params);

}  // namespace psvf
