#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "psvf/errors.hpp"
#include "psvf/sliding.hpp"

using namespace psvf;

TEST_CASE("sliding field at a sliding point") {
  const PiecewiseSystem sys{ParamSet::canonical()};
  // X = (-1, 0, -1), Y = (1, -2, 1)
  const VectorValue f = sliding_field(sys, {1, 0, 0});
  CHECK(f.v1 == doctest::Approx(0.0));
  CHECK(f.v2 == doctest::Approx(-1.0));
  CHECK(f.v3 == 0.0);
  const Vec2 n = normalized_sliding_field(sys, {1, 0, 0});
  CHECK(n.x == doctest::Approx(0.0));
  CHECK(n.y == doctest::Approx(-2.0));
  CHECK(sliding_alpha(-1.0, 1.0) == 0.5);
  CHECK_THROWS_AS(sliding_field(sys, {0, 0, 0}), DegenerateDenominator);
}

TEST_CASE("pseudo-equilibria") {
  const PiecewiseSystem sys{ParamSet::canonical()};
  CHECK(is_pseudo_equilibrium(sys, {0, 0, 0}));
  CHECK_FALSE(is_pseudo_equilibrium(sys, {1, 0, 0}));
  CHECK_FALSE(is_pseudo_equilibrium(sys, {0.01, 0.01, 0}));
}

TEST_CASE("Jacobian and eigenstructure at the origin") {
  const auto j = sliding_jacobian_origin(ParamSet::canonical());
  CHECK(j[0] == -1);
  CHECK(j[1] == 1);
  CHECK(j[2] == 0);
  CHECK(j[3] == -2);

  const SlidingEigen e = sliding_eigen_origin(ParamSet::canonical());
  CHECK(e.delta3 == oracle::delta3_0);
  CHECK(e.eig1 == oracle::sliding_eig_low_0);
  CHECK(e.eig2 == oracle::sliding_eig_high_0);
  CHECK(e.vec2.x == 1);
  CHECK(e.vec2.y == 0);

  CHECK_THROWS_AS(sliding_eigen_origin(ParamSet::canonical(-1.0)), ComplexEigenvalues);
}

TEST_CASE("eigenpairs satisfy J v = mu v and match a numeric Jacobian") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int i = 0; i < 50; ++i) {
    const ParamSet p(-u(rng), -u(rng), u(rng), -u(rng), 0.2 * (u(rng) - 1.0));
    SlidingEigen e;
    try {
      e = sliding_eigen_origin(p);
    } catch (const ComplexEigenvalues&) {
      continue;
    }
    const auto j = sliding_jacobian_origin(p);
    for (const auto& [mu, v] : {std::pair{e.eig1, e.vec1}, std::pair{e.eig2, e.vec2}}) {
      CHECK(j[0] * v.x + j[1] * v.y == doctest::Approx(mu * v.x).epsilon(1e-9));
      CHECK(j[2] * v.x + j[3] * v.y == doctest::Approx(mu * v.y).epsilon(1e-9));
    }
    CHECK(e.eig1 <= e.eig2);

    const PiecewiseSystem sys(p);
    const double h = 1e-6;
    const Vec2 fx = normalized_sliding_field(sys, {h, 0, 0});
    const Vec2 bx = normalized_sliding_field(sys, {-h, 0, 0});
    const Vec2 fy = normalized_sliding_field(sys, {0, h, 0});
    const Vec2 by = normalized_sliding_field(sys, {0, -h, 0});
    CHECK((fx.x - bx.x) / (2 * h) == doctest::Approx(j[0]).epsilon(1e-6));
    CHECK((fy.x - by.x) / (2 * h) == doctest::Approx(j[1]).epsilon(1e-6));
    CHECK((fx.y - bx.y) / (2 * h) == doctest::Approx(j[2]).epsilon(1e-6));
    CHECK((fy.y - by.y) / (2 * h) == doctest::Approx(j[3]).epsilon(1e-6));
  }
}

TEST_CASE("eigenline locations") {
  const SlidingEigen e = sliding_eigen_origin(ParamSet::canonical(0.1));
  // the horizontal eigenline of eig2 = a lies in Sigma^s for x > 0
  CHECK(e.line1.vertical == false);
  CHECK((e.region1.positive == RegionLabel::Sliding || e.region2.positive == RegionLabel::Sliding));
}
