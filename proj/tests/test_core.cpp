#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "psvf/core.hpp"
#include "psvf/errors.hpp"

using namespace psvf;

namespace {
const PiecewiseSystem canon{ParamSet::canonical()};
}

TEST_CASE("ParamSet construction and regime") {
  const ParamSet p = ParamSet::canonical();
  CHECK(p == ParamSet(-1, -1, 1, -2, 0));
  CHECK(p.satisfies_H1_to_H4());
  CHECK(p.regime_violations().empty());
  CHECK(ParamSet::canonical(0.3).lambda == 0.3);

  CHECK_THROWS_AS(ParamSet(-1, 0, 1, -2, 0), RegimeViolation);
  CHECK_THROWS_AS(ParamSet(-1, -1, 0, -2, 0), RegimeViolation);
  CHECK_THROWS_AS(ParamSet(std::nan(""), -1, 1, -2, 0), RegimeViolation);

  const ParamSet bad(1, -1, 1, -2, 0);
  CHECK_FALSE(bad.satisfies_H1_to_H4());
  const auto v = bad.regime_violations();
  REQUIRE_FALSE(v.empty());
  CHECK(v.front() == "a < 0");
  // a + bd = -1 + 0.5 < 0
  CHECK_FALSE(ParamSet(-1, -1, 1, -0.5, 0).satisfies_H1_to_H4());
}

TEST_CASE("normal form evaluation") {
  const ParamSet p = ParamSet::canonical();
  const VectorValue x = eval_normal_form_X(p, {1, 0, 0});
  CHECK(x.v1 == -1);
  CHECK(x.v2 == 0);
  CHECK(x.v3 == -1);
  CHECK(eval_normal_form_X(p, {1, -1, 0}).v3 == 0);
  const VectorValue y = eval_normal_form_Y(p, {-2, -1, 0});
  CHECK(y.v1 == 1);
  CHECK(y.v2 == -2);
  CHECK(y.v3 == -2);
  CHECK(eval_normal_form_X(ParamSet::canonical(0.25), {0, 0, 5}).v2 == 0.25);
}

TEST_CASE("region labels") {
  CHECK(classify_region(canon, {1, 0, 0}) == RegionLabel::Sliding);
  CHECK(classify_region(canon, {1, -2, 0}) == RegionLabel::CrossingPlus);
  CHECK(classify_region(canon, {-1, 0, 0}) == RegionLabel::CrossingMinus);
  CHECK(classify_region(canon, {-1, -2, 0}) == RegionLabel::Escaping);
  CHECK(classify_region(canon, {0, 0, 0}) == RegionLabel::Tangential);
  CHECK(classify_region(canon, {1, -1, 0}) == RegionLabel::Tangential);
  CHECK(classify_region(canon, {0, -1, 0}) == RegionLabel::Tangential);
  CHECK_THROWS_AS(classify_region(canon, {0, 0, 1}), PreconditionError);

  CHECK(region_from_signs(1, 1) == RegionLabel::CrossingPlus);
  CHECK(region_from_signs(-1, -1) == RegionLabel::CrossingMinus);
  CHECK(region_from_signs(-1, 1) == RegionLabel::Sliding);
  CHECK(region_from_signs(1, -1) == RegionLabel::Escaping);
}

TEST_CASE("tangency classes") {
  const TangencyClass o = classify_tangency(canon, {0, 0, 0});
  CHECK(o.x == Contact::Cusp);
  CHECK(o.y == Contact::FoldInvisible);
  CHECK(o.combined == CombinedTangency::CuspFold);

  // L2_X = b(lambda + 2ax) = 2 > 0 at x = 1
  const TangencyClass sx = classify_tangency(canon, {1, -1, 0});
  CHECK(sx.x == Contact::FoldVisible);
  CHECK(sx.y == Contact::Transversal);
  CHECK(sx.combined == CombinedTangency::Fold);

  // x < 0 on the parabola: L2_X = -2 < 0
  CHECK(classify_tangency(canon, {-1, -1, 0}).x == Contact::FoldInvisible);
  // L2_Y = c > 0: invisible for Y
  CHECK(classify_tangency(canon, {0, -1, 0}).y == Contact::FoldInvisible);
  CHECK(classify_tangency(canon, {1, 0, 0}).combined == CombinedTangency::None);

  // lambda != 0 unfolds the cusp at the origin into a two-fold
  const PiecewiseSystem l{ParamSet::canonical(0.1)};
  CHECK(classify_tangency(l, {0, 0, 0}).combined == CombinedTangency::TwoFold);
  // X cusp moves to x = -lambda / (2a)
  CHECK(classify_tangency(l, {0.05, -0.0025, 0}).x == Contact::Cusp);

  CHECK_THROWS_AS(classify_tangency(canon, {0, 0, 0.5}), PreconditionError);
}

TEST_CASE("contact helpers") {
  CHECK(classify_contact_X({1, 0, 0}, 1e-9) == Contact::Transversal);
  CHECK(classify_contact_X({0, 1, 0}, 1e-9) == Contact::FoldVisible);
  CHECK(classify_contact_Y({0, 1, 0}, 1e-9) == Contact::FoldInvisible);
  CHECK(classify_contact_Y({0, -1, 0}, 1e-9) == Contact::FoldVisible);
  CHECK(classify_contact_X({0, 0, 2}, 1e-9) == Contact::Cusp);
  CHECK(classify_contact_X({0, 0, 0}, 1e-9) == Contact::HigherOrder);
  CHECK(combine(Contact::Transversal, Contact::Transversal) == CombinedTangency::None);
  CHECK(combine(Contact::FoldVisible, Contact::FoldInvisible) == CombinedTangency::TwoFold);
  CHECK(combine(Contact::Cusp, Contact::FoldVisible) == CombinedTangency::CuspFold);
  CHECK(combine(Contact::Transversal, Contact::Cusp) == CombinedTangency::Other);
  CHECK(is_fold(Contact::FoldVisible));
  CHECK_FALSE(is_fold(Contact::Cusp));
}

TEST_CASE("Lie jets of the built-in system") {
  const LieJet jx = canon.lie_X({0.5, 0.2, 0});
  CHECK(jx[0] == doctest::Approx(-(0.2 + 0.25)));
  CHECK(jx[1] == doctest::Approx(-(2 * -1 * 0.5)));
  CHECK(jx[2] == doctest::Approx(-2));
  const LieJet jy = canon.lie_Y({0.5, 0.2, 0});
  CHECK(jy[0] == 0.5);
  CHECK(jy[1] == 1);
  CHECK(jy[2] == 0);
}

TEST_CASE("lines through the origin") {
  const PlanarLine h = PlanarLine::through({1, 0});
  CHECK_FALSE(h.vertical);
  CHECK(h.slope == 0);
  const LineLocation loc = locate_line(canon, h);
  CHECK(loc.positive == RegionLabel::Sliding);
  CHECK(loc.negative == RegionLabel::CrossingMinus);
  CHECK_FALSE(loc.crossing());

  const PlanarLine v = PlanarLine::through({0, 1});
  CHECK(v.vertical);
  CHECK(v.at(2).y == 2);
  const LineLocation lv = locate_line(canon, PlanarLine::through({1, -5}));
  CHECK(lv.positive == RegionLabel::CrossingPlus);
  CHECK(lv.negative == RegionLabel::CrossingMinus);
  CHECK(lv.crossing());
  CHECK_FALSE(lv.sliding_or_escaping());
}
