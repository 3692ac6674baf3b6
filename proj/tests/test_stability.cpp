#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "psvf/errors.hpp"
#include "psvf/stability.hpp"

using namespace psvf;

TEST_CASE("seeded sampling") {
  SampleRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(a.uniform() != c.uniform());
  SampleRng r(7);
  for (int i = 0; i < 200; ++i) CHECK(r.in_ball(0.2).norm() <= 0.2);
  const double v = r.uniform(-3, -2);
  CHECK(v >= -3);
  CHECK(v < -2);
}

TEST_CASE("regime guards") {
  CHECK_NOTHROW(require_regime(ParamSet::canonical()));
  CHECK_THROWS_AS(require_regime(ParamSet(1, -1, 1, -2, 0)), RegimeViolation);
  CHECK_THROWS_AS(require_lambda_zero(ParamSet::canonical(0.1), "curve-images"), PreconditionError);
  CHECK_THROWS_AS(verify_curve_images(ParamSet::canonical(0.1), 10), PreconditionError);
  CHECK_THROWS_AS(verify_strip_containment(ParamSet::canonical(-0.1), 10), PreconditionError);
  CHECK_THROWS_AS(verify_reach_sliding(ParamSet::canonical(-0.1), SampleSpec{}), PreconditionError);
  CHECK_THROWS_AS(classify_stability(ParamSet(-1, -1, 1, -0.5, 0)), RegimeViolation);
}

TEST_CASE("curve images") {
  const CurveImageReport r = verify_curve_images(ParamSet::canonical(), 100);
  CHECK(r.samples == 100);
  CHECK(r.parabola_residual <= 1e-12);
  CHECK(r.axis_residual <= 1e-12);
  CHECK(r.parabola_sim_residual <= 1e-6);
  CHECK(r.axis_sim_residual <= 1e-6);
  CHECK(r.passed);
}

TEST_CASE("strip containment") {
  const ContainmentReport r = verify_strip_containment(ParamSet::canonical(), 1000);
  CHECK(r.samples == 1000);
  CHECK(r.violations == 0);
  CHECK(r.passed);
}

TEST_CASE("monotone growth") {
  for (const Vec2 q0 : {Vec2{0.1, -0.05}, Vec2{0.2, -0.04}}) {
    const GrowthReport r = verify_monotone_growth(ParamSet::canonical(), q0);
    CHECK(r.monotone);
    CHECK(r.reached_sliding);
    CHECK(r.passed);
  }
  const GrowthReport o = verify_monotone_growth(ParamSet::canonical(), {0, 0});
  CHECK(o.passed);
  CHECK_THROWS_AS(verify_monotone_growth(ParamSet::canonical(), {1, 0}), PreconditionError);
}

TEST_CASE("reach sliding") {
  SampleSpec spec;
  spec.count = 100;
  const ReachReport r = verify_reach_sliding(ParamSet::canonical(), spec);
  CHECK(r.samples == 100);
  CHECK(r.reached == 100);
  CHECK(r.passed);
  CHECK(r.records.size() == 100);
  // every fifth sample starts on the switching plane
  CHECK(r.records[0].start.z == 0.0);
  CHECK(r.records[5].start.z == 0.0);
}

TEST_CASE("escape certificate") {
  const ParamSet p = ParamSet::canonical(-0.05);
  const EscapeCertificate c = escape_certificate(p, 1.0);
  CHECK(c.p0.x == 1.0);
  CHECK(c.p0.y == -1.0);
  CHECK(c.p1.x == doctest::Approx(oracle::p1_x).epsilon(1e-13));
  CHECK(c.p1.y == doctest::Approx(oracle::p1_y).epsilon(1e-13));
  CHECK(c.p3.y == doctest::Approx(oracle::p3_y).epsilon(1e-13));
  CHECK(c.s_abscissa == doctest::Approx(oracle::p1_x));
  CHECK(c.below_r);
  CHECK(c.valid);
  CHECK(c.d2 > c.d0);

  CHECK(c.p2_kind == ReturnKind::SlidingExit);
  CHECK(std::fabs(c.p2.y + c.p2.x * c.p2.x) < 1e-8);

  // the slide from this orbit drifts outward inside the sliding region
  const EscapeCertificate far = escape_certificate(p, 0.2);
  CHECK(far.valid);
  CHECK(far.p2_kind == ReturnKind::TimeLimit);
  CHECK(far.d2 > far.d0);

  const EscapeCertificate small = escape_certificate(p, 0.1);
  CHECK(small.valid);
  const auto sim = simulated_escape_distance(p, 0.1);
  REQUIRE(sim.has_value());
  CHECK(*sim - small.d0 > 1e-6);
  CHECK(*sim == doctest::Approx(small.d2).epsilon(1e-6));

  CHECK_THROWS_AS(escape_certificate(ParamSet::canonical(0.05), 0.2), CertificateFailed);
}

TEST_CASE("stability verdicts") {
  SampleSpec spec;
  spec.count = 50;
  const StabilityVerdict neg = classify_stability(ParamSet::canonical(-0.05), spec);
  CHECK(neg.verdict == Verdict::NotLyapunovStable);
  REQUIRE(neg.certificate.has_value());
  CHECK(neg.certificate->valid);
  REQUIRE(neg.simulated_d2.has_value());
  CHECK(*neg.simulated_d2 - neg.certificate->d0 > 1e-6);

  // no instability verdict on the stable side of the dichotomy
  const StabilityVerdict zero = classify_stability(ParamSet::canonical(), spec);
  CHECK(zero.verdict != Verdict::NotLyapunovStable);
  CHECK(zero.samples.size() == 50);
  CHECK(zero.reached_sliding == 50);
  CHECK_FALSE(zero.reason.empty());
  CHECK(to_string(Verdict::AsymptoticallyStable) == "AsymptoticallyStable");
}

TEST_CASE("sweeps") {
  SampleSpec spec;
  spec.count = 10;
  const SimConfig cfg;
  CHECK(sweep({}, spec, cfg).empty());

  const SweepRow bad = sweep_cell({-1, 0, 1, -2, 0}, spec, cfg);
  CHECK_FALSE(bad.verdict.has_value());
  CHECK(bad.error.rfind("RegimeViolation", 0) == 0);

  std::size_t streamed = 0;
  const auto rows = sweep({{-1, -1, 1, -2, 0.02}, {-1, -1, 1, -2, -0.02}, {-1, -1, 1, -2, 0.02}}, spec, cfg,
                          [&](const SweepRow&) { ++streamed; });
  REQUIRE(rows.size() == 2);
  CHECK(streamed == 2);
  CHECK(rows[0].key.lambda == -0.02);
  CHECK(rows[1].key.lambda == 0.02);
  CHECK(rows[0].verdict == Verdict::NotLyapunovStable);
  CHECK(rows[1].verdict != Verdict::NotLyapunovStable);
  CHECK(rows[0].sliding.has_value());
  CHECK(rows[0].return_map.has_value());
}

TEST_CASE("config digest") {
  const SimConfig cfg;
  SampleSpec s;
  const auto d = config_digest(cfg, s);
  CHECK(d == config_digest(cfg, s));
  s.seed = 43;
  CHECK(d != config_digest(cfg, s));
}
