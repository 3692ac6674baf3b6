#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "psvf/errors.hpp"
#include "psvf/hybrid.hpp"
#include "psvf/return_map.hpp"

using namespace psvf;

namespace {

std::vector<Event> events_of(const HybridTrajectory& t, EventKind k) {
  std::vector<Event> out;
  for (const Event& e : t.events) {
    if (e.kind == k) out.push_back(e);
  }
  return out;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("Dormand-Prince matches closed-form flows") {
  const ParamSet p = ParamSet::canonical(0.05);
  const Dopri5<3>::Rhs rhs = [&p](const State<3>& s) {
    const VectorValue v = eval_normal_form_X(p, {s[0], s[1], s[2]});
    return State<3>{v.v1, v.v2, v.v3};
  };
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Point3 p0(u(rng), u(rng), u(rng));
    const auto res = integrate<3>(rhs, {p0.x, p0.y, p0.z}, 5.0, StepControl{}, {}, 1e-12, {});
    CHECK(res.reason == StopReason::End);
    CHECK(res.s == 5.0);
    const Point3 want = flow_X(p, p0, 5.0);
    CHECK(std::fabs(res.y[0] - want.x) <= 1e-8);
    CHECK(std::fabs(res.y[1] - want.y) <= 1e-8);
    CHECK(std::fabs(res.y[2] - want.z) <= 1e-8 * (1 + std::fabs(want.z)));
  }
}

TEST_CASE("integrate_to_event locates the plane") {
  const PiecewiseSystem sys{ParamSet::canonical()};
  SimConfig cfg;
  const ArcResult arc = integrate_to_event(sys, Mode::FieldY, {-2, -1, 0}, cfg);
  REQUIRE(arc.end == ArcEnd::HitSigma);
  REQUIRE(arc.event.has_value());
  CHECK(arc.event->t == doctest::Approx(oracle::gamma_y_t).epsilon(1e-9));
  CHECK(arc.event->point.x == doctest::Approx(oracle::gamma_y_x).epsilon(1e-9));
  CHECK(arc.event->point.y == doctest::Approx(oracle::gamma_y_y).epsilon(1e-9));
  CHECK(arc.arc.points.back().z == 0);
  CHECK_THROWS_AS(integrate_to_event(sys, Mode::FieldX, {0, 0, -1}, cfg), PreconditionError);
  CHECK_THROWS_AS(integrate_to_event(sys, Mode::Sliding, {0, 0, 0}, cfg), PreconditionError);
}

TEST_CASE("crossing path from a visible fold point") {
  const PiecewiseSystem sys{ParamSet::canonical()};
  SimConfig cfg;
  cfg.t_max = 7.5;
  const auto trajs = simulate(sys, {1, -1, 0}, cfg);
  REQUIRE(trajs.size() == 1);
  const HybridTrajectory& t = trajs[0];
  CHECK(t.boundary_approximation);
  CHECK(t.has_event(EventKind::TangencyHit));
  const auto cross = events_of(t, EventKind::CrossSigma);
  REQUIRE(cross.size() >= 2);
  CHECK(std::fabs(cross[0].t - 3.0) <= 1e-6);
  CHECK(std::fabs(cross[1].t - 7.0) <= 1e-6);
  CHECK(cross[0].point.x == doctest::Approx(-2).epsilon(1e-8));
  CHECK(cross[1].point.y == doctest::Approx(-9).epsilon(1e-8));
  CHECK(t.segments[0].mode == Mode::FieldX);
  CHECK(t.segments[1].mode == Mode::FieldY);
  CHECK(t.status == TerminalStatus::TimeLimit);
  CHECK(t.final_time() == doctest::Approx(7.5));
}

TEST_CASE("orbits from above reach the sliding region") {
  const PiecewiseSystem sys{ParamSet::canonical()};
  const auto trajs = simulate(sys, {1, -1, 0.01});
  REQUIRE_FALSE(trajs.empty());
  CHECK(trajs[0].has_event(EventKind::EnterSliding));
  bool has_s = false;
  for (const Segment& s : trajs[0].segments) has_s = has_s || s.mode == Mode::Sliding;
  CHECK(has_s);
}

TEST_CASE("sliding exits through the visible fold curve") {
  const PiecewiseSystem sys{ParamSet::canonical(-0.05)};
  const auto trajs = simulate(sys, {0.5, 0, 0});
  REQUIRE_FALSE(trajs.empty());
  const HybridTrajectory& t = trajs[0];
  CHECK(t.segments[0].mode == Mode::Sliding);
  const auto exits = events_of(t, EventKind::ExitSliding);
  REQUIRE_FALSE(exits.empty());
  const Point3 e = exits[0].point;
  CHECK(e.x > 0);
  CHECK(std::fabs(e.y + e.x * e.x) < 1e-8);

  const ArcResult s = slide(PiecewiseSystem{ParamSet::canonical()}, {1, 0, 0}, SimConfig{});
  CHECK(s.end == ArcEnd::SlidingBoundary);
  const Point3 q = s.arc.points.back();
  CHECK(std::fabs(q.y + q.x * q.x) < 1e-8);
  CHECK(q.x == doctest::Approx(0.733).epsilon(1e-2));
}

TEST_CASE("sliding settles on the pseudo-equilibrium") {
  const PiecewiseSystem sys{ParamSet::canonical(0.05)};
  const ArcResult s = slide(sys, {0.1, 0.05, 0}, SimConfig{});
  CHECK(s.end == ArcEnd::PseudoEquilibrium);
  CHECK(s.arc.points.back().norm() < 1e-6);
  CHECK_THROWS_AS(slide(sys, {-1, 0, 0}, SimConfig{}), PreconditionError);
}

TEST_CASE("escape splits") {
  const PiecewiseSystem sys{ParamSet::canonical()};
  SimConfig cfg;
  cfg.t_max = 1.0;
  const auto both = simulate(sys, {-1, -2, 0}, cfg);
  REQUIRE(both.size() == 2);
  CHECK(both[0].segments[0].mode == Mode::FieldX);
  CHECK(both[1].segments[0].mode == Mode::FieldY);
  CHECK(both[0].has_event(EventKind::EscapeSplit));

  cfg.escape_policy = EscapePolicy::BranchY;
  const auto y = simulate(sys, {-1, -2, 0}, cfg);
  REQUIRE(y.size() == 1);
  CHECK(y[0].segments[0].mode == Mode::FieldY);
  CHECK_FALSE(y[0].has_event(EventKind::EscapeSplit));
}

TEST_CASE("terminal statuses") {
  const PiecewiseSystem sys{ParamSet::canonical()};
  SimConfig cfg;

  const auto stuck = simulate(sys, {0, 0, 0}, cfg);
  REQUIRE(stuck.size() == 1);
  CHECK(stuck[0].status == TerminalStatus::StuckAtSingularPoint);

  cfg.ball_radius = 1.5;
  const auto out = simulate(sys, {1, -1, 0.01}, cfg);
  CHECK(out[0].status == TerminalStatus::DomainExit);
  CHECK(out[0].has_event(EventKind::DomainExit));
  CHECK_THROWS_AS(simulate(sys, {2, 0, 0}, cfg), PreconditionError);

  SimConfig zeno;
  zeno.max_events = 1;
  const auto z = simulate(sys, {1, -1, 0.01}, zeno);
  CHECK(z[0].status == TerminalStatus::ZenoGuard);
  CHECK(z[0].has_event(EventKind::ZenoGuard));

  SimConfig bad;
  bad.event_tol = 0;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  CHECK_THROWS_AS(simulate(sys, {1, 0, 1}, bad), PreconditionError);
}

TEST_CASE("trajectory CSV") {
  const PiecewiseSystem sys{ParamSet::canonical()};
  SimConfig cfg;
  cfg.t_max = 0;
  const auto t0 = simulate(sys, {1, -1, 0.01}, cfg);
  std::ostringstream a;
  write_trajectory_csv(a, t0[0]);
  const auto rows = lines(a.str());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "t,x,y,z,mode,event");
  CHECK(rows[1] == "0,1,-1,0.01,X,");

  cfg.t_max = 7.5;
  const auto t1 = simulate(sys, {1, -1, 0}, cfg);
  std::ostringstream b;
  write_trajectory_csv(b, t1[0]);
  const std::string csv = b.str();
  CHECK(csv.find(",X,TangencyHit") != std::string::npos);
  CHECK(csv.find(",Y,CrossSigma") != std::string::npos);

  CHECK(to_string(Mode::Sliding) == "SlidingMode");
  CHECK(mode_letter(Mode::Sliding) == "S");
  CHECK(to_string(EscapePolicy::Both) == "both");
}
