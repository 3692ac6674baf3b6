#include "psvf/hybrid.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "psvf/sliding.hpp"

namespace psvf {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::FieldX: return "FieldX";
    case Mode::FieldY: return "FieldY";
    case Mode::Sliding: return "SlidingMode";
  }
  return "?";
}

std::string_view mode_letter(Mode m) {
  switch (m) {
    case Mode::FieldX: return "X";
    case Mode::FieldY: return "Y";
    case Mode::Sliding: return "S";
  }
  return "?";
}

std::string_view to_string(EscapePolicy p) {
  switch (p) {
    case EscapePolicy::BranchX: return "x";
    case EscapePolicy::BranchY: return "y";
    case EscapePolicy::Both: return "both";
  }
  return "?";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::CrossSigma: return "CrossSigma";
    case EventKind::EnterSliding: return "EnterSliding";
    case EventKind::ExitSliding: return "ExitSliding";
    case EventKind::TangencyHit: return "TangencyHit";
    case EventKind::EscapeSplit: return "EscapeSplit";
    case EventKind::DomainExit: return "DomainExit";
    case EventKind::ZenoGuard: return "ZenoGuard";
  }
  return "?";
}

std::string_view to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::TimeLimit: return "TimeLimit";
    case TerminalStatus::DomainExit: return "DomainExit";
    case TerminalStatus::ZenoGuard: return "ZenoGuard";
    case TerminalStatus::PseudoEquilibrium: return "PseudoEquilibrium";
    case TerminalStatus::StuckAtSingularPoint: return "StuckAtSingularPoint";
    case TerminalStatus::StepUnderflow: return "StepUnderflow";
  }
  return "?";
}

void SimConfig::validate() const {
  const double positive[] = {ball_radius, step.rtol, step.atol, step.h_init,
                             step.h_min, step.h_max, event_tol, plane_tol,
                             region_tol, pe_tol};
  for (double v : positive) {
    if (!(v > 0.0)) throw PreconditionError("SimConfig: tolerances and radius must be positive");
  }
  if (!(t_max >= 0.0)) throw PreconditionError("SimConfig: t_max must be >= 0");
  if (max_events < 1) throw PreconditionError("SimConfig: max_events must be >= 1");
  if (max_branches < 1) throw PreconditionError("SimConfig: max_branches must be >= 1");
}

Point3 HybridTrajectory::final_point() const {
  return segments.back().points.back();
}

double HybridTrajectory::final_time() const { return segments.back().t1(); }

bool HybridTrajectory::has_event(EventKind kind) const {
  for (const auto& e : events) {
    if (e.kind == kind) return true;
  }
  return false;
}

namespace {

using S3 = State<3>;

double radius_of(const S3& s) {
  return std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
}

ArcResult slide_unchecked(const PiecewiseSystem& sys, const Point3& p0,
                          const SimConfig& cfg, double t0) {
  ArcResult out;
  out.arc.mode = Mode::Sliding;
  const double t_max = cfg.t_max;
  const double radius = cfg.ball_radius;

  // State (x, y, t) against a parameter s with dp/ds = Z^s / (1 + |g|) and
  // dt/ds = g / (1 + |g|), g = Y3 - X3. Regular where g vanishes.
  const Dopri5<3>::Rhs rhs = [&sys](const S3& s) -> S3 {
    const Point3 p(s[0], s[1], 0.0);
    const VectorValue x = sys.X(p);
    const VectorValue y = sys.Y(p);
    const double g = y.v3 - x.v3;
    const double w = 1.0 + std::fabs(g);
    return {(x.v1 * y.v3 - y.v1 * x.v3) / w, (x.v2 * y.v3 - y.v2 * x.v3) / w, g / w};
  };
  const std::vector<std::function<double(const S3&)>> events = {
      [&sys](const S3& s) { return sys.X(Point3(s[0], s[1], 0.0)).v3; },
      [&sys](const S3& s) { return -sys.Y(Point3(s[0], s[1], 0.0)).v3; },
      [t_max](const S3& s) { return s[2] - t_max; },
      [radius](const S3& s) { return std::hypot(s[0], s[1]) - radius; },
  };
  bool pseudo_eq = false;
  const std::function<bool(double, const S3&)> observe =
      [&](double, const S3& s) {
        const Point3 p(s[0], s[1], 0.0);
        out.arc.times.push_back(s[2]);
        out.arc.points.push_back(p);
        if (is_pseudo_equilibrium(sys, p, cfg.pe_tol)) pseudo_eq = true;
        return pseudo_eq || s[2] >= t_max;
      };
  const auto res = integrate<3>(rhs, {p0.x, p0.y, t0}, 1e9, cfg.step, events,
                                cfg.event_tol, observe);
  const Point3 end(res.y[0], res.y[1], 0.0);
  switch (res.reason) {
    case StopReason::Observer:
      out.end = pseudo_eq ? ArcEnd::PseudoEquilibrium : ArcEnd::TimeLimit;
      return out;
    case StopReason::End:
      out.end = ArcEnd::TimeLimit;
      return out;
    case StopReason::StepUnderflow:
      out.end = ArcEnd::StepUnderflow;
      return out;
    case StopReason::Event:
      break;
  }
  out.arc.times.push_back(res.y[2]);
  out.arc.points.push_back(end);
  if (res.event <= 1) {
    out.end = ArcEnd::SlidingBoundary;
    out.event = Event{res.y[2], end, EventKind::ExitSliding, 0};
  } else if (res.event == 2) {
    out.end = ArcEnd::TimeLimit;
  } else {
    out.end = ArcEnd::DomainExit;
    out.event = Event{res.y[2], end, EventKind::DomainExit, 0};
  }
  return out;
}

}  // namespace

ArcResult integrate_to_event(const PiecewiseSystem& sys, Mode field,
                             const Point3& p0, const SimConfig& cfg,
                             double t0) {
  if (field == Mode::Sliding) {
    throw PreconditionError("integrate_to_event: use slide for sliding motion");
  }
  const double side = field == Mode::FieldX ? 1.0 : -1.0;
  if (side * p0.z < 0.0) {
    throw PreconditionError("integrate_to_event: start point on the wrong side");
  }
  ArcResult out;
  out.arc.mode = field;
  const double radius = cfg.ball_radius;
  const Dopri5<3>::Rhs rhs = [&sys, field](const S3& s) -> S3 {
    const Point3 p(s[0], s[1], s[2]);
    const VectorValue v = field == Mode::FieldX ? sys.X(p) : sys.Y(p);
    return {v.v1, v.v2, v.v3};
  };
  const std::vector<std::function<double(const S3&)>> events = {
      [side](const S3& s) { return -side * s[2]; },
      [radius](const S3& s) { return radius_of(s) - radius; },
  };
  const std::function<bool(double, const S3&)> observe =
      [&](double s, const S3& y) {
        out.arc.times.push_back(t0 + s);
        out.arc.points.emplace_back(y[0], y[1], y[2]);
        return false;
      };
  const double span = std::fmax(0.0, cfg.t_max - t0);
  const auto res = integrate<3>(rhs, {p0.x, p0.y, p0.z}, span, cfg.step,
                                events, cfg.event_tol, observe);
  switch (res.reason) {
    case StopReason::End:
    case StopReason::Observer:
      out.end = ArcEnd::TimeLimit;
      return out;
    case StopReason::StepUnderflow:
      out.end = ArcEnd::StepUnderflow;
      return out;
    case StopReason::Event:
      break;
  }
  const double t = t0 + res.s;
  if (res.event == 0) {
    const Point3 hit(res.y[0], res.y[1], 0.0);
    out.arc.times.push_back(t);
    out.arc.points.push_back(hit);
    out.end = ArcEnd::HitSigma;
    out.event = Event{t, hit, EventKind::CrossSigma, 0};
  } else {
    const Point3 exit(res.y[0], res.y[1], res.y[2]);
    out.arc.times.push_back(t);
    out.arc.points.push_back(exit);
    out.end = ArcEnd::DomainExit;
    out.event = Event{t, exit, EventKind::DomainExit, 0};
  }
  return out;
}

ArcResult slide(const PiecewiseSystem& sys, const Point3& p0,
                const SimConfig& cfg, double t0) {
  if (std::fabs(p0.z) > cfg.region_tol ||
      classify_region(sys, p0, cfg.region_tol) != RegionLabel::Sliding) {
    throw PreconditionError("slide: start point is not in the sliding region");
  }
  return slide_unchecked(sys, Point3(p0.x, p0.y, 0.0), cfg, t0);
}

namespace {

struct Decision {
  std::vector<Mode> modes;
  bool tangential = false;
  bool stuck = false;
};

// Whether the field's orbit through a tangency point leaves the plane into
// the given side, judged by the first Lie derivative above threshold.
bool leaves_towards(const LieJet& jet, double threshold, double side) {
  for (std::size_t k = 1; k < 3; ++k) {
    if (std::fabs(jet[k]) > threshold) return side * jet[k] > 0.0;
  }
  return false;
}

std::vector<Mode> policy_modes(EscapePolicy p) {
  switch (p) {
    case EscapePolicy::BranchX: return {Mode::FieldX};
    case EscapePolicy::BranchY: return {Mode::FieldY};
    case EscapePolicy::Both: return {Mode::FieldX, Mode::FieldY};
  }
  return {Mode::FieldX};
}

Decision decide(const PiecewiseSystem& sys, const Point3& q,
                const SimConfig& cfg) {
  Decision d;
  switch (classify_region(sys, q, cfg.region_tol)) {
    case RegionLabel::CrossingPlus: d.modes = {Mode::FieldX}; return d;
    case RegionLabel::CrossingMinus: d.modes = {Mode::FieldY}; return d;
    case RegionLabel::Sliding: d.modes = {Mode::Sliding}; return d;
    case RegionLabel::Escaping: d.modes = policy_modes(cfg.escape_policy); return d;
    case RegionLabel::Tangential: break;
  }
  d.tangential = true;
  const VectorValue x = sys.X(q);
  const VectorValue y = sys.Y(q);
  const double thr_x = cfg.region_tol * (1.0 + x.norm_inf());
  const double thr_y = cfg.region_tol * (1.0 + y.norm_inf());
  const bool tx = std::fabs(x.v3) <= thr_x;
  const bool ty = std::fabs(y.v3) <= thr_y;
  if (tx && ty) {
    d.stuck = true;
    return d;
  }
  if (tx) {
    const bool up = leaves_towards(sys.lie_X(q), thr_x, 1.0);
    if (y.v3 > 0.0) {
      d.modes = {up ? Mode::FieldX : Mode::Sliding};
    } else {
      d.modes = up ? policy_modes(cfg.escape_policy) : std::vector<Mode>{Mode::FieldY};
    }
    return d;
  }
  const bool down = leaves_towards(sys.lie_Y(q), thr_y, -1.0);
  if (x.v3 < 0.0) {
    d.modes = {down ? Mode::FieldY : Mode::Sliding};
  } else {
    d.modes = down ? policy_modes(cfg.escape_policy) : std::vector<Mode>{Mode::FieldX};
  }
  return d;
}

struct Branch {
  HybridTrajectory traj;
  Point3 p;
  double t = 0.0;
  Mode mode = Mode::FieldX;
};

void add_event(HybridTrajectory& traj, double t, const Point3& p, EventKind k) {
  traj.events.push_back(Event{t, p, k, traj.segments.size()});
}

// Records the transition events for entering `next` at q. `prev` is empty at
// the start of the trajectory.
void note_transition(HybridTrajectory& traj, const Decision& d,
                     std::optional<Mode> prev, Mode next, double t,
                     const Point3& q) {
  if (d.tangential) {
    traj.boundary_approximation = true;
    add_event(traj, t, q, EventKind::TangencyHit);
  }
  if (d.modes.size() > 1) add_event(traj, t, q, EventKind::EscapeSplit);
  if (prev == Mode::Sliding && next != Mode::Sliding) {
    add_event(traj, t, q, EventKind::ExitSliding);
  } else if (next == Mode::Sliding && prev != Mode::Sliding) {
    add_event(traj, t, q, EventKind::EnterSliding);
  } else if (prev && *prev != next) {
    add_event(traj, t, q, EventKind::CrossSigma);
  }
}

}  // namespace

std::vector<HybridTrajectory> simulate(const PiecewiseSystem& sys,
                                       const Point3& p0,
                                       const SimConfig& cfg) {
  cfg.validate();
  if (p0.norm() > cfg.ball_radius) {
    throw PreconditionError("simulate: start point outside the domain ball");
  }
  std::vector<HybridTrajectory> done;
  std::vector<Branch> work;
  std::size_t branches = 1;

  // Forks `b` into one branch per decided mode.
  auto dispatch = [&](Branch b, const Decision& d, std::optional<Mode> prev) {
    std::vector<Mode> modes = d.modes;
    if (modes.size() > 1 && branches >= cfg.max_branches) modes.resize(1);
    branches += modes.size() - 1;
    for (std::size_t i = modes.size(); i-- > 0;) {
      Branch next = b;
      next.mode = modes[i];
      Decision shown = d;
      shown.modes = modes;
      note_transition(next.traj, shown, prev, modes[i], b.t, b.p);
      work.push_back(std::move(next));
    }
  };

  Branch start;
  start.t = 0.0;
  if (std::fabs(p0.z) > cfg.plane_tol) {
    start.p = p0;
    start.mode = p0.z > 0.0 ? Mode::FieldX : Mode::FieldY;
    work.push_back(start);
  } else {
    start.p = Point3(p0.x, p0.y, 0.0);
    const Decision d = decide(sys, start.p, cfg);
    if (d.stuck) {
      HybridTrajectory traj;
      traj.boundary_approximation = true;
      traj.segments.push_back(Segment{Mode::Sliding, {0.0}, {start.p}});
      traj.status = TerminalStatus::StuckAtSingularPoint;
      return {traj};
    }
    dispatch(start, d, std::nullopt);
  }

  while (!work.empty()) {
    Branch b = std::move(work.back());
    work.pop_back();
    bool forked = false;
    for (;;) {
      ArcResult arc = b.mode == Mode::Sliding
                          ? slide_unchecked(sys, b.p, cfg, b.t)
                          : integrate_to_event(sys, b.mode, b.p, cfg, b.t);
      b.traj.segments.push_back(std::move(arc.arc));
      const Segment& seg = b.traj.segments.back();
      const Point3 end = seg.points.back();
      const double t = seg.t1();
      bool finished = true;
      switch (arc.end) {
        case ArcEnd::TimeLimit: b.traj.status = TerminalStatus::TimeLimit; break;
        case ArcEnd::PseudoEquilibrium:
          b.traj.status = TerminalStatus::PseudoEquilibrium;
          break;
        case ArcEnd::StepUnderflow: b.traj.status = TerminalStatus::StepUnderflow; break;
        case ArcEnd::DomainExit:
          b.traj.events.push_back(
              Event{t, end, EventKind::DomainExit, b.traj.segments.size() - 1});
          b.traj.status = TerminalStatus::DomainExit;
          break;
        case ArcEnd::HitSigma:
        case ArcEnd::SlidingBoundary:
          finished = false;
          break;
      }
      if (finished) break;
      if (b.traj.events.size() >= cfg.max_events) {
        b.traj.events.push_back(
            Event{t, end, EventKind::ZenoGuard, b.traj.segments.size() - 1});
        b.traj.status = TerminalStatus::ZenoGuard;
        break;
      }
      const Decision d = decide(sys, end, cfg);
      if (d.stuck) {
        b.traj.boundary_approximation = true;
        b.traj.status = TerminalStatus::StuckAtSingularPoint;
        break;
      }
      const Mode prev = b.mode;
      b.p = end;
      b.t = t;
      if (d.modes.size() > 1) {
        dispatch(std::move(b), d, prev);
        forked = true;
        break;
      }
      b.mode = d.modes.front();
      note_transition(b.traj, d, prev, b.mode, t, end);
    }
    if (!forked) done.push_back(std::move(b.traj));
  }
  return done;
}

namespace {

bool terminal_kind(EventKind k) {
  return k == EventKind::DomainExit || k == EventKind::ZenoGuard;
}

void put_number(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const HybridTrajectory& traj) {
  out << "t,x,y,z,mode,event\n";
  const std::size_t last_seg = traj.segments.size() - 1;
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const Segment& seg = traj.segments[i];
    for (std::size_t j = 0; j < seg.points.size(); ++j) {
      std::string label;
      for (const Event& e : traj.events) {
        if (e.segment != i) continue;
        const bool at_end = terminal_kind(e.kind);
        const bool here = at_end ? (i == last_seg && j + 1 == seg.points.size())
                                 : j == 0;
        if (!here) continue;
        if (!label.empty()) label += ';';
        label += to_string(e.kind);
      }
      put_number(out, seg.times[j]);
      for (double v : {seg.points[j].x, seg.points[j].y, seg.points[j].z}) {
        out << ',';
        put_number(out, v);
      }
      out << ',' << mode_letter(seg.mode) << ',' << label << '\n';
    }
  }
}

}  // namespace psvf
