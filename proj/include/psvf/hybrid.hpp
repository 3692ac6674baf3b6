#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "psvf/core.hpp"
#include "psvf/integrator.hpp"

namespace psvf {

enum class Mode { FieldX, FieldY, Sliding };
enum class EscapePolicy { BranchX, BranchY, Both };
enum class EventKind {
  CrossSigma,
  EnterSliding,
  ExitSliding,
  TangencyHit,
  EscapeSplit,
  DomainExit,
  ZenoGuard
};
enum class TerminalStatus {
  TimeLimit,
  DomainExit,
  ZenoGuard,
  PseudoEquilibrium,
  StuckAtSingularPoint,
  StepUnderflow
};

std::string_view to_string(Mode m);
std::string_view to_string(EscapePolicy p);
std::string_view to_string(EventKind k);
std::string_view to_string(TerminalStatus s);
/// "X", "Y" or "S".
std::string_view mode_letter(Mode m);

struct SimConfig {
  double t_max = 200.0;
  /// Domain guard: trajectories leaving this ball around the origin stop.
  double ball_radius = 1e3;
  StepControl step;
  double event_tol = 1e-12;
  std::size_t max_events = 100000;
  EscapePolicy escape_policy = EscapePolicy::Both;
  /// |z| at or below this counts as on the switching plane.
  double plane_tol = 1e-12;
  /// Tangency tolerance handed to classify_region / classify_tangency.
  double region_tol = 1e-9;
  /// Sliding stops as a pseudo-equilibrium once |Z^s|_inf drops below this.
  double pe_tol = 1e-10;
  /// Escape splits beyond this many branches follow FieldX only.
  std::size_t max_branches = 64;

  /// Throws PreconditionError on non-positive tolerances or max_events == 0.
  void validate() const;
};

struct Segment {
  Mode mode = Mode::FieldX;
  std::vector<double> times;
  std::vector<Point3> points;

  double t0() const { return times.front(); }
  double t1() const { return times.back(); }
};

struct Event {
  double t = 0.0;
  Point3 point;
  EventKind kind = EventKind::CrossSigma;
  std::size_t segment = 0;  // segment that starts here (last one for terminal events)
};

struct HybridTrajectory {
  std::vector<Segment> segments;
  std::vector<Event> events;
  TerminalStatus status = TerminalStatus::TimeLimit;
  /// Set when a mode was chosen at a tangency point from one-sided Lie
  /// derivative signs rather than from a strict region label.
  bool boundary_approximation = false;

  Point3 final_point() const;
  double final_time() const;
  bool has_event(EventKind kind) const;
};

enum class ArcEnd { HitSigma, SlidingBoundary, TimeLimit, DomainExit, PseudoEquilibrium, StepUnderflow };

struct ArcResult {
  Segment arc;
  std::optional<Event> event;
  ArcEnd end = ArcEnd::TimeLimit;
};

/// Follows X (z >= 0) or Y (z <= 0) from p0 until the orbit reaches the
/// switching plane (event time bisected to event_tol, z snapped to 0), the
/// time limit, or the domain guard. `t0` offsets the recorded times.
ArcResult integrate_to_event(const PiecewiseSystem& sys, Mode field,
                             const Point3& p0, const SimConfig& config,
                             double t0 = 0.0);

/// Slides along the normalized sliding field inside the sliding region until
/// a tangency curve, a pseudo-equilibrium, the time limit or the domain
/// guard. Throws PreconditionError unless p0 is classified Sliding.
ArcResult slide(const PiecewiseSystem& sys, const Point3& p0,
                const SimConfig& config, double t0 = 0.0);

/// Filippov forward trajectory from p0. Returns one trajectory, or one per
/// branch when an escaping point is met under EscapePolicy::Both. Throws
/// PreconditionError when p0 lies outside the domain ball.
std::vector<HybridTrajectory> simulate(const PiecewiseSystem& sys,
                                       const Point3& p0,
                                       const SimConfig& config = {});

/// CSV with header t,x,y,z,mode,event. Events sharing a row are joined by ';'.
void write_trajectory_csv(std::ostream& out, const HybridTrajectory& traj);

}  // namespace psvf
