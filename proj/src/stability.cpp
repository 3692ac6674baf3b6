#include "psvf/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace psvf {

SampleRng::SampleRng(std::uint64_t seed) : engine_(seed) {}

double SampleRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SampleRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

Point3 SampleRng::in_ball(double radius) {
  for (;;) {
    const double x = uniform(-radius, radius);
    const double y = uniform(-radius, radius);
    const double z = uniform(-radius, radius);
    if (x * x + y * y + z * z <= radius * radius) return {x, y, z};
  }
}

void require_regime(const ParamSet& params) {
  const auto bad = params.regime_violations();
  if (bad.empty()) return;
  std::string msg = "parameters outside the stability regime: violated";
  for (const auto& b : bad) msg += " [" + b + "]";
  throw RegimeViolation(msg);
}

void require_lambda_zero(const ParamSet& params, std::string_view suite) {
  if (params.lambda != 0.0) {
    throw PreconditionError("suite " + std::string(suite) + " requires lambda = 0");
  }
}

namespace {

double image_curve(const ParamSet& k, double x, double quad) {
  return -quad * x * x + 2.0 * (k.d / k.c) * x;
}

// gamma_Y(gamma_X(p)) by numerical integration of both half-systems.
Vec2 simulated_return(const PiecewiseSystem& sys, const Point3& p,
                      const SimConfig& cfg) {
  const ArcResult up = integrate_to_event(sys, Mode::FieldX, p, cfg);
  if (up.end != ArcEnd::HitSigma) throw NoReturn("X arc did not return");
  const ArcResult down =
      integrate_to_event(sys, Mode::FieldY, up.arc.points.back(), cfg);
  if (down.end != ArcEnd::HitSigma) throw NoReturn("Y arc did not return");
  return planar(down.arc.points.back());
}

}  // namespace

CurveImageReport verify_curve_images(const ParamSet& params,
                                     std::size_t sample_count,
                                     std::uint64_t seed,
                                     const SimConfig& config) {
  require_regime(params);
  require_lambda_zero(params, "curve-images");
  const PiecewiseSystem sys(params);
  SampleRng rng(seed);
  CurveImageReport out;
  out.samples = sample_count;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const double x0 = 0.5 * (1.0 - rng.uniform());
    const Vec2 q{x0, -x0 * x0};
    const Vec2 img = return_map_image(params, q);
    out.parabola_residual = std::fmax(
        out.parabola_residual, std::fabs(img.y - image_curve(params, img.x, 0.25)));
    const Vec2 sim = simulated_return(sys, on_sigma(q), config);
    out.parabola_sim_residual = std::fmax(
        out.parabola_sim_residual, std::fabs(sim.y - image_curve(params, sim.x, 0.25)));

    const double y0 = -0.5 * (1.0 - rng.uniform());
    const Vec2 r{0.0, y0};
    const Vec2 img2 = return_map_image(params, r);
    out.axis_residual = std::fmax(
        out.axis_residual, std::fabs(img2.y - image_curve(params, img2.x, 1.0 / 3.0)));
    const Vec2 sim2 = simulated_return(sys, on_sigma(r), config);
    out.axis_sim_residual = std::fmax(
        out.axis_sim_residual, std::fabs(sim2.y - image_curve(params, sim2.x, 1.0 / 3.0)));
  }
  out.passed = out.parabola_residual <= 1e-12 && out.axis_residual <= 1e-12 &&
               out.parabola_sim_residual <= 1e-6 && out.axis_sim_residual <= 1e-6;
  return out;
}

ContainmentReport verify_strip_containment(const ParamSet& params,
                                           std::size_t sample_count,
                                           std::uint64_t seed) {
  require_regime(params);
  require_lambda_zero(params, "strip-containment");
  SampleRng rng(seed);
  ContainmentReport out;
  out.samples = sample_count;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const double x = 0.5 * (1.0 - rng.uniform());
    const double y = -x * x - 0.5 * (1.0 - rng.uniform());
    const Vec2 img = return_map_image(params, {x, y});
    const double c4 = image_curve(params, img.x, 0.25);
    const double c3 = image_curve(params, img.x, 1.0 / 3.0);
    const bool inside =
        img.x > 0.0 && img.y > std::fmin(c3, c4) && img.y < std::fmax(c3, c4);
    if (!inside) ++out.violations;
  }
  out.passed = out.violations == 0;
  return out;
}

GrowthReport verify_monotone_growth(const ParamSet& params, const Vec2& q0,
                                    std::size_t max_iter) {
  require_regime(params);
  require_lambda_zero(params, "monotone-growth");
  const double tol = 1e-12 * (1.0 + q0.x * q0.x + std::fabs(q0.y));
  if (q0.x < 0.0 || params.b * (q0.y + q0.x * q0.x) < -tol) {
    throw PreconditionError("monotone growth: start point outside the closure of CrossingPlus");
  }
  GrowthReport out;
  OrbitOptions opts;
  opts.max_iter = max_iter;
  out.orbit = iterate_return_map(params, q0, opts);
  for (std::size_t n = 1; n < out.orbit.points.size(); ++n) {
    if (!(out.orbit.points[n].x > out.orbit.points[n - 1].x)) out.monotone = false;
  }
  out.reached_sliding = out.orbit.status == OrbitStatus::ReachedSliding;
  out.passed = out.monotone;
  return out;
}

namespace {

SampleRecord run_sample(const PiecewiseSystem& sys, std::size_t index,
                        const Point3& start, const SimConfig& config) {
  SampleRecord rec;
  rec.index = index;
  rec.start = start;
  const auto branches = simulate(sys, start, config);
  rec.branches = branches.size();
  rec.end = branches.front().final_point();
  rec.end_time = branches.front().final_time();
  rec.status = branches.front().status;
  for (const auto& b : branches) {
    rec.end_distance = std::fmax(rec.end_distance, b.final_point().norm());
    for (const auto& seg : b.segments) {
      for (const auto& p : seg.points) rec.max_distance = std::fmax(rec.max_distance, p.norm());
    }
    if (b.has_event(EventKind::EnterSliding)) rec.reached_sliding = true;
    // An abnormal end on any branch is the one worth reporting.
    if (b.status == TerminalStatus::ZenoGuard || b.status == TerminalStatus::StepUnderflow) {
      rec.status = b.status;
    }
  }
  return rec;
}

std::vector<Point3> sample_points(const SampleSpec& spec) {
  SampleRng rng(spec.seed);
  std::vector<Point3> pts;
  pts.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    Point3 p = rng.in_ball(spec.radius);
    if (i % 5 == 0) p.z = 0.0;
    pts.push_back(p);
  }
  return pts;
}

bool abnormal(TerminalStatus s) {
  return s == TerminalStatus::ZenoGuard || s == TerminalStatus::StepUnderflow;
}

bool at_origin(const SampleRecord& r) {
  return r.status == TerminalStatus::StuckAtSingularPoint || r.end_distance <= 1e-6;
}

}  // namespace

ReachReport verify_reach_sliding(const ParamSet& params, const SampleSpec& spec,
                                 const SimConfig& config) {
  require_regime(params);
  if (params.lambda < 0.0) {
    throw PreconditionError("reach-sliding requires lambda >= 0");
  }
  const PiecewiseSystem sys(params);
  ReachReport out;
  const auto pts = sample_points(spec);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    SampleRecord rec = run_sample(sys, i, pts[i], config);
    if ((rec.reached_sliding || at_origin(rec)) && !abnormal(rec.status)) ++out.reached;
    out.records.push_back(rec);
  }
  out.samples = pts.size();
  out.passed = out.reached == out.samples;
  return out;
}

std::string_view to_string(ReturnKind k) {
  switch (k) {
    case ReturnKind::SlidingExit: return "SlidingExit";
    case ReturnKind::DomainExit: return "DomainExit";
    case ReturnKind::TimeLimit: return "TimeLimit";
    case ReturnKind::None: return "None";
  }
  return "?";
}

namespace {

// First sliding exit (or domain exit) along a simulated trajectory.
std::optional<std::pair<Point3, ReturnKind>> first_exit(
    const std::vector<HybridTrajectory>& branches) {
  const HybridTrajectory& t = branches.front();
  bool sliding = false;
  for (const Event& e : t.events) {
    if (e.kind == EventKind::EnterSliding) sliding = true;
    if (e.kind == EventKind::ExitSliding && sliding) {
      return std::pair{e.point, ReturnKind::SlidingExit};
    }
    if (e.kind == EventKind::DomainExit) return std::pair{e.point, ReturnKind::DomainExit};
  }
  return std::nullopt;
}

}  // namespace

EscapeCertificate escape_certificate(const ParamSet& params, double x0,
                                     const SimConfig& config) {
  require_regime(params);
  if (!(params.lambda < 0.0)) {
    throw CertificateFailed("escape certificate requires lambda < 0");
  }
  if (!(x0 > 0.0)) throw PreconditionError("escape certificate requires x0 > 0");
  EscapeCertificate cert;
  cert.x0 = x0;
  cert.p0 = Point3(x0, -x0 * x0, 0.0);
  const Vec2 q1 = first_return_map(params, planar(cert.p0)).image;
  cert.p1 = on_sigma(q1);
  cert.r_direction = {params.a * x0, params.lambda * x0};
  cert.s_abscissa = q1.x;
  const double mu = (q1.x - x0) / cert.r_direction.x;
  cert.p3 = Point3(q1.x, -x0 * x0 + mu * cert.r_direction.y, 0.0);
  cert.below_r = q1.y < cert.p3.y;

  const PiecewiseSystem sys(params);
  Vec2 q = q1;
  if (!in_sliding_closure(params, q1)) {
    OrbitOptions opts;
    opts.radius = config.ball_radius;
    const Orbit orbit = iterate_return_map(params, q1, opts);
    cert.iterations = orbit.points.size() - 1;
    q = orbit.points.back();
    if (orbit.status == OrbitStatus::LeftRadius) {
      cert.p2 = on_sigma(q);
      cert.p2_kind = ReturnKind::DomainExit;
    } else if (orbit.status != OrbitStatus::ReachedSliding) {
      throw CertificateFailed("return-map orbit of p1 ended with status " +
                              std::string(to_string(orbit.status)));
    }
  }
  if (cert.p2_kind == ReturnKind::None) {
    const Point3 start = on_sigma(q);
    if (classify_region(sys, start, config.region_tol) == RegionLabel::Sliding) {
      const ArcResult arc = slide(sys, start, config);
      cert.p2 = arc.arc.points.back();
      if (arc.end == ArcEnd::SlidingBoundary) cert.p2_kind = ReturnKind::SlidingExit;
      if (arc.end == ArcEnd::DomainExit) cert.p2_kind = ReturnKind::DomainExit;
      if (arc.end == ArcEnd::TimeLimit) cert.p2_kind = ReturnKind::TimeLimit;
    } else if (auto hit = first_exit(simulate(sys, start, config))) {
      cert.p2 = hit->first;
      cert.p2_kind = hit->second;
    }
  }
  cert.d0 = cert.p0.norm();
  cert.d2 = cert.p2.norm();
  if (cert.p2_kind == ReturnKind::None) {
    throw CertificateFailed("the slide from p1's orbit never leaves the sliding region");
  }
  if (!cert.below_r) throw CertificateFailed("y1 < y3 violated: p1 is not below the line r");
  if (!(cert.d2 > cert.d0)) throw CertificateFailed("d(p2,0) > d(p0,0) violated");
  cert.valid = true;
  return cert;
}

std::optional<double> simulated_escape_distance(const ParamSet& params,
                                                double x0,
                                                const SimConfig& config) {
  const PiecewiseSystem sys(params);
  const auto hit = first_exit(simulate(sys, Point3(x0, -x0 * x0, 0.0), config));
  if (!hit) return std::nullopt;
  return hit->first.norm();
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::AsymptoticallyStable: return "AsymptoticallyStable";
    case Verdict::NotLyapunovStable: return "NotLyapunovStable";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

StabilityVerdict classify_stability(const ParamSet& params,
                                    const SampleSpec& spec,
                                    const SimConfig& config, double dist_tol) {
  require_regime(params);
  StabilityVerdict out;
  out.params = params;
  out.spec = spec;
  out.dist_tol = dist_tol;
  const PiecewiseSystem sys(params);
  const auto pts = sample_points(spec);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    SampleRecord rec = run_sample(sys, i, pts[i], config);
    if (rec.reached_sliding || at_origin(rec)) ++out.reached_sliding;
    if (!abnormal(rec.status) && rec.end_distance <= dist_tol &&
        rec.end_time <= config.t_max) {
      ++out.converged;
    }
    if (rec.end_distance > spec.radius) ++out.escaped;
    out.samples.push_back(rec);
  }
  char buf[160];
  if (params.lambda >= 0.0) {
    if (out.reached_sliding == pts.size() && out.converged == pts.size()) {
      out.verdict = Verdict::AsymptoticallyStable;
      out.reason = "every sample reached the sliding region and converged";
    } else {
      std::snprintf(buf, sizeof buf,
                    "%zu/%zu samples reached sliding, %zu/%zu ended within %g of the origin",
                    out.reached_sliding, pts.size(), out.converged, pts.size(), dist_tol);
      out.reason = buf;
    }
    return out;
  }
  try {
    out.certificate = escape_certificate(params, spec.radius / 2.0, config);
    out.simulated_d2 = simulated_escape_distance(params, spec.radius / 2.0, config);
  } catch (const CertificateFailed& e) {
    out.reason = std::string("certificate failed: ") + e.what();
  }
  if (out.certificate && out.simulated_d2 &&
      *out.simulated_d2 - out.certificate->d0 > 1e-6) {
    out.verdict = Verdict::NotLyapunovStable;
    std::snprintf(buf, sizeof buf,
                  "escape certificate at x0 = %g: d(p2,0) = %.9g > d(p0,0) = %.9g",
                  out.certificate->x0, out.certificate->d2, out.certificate->d0);
    out.reason = buf;
  } else if (out.escaped > 0) {
    out.verdict = Verdict::NotLyapunovStable;
    std::snprintf(buf, sizeof buf, "%zu/%zu samples ended outside the sampling ball",
                  out.escaped, pts.size());
    out.reason = buf;
  } else if (out.reason.empty()) {
    out.reason = "no certified or simulated escape";
  }
  return out;
}

SweepRow sweep_cell(const GridPoint& key, const SampleSpec& spec,
                    const SimConfig& config) {
  SweepRow row;
  row.key = key;
  std::optional<ParamSet> params;
  try {
    params.emplace(key.a, key.b, key.c, key.d, key.lambda);
  } catch (const Error& e) {
    row.error = error_kind(e) + ": " + e.what();
    return row;
  }
  try {
    row.sliding = sliding_eigen_origin(*params);
  } catch (const Error& e) {
    row.sliding_error = error_kind(e);
  }
  try {
    row.return_map = return_map_eigen_origin(*params);
  } catch (const Error& e) {
    row.return_map_error = error_kind(e);
  }
  try {
    const StabilityVerdict v = classify_stability(*params, spec, config);
    row.verdict = v.verdict;
    row.converged = v.converged;
    row.escaped = v.escaped;
  } catch (const Error& e) {
    row.error = error_kind(e) + ": " + e.what();
  }
  return row;
}

std::vector<SweepRow> sweep(std::vector<GridPoint> grid, const SampleSpec& spec,
                            const SimConfig& config,
                            const std::function<void(const SweepRow&)>& sink) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const GridPoint& key : grid) {
    rows.push_back(sweep_cell(key, spec, config));
    if (sink) sink(rows.back());
  }
  return rows;
}

std::uint64_t config_digest(const SimConfig& c, const SampleSpec& s) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "t_max=%.17g;ball_radius=%.17g;rtol=%.17g;atol=%.17g;h_init=%.17g;"
                "h_min=%.17g;h_max=%.17g;event_tol=%.17g;max_events=%zu;"
                "escape_policy=%s;plane_tol=%.17g;region_tol=%.17g;pe_tol=%.17g;"
                "max_branches=%zu;count=%zu;radius=%.17g;seed=%llu",
                c.t_max, c.ball_radius, c.step.rtol, c.step.atol, c.step.h_init,
                c.step.h_min, c.step.h_max, c.event_tol, c.max_events,
                std::string(to_string(c.escape_policy)).c_str(), c.plane_tol,
                c.region_tol, c.pe_tol, c.max_branches, s.count, s.radius,
                static_cast<unsigned long long>(s.seed));
  std::uint64_t h = 1469598103934665603ULL;
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace psvf
