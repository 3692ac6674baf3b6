#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "psvf/hybrid.hpp"
#include "psvf/return_map.hpp"
#include "psvf/sliding.hpp"

namespace psvf {

/// Seeded mt19937_64 (its output sequence is fixed by the standard) with a
/// platform-independent mapping to doubles in [0, 1).
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed);
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  /// Uniform in the ball of the given radius (rejection from the cube).
  Point3 in_ball(double radius);

 private:
  std::mt19937_64 engine_;
};

struct SampleSpec {
  std::size_t count = 500;
  double radius = 0.2;
  std::uint64_t seed = 42;
};

/// Throws RegimeViolation unless a < 0, b < 0, c > 0, d < 0, bd > 0 and
/// a + bd > 0.
void require_regime(const ParamSet& params);
void require_lambda_zero(const ParamSet& params, std::string_view suite);

struct CurveImageReport {
  std::size_t samples = 0;
  double parabola_residual = 0.0;       // analytic map, y = -x^2 source
  double axis_residual = 0.0;           // analytic map, x = 0 source
  double parabola_sim_residual = 0.0;   // integrated flows
  double axis_sim_residual = 0.0;
  bool passed = false;
};

/// Images of {y = -x^2, 0 < x <= 0.5} and {x = 0, -0.5 <= y < 0} against
/// y = -x^2/4 + 2(d/c)x and y = -x^2/3 + 2(d/c)x. Requires lambda = 0.
CurveImageReport verify_curve_images(const ParamSet& params,
                                     std::size_t sample_count,
                                     std::uint64_t seed = 42,
                                     const SimConfig& config = {});

struct ContainmentReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  bool passed = false;
};

/// Samples {0 < x <= 0.5, -x^2 - 0.5 <= y < -x^2} and checks that each image
/// lies strictly between the two image curves. Requires lambda = 0.
ContainmentReport verify_strip_containment(const ParamSet& params,
                                           std::size_t sample_count,
                                           std::uint64_t seed = 42);

struct GrowthReport {
  Orbit orbit;
  bool monotone = true;
  bool reached_sliding = false;
  bool passed = false;
};

/// x_{n+1} > x_n along the return-map orbit of q0 until it reaches the
/// sliding closure. Requires lambda = 0 and q0 in the closure of
/// CrossingPlus.
GrowthReport verify_monotone_growth(const ParamSet& params, const Vec2& q0,
                                    std::size_t max_iter = 1000);

struct SampleRecord {
  std::size_t index = 0;
  Point3 start;
  Point3 end;           // first branch
  double end_time = 0.0;
  double end_distance = 0.0;   // largest over branches
  double max_distance = 0.0;   // largest distance seen along any branch
  TerminalStatus status = TerminalStatus::TimeLimit;
  std::size_t branches = 1;
  bool reached_sliding = false;
};

struct ReachReport {
  std::size_t samples = 0;
  std::size_t reached = 0;
  std::vector<SampleRecord> records;
  bool passed = false;
};

/// Simulates samples from the ball (every fifth projected onto the
/// switching plane) and checks that each one enters the closure of the
/// sliding region or stops at the origin. Requires lambda >= 0.
ReachReport verify_reach_sliding(const ParamSet& params, const SampleSpec& spec,
                                 const SimConfig& config = {});

enum class ReturnKind { SlidingExit, DomainExit, TimeLimit, None };

std::string_view to_string(ReturnKind k);

struct EscapeCertificate {
  double x0 = 0.0;
  Point3 p0;                  // on y = -x^2
  Point3 p1;                  // first-return image of p0
  Point3 p2;                  // where the orbit leaves the sliding region again
                              // (or its position at t_max if it never does)
  ReturnKind p2_kind = ReturnKind::None;
  std::size_t iterations = 0; // return-map steps from p1 to the sliding region
  Vec2 r_direction;           // (a x0, lambda x0) through p0
  double s_abscissa = 0.0;    // vertical line x = x1
  Point3 p3;                  // r meets s
  bool below_r = false;       // y1 < y3, p1 in the lower region
  double d0 = 0.0;
  double d2 = 0.0;
  bool valid = false;
};

/// Builds the escape construction from p0 = (x0, -x0^2, 0): p1 from the
/// closed-form return map, the return-map orbit of p1 until it reaches the
/// sliding closure, then the slide back to the tangency curve. Throws
/// CertificateFailed when lambda >= 0 or either inequality fails.
EscapeCertificate escape_certificate(const ParamSet& params, double x0,
                                     const SimConfig& config = {});

/// Distance of the first sliding exit when simulating directly from p0.
/// Empty if the trajectory never leaves the sliding region.
std::optional<double> simulated_escape_distance(const ParamSet& params,
                                                double x0,
                                                const SimConfig& config = {});

enum class Verdict { AsymptoticallyStable, NotLyapunovStable, Inconclusive };

std::string_view to_string(Verdict v);

struct StabilityVerdict {
  Verdict verdict = Verdict::Inconclusive;
  ParamSet params = ParamSet::canonical();
  SampleSpec spec;
  double dist_tol = 1e-3;
  std::vector<SampleRecord> samples;
  std::size_t reached_sliding = 0;
  std::size_t converged = 0;
  std::size_t escaped = 0;
  std::optional<EscapeCertificate> certificate;
  std::optional<double> simulated_d2;
  std::string reason;
};

/// lambda >= 0: every sample must reach the sliding closure and end within
/// dist_tol of the origin by t_max. lambda < 0: a valid escape certificate
/// at x0 = radius / 2 confirmed by direct simulation, or a sample ending
/// outside the sampling ball. Throws RegimeViolation outside the regime.
StabilityVerdict classify_stability(const ParamSet& params,
                                    const SampleSpec& spec = {},
                                    const SimConfig& config = {},
                                    double dist_tol = 1e-3);

struct GridPoint {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double lambda = 0.0;

  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

struct SweepRow {
  GridPoint key;
  std::optional<Verdict> verdict;
  std::string error;            // set when the cell failed
  std::optional<SlidingEigen> sliding;
  std::string sliding_error;
  std::optional<ReturnMapEigen> return_map;
  std::string return_map_error;
  std::size_t converged = 0;
  std::size_t escaped = 0;
};

SweepRow sweep_cell(const GridPoint& key, const SampleSpec& spec,
                    const SimConfig& config);

/// Evaluates every grid point; rows are sorted by key. `sink`, when given,
/// receives each row as soon as it is computed.
std::vector<SweepRow> sweep(std::vector<GridPoint> grid, const SampleSpec& spec,
                            const SimConfig& config,
                            const std::function<void(const SweepRow&)>& sink = {});

/// FNV-1a over a canonical text rendering of the configuration.
std::uint64_t config_digest(const SimConfig& config, const SampleSpec& spec);

}  // namespace psvf
