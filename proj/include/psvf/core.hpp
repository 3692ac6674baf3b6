#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psvf/system_spec.hpp"
#include "psvf/types.hpp"

namespace psvf {

/// Parameters (a, b, c, d, lambda) of the cusp-fold normal form
///
///   X = (a, lambda, b (y + x^2))  on z >= 0,
///   Y = (c, d, x)                 on z <= 0.
struct ParamSet {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double lambda = 0.0;

  /// Throws RegimeViolation when b*c == 0 or a value is not finite.
  ParamSet(double a_, double b_, double c_, double d_, double lambda_);

  /// (a, b, c, d) = (-1, -1, 1, -2).
  static ParamSet canonical(double lambda = 0.0);

  ParamSet with_lambda(double l) const { return {a, b, c, d, l}; }

  /// a < 0, b < 0, c > 0, d < 0, b d > 0 and a + b d > 0.
  bool satisfies_H1_to_H4() const;

  /// Names of the violated inequalities, empty inside the regime.
  std::vector<std::string> regime_violations() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

VectorValue eval_normal_form_X(const ParamSet& params, const Point3& p);
VectorValue eval_normal_form_Y(const ParamSet& params, const Point3& p);

enum class RegionLabel { CrossingPlus, CrossingMinus, Sliding, Escaping, Tangential };

enum class Contact { Transversal, FoldVisible, FoldInvisible, Cusp, HigherOrder };

enum class CombinedTangency { None, Fold, TwoFold, CuspFold, Other };

struct TangencyClass {
  Contact x = Contact::Transversal;
  Contact y = Contact::Transversal;
  CombinedTangency combined = CombinedTangency::None;
};

std::string_view to_string(RegionLabel r);
std::string_view to_string(Contact c);
std::string_view to_string(CombinedTangency c);

bool is_fold(Contact c);

/// Lie derivatives L_F z, L_F^2 z, L_F^3 z of the height function along F.
using LieJet = std::array<double, 3>;

/// A two-zone piecewise smooth system switching on z = 0. Either the built-in
/// normal form (closed forms everywhere) or fields parsed from a SystemSpec
/// (Lie derivatives by symbolic differentiation). Cheap to copy; immutable.
class PiecewiseSystem {
 public:
  explicit PiecewiseSystem(const ParamSet& params);
  explicit PiecewiseSystem(const SystemSpec& spec);

  VectorValue X(const Point3& p) const;
  VectorValue Y(const Point3& p) const;
  LieJet lie_X(const Point3& p) const;
  LieJet lie_Y(const Point3& p) const;

  /// Set for the built-in normal form, empty for parsed systems.
  const std::optional<ParamSet>& normal_form() const { return params_; }

 private:
  struct Parsed;
  std::optional<ParamSet> params_;
  std::shared_ptr<const Parsed> parsed_;
};

/// Label of a non-tangential sign pair (X3, Y3).
RegionLabel region_from_signs(double x3, double y3);

/// Filippov region of a point of the switching plane. A field counts as
/// tangent when |F3| <= tol * (1 + |F(p)|_inf). Throws PreconditionError
/// when |p.z| > tol.
RegionLabel classify_region(const PiecewiseSystem& sys, const Point3& p,
                            double tol = 1e-9);

/// Contact order of each field with the switching plane, and the combined
/// singularity label. Fold visibility: X visible iff L_X^2 z > 0, Y visible
/// iff L_Y^2 z < 0.
TangencyClass classify_tangency(const PiecewiseSystem& sys, const Point3& p,
                                double tol = 1e-9);

Contact classify_contact_X(const LieJet& jet, double threshold);
Contact classify_contact_Y(const LieJet& jet, double threshold);
CombinedTangency combine(Contact x, Contact y);

/// Line through the origin of the switching plane: y = slope * x, or x = 0
/// when vertical.
struct PlanarLine {
  bool vertical = false;
  double slope = 0.0;

  static PlanarLine through(const Vec2& direction);
  /// Point of the line with abscissa x (ordinate h for a vertical line).
  Vec2 at(double h) const;
};

/// Region labels of a line sampled on both sides of the origin.
struct LineLocation {
  RegionLabel positive = RegionLabel::Tangential;  // x > 0 (y > 0 if vertical)
  RegionLabel negative = RegionLabel::Tangential;

  bool crossing() const;               // both sides in CrossingPlus/Minus
  bool sliding_or_escaping() const;    // both sides in Sliding/Escaping
};

/// Samples `line` at distance min(1e-3, |slope|/10) from the origin, so that
/// the sign of y + x^2 along a line of small slope is still decided by the
/// linear term.
LineLocation locate_line(const PiecewiseSystem& sys, const PlanarLine& line);

}  // namespace psvf
