#include "psvf/core.hpp"

#include <cmath>

namespace psvf {

ParamSet::ParamSet(double a_, double b_, double c_, double d_, double lambda_)
    : a(a_), b(b_), c(c_), d(d_), lambda(lambda_) {
  for (double v : {a, b, c, d, lambda}) {
    if (!std::isfinite(v)) throw RegimeViolation("parameters must be finite");
  }
  if (b * c == 0.0) throw RegimeViolation("normal form requires b*c != 0");
}

ParamSet ParamSet::canonical(double lambda) {
  return {-1.0, -1.0, 1.0, -2.0, lambda};
}

std::vector<std::string> ParamSet::regime_violations() const {
  std::vector<std::string> out;
  if (!(a < 0.0)) out.emplace_back("a < 0");
  if (!(b < 0.0)) out.emplace_back("b < 0");
  if (!(c > 0.0)) out.emplace_back("c > 0");
  if (!(d < 0.0)) out.emplace_back("d < 0");
  if (!(b * d > 0.0)) out.emplace_back("b*d > 0");
  if (!(a + b * d > 0.0)) out.emplace_back("a + b*d > 0");
  return out;
}

bool ParamSet::satisfies_H1_to_H4() const { return regime_violations().empty(); }

VectorValue eval_normal_form_X(const ParamSet& params, const Point3& p) {
  return {params.a, params.lambda, params.b * (p.y + p.x * p.x)};
}

VectorValue eval_normal_form_Y(const ParamSet& params, const Point3& p) {
  return {params.c, params.d, p.x};
}

std::string_view to_string(RegionLabel r) {
  switch (r) {
    case RegionLabel::CrossingPlus: return "CrossingPlus";
    case RegionLabel::CrossingMinus: return "CrossingMinus";
    case RegionLabel::Sliding: return "Sliding";
    case RegionLabel::Escaping: return "Escaping";
    case RegionLabel::Tangential: return "Tangential";
  }
  return "?";
}

std::string_view to_string(Contact c) {
  switch (c) {
    case Contact::Transversal: return "Transversal";
    case Contact::FoldVisible: return "FoldVisible";
    case Contact::FoldInvisible: return "FoldInvisible";
    case Contact::Cusp: return "Cusp";
    case Contact::HigherOrder: return "HigherOrder";
  }
  return "?";
}

std::string_view to_string(CombinedTangency c) {
  switch (c) {
    case CombinedTangency::None: return "None";
    case CombinedTangency::Fold: return "Fold";
    case CombinedTangency::TwoFold: return "TwoFold";
    case CombinedTangency::CuspFold: return "CuspFold";
    case CombinedTangency::Other: return "Other";
  }
  return "?";
}

bool is_fold(Contact c) {
  return c == Contact::FoldVisible || c == Contact::FoldInvisible;
}

// ---------------------------------------------------------------------------

struct PiecewiseSystem::Parsed {
  FieldExprs x;
  FieldExprs y;
  std::array<Expr, 3> lie_x;
  std::array<Expr, 3> lie_y;
};

namespace {

// L_F g = grad(g) . F, built symbolically.
Expr lie_derivative(const Expr& g, const FieldExprs& f) {
  static constexpr Variable vars[] = {Variable::X, Variable::Y, Variable::Z};
  Expr sum = Expr::literal(0.0);
  bool first = true;
  for (int i = 0; i < 3; ++i) {
    Expr dg = diff_expr(g, vars[i]);
    if (dg.is_literal(0.0)) continue;
    Expr term = dg.is_literal(1.0) ? f[i] : Expr::binary(BinaryOp::Mul, dg, f[i]);
    sum = first ? term : Expr::binary(BinaryOp::Add, sum, term);
    first = false;
  }
  return sum;
}

std::array<Expr, 3> lie_jet(const FieldExprs& f) {
  std::array<Expr, 3> jet;
  jet[0] = f[2];
  jet[1] = lie_derivative(jet[0], f);
  jet[2] = lie_derivative(jet[1], f);
  return jet;
}

VectorValue eval_field(const FieldExprs& f, const Point3& p) {
  return {eval_expr(f[0], p), eval_expr(f[1], p), eval_expr(f[2], p)};
}

LieJet eval_jet(const std::array<Expr, 3>& jet, const Point3& p) {
  return {eval_expr(jet[0], p), eval_expr(jet[1], p), eval_expr(jet[2], p)};
}

}  // namespace

PiecewiseSystem::PiecewiseSystem(const ParamSet& params) : params_(params) {}

PiecewiseSystem::PiecewiseSystem(const SystemSpec& spec) {
  auto parsed = std::make_shared<Parsed>();
  for (std::size_t i = 0; i < 3; ++i) {
    parsed->x[i] = bind_parameters(spec.field_x[i], spec.params);
    parsed->y[i] = bind_parameters(spec.field_y[i], spec.params);
  }
  parsed->lie_x = lie_jet(parsed->x);
  parsed->lie_y = lie_jet(parsed->y);
  parsed_ = std::move(parsed);
}

VectorValue PiecewiseSystem::X(const Point3& p) const {
  if (params_) return eval_normal_form_X(*params_, p);
  return eval_field(parsed_->x, p);
}

VectorValue PiecewiseSystem::Y(const Point3& p) const {
  if (params_) return eval_normal_form_Y(*params_, p);
  return eval_field(parsed_->y, p);
}

LieJet PiecewiseSystem::lie_X(const Point3& p) const {
  if (params_) {
    const auto& k = *params_;
    return {k.b * (p.y + p.x * p.x), k.b * (k.lambda + 2.0 * k.a * p.x),
            2.0 * k.a * k.a * k.b};
  }
  return eval_jet(parsed_->lie_x, p);
}

LieJet PiecewiseSystem::lie_Y(const Point3& p) const {
  if (params_) return {p.x, params_->c, 0.0};
  return eval_jet(parsed_->lie_y, p);
}

// ---------------------------------------------------------------------------

RegionLabel region_from_signs(double x3, double y3) {
  if (x3 > 0.0 && y3 > 0.0) return RegionLabel::CrossingPlus;
  if (x3 < 0.0 && y3 < 0.0) return RegionLabel::CrossingMinus;
  if (x3 < 0.0 && y3 > 0.0) return RegionLabel::Sliding;
  if (x3 > 0.0 && y3 < 0.0) return RegionLabel::Escaping;
  return RegionLabel::Tangential;
}

RegionLabel classify_region(const PiecewiseSystem& sys, const Point3& p,
                            double tol) {
  if (std::fabs(p.z) > tol) {
    throw PreconditionError("classify_region: point is off the switching plane");
  }
  const VectorValue fx = sys.X(p);
  const VectorValue fy = sys.Y(p);
  if (std::fabs(fx.v3) <= tol * (1.0 + fx.norm_inf()) ||
      std::fabs(fy.v3) <= tol * (1.0 + fy.norm_inf())) {
    return RegionLabel::Tangential;
  }
  return region_from_signs(fx.v3, fy.v3);
}

Contact classify_contact_X(const LieJet& jet, double threshold) {
  if (std::fabs(jet[0]) > threshold) return Contact::Transversal;
  if (std::fabs(jet[1]) > threshold) {
    return jet[1] > 0.0 ? Contact::FoldVisible : Contact::FoldInvisible;
  }
  if (std::fabs(jet[2]) > threshold) return Contact::Cusp;
  return Contact::HigherOrder;
}

Contact classify_contact_Y(const LieJet& jet, double threshold) {
  if (std::fabs(jet[0]) > threshold) return Contact::Transversal;
  if (std::fabs(jet[1]) > threshold) {
    return jet[1] < 0.0 ? Contact::FoldVisible : Contact::FoldInvisible;
  }
  if (std::fabs(jet[2]) > threshold) return Contact::Cusp;
  return Contact::HigherOrder;
}

CombinedTangency combine(Contact x, Contact y) {
  const bool tx = x == Contact::Transversal;
  const bool ty = y == Contact::Transversal;
  if (tx && ty) return CombinedTangency::None;
  if ((is_fold(x) && ty) || (tx && is_fold(y))) return CombinedTangency::Fold;
  if (is_fold(x) && is_fold(y)) return CombinedTangency::TwoFold;
  if ((x == Contact::Cusp && is_fold(y)) || (is_fold(x) && y == Contact::Cusp)) {
    return CombinedTangency::CuspFold;
  }
  return CombinedTangency::Other;
}

TangencyClass classify_tangency(const PiecewiseSystem& sys, const Point3& p,
                                double tol) {
  if (std::fabs(p.z) > tol) {
    throw PreconditionError(
        "classify_tangency: point is off the switching plane");
  }
  const double sx = 1.0 + sys.X(p).norm_inf();
  const double sy = 1.0 + sys.Y(p).norm_inf();
  TangencyClass out;
  out.x = classify_contact_X(sys.lie_X(p), tol * sx);
  out.y = classify_contact_Y(sys.lie_Y(p), tol * sy);
  out.combined = combine(out.x, out.y);
  return out;
}

PlanarLine PlanarLine::through(const Vec2& direction) {
  if (direction.x == 0.0) {
    if (direction.y == 0.0) throw PreconditionError("line direction is zero");
    return {true, 0.0};
  }
  return {false, direction.y / direction.x};
}

Vec2 PlanarLine::at(double h) const {
  if (vertical) return {0.0, h};
  return {h, slope * h};
}

namespace {
bool is_crossing(RegionLabel r) {
  return r == RegionLabel::CrossingPlus || r == RegionLabel::CrossingMinus;
}
bool is_sliding_or_escaping(RegionLabel r) {
  return r == RegionLabel::Sliding || r == RegionLabel::Escaping;
}
}  // namespace

bool LineLocation::crossing() const {
  return is_crossing(positive) && is_crossing(negative);
}

bool LineLocation::sliding_or_escaping() const {
  return is_sliding_or_escaping(positive) && is_sliding_or_escaping(negative);
}

LineLocation locate_line(const PiecewiseSystem& sys, const PlanarLine& line) {
  double h = 1e-3;
  if (!line.vertical && line.slope != 0.0) {
    h = std::fmin(h, 0.1 * std::fabs(line.slope));
  }
  LineLocation out;
  out.positive = classify_region(sys, on_sigma(line.at(h)));
  out.negative = classify_region(sys, on_sigma(line.at(-h)));
  return out;
}

}  // namespace psvf
