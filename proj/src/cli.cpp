#include "psvf/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "psvf/core.hpp"
#include "psvf/errors.hpp"
#include "psvf/hybrid.hpp"
#include "psvf/return_map.hpp"
#include "psvf/sliding.hpp"
#include "psvf/stability.hpp"
#include "psvf/system_spec.hpp"

namespace psvf {
namespace {

using Json = nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

// Malformed arguments or an inconsistent manifest.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw UsageError("invalid number for " + std::string(what) + ": '" + s + "'");
  }
  return v;
}

std::vector<double> parse_tuple(std::string_view text, std::size_t n, std::string_view what) {
  const auto parts = split(text, ',');
  if (parts.size() != n) {
    throw UsageError(std::string(what) + " needs " + std::to_string(n) +
                     " comma-separated numbers, got '" + std::string(text) + "'");
  }
  std::vector<double> v;
  for (const auto& p : parts) v.push_back(parse_number(p, what));
  return v;
}

Point3 parse_point3(std::string_view text) {
  const auto v = parse_tuple(text, 3, "--point");
  return {v[0], v[1], v[2]};
}

Vec2 parse_point2(std::string_view text, std::string_view what = "--point") {
  const auto v = parse_tuple(text, 2, what);
  return {v[0], v[1]};
}

// lo:hi:step, inclusive of hi up to rounding. Empty when hi < lo.
std::vector<double> parse_range(std::string_view text, std::string_view what) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) {
    throw UsageError(std::string(what) + " expects lo:hi:step, got '" + std::string(text) + "'");
  }
  const double lo = parse_number(parts[0], what);
  const double hi = parse_number(parts[1], what);
  const double step = parse_number(parts[2], what);
  if (!(step > 0.0)) throw UsageError(std::string(what) + ": step must be positive");
  std::vector<double> values;
  if (hi < lo) return values;
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  if (n > 1000000) throw UsageError(std::string(what) + ": too many grid values");
  for (long long i = 0; i <= n; ++i) {
    double v = lo + static_cast<double>(i) * step;
    if (std::fabs(v) < 1e-9 * step) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    values.push_back(std::strtod(buf, nullptr));
  }
  return values;
}

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string exact(double v) { return fmt(v, "%.17g"); }

std::string fmt_point(const Point3& p) {
  return "(" + fmt(p.x) + ", " + fmt(p.y) + ", " + fmt(p.z) + ")";
}

std::string fmt_point(const Vec2& q) { return "(" + fmt(q.x) + ", " + fmt(q.y) + ")"; }

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json to_json(const Point3& p) { return Json::array({p.x, p.y, p.z}); }
Json to_json(const Vec2& q) { return Json::array({q.x, q.y}); }

Json to_json(const ParamSet& p) {
  return Json{{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}, {"lambda", p.lambda}};
}

Json to_json(const SampleRecord& r) {
  return Json{{"index", r.index},
              {"start", to_json(r.start)},
              {"end", to_json(r.end)},
              {"end_time", r.end_time},
              {"end_distance", r.end_distance},
              {"max_distance", r.max_distance},
              {"status", std::string(to_string(r.status))},
              {"branches", r.branches},
              {"reached_sliding", r.reached_sliding}};
}

// ---------------------------------------------------------------- manifest

struct Manifest {
  std::string builtin;
  std::string system;
  std::optional<double> lambda;

  double t_max = 200.0;
  double domain_radius = 1e3;
  double event_tol = 1e-12;
  std::size_t max_events = 100000;
  std::string escape_policy = "both";

  double delta = 0.2;
  std::optional<std::size_t> samples;
  std::uint64_t seed = 42;
  double dist_tol = 1e-3;

  std::string out;
};

void add_model_options(CLI::App* sub, Manifest& m, bool allow_system) {
  sub->add_option("--builtin", m.builtin,
                  "Normal-form parameters, e.g. a=-1,b=-1,c=1,d=-2,lambda=0 (defaults to these)");
  if (allow_system) sub->add_option("--system", m.system, "System file (.psvf)");
  sub->add_option("--lambda", m.lambda, "Override lambda");
}

void add_sim_options(CLI::App* sub, Manifest& m) {
  sub->add_option("--t-max", m.t_max, "Time horizon")->capture_default_str();
  sub->add_option("--domain-radius", m.domain_radius, "Domain guard radius")->capture_default_str();
  sub->add_option("--event-tol", m.event_tol, "Event location tolerance")->capture_default_str();
  sub->add_option("--max-events", m.max_events, "Zeno guard")->capture_default_str();
  sub->add_option("--escape-policy", m.escape_policy, "both|x|y")
      ->check(CLI::IsMember({"both", "x", "y"}))
      ->capture_default_str();
}

void add_sample_options(CLI::App* sub, Manifest& m) {
  sub->add_option("--delta", m.delta, "Sampling ball radius")->capture_default_str();
  sub->add_option("--samples", m.samples, "Sample count");
  sub->add_option("--seed", m.seed, "Sampling seed")->capture_default_str();
  sub->add_option("--dist-tol", m.dist_tol, "Convergence distance")->capture_default_str();
}

ParamSet parse_builtin(const std::string& text, const std::optional<double>& lambda) {
  std::map<std::string, double> v{{"a", -1.0}, {"b", -1.0}, {"c", 1.0}, {"d", -2.0}, {"lambda", 0.0}};
  if (!trim(text).empty()) {
    for (const auto& item : split(text, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--builtin expects name=value, got '" + item + "'");
      const std::string name = trim(item.substr(0, eq));
      if (!v.count(name)) throw UsageError("--builtin: unknown parameter '" + name + "'");
      v[name] = parse_number(item.substr(eq + 1), "--builtin " + name);
    }
  }
  if (lambda) v["lambda"] = *lambda;
  try {
    return ParamSet(v["a"], v["b"], v["c"], v["d"], v["lambda"]);
  } catch (const RegimeViolation& e) {
    throw UsageError(std::string("--builtin: ") + e.what());
  }
}

ParamSet manifest_params(const Manifest& m, std::string_view command) {
  if (!m.system.empty()) {
    throw UsageError(std::string(command) + " works on the built-in normal form; --system is not accepted");
  }
  return parse_builtin(m.builtin, m.lambda);
}

struct Model {
  PiecewiseSystem sys;
  std::optional<ParamSet> params;
  std::string source;
};

Model manifest_model(const Manifest& m) {
  if (!m.system.empty() && !m.builtin.empty()) {
    throw UsageError("give exactly one of --builtin and --system");
  }
  if (m.system.empty()) {
    const ParamSet p = parse_builtin(m.builtin, m.lambda);
    return {PiecewiseSystem(p), p, "builtin"};
  }
  SystemSpec spec;
  try {
    spec = load_system_file(m.system);
    if (m.lambda) {
      if (!spec.params.count("lambda")) throw UsageError("--lambda: system has no parameter 'lambda'");
      spec.params["lambda"] = *m.lambda;
    }
    return {PiecewiseSystem(spec), std::nullopt, m.system};
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(m.system + ": " + error_kind(e) + ": " + e.what());
  }
}

SimConfig manifest_config(const Manifest& m) {
  SimConfig c;
  c.t_max = m.t_max;
  c.ball_radius = m.domain_radius;
  c.event_tol = m.event_tol;
  c.max_events = m.max_events;
  c.escape_policy = m.escape_policy == "x"   ? EscapePolicy::BranchX
                    : m.escape_policy == "y" ? EscapePolicy::BranchY
                                             : EscapePolicy::Both;
  try {
    c.validate();
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  return c;
}

SampleSpec manifest_spec(const Manifest& m, std::size_t default_count) {
  if (!(m.delta > 0.0)) throw UsageError("--delta must be positive");
  SampleSpec s;
  s.count = m.samples.value_or(default_count);
  s.radius = m.delta;
  s.seed = m.seed;
  return s;
}

Json config_json(const SimConfig& c, const SampleSpec& s, double dist_tol) {
  return Json{{"delta", s.radius},
              {"samples", s.count},
              {"seed", s.seed},
              {"t_max", c.t_max},
              {"event_tol", c.event_tol},
              {"max_events", c.max_events},
              {"domain_radius", c.ball_radius},
              {"escape_policy", std::string(to_string(c.escape_policy))},
              {"dist_tol", dist_tol},
              {"rtol", c.step.rtol},
              {"atol", c.step.atol}};
}

void print_config(std::ostream& out, const SimConfig& c, const SampleSpec& s) {
  out << "config: delta=" << fmt(s.radius) << " t_max=" << fmt(c.t_max)
      << " event_tol=" << fmt(c.event_tol) << " max_events=" << c.max_events
      << " seed=" << s.seed << " digest=" << hex(config_digest(c, s)) << "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw UsageError("cannot write " + path);
  f << content;
  if (!f) throw UsageError("write failed: " + path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  std::string point;
  std::string x_range;
  std::string y_range;
  double tol = 1e-9;
};

std::string label(RegionLabel r, const TangencyClass& t) {
  if (r != RegionLabel::Tangential) return std::string(to_string(r));
  return "Tangential: " + std::string(to_string(t.combined));
}

int cmd_classify(const Manifest& m, const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
  const Model model = manifest_model(m);
  std::vector<Point3> points;
  if (!a.point.empty()) {
    if (!a.x_range.empty() || !a.y_range.empty()) throw UsageError("give either --point or a grid");
    points.push_back(parse_point3(a.point));
  } else {
    if (a.x_range.empty() || a.y_range.empty()) {
      throw UsageError("classify needs --point or both --x-range and --y-range");
    }
    const auto xs = parse_range(a.x_range, "--x-range");
    const auto ys = parse_range(a.y_range, "--y-range");
    for (double y : ys) {
      for (double x : xs) points.emplace_back(x, y, 0.0);
    }
  }
  if (!(a.tol > 0.0)) throw UsageError("--tol must be positive");

  std::ostringstream csv;
  csv << "x,y,z,region,x_contact,y_contact,combined\n";
  std::map<std::string, std::size_t> counts;
  for (const Point3& p : points) {
    RegionLabel r;
    TangencyClass t;
    try {
      r = classify_region(model.sys, p, a.tol);
      t = classify_tangency(model.sys, p, a.tol);
    } catch (const Error& e) {
      err << "classification error at " << fmt_point(p) << ": " << error_kind(e) << ": "
          << e.what() << "\n";
      return kCheckFailed;
    }
    const std::string l = label(r, t);
    ++counts[l];
    if (points.size() == 1) {
      out << l << "\n";
      out << "X contact: " << to_string(t.x) << ", Y contact: " << to_string(t.y) << "\n";
    }
    csv << exact(p.x) << ',' << exact(p.y) << ',' << exact(p.z) << ',' << to_string(r) << ','
        << to_string(t.x) << ',' << to_string(t.y) << ',' << to_string(t.combined) << "\n";
  }
  if (points.size() != 1) {
    out << points.size() << " points\n";
    for (const auto& [l, n] : counts) out << "  " << l << ": " << n << "\n";
  }
  if (!m.out.empty()) write_file(m.out, csv.str());
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string point;
  std::string summary;
};

std::string branch_path(const std::string& path, std::size_t k) {
  if (k == 0) return path;
  const std::filesystem::path p(path);
  std::filesystem::path q = p.parent_path() /
                            (p.stem().string() + ".branch" + std::to_string(k) + p.extension().string());
  return q.string();
}

int cmd_simulate(const Manifest& m, const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const Model model = manifest_model(m);
  const Point3 p0 = parse_point3(a.point);
  const SimConfig cfg = manifest_config(m);
  const SampleSpec spec = manifest_spec(m, 500);

  std::vector<HybridTrajectory> trajs;
  try {
    trajs = simulate(model.sys, p0, cfg);
  } catch (const Error& e) {
    err << "simulate: " << error_kind(e) << ": " << e.what() << "\n";
    return kCheckFailed;
  }

  print_config(out, cfg, spec);
  Json summary{{"command", "simulate"}, {"source", model.source}};
  if (model.params) summary["params"] = to_json(*model.params);
  summary["start"] = to_json(p0);
  summary["config"] = config_json(cfg, spec, m.dist_tol);
  summary["config_digest"] = hex(config_digest(cfg, spec));
  Json branches = Json::array();
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const HybridTrajectory& tr = trajs[k];
    out << "branch " << k << ": status=" << to_string(tr.status)
        << " final=" << fmt_point(tr.final_point()) << " t=" << fmt(tr.final_time())
        << " |p|=" << fmt(tr.final_point().norm()) << " segments=" << tr.segments.size()
        << " events=" << tr.events.size()
        << (tr.boundary_approximation ? " boundary_approximation" : "") << "\n";
    const std::size_t shown = std::min<std::size_t>(tr.events.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
      const Event& e = tr.events[i];
      out << "  t=" << fmt(e.t) << " " << to_string(e.kind) << " at " << fmt_point(e.point) << "\n";
    }
    if (shown < tr.events.size()) out << "  ... " << tr.events.size() - shown << " more\n";

    Json events = Json::array();
    for (const Event& e : tr.events) {
      events.push_back(Json{{"t", e.t},
                            {"kind", std::string(to_string(e.kind))},
                            {"point", to_json(e.point)},
                            {"segment", e.segment}});
    }
    Json modes = Json::array();
    for (const Segment& s : tr.segments) modes.push_back(std::string(mode_letter(s.mode)));
    Json b{{"index", k},
           {"status", std::string(to_string(tr.status))},
           {"boundary_approximation", tr.boundary_approximation},
           {"final_point", to_json(tr.final_point())},
           {"final_time", tr.final_time()},
           {"final_distance", tr.final_point().norm()},
           {"segment_modes", modes},
           {"events", events}};
    if (!m.out.empty()) {
      const std::string path = branch_path(m.out, k);
      std::ostringstream csv;
      write_trajectory_csv(csv, tr);
      write_file(path, csv.str());
      b["csv"] = std::filesystem::path(path).filename().string();
    }
    branches.push_back(std::move(b));
  }
  summary["branches"] = std::move(branches);

  std::string summary_path = a.summary;
  if (summary_path.empty() && !m.out.empty()) {
    const std::filesystem::path p(m.out);
    summary_path = (p.parent_path() / (p.stem().string() + ".summary.json")).string();
  }
  if (!summary_path.empty()) write_file(summary_path, dump(summary));
  return kOk;
}

// ---------------------------------------------------------------- return-map

struct ReturnMapArgs {
  std::string point;
  std::size_t iterate = 0;
  bool eigen = false;
};

int cmd_return_map(const Manifest& m, const ReturnMapArgs& a, std::ostream& out) {
  const ParamSet params = manifest_params(m, "return-map");
  if (a.point.empty() && !a.eigen) throw UsageError("return-map needs --point and/or --eigen");
  Json report{{"command", "return-map"}, {"params", to_json(params)}};

  if (!a.point.empty()) {
    const Vec2 q = parse_point2(a.point);
    Json row{{"point", to_json(q)}};
    try {
      const ReturnMapResult r = first_return_map(params, q);
      const bool fixed = r.image.x == q.x && r.image.y == q.y;
      out << "phi" << fmt_point(q) << " = " << fmt_point(r.image) << (fixed ? "  fixed point" : "")
          << "\n";
      out << "  delta1=" << fmt(r.delta1) << " radicand=" << fmt(r.radicand)
          << " realizable=" << (r.realizable ? "yes" : "no");
      if (r.flight_times) {
        out << " t_X=" << fmt((*r.flight_times)[0]) << " t_Y=" << fmt((*r.flight_times)[1]);
      }
      out << "\n";
      row["status"] = fixed ? "FixedPoint" : "Ok";
      row["image"] = to_json(r.image);
      row["delta1"] = r.delta1;
      row["radicand"] = r.radicand;
      row["realizable"] = r.realizable;
      if (r.flight_times) row["flight_times"] = Json::array({(*r.flight_times)[0], (*r.flight_times)[1]});
    } catch (const ComplexBranch& e) {
      out << "phi" << fmt_point(q) << ": status=ComplexBranch radicand=" << fmt(e.radicand()) << "\n";
      row["status"] = "ComplexBranch";
      row["radicand"] = e.radicand();
    }
    report["map"] = row;

    if (a.iterate > 0) {
      OrbitOptions opts;
      opts.max_iter = a.iterate;
      const Orbit orbit = iterate_return_map(params, q, opts);
      out << "orbit (" << orbit.points.size() - 1 << " steps): status=" << to_string(orbit.status);
      if (orbit.status == OrbitStatus::ComplexBranch) out << " radicand=" << fmt(orbit.radicand);
      out << "\n";
      Json pts = Json::array();
      for (std::size_t n = 0; n < orbit.points.size(); ++n) {
        out << "  " << n << " " << fmt(orbit.points[n].x) << " " << fmt(orbit.points[n].y) << "\n";
        pts.push_back(to_json(orbit.points[n]));
      }
      report["orbit"] = Json{{"status", std::string(to_string(orbit.status))}, {"points", pts}};
      if (orbit.status == OrbitStatus::ComplexBranch) report["orbit"]["radicand"] = orbit.radicand;
    }
  }

  if (a.eigen) {
    Json eig;
    try {
      const ReturnMapEigen e = return_map_eigen_origin(params);
      out << "return map eigen: delta2=" << fmt(e.delta2) << " xi_plus=" << fmt(e.xi_plus)
          << " xi_minus=" << fmt(e.xi_minus) << " xi_plus*xi_minus=" << fmt(e.xi_plus * e.xi_minus)
          << "\n";
      out << "  omega_plus=" << fmt(e.omega_plus) << " (" << to_string(e.location_plus.positive)
          << "/" << to_string(e.location_plus.negative) << ")"
          << " omega_minus=" << fmt(e.omega_minus) << " (" << to_string(e.location_minus.positive)
          << "/" << to_string(e.location_minus.negative) << ")\n";
      eig = Json{{"status", "Ok"},
                 {"delta2", e.delta2},
                 {"xi_plus", e.xi_plus},
                 {"xi_minus", e.xi_minus},
                 {"product", e.xi_plus * e.xi_minus},
                 {"omega_plus", e.omega_plus},
                 {"omega_minus", e.omega_minus}};
    } catch (const Error& e) {
      out << "return map eigen: status=" << error_kind(e) << "\n";
      eig = Json{{"status", error_kind(e)}};
    }
    report["return_map_eigen"] = eig;
    Json sl;
    try {
      const SlidingEigen s = sliding_eigen_origin(params);
      out << "sliding eigen: delta3=" << fmt(s.delta3) << " eig1=" << fmt(s.eig1)
          << " eig2=" << fmt(s.eig2) << " v1=" << fmt_point(s.vec1) << " v2=" << fmt_point(s.vec2)
          << "\n";
      sl = Json{{"status", "Ok"},
                {"delta3", s.delta3},
                {"eig1", s.eig1},
                {"eig2", s.eig2},
                {"vec1", to_json(s.vec1)},
                {"vec2", to_json(s.vec2)}};
    } catch (const Error& e) {
      out << "sliding eigen: status=" << error_kind(e) << "\n";
      sl = Json{{"status", error_kind(e)}};
    }
    report["sliding_eigen"] = sl;
  }
  if (!m.out.empty()) write_file(m.out, dump(report));
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::vector<std::string> suites;
  std::vector<std::string> q0;
};

const std::vector<std::string> kSuites = {"theorem-a",       "curve-images",   "strip-containment",
                                          "monotone-growth", "reach-sliding", "escape-certificate"};

std::vector<std::string> expand_suites(const std::vector<std::string>& raw) {
  std::vector<std::string> suites;
  for (const auto& entry : raw) {
    for (const auto& s : split(entry, ',')) {
      std::vector<std::string> add;
      if (s == "lemmas") {
        add = {"curve-images", "strip-containment", "monotone-growth", "reach-sliding"};
      } else if (std::find(kSuites.begin(), kSuites.end(), s) != kSuites.end()) {
        add = {s};
      } else {
        throw UsageError("unknown suite '" + s + "'");
      }
      for (const auto& x : add) {
        if (std::find(suites.begin(), suites.end(), x) == suites.end()) suites.push_back(x);
      }
    }
  }
  if (suites.empty()) throw UsageError("verify needs --suite");
  return suites;
}

std::string describe(const SampleRecord& r) {
  return "sample " + std::to_string(r.index) + " start=" + fmt_point(r.start) +
         " end_distance=" + fmt(r.end_distance) + " status=" + std::string(to_string(r.status)) +
         (r.reached_sliding ? " reached_sliding" : " never_reached_sliding");
}

Json certificate_json(const EscapeCertificate& c) {
  return Json{{"x0", c.x0},
              {"p0", to_json(c.p0)},
              {"p1", to_json(c.p1)},
              {"p2", to_json(c.p2)},
              {"p2_kind", std::string(to_string(c.p2_kind))},
              {"iterations", c.iterations},
              {"r_direction", to_json(c.r_direction)},
              {"s_abscissa", c.s_abscissa},
              {"p3", to_json(c.p3)},
              {"below_r", c.below_r},
              {"d0", c.d0},
              {"d2", c.d2},
              {"valid", c.valid}};
}

int cmd_verify(const Manifest& m, const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> suites = expand_suites(a.suites);
  const ParamSet params = manifest_params(m, "verify");
  const SimConfig cfg = manifest_config(m);

  // Preconditions first, so nothing runs on a refused manifest.
  for (const auto& s : suites) {
    const bool needs_zero = s == "curve-images" || s == "strip-containment" || s == "monotone-growth";
    if (needs_zero && params.lambda != 0.0) {
      err << "refused: suite " << s << " requires lambda = 0\n";
      return kUsage;
    }
    if (s == "reach-sliding" && params.lambda < 0.0) {
      err << "refused: suite reach-sliding requires lambda >= 0\n";
      return kUsage;
    }
    if (s == "escape-certificate" && !(params.lambda < 0.0)) {
      err << "refused: suite escape-certificate requires lambda < 0\n";
      return kUsage;
    }
  }
  if (const auto v = params.regime_violations(); !v.empty()) {
    std::string msg;
    for (const auto& x : v) msg += (msg.empty() ? "" : "; ") + x;
    err << "refused: parameters outside the stability regime: " << msg << "\n";
    return kUsage;
  }
  std::vector<Vec2> q0s;
  for (const auto& s : a.q0) q0s.push_back(parse_point2(s, "--q0"));
  if (q0s.empty()) q0s = {{0.1, -0.05}, {0.2, -0.04}};

  const SampleSpec spec = manifest_spec(m, 500);
  print_config(out, cfg, spec);

  Json report{{"command", "verify"}, {"params", to_json(params)}, {"verdict", "pass"}};
  Json results = Json::array();
  Json samples = Json::array();
  bool all_passed = true;

  auto record = [&](const std::string& suite, bool passed, const std::string& detail,
                    const std::string& failing, Json extra) {
    out << (passed ? "PASS " : "FAIL ") << suite << ": " << detail << "\n";
    if (!passed && !failing.empty()) out << "  failing record: " << failing << "\n";
    Json r{{"suite", suite}, {"passed", passed}, {"detail", detail}};
    if (!passed) r["failing_record"] = failing;
    for (auto& [k, v] : extra.items()) r[k] = v;
    results.push_back(std::move(r));
    all_passed = all_passed && passed;
  };

  for (const auto& suite : suites) {
    if (suite == "theorem-a") {
      const StabilityVerdict v = classify_stability(params, spec, cfg, m.dist_tol);
      const Verdict expected =
          params.lambda >= 0.0 ? Verdict::AsymptoticallyStable : Verdict::NotLyapunovStable;
      const bool passed = v.verdict == expected;
      std::string failing;
      if (!passed) {
        failing = v.reason;
        if (expected == Verdict::AsymptoticallyStable) {
          for (const auto& r : v.samples) {
            if (!r.reached_sliding || r.end_distance > m.dist_tol) {
              failing = describe(r);
              break;
            }
          }
        }
      }
      Json extra{{"verdict", std::string(to_string(v.verdict))},
                 {"expected", std::string(to_string(expected))},
                 {"reached_sliding", v.reached_sliding},
                 {"converged", v.converged},
                 {"escaped", v.escaped},
                 {"reason", v.reason}};
      if (v.certificate) extra["certificate"] = certificate_json(*v.certificate);
      if (v.simulated_d2) extra["simulated_d2"] = *v.simulated_d2;
      record(suite, passed,
             std::string(to_string(v.verdict)) + " (expected " + std::string(to_string(expected)) +
                 "), converged " + std::to_string(v.converged) + "/" +
                 std::to_string(v.samples.size()) + ", escaped " + std::to_string(v.escaped),
             failing, extra);
      report["stability_verdict"] = std::string(to_string(v.verdict));
      for (const auto& r : v.samples) samples.push_back(to_json(r));
    } else if (suite == "curve-images") {
      const auto r = verify_curve_images(params, m.samples.value_or(100), m.seed, cfg);
      record(suite, r.passed,
             "residuals parabola=" + fmt(r.parabola_residual) + " axis=" + fmt(r.axis_residual) +
                 " simulated " + fmt(r.parabola_sim_residual) + "/" + fmt(r.axis_sim_residual),
             r.passed ? "" : "max residual above tolerance",
             Json{{"samples", r.samples},
                  {"parabola_residual", r.parabola_residual},
                  {"axis_residual", r.axis_residual},
                  {"parabola_sim_residual", r.parabola_sim_residual},
                  {"axis_sim_residual", r.axis_sim_residual}});
    } else if (suite == "strip-containment") {
      const auto r = verify_strip_containment(params, m.samples.value_or(1000), m.seed);
      record(suite, r.passed,
             std::to_string(r.violations) + " violations over " + std::to_string(r.samples) + " samples",
             std::to_string(r.violations) + " images outside the strip",
             Json{{"samples", r.samples}, {"violations", r.violations}});
    } else if (suite == "monotone-growth") {
      for (const Vec2& q0 : q0s) {
        GrowthReport r;
        try {
          r = verify_monotone_growth(params, q0);
        } catch (const PreconditionError& e) {
          err << "refused: " << e.what() << "\n";
          return kUsage;
        }
        Json pts = Json::array();
        for (const Vec2& q : r.orbit.points) pts.push_back(to_json(q));
        record(suite, r.passed,
               "q0=" + fmt_point(q0) + " " + std::to_string(r.orbit.points.size() - 1) +
                   " steps, status " + std::string(to_string(r.orbit.status)),
               "orbit of " + fmt_point(q0) + " not strictly increasing in x",
               Json{{"q0", to_json(q0)},
                    {"monotone", r.monotone},
                    {"reached_sliding", r.reached_sliding},
                    {"orbit", pts}});
      }
    } else if (suite == "reach-sliding") {
      const auto r = verify_reach_sliding(params, spec, cfg);
      std::string failing;
      for (const auto& rec : r.records) {
        if (!rec.reached_sliding) {
          failing = describe(rec);
          break;
        }
      }
      record(suite, r.passed,
             std::to_string(r.reached) + "/" + std::to_string(r.samples) + " reached sliding",
             failing, Json{{"samples", r.samples}, {"reached", r.reached}});
      if (samples.empty()) {
        for (const auto& rec : r.records) samples.push_back(to_json(rec));
      }
    } else if (suite == "escape-certificate") {
      const double x0 = spec.radius / 2.0;
      try {
        const EscapeCertificate c = escape_certificate(params, x0, cfg);
        const auto sim = simulated_escape_distance(params, x0, cfg);
        const bool confirmed = sim && *sim - c.d0 > 1e-6;
        Json extra{{"certificate", certificate_json(c)}};
        if (sim) extra["simulated_d2"] = *sim;
        record(suite, c.valid && confirmed,
               "x0=" + fmt(x0) + " d0=" + fmt(c.d0) + " d2=" + fmt(c.d2) +
                   (sim ? " simulated d2=" + fmt(*sim) : " no simulated exit"),
               "simulation does not confirm d2 > d0", extra);
      } catch (const CertificateFailed& e) {
        record(suite, false, std::string("CertificateFailed: ") + e.what(), e.what(), Json::object());
      }
    }
  }

  report["verdict"] = all_passed ? "pass" : "fail";
  report["checks"] = std::move(results);
  report["samples"] = std::move(samples);
  report["seeds"] = Json{{"sampling", spec.seed}};
  report["config"] = config_json(cfg, spec, m.dist_tol);
  report["config_digest"] = hex(config_digest(cfg, spec));
  if (!m.out.empty()) write_file(m.out, dump(report));
  out << (all_passed ? "all checks passed" : "some checks failed") << "\n";
  return all_passed ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string a_range, b_range, c_range, d_range, lambda_range;
  bool resume = false;
};

const char* const kSweepHeader =
    "a,b,c,d,lambda,verdict,converged,escaped,sliding_eig1,sliding_eig2,sliding_error,"
    "xi_plus,xi_minus,return_map_error,error";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string sweep_line(const SweepRow& r) {
  std::ostringstream o;
  const GridPoint& k = r.key;
  o << exact(k.a) << ',' << exact(k.b) << ',' << exact(k.c) << ',' << exact(k.d) << ','
    << exact(k.lambda) << ',' << (r.verdict ? std::string(to_string(*r.verdict)) : "Error") << ','
    << r.converged << ',' << r.escaped << ',';
  if (r.sliding) {
    o << exact(r.sliding->eig1) << ',' << exact(r.sliding->eig2) << ",,";
  } else {
    o << ",," << csv_field(r.sliding_error) << ',';
  }
  if (r.return_map) {
    o << exact(r.return_map->xi_plus) << ',' << exact(r.return_map->xi_minus) << ",,";
  } else {
    o << ",," << csv_field(r.return_map_error) << ',';
  }
  o << csv_field(r.error);
  return o.str();
}

std::optional<GridPoint> line_key(const std::string& line) {
  const auto parts = split(line, ',');
  if (parts.size() < 5) return std::nullopt;
  try {
    return GridPoint{parse_number(parts[0], "a"), parse_number(parts[1], "b"),
                     parse_number(parts[2], "c"), parse_number(parts[3], "d"),
                     parse_number(parts[4], "lambda")};
  } catch (const UsageError&) {
    return std::nullopt;
  }
}

std::vector<double> axis(const std::string& range, double fixed, std::string_view what) {
  if (range.empty()) return {fixed};
  return parse_range(range, what);
}

int cmd_sweep(const Manifest& m, const SweepArgs& a, std::ostream& out) {
  const ParamSet base = manifest_params(m, "sweep");
  if (a.resume && m.out.empty()) throw UsageError("--resume needs --out");
  const SimConfig cfg = manifest_config(m);
  const SampleSpec spec = manifest_spec(m, 500);

  std::vector<GridPoint> grid;
  for (double av : axis(a.a_range, base.a, "--a-range"))
    for (double bv : axis(a.b_range, base.b, "--b-range"))
      for (double cv : axis(a.c_range, base.c, "--c-range"))
        for (double dv : axis(a.d_range, base.d, "--d-range"))
          for (double lv : axis(a.lambda_range, base.lambda, "--lambda-range"))
            grid.push_back({av, bv, cv, dv, lv});

  std::map<GridPoint, std::string> lines;  // complete rows, keyed for the final sorted write
  if (a.resume && std::filesystem::exists(m.out)) {
    std::ifstream f(m.out, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    std::istringstream in(content);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (in.eof() && content.back() != '\n') break;  // torn last row
      if (first) {
        if (line != kSweepHeader) throw UsageError(m.out + ": not a sweep file (header mismatch)");
        first = false;
        continue;
      }
      if (const auto k = line_key(line)) lines[*k] = line;
    }
  }
  const std::size_t existing = lines.size();
  std::vector<GridPoint> todo;
  for (const GridPoint& g : grid) {
    if (!lines.count(g)) todo.push_back(g);
  }

  print_config(out, cfg, spec);
  std::ofstream stream;
  if (!m.out.empty()) {
    std::string clean = std::string(kSweepHeader) + "\n";
    for (const auto& [k, line] : lines) clean += line + "\n";
    write_file(m.out, clean);
    stream.open(m.out, std::ios::binary | std::ios::app);
    if (!stream) throw UsageError("cannot write " + m.out);
  } else {
    out << kSweepHeader << "\n";
  }
  std::size_t fresh = 0;
  sweep(todo, spec, cfg, [&](const SweepRow& row) {
    const std::string line = sweep_line(row);
    lines[row.key] = line;
    ++fresh;
    if (stream.is_open()) {
      stream << line << "\n";
      stream.flush();
    } else {
      out << line << "\n";
    }
  });
  if (stream.is_open()) {
    stream.close();
    std::string sorted = std::string(kSweepHeader) + "\n";
    for (const auto& [k, line] : lines) sorted += line + "\n";
    write_file(m.out, sorted);
    out << fresh << " new rows, " << existing << " existing, " << lines.size() << " total -> "
        << m.out << "\n";
  }
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Piecewise-smooth vector field simulator and stability lab", "psvf"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Manifest m;
  ClassifyArgs ca;
  SimulateArgs sa;
  ReturnMapArgs ra;
  VerifyArgs va;
  SweepArgs wa;

  auto* classify = app.add_subcommand("classify", "Region and tangency class of a switching-plane point or grid");
  add_model_options(classify, m, true);
  classify->add_option("--point", ca.point, "x,y,z with z = 0");
  classify->add_option("--x-range", ca.x_range, "Grid abscissae lo:hi:step");
  classify->add_option("--y-range", ca.y_range, "Grid ordinates lo:hi:step");
  classify->add_option("--tol", ca.tol, "Tangency tolerance")->capture_default_str();
  classify->add_option("--out", m.out, "CSV output");

  auto* sim = app.add_subcommand("simulate", "Filippov trajectory with event log");
  add_model_options(sim, m, true);
  add_sim_options(sim, m);
  sim->add_option("--point", sa.point, "Start x,y,z")->required();
  sim->add_option("--out", m.out, "Trajectory CSV (extra branches: stem.branchK.ext)");
  sim->add_option("--summary", sa.summary, "JSON summary (default stem.summary.json next to --out)");

  auto* rmap = app.add_subcommand("return-map", "First-return map, its orbit and eigen summary at the origin");
  add_model_options(rmap, m, false);
  rmap->add_option("--point", ra.point, "x,y on the switching plane");
  rmap->add_option("--iterate", ra.iterate, "Orbit length");
  rmap->add_flag("--eigen", ra.eigen, "Eigen summary at the origin");
  rmap->add_option("--out", m.out, "JSON output");

  auto* verify = app.add_subcommand("verify", "Run verification suites");
  add_model_options(verify, m, false);
  add_sim_options(verify, m);
  add_sample_options(verify, m);
  verify->add_option("--suite", va.suites,
                     "theorem-a, curve-images, strip-containment, monotone-growth, "
                     "reach-sliding, escape-certificate, lemmas")
      ->required()
      ->delimiter(',');
  verify->add_option("--q0", va.q0, "Start x,y for monotone-growth (repeatable)");
  verify->add_option("--out", m.out, "JSON report");

  auto* sweep_cmd = app.add_subcommand("sweep", "Stability verdict and eigen summaries over a parameter grid");
  add_model_options(sweep_cmd, m, false);
  add_sim_options(sweep_cmd, m);
  add_sample_options(sweep_cmd, m);
  sweep_cmd->add_option("--a-range", wa.a_range, "lo:hi:step");
  sweep_cmd->add_option("--b-range", wa.b_range, "lo:hi:step");
  sweep_cmd->add_option("--c-range", wa.c_range, "lo:hi:step");
  sweep_cmd->add_option("--d-range", wa.d_range, "lo:hi:step");
  sweep_cmd->add_option("--lambda-range", wa.lambda_range, "lo:hi:step");
  sweep_cmd->add_flag("--resume", wa.resume, "Skip grid keys already in --out");
  sweep_cmd->add_option("--out", m.out, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? kOk : kUsage;
  }

  try {
    if (classify->parsed()) return cmd_classify(m, ca, out, err);
    if (sim->parsed()) return cmd_simulate(m, sa, out, err);
    if (rmap->parsed()) return cmd_return_map(m, ra, out);
    if (verify->parsed()) return cmd_verify(m, va, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(m, wa, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << error_kind(e) << ": " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}

}  // namespace psvf
