#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geoctl/cartan/asymmetry.hpp"
#include "geoctl/cartan/duality.hpp"
#include "geoctl/cli/bundled.hpp"
#include "geoctl/control/steering.hpp"
#include "geoctl/extremals/abnormal.hpp"
#include "geoctl/extremals/normal.hpp"
#include "geoctl/extremals/residual.hpp"
#include "geoctl/flags/derived_flag.hpp"
#include "geoctl/io/model_file.hpp"
#include "geoctl/io/report.hpp"

namespace geoctl::cli {

enum ExitCode : int { ok = 0, tolerance = 1, parse = 2, degenerate = 3, precondition = 4, stage = 5 };

struct Options {
  std::string model;
  std::string point;     ///< comma-separated rationals; defaults to the model point
  std::string out;       ///< output path (prefix for geodesic); stdout when empty
  std::string problem;   ///< problem block key
  std::string kind = "normal";
  std::string keep;      ///< comma-separated coordinate indices
  std::string covector;  ///< comma-separated numbers
  std::string target;
  std::optional<double> horizon, fiber, step_override;
  double step = 1e-3;
  double tol = 1e-6;
  std::uint64_t seed = 1;
  int jobs = 1;
};

/// Failure inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& msg) : Error(stage + ": " + msg), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Comma-separated rational constants ("0, 1/2, -0.25"); ParseError columns
/// refer to the whole argument.
inline RationalVector parse_constants(const std::string& s) {
  RationalVector v;
  const PolynomialParser p({});
  std::size_t offset = 0;
  for (const auto& item : split(s)) {
    try {
      const Polynomial q = p.parse(item);
      v.push_back(q.eval(RationalVector{}));
    } catch (const ParseError& e) {
      throw ParseError("in list argument: " + e.message(), offset + e.column());
    }
    offset += item.size() + 1;
  }
  return v;
}

inline Vec to_vec(const RationalVector& q) { return geoctl::to_vec(to_double(q)); }

inline RationalVector base_point(const ModelFile& m, const Options& o, const ProblemBlock* b = nullptr) {
  RationalVector x = m.point;
  if (b && b->point) {
    x.clear();
    for (double d : *b->point) x.push_back(from_double(d));
  }
  if (!o.point.empty()) x = parse_constants(o.point);
  if (x.size() != m.chart.dim())
    throw ParseError("point needs " + std::to_string(m.chart.dim()) + " coordinates", 1);
  return x;
}

inline std::vector<std::size_t> parse_keep(const std::string& s, std::size_t n) {
  std::vector<std::size_t> k;
  std::size_t offset = 0;
  for (const auto& item : split(s)) {
    std::size_t pos = 0;
    long v = -1;
    try {
      v = std::stol(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || v < 0 || static_cast<std::size_t>(v) >= n)
      throw ParseError("keep expects coordinate indices in [0, " + std::to_string(n) + ")", offset + 1);
    k.push_back(static_cast<std::size_t>(v));
    offset += item.size() + 1;
  }
  return k;
}

inline Json point_json(const RationalVector& x) {
  Json a = Json::array();
  for (const auto& q : x) a.push_back(q.get_str());
  return a;
}

inline void emit(const Json& j, const Options& o, std::ostream& out) {
  const std::string s = j.dump(2) + "\n";
  if (o.out.empty()) {
    out << s;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw InvalidArgument("cannot write '" + o.out + "'");
  f << s;
}

inline double step_of(const Options& o, const ProblemBlock* b) {
  if (o.step_override) return *o.step_override;
  return b && b->step ? *b->step : o.step;
}

/// Frame rank at x, floating.
inline int frame_rank(const std::vector<PolyVectorField>& f, const Vec& x) {
  Mat m(x.size(), static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = CompiledField(f[i])(x);
  return numeric_rank(m, 1e-9);
}

}  // namespace detail

/// Growth vector, Cartan and bracket-generating verdicts at a point (exact arithmetic).
inline int cmd_analyze(const Options& o, std::ostream& out) {
  const ModelFile m = load_model(o.model);
  const RationalVector x = detail::base_point(m, o);
  Json j;
  j["command"] = "analyze";
  j["model"] = m.name;
  j["point"] = detail::point_json(x);
  if (detail::frame_rank(m.frame, detail::to_vec(x)) < m.rank()) {
    j["error"] = "frame is linearly dependent at the point";
    detail::emit(j, o, out);
    return degenerate;
  }
  const auto flag = derived_flag(m.frame, x, 8);
  j["growth"] = flag.growth;
  j["cartan"] = is_cartan(flag);
  j["bracket_generating"] = is_bracket_generating(flag);
  Json stages = Json::array();
  for (const auto& s : flag.stages) stages.push_back({{"depth", s.depth}, {"rank", s.rank}, {"words", s.words}});
  j["stages"] = stages;
  detail::emit(j, o, out);
  return ok;
}

/// Normal or abnormal extremal from an initial covector; CSV trajectory at
/// <out>.csv (stdout without --out) and a JSON residual summary at <out>.json.
inline int cmd_geodesic(const Options& o, std::ostream& out) {
  const ModelFile m = load_model(o.model);
  const ProblemBlock* b = o.problem.empty() ? m.problem_of_kind(o.kind) : m.problem(o.problem);
  if (!o.problem.empty() && !b) throw InvalidArgument("no problem block '" + o.problem + "'");
  const std::string kind = b && !o.problem.empty() ? b->kind : o.kind;
  if (kind != "normal" && kind != "abnormal") throw InvalidArgument("geodesic kind must be normal or abnormal");
  const Vec x0 = detail::to_vec(detail::base_point(m, o, b));
  Vec p0;
  if (!o.covector.empty()) p0 = detail::to_vec(detail::parse_constants(o.covector));
  else if (b && b->covector) p0 = to_vec(*b->covector);
  else throw InvalidArgument("geodesic needs an initial covector (--covector or a problem block)");
  if (p0.size() != x0.size()) throw ParseError("covector needs " + std::to_string(x0.size()) + " entries", 1);
  const double T = o.horizon ? *o.horizon : (b && b->horizon ? *b->horizon : 1.0);
  const double step = detail::step_of(o, b);

  const auto frame = m.metric_frame();
  BiExtremalArc arc;
  Json j;
  j["command"] = "geodesic";
  j["model"] = m.name;
  j["kind"] = kind;
  std::vector<std::string> controls;
  double verdict_value = 0;
  if (kind == "normal") {
    auto prob = OptimalControlProblem::full_energy(make_system(m.chart, frame, m.metric));
    if (b && b->energy) prob = OptimalControlProblem::partial_energy(prob.sys, *b->energy);
    arc = integrate_normal(prob, x0, p0, T, step);
    const auto r = pmp_residual(prob, arc);
    const double h0 = arc.hamiltonian.front();
    j["hamiltonian"] = h0;
    j["drift"] = arc.hamiltonian_drift();
    j["energy"] = arc_energy(prob, arc);
    j["pmp"] = {{"state", r.state}, {"costate", r.costate}, {"stationarity", r.stationarity}};
    verdict_value = std::max(arc.hamiltonian_drift() / std::max(1.0, std::abs(h0)), arc.max_constraint());
    controls = prob.sys.control_names;
  } else {
    if (frame.size() != 2) throw PreconditionViolation("rank = 2", "abnormal extremals need a rank-2 frame");
    AbnormalOptions opt;
    opt.step = step;
    arc = integrate_abnormal_rank2(abnormal_frame(frame[0], frame[1]), x0, p0, T, opt);
    verdict_value = arc.max_constraint();
    controls = m.metric;
  }
  j["samples"] = arc.size();
  j["endpoint"] = to_json(arc.states.back());
  j["max_constraint"] = arc.max_constraint();
  j["tol"] = o.tol;
  j["passed"] = verdict_value <= o.tol;

  if (o.out.empty()) {
    write_arc_csv(out, arc, m.chart.names, controls);
  } else {
    std::ofstream csv(o.out + ".csv");
    if (!csv) throw InvalidArgument("cannot write '" + o.out + ".csv'");
    write_arc_csv(csv, arc, m.chart.names, controls);
    std::ofstream js(o.out + ".json");
    js << j.dump(2) << "\n";
  }
  return verdict_value <= o.tol ? ok : tolerance;
}

/// Quotient by a coordinate projection: projected frame and the pointwise
/// residual of projected trajectories against the quotient dynamics.
inline int cmd_quotient(const Options& o, std::ostream& out) {
  const ModelFile m = load_model(o.model);
  const ProblemBlock* b = o.problem.empty() ? m.problem_of_kind("steer") : m.problem(o.problem);
  std::vector<std::size_t> keep;
  if (!o.keep.empty()) keep = detail::parse_keep(o.keep, m.chart.dim());
  else if (b && b->keep) keep = *b->keep;
  else throw InvalidArgument("quotient needs --keep");
  const auto sys = make_system(m.chart, m.frame, m.frame_names);
  const auto q = quotient(sys, keep);
  Json j;
  j["command"] = "quotient";
  j["model"] = m.name;
  j["coordinates"] = q.chart.names;
  j["controls"] = q.control_names;
  Json fields = Json::array();
  bool params = false;
  for (const auto& pf : q.poly_frame) {
    std::vector<std::string> names = pf.chart.names;
    names.insert(names.end(), pf.params.begin(), pf.params.end());
    std::vector<std::string> comps;
    for (const auto& c : pf.components) comps.push_back(c.to_string(names));
    fields.push_back(comps);
    params = params || pf.depends_on_params();
  }
  j["fields"] = fields;
  j["depends_on_fiber"] = params;

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g;
  const Vec x0 = detail::to_vec(detail::base_point(m, o, b));
  double worst = 0;
  for (int t = 0; t < 5; ++t) {
    std::vector<Vec> s;
    for (int k = 0; k < 4; ++k) {
      Vec u(sys.control_dim());
      for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = g(rng);
      s.push_back(u);
    }
    worst = std::max(worst, quotient_trajectory_residual(sys, keep, ControlSignal(0, 1, s), x0, o.step));
  }
  j["trajectory_residual"] = worst;
  j["tol"] = o.tol;
  j["passed"] = worst <= o.tol;
  detail::emit(j, o, out);
  return worst <= o.tol ? ok : tolerance;
}

/// Cartan prolongation: rho, the abnormal covector and the growth of {xi, eta} on Z.
inline int cmd_prolong(const Options& o, std::ostream& out) {
  const ModelFile m = load_model(o.model);
  const RationalVector x = detail::base_point(m, o);
  Json j;
  j["command"] = "prolong";
  j["model"] = m.name;
  j["point"] = detail::point_json(x);
  CartanModel cm;
  try {
    cm = certify_cartan(m.chart, m.frame, x);
  } catch (const NotCartan& e) {
    j["error"] = e.what();
    detail::emit(j, o, out);
    return degenerate;
  }
  const auto pc = prolong(cm);
  j["rho"] = pc.rho_string();
  std::vector<std::string> cov;
  std::vector<std::string> names = m.chart.names;
  names.push_back("cos(v)");
  names.push_back("sin(v)");
  for (const auto& c : pc.covector) cov.push_back(c.to_string(names));
  j["covector"] = cov;
  Json samples = Json::array();
  bool all = true;
  const Vec y = detail::to_vec(x);
  for (int k = 0; k < 10; ++k) {
    Vec z(6);
    z << y, 0.1 + k * M_PI / 10;
    const auto f = pc.flag(z, 6, 1e-6);
    all = all && f.growth == std::vector<int>{2, 3, 4, 5, 6};
    samples.push_back({{"v", z(5)}, {"growth", f.growth}});
  }
  j["growth_on_Z"] = samples;
  j["passed"] = all;
  detail::emit(j, o, out);
  return all ? ok : tolerance;
}

/// prolong -> leaf_space -> verify_asymmetry -> verify_duality.
inline int cmd_duality(const Options& o, std::ostream& out) {
  const ModelFile m = load_model(o.model);
  const ProblemBlock* b = o.problem.empty() ? m.problem_of_kind("duality") : m.problem(o.problem);
  const RationalVector x = detail::base_point(m, o, b);
  Json j;
  j["command"] = "duality-check";
  j["model"] = m.name;
  j["point"] = detail::point_json(x);
  CartanModel cm;
  try {
    cm = certify_cartan(m.chart, m.frame, x);
  } catch (const NotCartan& e) {
    j["stage"] = "certify";
    j["error"] = e.what();
    detail::emit(j, o, out);
    return degenerate;
  }
  auto run = [](const std::string& name, auto&& body) {
    try {
      return body();
    } catch (const Error& e) {
      throw StageError(name, e.what());
    }
  };
  const double v0 = o.fiber ? *o.fiber : (b && b->fiber ? *b->fiber : 0.3);
  const int nsamples = b && b->samples ? *b->samples : 20;
  Vec z0(6);
  z0 << detail::to_vec(x), v0;
  const auto pc = run("prolong", [&] { return std::make_shared<const ProlongedChart>(prolong(cm)); });
  const auto ls = run("leaf_space", [&] { return LocalLeafSpace(pc, z0); });
  AsymmetryOptions ao;
  ao.seed = o.seed;
  ao.jobs = o.jobs;
  const auto asym = run("asymmetry", [&] { return verify_asymmetry(*pc, z0, nsamples, o.tol, ao); });
  DualityOptions dopt;
  dopt.seed = o.seed + 1;
  dopt.jobs = o.jobs;
  const auto dual = run("duality", [&] { return verify_duality(ls, std::max(1, nsamples / 4), o.tol, dopt); });

  Json ja;
  ja["arcs"] = asym.arcs.size();
  ja["l_tangent"] = asym.l_tangent;
  ja["k_tangent"] = asym.k_tangent;
  ja["neither"] = asym.neither;
  ja["misclassified"] = asym.misclassified;
  Json rows = Json::array();
  for (const auto& a : asym.arcs)
    rows.push_back({{"l_residual", a.l_residual},
                    {"k_residual", a.k_residual},
                    {"type", to_string(a.classification.type)}});
  ja["residuals"] = rows;
  ja["passed"] = asym.passed;
  j["asymmetry"] = ja;

  Json jd;
  jd["fibers"] = dual.fibers.size();
  Json frows = Json::array();
  for (const auto& f : dual.fibers)
    frows.push_back({{"distance", f.distance}, {"uniqueness", f.uniqueness}, {"kleaf_spread", f.kleaf_spread}});
  jd["residuals"] = frows;
  jd["max_distance"] = dual.max_distance;
  jd["passed"] = dual.passed;
  j["duality"] = jd;
  j["tol"] = o.tol;

  Json failing = Json::array();
  if (!asym.passed) failing.push_back("asymmetry");
  if (!dual.passed) failing.push_back("duality");
  j["failing"] = failing;
  j["passed"] = failing.empty();
  detail::emit(j, o, out);
  return failing.empty() ? ok : tolerance;
}

/// Steers the full system to random targets of the coordinate quotient.
inline int cmd_steer(const Options& o, std::ostream& out) {
  const ModelFile m = load_model(o.model);
  const ProblemBlock* b = o.problem.empty() ? m.problem_of_kind("steer") : m.problem(o.problem);
  std::vector<std::size_t> keep;
  if (!o.keep.empty()) keep = detail::parse_keep(o.keep, m.chart.dim());
  else if (b && b->keep) keep = *b->keep;
  else throw InvalidArgument("steer needs --keep");
  const auto sys = make_system(m.chart, m.frame, m.frame_names);
  const Vec x0 = detail::to_vec(detail::base_point(m, o, b));
  SteeringOptions so;
  so.seed = static_cast<unsigned>(o.seed);
  so.tol = b && b->tol ? *b->tol : 1e-4;
  so.step = b && b->step ? *b->step : 1e-2;
  Json j;
  j["command"] = "steer";
  j["model"] = m.name;
  j["keep"] = keep;
  Json rows = Json::array();
  bool passed = true;
  if (!o.target.empty()) {
    const Vec target = detail::to_vec(detail::parse_constants(o.target));
    if (static_cast<std::size_t>(target.size()) != keep.size()) throw ParseError("target needs one entry per kept coordinate", 1);
    std::mt19937_64 rng(o.seed);
    const auto r = steer(sys, Projection::coordinates(sys.state_dim(), keep), x0, target, so, rng);
    rows.push_back({{"target", to_json(r.target)}, {"reached", r.reached}, {"error", r.error}});
    passed = r.reached;
  } else {
    const int trials = b && b->samples ? *b->samples : 10;
    const double radius = b && b->radius ? *b->radius : 0.1;
    const auto rep = verify_quotient_controllability(sys, keep, x0, radius, trials, so);
    for (const auto& r : rep.results)
      rows.push_back({{"target", to_json(r.target)}, {"reached", r.reached}, {"error", r.error}});
    j["successes"] = rep.successes;
    j["trials"] = rep.trials;
    if (rep.bracket_generating_checked) j["bracket_generating"] = rep.bracket_generating;
    passed = rep.successes == rep.trials;
  }
  j["results"] = rows;
  j["tol"] = so.tol;
  j["passed"] = passed;
  detail::emit(j, o, out);
  return passed ? ok : tolerance;
}

/// Writes the bundled models to the directory --out and checks that each
/// re-parses to an equal model.
inline int cmd_bundle(const Options& o, std::ostream& out) {
  const std::filesystem::path dir = o.out.empty() ? "." : o.out;
  std::filesystem::create_directories(dir);
  Json j;
  j["command"] = "bundle";
  Json files = Json::array();
  bool all = true;
  for (const auto& m : bundled_models()) {
    const auto path = dir / (m.name + ".json");
    const std::string text = emit_model(m);
    std::ofstream(path) << text;
    const bool same = load_model(path.string()) == m;
    all = all && same;
    files.push_back({{"file", path.filename().string()}, {"round_trip", same}});
  }
  j["files"] = files;
  out << j.dump(2) << "\n";
  return all ? ok : tolerance;
}

inline std::string error_json(const std::string& kind, const std::string& msg, const Json& extra = Json::object()) {
  Json j = extra;
  j["error"] = kind;
  j["message"] = msg;
  return j.dump(2) + "\n";
}

/// Runs a command, mapping errors to exit codes with a JSON message on `err`.
inline int run(const std::string& command, const Options& o, std::ostream& out, std::ostream& err) {
  static const std::vector<std::pair<std::string, std::function<int(const Options&, std::ostream&)>>> table{
      {"analyze", cmd_analyze}, {"geodesic", cmd_geodesic}, {"quotient", cmd_quotient}, {"prolong", cmd_prolong},
      {"duality-check", cmd_duality}, {"steer", cmd_steer}, {"bundle", cmd_bundle}};
  for (const auto& [name, fn] : table) {
    if (name != command) continue;
    try {
      return fn(o, out);
    } catch (const ModelFileError& e) {
      err << error_json("parse", e.what(), {{"line", e.line()}, {"column", e.column()}});
      return parse;
    } catch (const ParseError& e) {
      err << error_json("parse", e.what(), {{"line", 1}, {"column", e.column()}});
      return parse;
    } catch (const InvalidArgument& e) {
      err << error_json("usage", e.what());
      return parse;
    } catch (const PreconditionViolation& e) {
      err << error_json("precondition", e.what(), {{"constraint", e.constraint()}});
      return precondition;
    } catch (const StageError& e) {
      err << error_json("stage", e.what(), {{"stage", e.stage()}});
      return stage;
    } catch (const NotCartan& e) {
      err << error_json("not_cartan", e.what());
      return degenerate;
    } catch (const DegeneratePoint& e) {
      err << error_json("degenerate", e.what());
      return degenerate;
    } catch (const Error& e) {
      err << error_json("stage", e.what(), {{"stage", command}});
      return stage;
    }
  }
  err << error_json("usage", "unknown command '" + command + "'");
  return parse;
}

}  // namespace geoctl::cli
