#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoctl/core/error.hpp"
#include "geoctl/core/rational.hpp"
#include "geoctl/vecfield/parser.hpp"
#include "geoctl/vecfield/vector_field.hpp"

namespace geoctl {

/// Malformed model file; line and column are 1-based positions in the file text.
class ModelFileError : public ParseError {
 public:
  ModelFileError(const std::string& msg, std::size_t line, std::size_t column)
      : ParseError("line " + std::to_string(line) + ": " + msg, column), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Initial data of one analysis: points, covectors, horizons, steps, tolerances.
struct ProblemBlock {
  std::string kind;  ///< normal, abnormal, steer, duality
  std::optional<std::vector<double>> point, covector, target;
  std::optional<double> horizon, step, tol, fiber, radius;
  std::optional<int> samples;
  std::optional<std::vector<std::size_t>> keep;
  std::optional<std::vector<int>> energy;

  friend bool operator==(const ProblemBlock&, const ProblemBlock&) = default;
};

struct ModelFile {
  std::string name;
  Chart chart;
  std::vector<std::string> frame_names;
  std::vector<std::vector<std::string>> frame_text;  ///< as written
  std::vector<PolyVectorField> frame;
  std::vector<std::string> metric;  ///< frame names declared orthonormal
  RationalVector point;             ///< default base point
  std::map<std::string, ProblemBlock> problems;

  int rank() const { return static_cast<int>(frame.size()); }

  const ProblemBlock* problem(const std::string& key) const {
    auto it = problems.find(key);
    return it == problems.end() ? nullptr : &it->second;
  }
  /// First block of the given kind, by key order.
  const ProblemBlock* problem_of_kind(const std::string& kind) const {
    for (const auto& [k, b] : problems)
      if (b.kind == kind) return &b;
    return nullptr;
  }

  /// Fields of the metric frame, in declaration order.
  std::vector<PolyVectorField> metric_frame() const {
    std::vector<PolyVectorField> out;
    for (const auto& m : metric)
      for (std::size_t i = 0; i < frame_names.size(); ++i)
        if (frame_names[i] == m) out.push_back(frame[i]);
    return out;
  }

  /// Semantic equality: expressions compared as polynomials.
  friend bool operator==(const ModelFile& a, const ModelFile& b) {
    return a.name == b.name && a.chart == b.chart && a.frame_names == b.frame_names && a.frame == b.frame &&
           a.metric == b.metric && a.point == b.point && a.problems == b.problems;
  }
};

namespace detail {

struct TextLocator {
  std::string text;

  std::pair<std::size_t, std::size_t> line_col(std::size_t offset) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return {line, col};
  }

  /// Offset of the first occurrence of `needle` at or after the occurrence
  /// of `anchor` (both as JSON string literals); npos if absent.
  std::size_t find(const std::string& needle, const std::string& anchor = {}) const {
    std::size_t from = 0;
    if (!anchor.empty()) {
      const auto a = text.find(nlohmann::json(anchor).dump());
      if (a != std::string::npos) from = a;
    }
    return text.find(nlohmann::json(needle).dump(), from);
  }

  [[noreturn]] void fail(const std::string& msg, const std::string& key, const std::string& anchor = {}) const {
    const auto off = key.empty() ? std::string::npos : find(key, anchor);
    if (off == std::string::npos) throw ModelFileError(msg, 1, 1);
    const auto [l, c] = line_col(off);
    throw ModelFileError(msg, l, c);
  }
};

inline Rational parse_rational(const nlohmann::json& v) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_number()) return from_double(v.get<double>());
  if (!v.is_string()) throw InvalidArgument("expected a number or a rational string");
  Rational q;
  if (q.set_str(v.get<std::string>(), 10) != 0) throw InvalidArgument("malformed rational '" + v.get<std::string>() + "'");
  q.canonicalize();
  return q;
}

inline std::vector<double> number_list(const nlohmann::json& v) {
  if (!v.is_array()) throw InvalidArgument("expected an array");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(to_double(parse_rational(e)));
  return out;
}

inline ProblemBlock parse_block(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("problem block must be an object");
  ProblemBlock b;
  for (const auto& [k, v] : j.items()) {
    if (k == "kind") b.kind = v.get<std::string>();
    else if (k == "point") b.point = number_list(v);
    else if (k == "covector") b.covector = number_list(v);
    else if (k == "target") b.target = number_list(v);
    else if (k == "horizon") b.horizon = v.get<double>();
    else if (k == "step") b.step = v.get<double>();
    else if (k == "tol") b.tol = v.get<double>();
    else if (k == "fiber") b.fiber = v.get<double>();
    else if (k == "radius") b.radius = v.get<double>();
    else if (k == "samples") b.samples = v.get<int>();
    else if (k == "keep") b.keep = v.get<std::vector<std::size_t>>();
    else if (k == "energy") b.energy = v.get<std::vector<int>>();
    else throw InvalidArgument("unknown problem field '" + k + "'");
  }
  if (b.kind.empty()) throw InvalidArgument("problem block needs a kind");
  return b;
}

inline nlohmann::ordered_json emit_block(const ProblemBlock& b) {
  nlohmann::ordered_json j;
  j["kind"] = b.kind;
  if (b.point) j["point"] = *b.point;
  if (b.covector) j["covector"] = *b.covector;
  if (b.target) j["target"] = *b.target;
  if (b.horizon) j["horizon"] = *b.horizon;
  if (b.step) j["step"] = *b.step;
  if (b.tol) j["tol"] = *b.tol;
  if (b.fiber) j["fiber"] = *b.fiber;
  if (b.radius) j["radius"] = *b.radius;
  if (b.samples) j["samples"] = *b.samples;
  if (b.keep) j["keep"] = *b.keep;
  if (b.energy) j["energy"] = *b.energy;
  return j;
}

}  // namespace detail

/// Reads a model from JSON text:
///   {"name", "dimension", "coordinates": [..], "rank",
///    "frames": {"X1": [expr, ..], ..}, "metric": {"orthonormal": [..]},
///    "point": [..], "problems": {key: {"kind", ..}}}
/// Expressions use the polynomial grammar over the declared coordinates.
inline ModelFile parse_model(const std::string& text) {
  const detail::TextLocator loc{text};
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [l, c] = loc.line_col(e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    throw ModelFileError("invalid JSON: " + what.substr(what.find(':') + 2), l, c);
  }
  if (!j.is_object()) throw ModelFileError("model must be a JSON object", 1, 1);
  for (const char* key : {"coordinates", "frames"})
    if (!j.contains(key)) throw ModelFileError(std::string("missing field '") + key + "'", 1, 1);

  ModelFile m;
  try {
    m.name = j.value("name", std::string("model"));
    m.chart = Chart(j.at("coordinates").get<std::vector<std::string>>());
  } catch (const std::exception& e) {
    loc.fail(e.what(), "coordinates");
  }
  const std::size_t n = m.chart.dim();
  if (j.contains("dimension") && j["dimension"].get<std::size_t>() != n)
    loc.fail("dimension " + j["dimension"].dump() + " differs from the " + std::to_string(n) + " coordinates",
             "dimension");

  const PolynomialParser parser(m.chart.names);
  if (!j["frames"].is_object() || j["frames"].empty()) loc.fail("frames must be a nonempty object", "frames");
  for (const auto& [fname, comps] : j["frames"].items()) {
    if (!comps.is_array() || comps.size() != n)
      loc.fail("frame '" + fname + "' needs " + std::to_string(n) + " components", fname, "frames");
    std::vector<Polynomial> ps;
    std::vector<std::string> texts;
    for (const auto& c : comps) {
      if (!c.is_string()) loc.fail("frame '" + fname + "': components must be strings", fname, "frames");
      const auto s = c.get<std::string>();
      try {
        ps.push_back(parser.parse(s));
      } catch (const ParseError& e) {
        const std::string msg = "frame '" + fname + "': " + e.message();
        const auto off = loc.find(s, fname);
        if (off == std::string::npos) throw ModelFileError(msg, 1, 1);
        const auto [l, col] = loc.line_col(off);
        throw ModelFileError(msg, l, col + e.column());
      }
      texts.push_back(s);
    }
    m.frame_names.push_back(fname);
    m.frame_text.push_back(texts);
    m.frame.emplace_back(ps);
  }
  if (j.contains("rank") && j["rank"].get<int>() != m.rank())
    loc.fail("declared rank " + j["rank"].dump() + " differs from the " + std::to_string(m.rank()) + " frames", "rank");

  if (j.contains("metric")) {
    const auto& mt = j["metric"];
    if (!mt.is_object() || !mt.contains("orthonormal")) loc.fail("metric needs an 'orthonormal' frame list", "metric");
    m.metric = mt["orthonormal"].get<std::vector<std::string>>();
    for (const auto& name : m.metric)
      if (std::find(m.frame_names.begin(), m.frame_names.end(), name) == m.frame_names.end())
        loc.fail("metric refers to unknown frame '" + name + "'", "metric");
  } else {
    m.metric = m.frame_names;
  }

  if (j.contains("point")) {
    try {
      for (const auto& e : j["point"]) m.point.push_back(detail::parse_rational(e));
    } catch (const std::exception& e) {
      loc.fail(e.what(), "point");
    }
    if (m.point.size() != n) loc.fail("point needs " + std::to_string(n) + " coordinates", "point");
  } else {
    m.point.assign(n, Rational(0));
  }

  if (j.contains("problems")) {
    for (const auto& [key, blk] : j["problems"].items()) {
      try {
        m.problems[key] = detail::parse_block(blk);
      } catch (const std::exception& e) {
        loc.fail("problem '" + key + "': " + e.what(), key, "problems");
      }
      const auto& b = m.problems[key];
      for (const auto* v : {&b.point, &b.covector})
        if (*v && (*v)->size() != n) loc.fail("problem '" + key + "': vectors need " + std::to_string(n) + " entries", key, "problems");
    }
  }
  return m;
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

/// Canonical JSON text; expressions are re-printed from the parsed polynomials.
inline std::string emit_model(const ModelFile& m) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  j["dimension"] = m.chart.dim();
  j["coordinates"] = m.chart.names;
  j["rank"] = m.rank();
  nlohmann::ordered_json frames = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < m.frame.size(); ++i) {
    std::vector<std::string> comps;
    for (const auto& c : m.frame[i].components()) comps.push_back(c.to_string(m.chart.names));
    frames[m.frame_names[i]] = comps;
  }
  j["frames"] = frames;
  j["metric"] = {{"orthonormal", m.metric}};
  std::vector<std::string> pt;
  for (const auto& q : m.point) pt.push_back(q.get_str());
  j["point"] = pt;
  nlohmann::ordered_json probs = nlohmann::ordered_json::object();
  for (const auto& [k, b] : m.problems) probs[k] = detail::emit_block(b);
  j["problems"] = probs;
  return j.dump(2) + "\n";
}

/// Model from frames given as expression strings.
inline ModelFile make_model(const std::string& name, const std::vector<std::string>& coords,
                            const std::vector<std::pair<std::string, std::vector<std::string>>>& frames) {
  ModelFile m;
  m.name = name;
  m.chart = Chart(coords);
  const PolynomialParser parser(coords);
  for (const auto& [fname, comps] : frames) {
    if (comps.size() != coords.size()) throw DimensionMismatch("make_model: frame arity differs from dimension");
    std::vector<Polynomial> ps;
    for (const auto& c : comps) ps.push_back(parser.parse(c));
    m.frame_names.push_back(fname);
    m.frame_text.push_back(comps);
    m.frame.emplace_back(ps);
    m.metric.push_back(fname);
  }
  m.point.assign(coords.size(), Rational(0));
  return m;
}

}  // namespace geoctl
