#pragma once

#include <set>
#include <string>
#include <vector>

#include "geoctl/core/error.hpp"
#include "geoctl/vecfield/polynomial.hpp"

namespace geoctl {

/// Coordinate chart: dimension and distinct variable names.
struct Chart {
  std::vector<std::string> names;

  Chart() = default;
  explicit Chart(std::vector<std::string> n) : names(std::move(n)) {
    if (names.empty()) throw InvalidArgument("chart must have positive dimension");
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) throw InvalidArgument("chart variable names must be distinct");
  }

  /// Chart with names prefix1..prefixN.
  static Chart numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 1; i <= n; ++i) v.push_back(prefix + std::to_string(i));
    return Chart(v);
  }

  std::size_t dim() const { return names.size(); }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw InvalidArgument("unknown coordinate '" + name + "'");
  }

  friend bool operator==(const Chart& a, const Chart& b) { return a.names == b.names; }
};

/// Vector field sum_j components[j] d/dx_j with polynomial components.
class PolyVectorField {
 public:
  PolyVectorField() = default;
  explicit PolyVectorField(std::vector<Polynomial> comps) : comps_(std::move(comps)) {
    for (const auto& c : comps_)
      if (c.nvars() != comps_.size())
        throw DimensionMismatch("vector field component count must equal the chart dimension");
  }

  static PolyVectorField zero(std::size_t n) {
    return PolyVectorField(std::vector<Polynomial>(n, Polynomial(n)));
  }

  /// d/dx_i.
  static PolyVectorField coordinate(std::size_t n, std::size_t i) {
    auto f = zero(n);
    f.comps_.at(i) = Polynomial::constant(n, 1);
    return f;
  }

  std::size_t nvars() const { return comps_.size(); }
  const std::vector<Polynomial>& components() const { return comps_; }
  const Polynomial& operator[](std::size_t i) const { return comps_[i]; }

  bool is_zero() const {
    for (const auto& c : comps_)
      if (!c.is_zero()) return false;
    return true;
  }

  /// Directional derivative X(f) = sum_j X_j df/dx_j.
  Polynomial apply(const Polynomial& f) const {
    if (f.nvars() != nvars()) throw DimensionMismatch("apply: function on a different chart");
    Polynomial r(nvars());
    for (std::size_t j = 0; j < nvars(); ++j)
      if (!comps_[j].is_zero()) r += comps_[j] * f.derivative(j);
    return r;
  }

  template <class T>
  std::vector<T> eval(const std::vector<T>& x) const {
    std::vector<T> out;
    out.reserve(comps_.size());
    for (const auto& c : comps_) out.push_back(c.eval(x));
    return out;
  }

  PolyVectorField& operator+=(const PolyVectorField& o) {
    check(o);
    for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
    return *this;
  }
  PolyVectorField& operator-=(const PolyVectorField& o) {
    check(o);
    for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= o.comps_[i];
    return *this;
  }
  friend PolyVectorField operator+(PolyVectorField a, const PolyVectorField& b) { return a += b; }
  friend PolyVectorField operator-(PolyVectorField a, const PolyVectorField& b) { return a -= b; }
  friend PolyVectorField operator*(const Polynomial& f, const PolyVectorField& x) {
    if (f.nvars() != x.nvars()) throw DimensionMismatch("function times field on different charts");
    std::vector<Polynomial> c;
    for (const auto& comp : x.comps_) c.push_back(f * comp);
    return PolyVectorField(std::move(c));
  }
  friend PolyVectorField operator*(const Rational& s, const PolyVectorField& x) {
    std::vector<Polynomial> c;
    for (const auto& comp : x.comps_) c.push_back(comp * s);
    return PolyVectorField(std::move(c));
  }
  friend bool operator==(const PolyVectorField& a, const PolyVectorField& b) { return a.comps_ == b.comps_; }

  std::string to_string(const std::vector<std::string>& names) const {
    std::string s;
    for (std::size_t j = 0; j < comps_.size(); ++j) {
      if (comps_[j].is_zero()) continue;
      if (!s.empty()) s += " + ";
      s += "(" + comps_[j].to_string(names) + ")*d/d" + names[j];
    }
    return s.empty() ? "0" : s;
  }

 private:
  void check(const PolyVectorField& o) const {
    if (o.nvars() != nvars()) throw DimensionMismatch("vector fields on different charts");
  }
  std::vector<Polynomial> comps_;
};

/// [X,Y] = X(Y) - Y(X).
inline PolyVectorField lie_bracket(const PolyVectorField& x, const PolyVectorField& y) {
  if (x.nvars() != y.nvars()) throw DimensionMismatch("lie_bracket: fields on different charts");
  std::vector<Polynomial> c;
  c.reserve(x.nvars());
  for (std::size_t k = 0; k < x.nvars(); ++k) c.push_back(x.apply(y[k]) - y.apply(x[k]));
  return PolyVectorField(std::move(c));
}

/// Covector p = sum p_j dx_j at a base point.
template <class T>
struct Covector {
  std::vector<T> base;
  std::vector<T> components;

  Covector() = default;
  Covector(std::vector<T> b, std::vector<T> c) : base(std::move(b)), components(std::move(c)) {
    if (base.size() != components.size()) throw DimensionMismatch("covector base and components differ in length");
  }
};

/// <p, X(p.base)>.
template <class T>
T pairing(const Covector<T>& p, const PolyVectorField& x) {
  if (p.base.size() != x.nvars()) throw DimensionMismatch("pairing: covector and field dimensions differ");
  const auto v = x.eval(p.base);
  T acc = T(0);
  for (std::size_t j = 0; j < v.size(); ++j) acc = acc + p.components[j] * v[j];
  return acc;
}

/// A field on a quotient chart whose components may depend on the dropped
/// coordinates, which become formal parameters. Component polynomials live in
/// the ring over (chart.names ++ params).
struct ProjectedField {
  Chart chart;
  std::vector<std::string> params;
  std::vector<Polynomial> components;

  std::size_t nvars() const { return chart.dim() + params.size(); }

  bool depends_on_params() const {
    for (const auto& c : components)
      for (const auto& [e, q] : c.terms())
        for (std::size_t i = chart.dim(); i < e.size(); ++i)
          if (e[i]) return true;
    return false;
  }

  bool is_zero() const {
    for (const auto& c : components)
      if (!c.is_zero()) return false;
    return true;
  }
};

/// Pushforward of X under the coordinate projection onto `keep` (0-based
/// indices, kept in increasing order). Dropped coordinates are re-labeled as
/// parameters, ordered as in the source chart.
inline ProjectedField pushforward_projection(const PolyVectorField& x, const Chart& chart,
                                             const std::vector<std::size_t>& keep) {
  const std::size_t n = x.nvars();
  if (chart.dim() != n) throw DimensionMismatch("pushforward_projection: chart and field dimensions differ");
  std::vector<bool> kept(n, false);
  for (auto k : keep) {
    if (k >= n) throw DimensionMismatch("pushforward_projection: keep index out of range");
    kept[k] = true;
  }
  std::vector<std::string> qnames, params;
  std::vector<int> map(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (kept[i]) {
      map[i] = next++;
      qnames.push_back(chart.names[i]);
    }
  for (std::size_t i = 0; i < n; ++i)
    if (!kept[i]) {
      map[i] = next++;
      params.push_back(chart.names[i]);
    }
  ProjectedField out;
  out.chart = Chart(qnames);
  out.params = params;
  for (std::size_t i = 0; i < n; ++i)
    if (kept[i]) out.components.push_back(x[i].remap(n, map));
  return out;
}

}  // namespace geoctl
