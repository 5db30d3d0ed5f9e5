#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "geoctl/cartan/trig_field.hpp"
#include "geoctl/extremals/abnormal.hpp"
#include "geoctl/extremals/classify.hpp"
#include "geoctl/flags/derived_flag.hpp"

namespace geoctl {

/// A rank-2 frame (eta1, eta2) on a 5-dimensional chart, certified to have
/// growth (2,3,5) at a base point.
struct CartanModel {
  Chart chart;
  std::vector<PolyVectorField> frame;
  RationalVector base_point;
  DistributionFlag certified;
};

inline CartanModel certify_cartan(const Chart& chart, std::vector<PolyVectorField> frame, const RationalVector& base) {
  if (chart.dim() != 5) throw NotCartan("Cartan model needs a 5-dimensional chart");
  if (frame.size() != 2) throw NotCartan("Cartan model needs a rank-2 frame");
  for (const auto& x : frame)
    if (x.nvars() != 5) throw DimensionMismatch("Cartan model: frame field off the chart");
  CartanModel m;
  m.certified = derived_flag(frame, base, 4);
  if (!is_cartan(m.certified)) {
    std::string g;
    for (int r : m.certified.growth) g += (g.empty() ? "" : ",") + std::to_string(r);
    throw NotCartan("frame has growth (" + g + "), not (2,3,5), at the base point");
  }
  m.chart = chart;
  m.frame = std::move(frame);
  m.base_point = base;
  return m;
}

/// Sampled integral curve.
struct Curve {
  std::vector<double> times;
  std::vector<Vec> points;
};

/// RK4 integral curve of an autonomous field.
inline Curve flow_curve(const NumField& f, const Vec& z0, double T, double step) {
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(T) / step - 1e-9)));
  const double h = T / n;
  Curve c;
  Vec z = z0;
  c.times.push_back(0.0);
  c.points.push_back(z);
  for (int k = 0; k < n; ++k) {
    const Vec k1 = f(z), k2 = f(z + 0.5 * h * k1), k3 = f(z + 0.5 * h * k2), k4 = f(z + h * k3);
    z += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!z.allFinite()) throw IntegrationDiverged("integral curve blew up", k * h);
    c.times.push_back((k + 1) * h);
    c.points.push_back(z);
  }
  return c;
}

/// The Cartan prolongation Z = PD in the chart (y, v): the line through
/// cos v eta1 + sin v eta2 over y. Fields xi = d/dv and
/// eta = cos v eta1 + sin v eta2 + rho d/dv, where rho is the angular speed
/// of the abnormal curve of D through (y, v).
struct ProlongedChart {
  CartanModel base;
  Chart chart;
  TrigRingPtr ring;       ///< ring of rho and the frame
  TrigRingPtr poly_ring;  ///< denominator-free ring of the covector
  ZField xi, eta;
  TrigFrac rho;
  std::vector<Polynomial> covector;  ///< p(y, v) annihilating D^(2) and cos v Y1 + sin v Y2

  /// Numeric fields: xi, eta, [xi,eta], [xi,[xi,eta]], [eta,[xi,eta]],
  /// [xi,[eta,[xi,eta]]], [eta,[eta,[xi,eta]]] and the two brackets of
  /// [eta,[eta,[xi,eta]]] with xi and eta.
  NumFieldPtr xi_f, eta_f, e12, e112, e212, e1212, e2212, e12212, e22212;

  double rho_at(const Vec& z) const { return ring->eval(rho, z); }

  Vec abnormal_covector(const Vec& z) const {
    Vec p(5);
    const auto pt = poly_ring->point(z);
    for (int i = 0; i < 5; ++i) p(i) = covector[static_cast<std::size_t>(i)].eval(pt);
    return p;
  }

  /// Columns spanning E^(2) and E^(3) at z.
  FlagSpans spans(const Vec& z) const {
    FlagSpans s;
    s.e2.resize(6, 3);
    s.e2 << (*xi_f)(z), (*eta_f)(z), (*e12)(z);
    s.e3.resize(6, 5);
    s.e3 << s.e2, (*e112)(z), (*e212)(z);
    return s;
  }
  FlagSpanFn span_fn() const {
    return [this](const Vec& z) { return spans(z); };
  }

  /// Pivot [xi,eta]: costates in E^(2)-perp outside E^(3)-perp.
  AbnormalFrame regular_frame() const {
    AbnormalFrame f{xi_f, eta_f, e12, e112, e212, {}, "[xi,eta]"};
    return f;
  }
  /// Pivot [eta,[eta,[xi,eta]]]: costates annihilating xi, eta, [xi,eta],
  /// [eta,[xi,eta]] and the pivot. Their arcs are tangent to K.
  AbnormalFrame irregular_frame() const {
    AbnormalFrame f{xi_f, eta_f, e2212, e12212, e22212, {{"[xi,eta]", e12}, {"[eta,[xi,eta]]", e212}},
                    "[eta,[eta,[xi,eta]]]"};
    return f;
  }

  /// Columns whose annihilator holds the initial costates of irregular_frame().
  Mat k_span(const Vec& z) const {
    Mat a(6, 6);
    a << spans(z).e3, (*e2212)(z);
    return a;
  }

  DistributionFlag flag(const Vec& z, int maxdepth = 6, double tol = 1e-6) const {
    FlagBuilder<ZField> b({xi, eta}, {"xi", "eta"});
    return b.evaluate(to_std(z), maxdepth, tol);
  }

  std::string rho_string() const {
    return ring->to_string(rho, base.chart.names);
  }
};

namespace detail {

using RingVec = std::vector<Polynomial>;

inline RingVec lift_field(const TrigRing& r, const PolyVectorField& x) {
  RingVec out;
  for (const auto& c : x.components()) out.push_back(r.lift(c));
  return out;
}

inline Polynomial pair(const TrigRing& r, const RingVec& p, const RingVec& x) {
  Polynomial acc(r.nvars());
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * x[i];
  return r.reduce(acc);
}

inline RingVec combine(const TrigRing& r, const RingVec& a, const RingVec& b) {
  RingVec out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(r.reduce(r.c() * a[i] + r.s() * b[i]));
  return out;
}

inline Polynomial det(const TrigRing& r, const std::vector<RingVec>& m, std::vector<std::size_t> cols) {
  const std::size_t k = cols.size();
  const std::size_t row = m.size() - k;
  if (k == 1) return m[row][cols[0]];
  Polynomial acc(r.nvars());
  for (std::size_t j = 0; j < k; ++j) {
    if (m[row][cols[j]].is_zero()) continue;
    std::vector<std::size_t> rest = cols;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
    Polynomial t = r.reduce(m[row][cols[j]] * det(r, m, rest));
    if (j % 2) acc -= t;
    else acc += t;
  }
  return r.reduce(acc);
}

// Removes the common monomial and rational content of a list.
inline void strip_content(std::vector<Polynomial*> ps) {
  Polynomial::Exponent mono;
  mpz_class num = 0, den = 1;
  bool first = true;
  for (auto* p : ps) {
    if (p->is_zero()) continue;
    const auto m = p->monomial_content();
    if (first) mono = m;
    for (std::size_t i = 0; i < mono.size(); ++i) mono[i] = std::min(mono[i], m[i]);
    const Rational g = p->rational_content();
    num = gcd(num, mpz_class(g.get_num()));
    den = lcm(den, mpz_class(g.get_den()));
    first = false;
  }
  if (first) return;
  Rational g(num, den);
  g.canonicalize();
  for (auto* p : ps) {
    if (p->is_zero()) continue;
    *p = p->divide_monomial(mono) * Rational(1 / g);
  }
}

inline NumFieldPtr compile(const ZField& f) { return std::make_shared<ZNumField>(f); }

}  // namespace detail

/// Builds the prolonged frame. rho = (h1 h2' - h2 h1') / (h1^2 + h2^2) with
/// h_i = <p, [X_i,[X1,X2]]>, p = p(y, v) the covector annihilating
/// X1, X2, [X1,X2] and cos v [X1,[X1,X2]] + sin v [X2,[X1,X2]], and h_i' the
/// derivative along cos v X1 + sin v X2 with the costate flow.
inline ProlongedChart prolong(const CartanModel& model) {
  using detail::RingVec;
  const std::size_t n = 5;
  auto pr = std::make_shared<const TrigRing>(n, Polynomial::constant(n + 2, 1));
  const TrigRing& r = *pr;
  const auto& x1 = model.frame[0];
  const auto& x2 = model.frame[1];
  const auto x3 = lie_bracket(x1, x2);
  const auto y1 = lie_bracket(x1, x3), y2 = lie_bracket(x2, x3);
  const RingVec X1 = detail::lift_field(r, x1), X2 = detail::lift_field(r, x2), X3 = detail::lift_field(r, x3);
  const RingVec Y1 = detail::lift_field(r, y1), Y2 = detail::lift_field(r, y2);
  const RingVec Yv = detail::combine(r, Y1, Y2);

  const std::vector<RingVec> rows{X1, X2, X3, Yv};
  RingVec p;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < n; ++j)
      if (j != k) cols.push_back(j);
    Polynomial d = detail::det(r, rows, cols);
    p.push_back(k % 2 ? -d : d);
  }
  {
    std::vector<Polynomial*> ptrs;
    for (auto& q : p) ptrs.push_back(&q);
    detail::strip_content(ptrs);
  }

  const Polynomial h1 = detail::pair(r, p, Y1), h2 = detail::pair(r, p, Y2);
  const RingVec Z1 = detail::combine(r, detail::lift_field(r, lie_bracket(x1, y1)), detail::lift_field(r, lie_bracket(x2, y1)));
  const RingVec Z2 = detail::combine(r, detail::lift_field(r, lie_bracket(x1, y2)), detail::lift_field(r, lie_bracket(x2, y2)));
  const Polynomial hd1 = detail::pair(r, p, Z1), hd2 = detail::pair(r, p, Z2);
  Polynomial num = r.reduce(h1 * hd2 - h2 * hd1);
  Polynomial den = r.reduce(h1 * h1 + h2 * h2);
  if (den.is_zero()) throw DegeneratePoint("characteristic degeneracy: h1 = h2 = 0 identically", 0.0);

  TrigRingPtr ring;
  TrigFrac rho;
  if (auto q = divide_exact(num, den); q || num.is_zero()) {
    ring = pr;
    rho = r.make(q ? *q : num);
  } else {
    detail::strip_content({&num, &den});
    if (den.is_constant()) {
      ring = pr;
      rho = r.make(num * Rational(1 / den.terms().begin()->second));
    } else {
      ring = std::make_shared<const TrigRing>(n, den);
      rho = ring->make(num, 1);
    }
  }

  ProlongedChart pc;
  pc.base = model;
  {
    auto names = model.chart.names;
    names.push_back("v");
    pc.chart = Chart(names);
  }
  pc.ring = ring;
  pc.poly_ring = pr;
  pc.rho = rho;
  pc.covector = p;
  pc.xi = ZField::vertical(ring);
  std::vector<TrigFrac> ec;
  for (std::size_t i = 0; i < n; ++i)
    ec.push_back(ring->make(ring->c() * ring->lift(x1[i]) + ring->s() * ring->lift(x2[i])));
  ec.push_back(rho);
  pc.eta = ZField(ring, ec);

  // Generic nondegeneracy at the base point: h1^2 + h2^2 and the rho
  // denominator must not vanish on the fiber.
  Vec z(6);
  for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i)) = model.base_point[i].get_d();
  for (int k = 0; k < 12; ++k) {
    z(5) = M_PI * k / 12.0;
    const auto pt = ring->point(z);
    if (std::abs(den.eval(pt)) < 1e-12 || std::abs(ring->denominator().eval(pt)) < 1e-12)
      throw DegeneratePoint("characteristic degeneracy on the fiber over the base point", z(5));
  }

  const ZField b12 = lie_bracket(pc.xi, pc.eta);
  const ZField b212 = lie_bracket(pc.eta, b12);
  pc.xi_f = detail::compile(pc.xi);
  pc.eta_f = detail::compile(pc.eta);
  pc.e12 = detail::compile(b12);
  pc.e112 = detail::compile(lie_bracket(pc.xi, b12));
  pc.e212 = detail::compile(b212);
  pc.e1212 = detail::compile(lie_bracket(pc.xi, b212));
  const ZField b2212 = lie_bracket(pc.eta, b212);
  pc.e2212 = detail::compile(b2212);
  pc.e12212 = detail::compile(lie_bracket(pc.xi, b2212));
  pc.e22212 = detail::compile(lie_bracket(pc.eta, b2212));
  return pc;
}

/// Integral curve of eta from z0: the lift of an abnormal curve of D.
inline Curve k_leaf(const ProlongedChart& pc, const Vec& z0, double T, double step = 1e-3) {
  if (z0.size() != 6) throw DimensionMismatch("k_leaf: point must be (y, v)");
  return flow_curve(*pc.eta_f, z0, T, step);
}

/// Initial covector of D matching the leaf through z: p(y, v), oriented so
/// that the characteristic control is +(cos v, sin v).
inline Vec matched_covector(const ProlongedChart& pc, const Vec& z) {
  Vec p = pc.abnormal_covector(z);
  const Vec y = z.head(5);
  const auto f = abnormal_frame(pc.base.frame[0], pc.base.frame[1]);
  const double h1 = p.dot((*f.y1)(y)), h2 = p.dot((*f.y2)(y));
  if (h2 * std::cos(z(5)) - h1 * std::sin(z(5)) < 0) p = -p;
  return p / p.norm();
}

}  // namespace geoctl
