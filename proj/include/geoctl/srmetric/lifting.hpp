#pragma once

#include <functional>
#include <vector>

#include "geoctl/cartan/duality.hpp"
#include "geoctl/extremals/arc.hpp"
#include "geoctl/srmetric/pmp.hpp"

namespace geoctl {

/// Abnormal bi-extremal of E/pi_X from a cone-system abnormal extremal:
/// controls (a, b, w) with a = 1 and b = 0.
inline BiExtremalArc quotient_abnormal_arc(const LocalLeafSpace& ls, const Vec& x0, double w0, const Vec& p0, double T,
                                           double step) {
  const auto arc = integrate_implicit(linear_model(ls.cone_fn()), x0, Vec::Constant(1, w0), p0, T, step, 1e-7);
  BiExtremalArc out;
  out.p0 = 0.0;
  out.times = arc.times;
  out.states = arc.xs;
  out.costates = arc.ps;
  for (std::size_t k = 0; k < arc.times.size(); ++k) {
    Vec u(3);
    u << 1.0, 0.0, arc.ws[k](0);
    out.controls.push_back(u);
    Vec c(2);
    c << arc.K[k], arc.Kw[k](0);
    out.constraints.push_back(c);
    out.hamiltonian.push_back(arc.K[k]);
  }
  return out;
}

/// Forgets the K-coefficient b: controls (a, b, w) -> (a, w).
inline BiExtremalArc reduce_biextremal(const BiExtremalArc& arc) {
  BiExtremalArc out = arc;
  for (auto& u : out.controls) {
    if (u.size() != 3) throw DimensionMismatch("reduce_biextremal: controls must be (a, b, w)");
    Vec r(2);
    r << u(0), u(2);
    u = r;
  }
  return out;
}

/// Re-attaches b (default 0): controls (a, w) -> (a, b, w).
inline BiExtremalArc extend_biextremal(const BiExtremalArc& arc, const std::vector<double>& b = {}) {
  if (!b.empty() && b.size() != arc.size()) throw DimensionMismatch("extend_biextremal: one b value per sample");
  BiExtremalArc out = arc;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Vec& u = arc.controls[k];
    if (u.size() != 2) throw DimensionMismatch("extend_biextremal: controls must be (a, w)");
    Vec e(3);
    e << u(0), b.empty() ? 0.0 : b[k], u(1);
    out.controls[k] = e;
  }
  return out;
}

/// Grid derivative: five-point central stencil inside, second order at the ends.
inline std::vector<double> grid_derivative(const std::vector<double>& v, double h) {
  const std::size_t n = v.size();
  if (n < 5) throw InvalidArgument("grid_derivative: need at least five samples");
  std::vector<double> d(n);
  for (std::size_t k = 2; k + 2 < n; ++k) d[k] = (v[k - 2] - 8 * v[k - 1] + 8 * v[k + 1] - v[k + 2]) / (12 * h);
  for (std::size_t k : {std::size_t{0}, std::size_t{1}}) d[k] = (-3 * v[k] + 4 * v[k + 1] - v[k + 2]) / (2 * h);
  for (std::size_t k : {n - 2, n - 1}) d[k] = (3 * v[k] - 4 * v[k - 1] + v[k - 2]) / (2 * h);
  return d;
}

/// Lift of an abnormal bi-extremal of E/pi_X (controls (a, b, w)) to E in the
/// (x, w)-chart: state (x, w), costate (p, psi = 0), controls (a, b~) with
/// b~ = w' - a f(x, w) so that the lifted state follows w. f is the
/// dw-component of xi.
inline BiExtremalArc lift_abnormal(const BiExtremalArc& arc, const std::function<double(const Vec&, double)>& f,
                                   double lipschitz = 1e3) {
  const std::size_t n = arc.size();
  if (n < 5) throw InvalidArgument("lift_abnormal: need at least five samples");
  if (!arc.abnormal()) throw InvalidArgument("lift_abnormal: arc is not abnormal");
  const double h = (arc.times.back() - arc.times.front()) / static_cast<double>(n - 1);
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = arc.controls[k](arc.controls[k].size() - 1);
  for (std::size_t k = 1; k < n; ++k) {
    const double q = std::abs(w[k] - w[k - 1]) / h;
    if (!(q <= lipschitz)) throw NotLipschitz("lift_abnormal: difference quotient of w exceeds the Lipschitz bound");
  }
  const auto wd = grid_derivative(w, h);
  BiExtremalArc out;
  out.p0 = 0.0;
  out.times = arc.times;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec& x = arc.states[k];
    const double a = arc.controls[k](0);
    Vec s(x.size() + 1), p(x.size() + 1), u(2);
    s << x, w[k];
    p << arc.costates[k], 0.0;
    u << a, wd[k] - a * f(x, w[k]);
    out.states.push_back(s);
    out.costates.push_back(p);
    out.controls.push_back(u);
    out.hamiltonian.push_back(0.0);
  }
  return out;
}

inline BiExtremalArc lift_abnormal(const BiExtremalArc& arc, const LocalLeafSpace& ls, double lipschitz = 1e3) {
  return lift_abnormal(arc, [&ls](const Vec& x, double w) { return ls.jet(x, w).f; }, lipschitz);
}

/// Transfers an arc of E from the (x, w)-chart to the (y, v)-chart:
/// z = Psi(x, w), covector (D Psi)^{-T} (p, psi). The controls (frame
/// coefficients of xi, eta) are chart independent.
inline BiExtremalArc to_prolonged_chart(const LocalLeafSpace& ls, const BiExtremalArc& arc) {
  BiExtremalArc out = arc;
  for (std::size_t k = 0; k < arc.size(); ++k) {
    const Vec& s = arc.states[k];
    const Mat d = ls.dpsi(s.head(5), s(5));
    out.states[k] = ls.psi(s.head(5), s(5));
    out.costates[k] = d.transpose().partialPivLu().solve(arc.costates[k]);
  }
  out.constraints.clear();
  return out;
}

}  // namespace geoctl
