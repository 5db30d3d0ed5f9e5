#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "geoctl/cartan/five_systems.hpp"
#include "geoctl/extremals/implicit_flow.hpp"
#include "geoctl/extremals/normal.hpp"
#include "geoctl/extremals/residual.hpp"
#include "geoctl/srmetric/metric.hpp"

namespace geoctl {

/// Optimal control problems on the pseudo-product structure, N = X and P = Y.
enum class PmpProblem { E_eE, EmodN_eE, EmodN_eL, LmodN_eL, EmodP_eE, KmodP_eK };
enum class ChartChoice { yv, xw };

inline std::string to_string(PmpProblem id) {
  switch (id) {
    case PmpProblem::E_eE: return "E_eE";
    case PmpProblem::EmodN_eE: return "EmodN_eE";
    case PmpProblem::EmodN_eL: return "EmodN_eL";
    case PmpProblem::LmodN_eL: return "LmodN_eL";
    case PmpProblem::EmodP_eE: return "EmodP_eE";
    case PmpProblem::KmodP_eK: return "KmodP_eK";
  }
  return "?";
}

/// Constrained Hamiltonian system of one problem:
///   H = <p, sum_i u_i X_i(x, w)> + p0 e(u),
///   x' = dH/dp, p' = -dH/dx, dH/du = 0 (frame coefficients and parameters).
struct PmpSystem {
  PmpProblem id = PmpProblem::E_eE;
  ChartChoice chart = ChartChoice::yv;
  OptimalControlProblem problem;
  std::vector<std::string> state_names, costate_names;

  const ControlSystem& sys() const { return problem.sys; }
  const std::vector<std::string>& control_names() const { return problem.sys.control_names; }
  int nparams() const { return problem.sys.param_dim(); }

  double hamiltonian(const Vec& x, const Vec& p, const Vec& u, double p0) const {
    return ocp_hamiltonian(problem, x, p, u, p0);
  }
  /// x' = dH/dp.
  Vec state_equation(const Vec& x, const Vec& u) const {
    Vec f;
    sys().dyn->f(x, u, f);
    return f;
  }
  /// p' = -dH/dx.
  Vec costate_equation(const Vec& x, const Vec& p, const Vec& u) const {
    Mat fx, fu;
    sys().dyn->jac(x, u, fx, fu);
    return -fx.transpose() * p;
  }
  /// dH/du, which vanishes on bi-extremals.
  Vec constraints(const Vec& x, const Vec& p, const Vec& u, double p0) const {
    Mat fx, fu;
    sys().dyn->jac(x, u, fx, fu);
    Vec c = fu.transpose() * p;
    for (int i : problem.energy) c(i) += p0 * u(i);
    return c;
  }
  /// Normal elimination at p0 = -1 with the parameters w given:
  /// penalized u_i = <p, X_i(x, w)>; unpenalized (inert) coefficients are 0.
  Vec normal_controls(const Vec& x, const Vec& p, const Vec& w = Vec()) const {
    const int r = sys().frame_size();
    Vec u = Vec::Zero(sys().control_dim());
    if (nparams() > 0) u.tail(nparams()) = w;
    for (int i : problem.energy)
      if (i < r) u(i) = p.dot(sys().dyn->field_value(i, x, u.tail(nparams())));
    return u;
  }
};

namespace detail {

inline std::vector<std::string> prefixed(const std::string& pre, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(pre + n);
  return out;
}

inline PmpSystem make_pmp(PmpProblem id, ChartChoice chart, ControlSystem sys, std::vector<int> energy) {
  PmpSystem s;
  s.id = id;
  s.chart = chart;
  s.state_names = sys.chart.names;
  s.costate_names = prefixed("p_", sys.chart.names);
  s.problem.sys = std::move(sys);
  s.problem.energy = std::move(energy);
  return s;
}

}  // namespace detail

/// Descriptor for one of the problems. The quotient problems live on their
/// natural chart: N-problems on (x, w), P-problems on (y, v). E_eE accepts both.
inline PmpSystem pmp_system(const LocalLeafSpace& ls, PmpProblem id, ChartChoice chart) {
  const auto five = five_systems(ls);
  const auto xw = Chart({"x1", "x2", "x3", "x4", "x5", "w"});
  switch (id) {
    case PmpProblem::E_eE:
      if (chart == ChartChoice::yv) return detail::make_pmp(id, chart, five.E, {0, 1});
      return detail::make_pmp(id, chart, make_system(xw, {ls.xi_chart(), LocalLeafSpace::eta_chart()}, 0, {"a", "b"}),
                              {0, 1});
    case PmpProblem::EmodN_eE:
    case PmpProblem::EmodN_eL:
    case PmpProblem::LmodN_eL:
      if (chart != ChartChoice::xw) throw Unsupported("pmp_system: " + to_string(id) + " lives on the (x,w)-chart");
      if (id == PmpProblem::LmodN_eL) return detail::make_pmp(id, chart, five.LmodX, {0});
      return detail::make_pmp(id, chart, five.EmodX, id == PmpProblem::EmodN_eE ? std::vector<int>{0, 1} : std::vector<int>{0});
    case PmpProblem::EmodP_eE:
    case PmpProblem::KmodP_eK:
      if (chart != ChartChoice::yv) throw Unsupported("pmp_system: " + to_string(id) + " lives on the (y,v)-chart");
      if (id == PmpProblem::KmodP_eK) return detail::make_pmp(id, chart, five.KmodY, {0});
      return detail::make_pmp(id, chart, five.EmodY, {0, 1});
  }
  throw Unsupported("pmp_system: unknown problem");
}

/// H of (E, e_E) written out in the (y, v)-chart:
///   lambda phi + mu sum_i (cos v c_1i + sin v c_2i) q_i + mu rho phi + q0 (lambda^2 + mu^2) / 2.
inline double cartan_hamiltonian_yv(const ProlongedChart& pc, const Vec& y, double v, const Vec& q, double phi,
                                    double lambda, double mu, double q0) {
  const Vec c1 = CompiledField(pc.base.frame[0])(y), c2 = CompiledField(pc.base.frame[1])(y);
  Vec z(6);
  z << y, v;
  return lambda * phi + mu * (std::cos(v) * c1 + std::sin(v) * c2).dot(q) + mu * pc.rho_at(z) * phi +
         0.5 * q0 * (lambda * lambda + mu * mu);
}

/// pi_Y* eta = cos v eta_1 + sin v eta_2 as a field on Y with parameter v,
/// with exact derivatives.
inline ParamFieldFn fiber_direction_fn(const ProlongedChart& pc) {
  auto f1 = std::make_shared<CompiledField>(pc.base.frame[0]);
  auto f2 = std::make_shared<CompiledField>(pc.base.frame[1]);
  return [f1, f2](const Vec& y, double v) {
    const double c = std::cos(v), s = std::sin(v);
    Vec a, b;
    Mat ja, jb;
    f1->value(y, a);
    f2->value(y, b);
    f1->jacobian(y, ja);
    f2->jacobian(y, jb);
    ParamFieldJet j;
    j.g = c * a + s * b;
    j.gw = -s * a + c * b;
    j.gww = -j.g;
    j.gx = c * ja + s * jb;
    j.gwx = -s * ja + c * jb;
    return j;
  };
}

/// Normal extremal (p0 = -1) of a quotient problem x' = a g(x, w) with energy
/// containing a^2/2, w fixed implicitly by dH/dw = 0. Recorded on the grid
/// of the descriptor: controls (a, [b = 0,] w).
inline BiExtremalArc integrate_quotient_normal(const PmpSystem& s, const ParamFieldFn& g, const Vec& x0, double w0,
                                               const Vec& p0, double T, double step) {
  if (s.nparams() != 1) throw Unsupported("integrate_quotient_normal: needs a one-parameter quotient problem");
  const auto arc = integrate_implicit(quadratic_model(g), x0, Vec::Constant(1, w0), p0, T, step, 1e-8);
  BiExtremalArc out;
  out.p0 = -1.0;
  out.times = arc.times;
  out.states = arc.xs;
  out.costates = arc.ps;
  for (std::size_t k = 0; k < arc.times.size(); ++k) {
    Vec u = s.normal_controls(arc.xs[k], arc.ps[k], arc.ws[k]);
    out.controls.push_back(u);
    out.constraints.push_back(s.constraints(arc.xs[k], arc.ps[k], u, -1.0));
    out.hamiltonian.push_back(arc.K[k]);
  }
  return out;
}

struct ChartTransitionReport {
  double max_gap = 0;  ///< pointwise, after mapping the (x,w) arc to (y,v)
  BiExtremalArc yv, xw;
};

/// Normal extremal of (E, e_E) from (z0, q) integrated in both charts; the
/// (x,w) covector is the pullback (D Psi)^T q.
inline ChartTransitionReport chart_transition(const LocalLeafSpace& ls, const Vec& z0, const Vec& q, double T,
                                              double step) {
  const auto syv = pmp_system(ls, PmpProblem::E_eE, ChartChoice::yv);
  const auto sxw = pmp_system(ls, PmpProblem::E_eE, ChartChoice::xw);
  const auto pt = ls.chartmap(z0);
  Vec s0(6);
  s0 << pt.x, pt.w;
  const Vec p0 = ls.dpsi(pt.x, pt.w).transpose() * q;
  ChartTransitionReport r;
  r.yv = integrate_normal(syv.problem, z0, q, T, step);
  r.xw = integrate_normal(sxw.problem, s0, p0, T, step);
  for (std::size_t k = 0; k < r.xw.size(); ++k) {
    const Vec& s = r.xw.states[k];
    r.max_gap = std::max(r.max_gap, (ls.psi(s.head(5), s(5)) - r.yv.states[k]).norm());
  }
  return r;
}

}  // namespace geoctl
