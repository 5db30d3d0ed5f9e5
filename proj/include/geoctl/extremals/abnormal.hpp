#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "geoctl/extremals/arc.hpp"
#include "geoctl/vecfield/numfield.hpp"
#include "geoctl/vecfield/vector_field.hpp"

namespace geoctl {

/// Data for abnormal extremals of a rank-2 frame {X1, X2}. The pivot W
/// (default [X1,X2]) is the field whose annihilation by p is preserved by the
/// characteristic control u = (h2, -h1)/|.|, h_i = <p, [X_i, W]>.
struct AbnormalFrame {
  NumFieldPtr x1, x2, w, y1, y2;
  /// Further fields p must annihilate initially (checked, with names).
  std::vector<std::pair<std::string, NumFieldPtr>> extra;
  std::string w_name = "[X1,X2]";
};

inline AbnormalFrame abnormal_frame(const PolyVectorField& x1, const PolyVectorField& x2) {
  const auto w = lie_bracket(x1, x2);
  AbnormalFrame f;
  f.x1 = std::make_shared<CompiledField>(x1);
  f.x2 = std::make_shared<CompiledField>(x2);
  f.w = std::make_shared<CompiledField>(w);
  f.y1 = std::make_shared<CompiledField>(lie_bracket(x1, w));
  f.y2 = std::make_shared<CompiledField>(lie_bracket(x2, w));
  return f;
}

struct AbnormalOptions {
  double step = 1e-3;
  double precondition_tol = 1e-8;  ///< relative to |p| max(1, |X|)
  double degeneracy_tol = 1e-10;   ///< on |(h1,h2)| / |p|
};

namespace detail {

struct AbnormalFlow {
  const AbnormalFrame& f;
  double degeneracy_tol;

  Vec control(const Vec& x, const Vec& p, double t) const {
    Vec a, b;
    f.y1->value(x, a);
    f.y2->value(x, b);
    const double h1 = p.dot(a), h2 = p.dot(b);
    const double nrm = std::hypot(h1, h2);
    if (!(nrm > degeneracy_tol * p.norm()))
      throw DegeneratePoint("characteristic control degenerate (h1 = h2 = 0)", t);
    Vec u(2);
    u << h2 / nrm, -h1 / nrm;
    return u;
  }

  void rhs(const Vec& z, double t, Vec& dz) const {
    const auto n = z.size() / 2;
    const Vec x = z.head(n), p = z.tail(n);
    const Vec u = control(x, p, t);
    Vec v1, v2;
    Mat j1, j2;
    f.x1->value(x, v1);
    f.x2->value(x, v2);
    f.x1->jacobian(x, j1);
    f.x2->jacobian(x, j2);
    dz.resize(2 * n);
    dz.head(n) = u(0) * v1 + u(1) * v2;
    dz.tail(n) = -(u(0) * (j1.transpose() * p) + u(1) * (j2.transpose() * p));
  }

  Vec constraints(const Vec& x, const Vec& p) const {
    Vec c(3 + static_cast<Eigen::Index>(f.extra.size()));
    c(0) = p.dot((*f.x1)(x));
    c(1) = p.dot((*f.x2)(x));
    c(2) = p.dot((*f.w)(x));
    for (std::size_t i = 0; i < f.extra.size(); ++i) c(3 + static_cast<Eigen::Index>(i)) = p.dot((*f.extra[i].second)(x));
    return c;
  }
};

}  // namespace detail

/// Abnormal bi-extremal (p0 = 0) of the rank-2 frame from (x0, p0cov): the
/// constrained Hamiltonian system with the characteristic control.
inline BiExtremalArc integrate_abnormal_rank2(const AbnormalFrame& f, const Vec& x0, const Vec& p0cov, double T,
                                              const AbnormalOptions& opt = {}) {
  const auto n = x0.size();
  if (p0cov.size() != n || f.x1->in_dim() != n) throw DimensionMismatch("integrate_abnormal_rank2: dimension mismatch");
  const double pn = p0cov.norm();
  if (!(pn > 1e-12)) throw PreconditionViolation("p != 0", "initial covector is zero");
  detail::AbnormalFlow flow{f, opt.degeneracy_tol};
  auto check = [&](const std::string& name, const NumField& fld) {
    const Vec v = fld(x0);
    if (std::abs(p0cov.dot(v)) > opt.precondition_tol * pn * std::max(1.0, v.norm()))
      throw PreconditionViolation("<p," + name + "> = 0", "initial covector violates <p," + name + "> = 0");
  };
  check("X1", *f.x1);
  check("X2", *f.x2);
  check(f.w_name, *f.w);
  for (const auto& [name, fld] : f.extra) check(name, *fld);
  flow.control(x0, p0cov, 0.0);

  const int steps = std::max(1, static_cast<int>(std::ceil(T / opt.step - 1e-9)));
  const double h = T / steps;
  BiExtremalArc arc;
  arc.p0 = 0.0;
  Vec z(2 * n);
  z << x0, p0cov;
  auto record = [&](double t, const Vec& zz) {
    const Vec x = zz.head(n), p = zz.tail(n);
    arc.times.push_back(t);
    arc.states.push_back(x);
    arc.costates.push_back(p);
    arc.controls.push_back(flow.control(x, p, t));
    arc.constraints.push_back(flow.constraints(x, p));
    arc.hamiltonian.push_back(0.0);
  };
  record(0.0, z);
  Vec k1, k2, k3, k4;
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    flow.rhs(z, t, k1);
    flow.rhs(z + 0.5 * h * k1, t + 0.5 * h, k2);
    flow.rhs(z + 0.5 * h * k2, t + 0.5 * h, k3);
    flow.rhs(z + h * k3, t + h, k4);
    z += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!z.allFinite()) throw IntegrationDiverged("abnormal extremal blew up", t);
    record(t + h, z);
  }
  return arc;
}

}  // namespace geoctl
