#pragma once

#include <functional>
#include <vector>

#include "geoctl/core/error.hpp"
#include "geoctl/core/linalg.hpp"

namespace geoctl {

/// Derivatives of a scalar K(x, w, p) in which w is a control parameter fixed
/// implicitly by K_w = 0.
struct ImplicitDerivs {
  double K = 0.0;
  Vec Kx, Kp, Kw;
  Mat Kww, Kwx, Kwp;  ///< k x k, k x n, k x n
};

using ImplicitModel = std::function<ImplicitDerivs(const Vec& x, const Vec& w, const Vec& p)>;

struct ImplicitArc {
  std::vector<double> times;
  std::vector<Vec> xs, ws, ps;
  std::vector<double> K;
  std::vector<Vec> Kw;
};

/// x' = K_p, p' = -K_x, and w' = -K_ww^{-1}(K_wx x' + K_wp p') so that the
/// stationarity constraint K_w = 0 is transported along the flow.
inline ImplicitArc integrate_implicit(const ImplicitModel& model, const Vec& x0, const Vec& w0, const Vec& p0, double T,
                                      double step, double constraint_tol = 1e-8) {
  const auto n = x0.size();
  const auto k = w0.size();
  {
    const auto d = model(x0, w0, p0);
    if (d.Kw.size() && d.Kw.cwiseAbs().maxCoeff() > constraint_tol * std::max(1.0, p0.norm()))
      throw PreconditionViolation("K_w = 0", "initial data violate the parameter stationarity constraint");
  }
  auto rhs = [&](const Vec& z, double t) {
    const Vec x = z.head(n), w = z.segment(n, k), p = z.tail(n);
    const auto d = model(x, w, p);
    Vec dz(z.size());
    dz.head(n) = d.Kp;
    dz.tail(n) = -d.Kx;
    if (k > 0) {
      Eigen::FullPivLU<Mat> lu(d.Kww);
      if (!lu.isInvertible()) throw DegeneratePoint("implicit flow: K_ww singular", t);
      dz.segment(n, k) = -lu.solve(d.Kwx * d.Kp - d.Kwp * d.Kx);
    }
    return dz;
  };
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(T) / step - 1e-9)));
  const double h = T / steps;
  ImplicitArc arc;
  Vec z(2 * n + k);
  z << x0, w0, p0;
  auto record = [&](double t) {
    const Vec x = z.head(n), w = z.segment(n, k), p = z.tail(n);
    const auto d = model(x, w, p);
    arc.times.push_back(t);
    arc.xs.push_back(x);
    arc.ws.push_back(w);
    arc.ps.push_back(p);
    arc.K.push_back(d.K);
    arc.Kw.push_back(d.Kw);
  };
  record(0.0);
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const Vec k1 = rhs(z, t);
    const Vec k2 = rhs(z + 0.5 * h * k1, t + 0.5 * h);
    const Vec k3 = rhs(z + 0.5 * h * k2, t + 0.5 * h);
    const Vec k4 = rhs(z + h * k3, t + h);
    z += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!z.allFinite()) throw IntegrationDiverged("implicit flow blew up", t);
    record(t + h);
  }
  return arc;
}

/// Field g(x, w) depending on one scalar parameter, with derivatives.
struct ParamFieldJet {
  Vec g, gw, gww;
  Mat gx, gwx;  ///< n x n Jacobians of g and g_w in x
};
using ParamFieldFn = std::function<ParamFieldJet(const Vec& x, double w)>;

/// K = <g(x,w), p>: abnormal extremals of x' = a g(x, w) at unit speed a = 1.
inline ImplicitModel linear_model(ParamFieldFn field) {
  return [field](const Vec& x, const Vec& w, const Vec& p) {
    const auto j = field(x, w(0));
    ImplicitDerivs d;
    d.K = j.g.dot(p);
    d.Kx = j.gx.transpose() * p;
    d.Kp = j.g;
    d.Kw = Vec::Constant(1, j.gw.dot(p));
    d.Kww = Mat::Constant(1, 1, j.gww.dot(p));
    d.Kwx = (j.gwx.transpose() * p).transpose();
    d.Kwp = j.gw.transpose();
    return d;
  };
}

/// K = 1/2 <g(x,w), p>^2: normal extremals of x' = a g(x, w) with energy a^2/2.
inline ImplicitModel quadratic_model(ParamFieldFn field) {
  return [field](const Vec& x, const Vec& w, const Vec& p) {
    const auto j = field(x, w(0));
    const double m = j.g.dot(p), mw = j.gw.dot(p);
    const Vec mx = j.gx.transpose() * p;
    ImplicitDerivs d;
    d.K = 0.5 * m * m;
    d.Kx = m * mx;
    d.Kp = m * j.g;
    d.Kw = Vec::Constant(1, m * mw);
    d.Kww = Mat::Constant(1, 1, mw * mw + m * j.gww.dot(p));
    d.Kwx = (mw * mx + m * (j.gwx.transpose() * p)).transpose();
    d.Kwp = (mw * j.g + m * j.gw).transpose();
    return d;
  };
}

}  // namespace geoctl
