#pragma once

#include <string>
#include <vector>

#include "geoctl/cartan/leaf_space.hpp"
#include "geoctl/control/steering.hpp"

namespace geoctl {

/// The control systems of the pseudo-product structure E = L + K on Z with
/// its double fibration Y <- Z -> X (X local, from the leaf space chart).
struct FiveSystems {
  ControlSystem E;       ///< on Z: z' = lambda xi + mu eta
  ControlSystem EmodY;   ///< on Y: y' = lambda 0 + mu eta_v(y), parameter v
  ControlSystem KmodY;   ///< on Y: y' = mu eta_v(y), parameter v
  ControlSystem EmodX;   ///< on X: x' = a c(x, w) + b 0, parameter w
  ControlSystem LmodX;   ///< on X: x' = a c(x, w), parameter w
  /// Systems that reduce to the zero system.
  std::vector<std::string> trivial{"L/pi_Y", "K/pi_X"};
};

/// pi_Y* eta = cos v eta_1 + sin v eta_2 as a map (y, v) -> R^5.
inline NumFieldPtr projected_eta(const ProlongedChart& pc) {
  return std::make_shared<ProjectedNumField>(pc.eta_f, std::vector<int>{0, 1, 2, 3, 4});
}

inline FiveSystems five_systems(const LocalLeafSpace& ls) {
  const auto& pc = ls.prolonged();
  FiveSystems s;
  s.E = make_system(pc.chart, {pc.xi_f, pc.eta_f}, 0, {"lambda", "mu"});
  const Chart ychart = pc.base.chart;
  const auto eta_y = projected_eta(pc);
  s.EmodY = make_system(ychart, {std::make_shared<ZeroField>(6, 5), eta_y}, 1, {"lambda", "mu", "v"}, SystemLabel::quotient);
  s.KmodY = make_system(ychart, {eta_y}, 1, {"mu", "v"}, SystemLabel::quotient);
  const auto xchart = Chart::numbered("x", 5);
  const auto cone = ls.cone_field();
  s.EmodX = make_system(xchart, {cone, std::make_shared<ZeroField>(6, 5)}, 1, {"a", "b", "w"}, SystemLabel::quotient);
  s.LmodX = make_system(xchart, {cone}, 1, {"a", "w"}, SystemLabel::quotient);
  return s;
}

/// pi_X as a projection of the state space of E, through the chart map.
inline Projection leaf_projection(const LocalLeafSpace& ls) {
  Projection p;
  p.dim = 5;
  p.map = [&ls](const Vec& z) { return ls.chartmap(z).x; };
  p.jacobian = [&ls](const Vec& z) { return ls.chartmap_jacobian(z); };
  return p;
}

/// pi_Y: (y, v) -> y.
inline Projection fiber_projection() { return Projection::coordinates(6, {0, 1, 2, 3, 4}); }

/// Quotient dynamics residual: max |pi_*(F(z, u)) - F_quot(pi(z), u')| over
/// samples, where u' carries the quotient parameter read off z.
inline double leaf_quotient_residual(const FiveSystems& s, const LocalLeafSpace& ls, const std::vector<Vec>& zs,
                                     const std::vector<Vec>& us) {
  double r = 0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto pt = ls.chartmap(zs[i]);
    Vec f;
    s.E.dyn->f(zs[i], us[i], f);
    const Vec lhs = ls.chartmap_jacobian(zs[i]) * f;
    Vec u(3);
    u << us[i](0), us[i](1), pt.w;
    Vec g;
    s.EmodX.dyn->f(pt.x, u, g);
    r = std::max(r, (lhs - g).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace geoctl
