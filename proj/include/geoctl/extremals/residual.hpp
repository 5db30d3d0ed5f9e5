#pragma once

#include <algorithm>
#include <limits>

#include "geoctl/extremals/arc.hpp"
#include "geoctl/extremals/problem.hpp"

namespace geoctl {

struct PmpResidual {
  double state = 0.0;         ///< max |x' - F(x,u)|, interior points
  double costate = 0.0;       ///< max |p' + dH/dx|, interior points
  double stationarity = 0.0;  ///< max |dH/du|, all points
  double nontriviality = 0.0; ///< min |(p, p0)|

  double max_equation() const { return std::max({state, costate, stationarity}); }
};

/// Five-point central difference of samples at interior index k.
inline Vec central_difference(const std::vector<Vec>& v, std::size_t k, double h) {
  return (v[k - 2] - 8.0 * v[k - 1] + 8.0 * v[k + 1] - v[k + 2]) / (12.0 * h);
}

/// Residuals of the constrained Hamiltonian system of the problem along a
/// sampled arc (uniform time grid required).
inline PmpResidual pmp_residual(const OptimalControlProblem& prob, const BiExtremalArc& arc) {
  const std::size_t N = arc.size();
  if (N < 5) throw InvalidArgument("pmp_residual: need at least five samples");
  const double h = (arc.times.back() - arc.times.front()) / static_cast<double>(N - 1);
  for (std::size_t k = 1; k < N; ++k)
    if (std::abs(arc.times[k] - arc.times[k - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw InvalidArgument("pmp_residual: non-uniform time grid");
  const auto& dyn = *prob.sys.dyn;
  PmpResidual r;
  r.nontriviality = std::numeric_limits<double>::infinity();
  Vec f;
  Mat fx, fu;
  for (std::size_t k = 0; k < N; ++k) {
    const Vec& x = arc.states[k];
    const Vec& p = arc.costates[k];
    const Vec& u = arc.controls[k];
    dyn.jac(x, u, fx, fu);
    Vec hu = fu.transpose() * p;
    for (int i : prob.energy) hu(i) += arc.p0 * u(i);
    r.stationarity = std::max(r.stationarity, hu.cwiseAbs().maxCoeff());
    r.nontriviality = std::min(r.nontriviality, std::sqrt(p.squaredNorm() + arc.p0 * arc.p0));
    if (k < 2 || k + 2 >= N) continue;
    dyn.f(x, u, f);
    r.state = std::max(r.state, (central_difference(arc.states, k, h) - f).cwiseAbs().maxCoeff());
    r.costate = std::max(r.costate, (central_difference(arc.costates, k, h) + fx.transpose() * p).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace geoctl
