#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "geoctl/control/control_system.hpp"

namespace geoctl {

/// Control system with quadratic cost e(u) = 1/2 sum_{i in S} u_i^2.
struct OptimalControlProblem {
  ControlSystem sys;
  std::vector<int> energy;  ///< S: indices of penalized controls

  /// Energy on every frame coefficient (parameters are never penalized).
  static OptimalControlProblem full_energy(ControlSystem s) {
    OptimalControlProblem p;
    p.energy.resize(static_cast<std::size_t>(s.frame_size()));
    std::iota(p.energy.begin(), p.energy.end(), 0);
    p.sys = std::move(s);
    return p;
  }

  static OptimalControlProblem partial_energy(ControlSystem s, std::vector<int> subset) {
    if (subset.empty()) throw InvalidArgument("energy subset must be nonempty");
    for (int i : subset)
      if (i < 0 || i >= s.control_dim()) throw InvalidArgument("energy subset index out of range");
    OptimalControlProblem p;
    p.sys = std::move(s);
    p.energy = std::move(subset);
    return p;
  }

  bool penalized(int i) const { return std::find(energy.begin(), energy.end(), i) != energy.end(); }

  bool is_full_energy() const {
    for (int i = 0; i < sys.frame_size(); ++i)
      if (!penalized(i)) return false;
    return true;
  }

  double cost(const Vec& u) const {
    double e = 0.0;
    for (int i : energy) e += 0.5 * u(i) * u(i);
    return e;
  }
};

/// H = <p, F(x,u)>.
inline double hamiltonian(const ControlSystem& sys, const Vec& x, const Vec& p, const Vec& u) {
  if (p.size() != sys.state_dim()) throw DimensionMismatch("hamiltonian: costate dimension mismatch");
  Vec f;
  sys.dyn->f(x, u, f);
  return p.dot(f);
}

/// H + p0 e(x,u) with p0 <= 0.
inline double ocp_hamiltonian(const OptimalControlProblem& prob, const Vec& x, const Vec& p, const Vec& u, double p0) {
  if (p0 > 0) throw InvalidArgument("ocp_hamiltonian: p0 must be nonpositive");
  return hamiltonian(prob.sys, x, p, u) + p0 * prob.cost(u);
}

/// <p, X_i(x)> for every frame field (parameter-free systems).
inline Vec frame_pairings(const ControlSystem& sys, const Vec& x, const Vec& p) {
  Vec h(sys.frame_size());
  const Vec w = Vec::Zero(sys.param_dim());
  for (int i = 0; i < sys.frame_size(); ++i) h(i) = p.dot(sys.dyn->field_value(i, x, w));
  return h;
}

/// 1/2 sum_i <p, X_i(x)>^2, the result of eliminating u_i = <p, X_i> at p0 = -1.
inline double normal_hamiltonian(const OptimalControlProblem& prob, const Vec& x, const Vec& p) {
  if (!prob.is_full_energy()) throw InvalidArgument("normal_hamiltonian requires a full-energy cost");
  if (prob.sys.param_dim() != 0) throw Unsupported("normal_hamiltonian: system has parameters");
  return 0.5 * frame_pairings(prob.sys, x, p).squaredNorm();
}

}  // namespace geoctl
