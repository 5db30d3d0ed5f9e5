#pragma once

#include <random>
#include <utility>
#include <vector>

#include "geoctl/control/control_system.hpp"
#include "geoctl/vecfield/polynomial.hpp"

namespace geoctl {

/// Polynomial state map phi: R^n -> R^n (components over the source chart)
/// and control map psi: (x, u) -> u' (components over x ++ u).
struct EquivalenceMaps {
  std::vector<Polynomial> phi;
  std::vector<Polynomial> psi;
};

struct EquivalenceReport {
  double max_state_residual = 0.0;
  double max_hamiltonian_residual = 0.0;
  std::size_t samples = 0;
  bool passed = false;
};

/// Checks F'(phi(x), psi(x,u)) = Dphi(x) F(x,u) and the Hamiltonian identity
/// H(x,p,u) = H'(phi(x), Dphi^{-T} p, psi(x,u)) at the given samples, with
/// covectors drawn from `seed`.
inline EquivalenceReport check_equivalence(const ControlSystem& sys, const ControlSystem& sys2, const EquivalenceMaps& maps,
                                           const std::vector<std::pair<Vec, Vec>>& samples, double tol = 1e-10,
                                           unsigned seed = 1) {
  const int n = sys.state_dim();
  const int m = sys.control_dim();
  if (sys2.state_dim() != n) throw DimensionMismatch("equivalent systems need equal state dimensions");
  if (static_cast<int>(maps.phi.size()) != n) throw DimensionMismatch("phi must have n components");
  if (static_cast<int>(maps.psi.size()) != sys2.control_dim()) throw DimensionMismatch("psi must have one component per target control");
  CompiledField phi(maps.phi);
  CompiledField psi(maps.psi);
  if (phi.in_dim() != n || psi.in_dim() != n + m) throw DimensionMismatch("phi or psi over the wrong variables");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  EquivalenceReport rep;
  for (const auto& [x, u] : samples) {
    Vec y, up, f, f2;
    Mat dphi;
    phi.value(x, y);
    phi.jacobian(x, dphi);
    Eigen::FullPivLU<Mat> lu(dphi);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-12)
      throw InvalidArgument("check_equivalence: phi is not invertible at a sample point");
    Vec xu(n + m);
    xu << x, u;
    psi.value(xu, up);
    sys.dyn->f(x, u, f);
    sys2.dyn->f(y, up, f2);
    rep.max_state_residual = std::max(rep.max_state_residual, (f2 - dphi * f).norm());
    Vec p(n);
    for (int i = 0; i < n; ++i) p(i) = g(rng);
    const Vec p2 = dphi.transpose().fullPivLu().solve(p);
    rep.max_hamiltonian_residual = std::max(rep.max_hamiltonian_residual, std::abs(p.dot(f) - p2.dot(f2)));
    ++rep.samples;
  }
  rep.passed = rep.max_state_residual <= tol && rep.max_hamiltonian_residual <= tol;
  return rep;
}

}  // namespace geoctl
