#pragma once

#include <vector>

#include "geoctl/core/linalg.hpp"

namespace geoctl {

/// Sampled bi-extremal (x(t), p(t), u(t), p0).
struct BiExtremalArc {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> costates;
  std::vector<Vec> controls;
  double p0 = 0.0;
  /// Per grid point: values of the constraint group (stationarity or
  /// annihilation conditions), which vanish on an exact bi-extremal.
  std::vector<Vec> constraints;
  /// Per grid point: value of the (reduced) Hamiltonian.
  std::vector<double> hamiltonian;

  std::size_t size() const { return times.size(); }
  bool abnormal() const { return p0 == 0.0; }

  double max_constraint() const {
    double m = 0.0;
    for (const auto& c : constraints) m = std::max(m, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
    return m;
  }

  double hamiltonian_drift() const {
    double m = 0.0;
    for (double h : hamiltonian) m = std::max(m, std::abs(h - hamiltonian.front()));
    return m;
  }
};

}  // namespace geoctl
