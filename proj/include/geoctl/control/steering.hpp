#pragma once

#include <functional>
#include <random>
#include <vector>

#include "geoctl/control/control_system.hpp"
#include "geoctl/flags/derived_flag.hpp"

namespace geoctl {

/// A submersion pi from the state space of a system to a quotient, with its
/// Jacobian.
struct Projection {
  int dim = 0;
  std::function<Vec(const Vec&)> map;
  std::function<Mat(const Vec&)> jacobian;

  static Projection coordinates(int n, const std::vector<std::size_t>& keep) {
    Projection p;
    p.dim = static_cast<int>(keep.size());
    p.map = [keep](const Vec& x) {
      Vec y(static_cast<Eigen::Index>(keep.size()));
      for (std::size_t i = 0; i < keep.size(); ++i) y(static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(keep[i]));
      return y;
    };
    p.jacobian = [keep, n](const Vec&) {
      Mat j = Mat::Zero(static_cast<Eigen::Index>(keep.size()), n);
      for (std::size_t i = 0; i < keep.size(); ++i) j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(keep[i])) = 1.0;
      return j;
    };
    return p;
  }
};

struct SteeringOptions {
  int intervals = 6;
  double horizon = 1.0;
  double step = 1e-2;
  double tol = 1e-4;
  int max_iter = 40;
  int restarts = 4;
  double init_scale = 0.5;
  unsigned seed = 7;
};

struct SteeringResult {
  Vec target;
  bool reached = false;
  double error = 0.0;
  ControlSignal control;
};

/// Random multi-arc initial control refined by minimum-norm Gauss-Newton on
/// pi(End(u)) = target.
inline SteeringResult steer(const ControlSystem& sys, const Projection& proj, const Vec& x0, const Vec& target,
                            const SteeringOptions& opt, std::mt19937_64& rng) {
  const int m = sys.control_dim();
  std::normal_distribution<double> g;
  SteeringResult best;
  best.target = target;
  best.error = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opt.restarts && !best.reached; ++r) {
    Vec u(m * opt.intervals);
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = opt.init_scale * g(rng);
    for (int it = 0; it < opt.max_iter; ++it) {
      const auto sig = ControlSignal::unflatten(0.0, opt.horizon, u, m);
      Vec xe;
      try {
        xe = endpoint(sys, sig, x0, opt.step);
      } catch (const Error&) {
        break;
      }
      const Vec res = target - proj.map(xe);
      const double err = res.norm();
      if (err < best.error) {
        best.error = err;
        best.control = sig;
      }
      if (err <= opt.tol * 1e-2) break;
      const Mat J = proj.jacobian(xe) * endpoint_jacobian(sys, sig, x0, opt.step);
      Vec du = lstsq(J, res);
      if (!du.allFinite()) break;
      const double cap = 1.0 + u.norm();
      if (du.norm() > cap) du *= cap / du.norm();
      u += du;
    }
    best.reached = best.error <= opt.tol;
  }
  return best;
}

struct ControllabilityReport {
  bool bracket_generating_checked = false;
  bool bracket_generating = false;
  int trials = 0;
  int successes = 0;
  double max_error = 0.0;  ///< over successful trials
  std::vector<SteeringResult> results;
};

/// For `trials` random targets within `radius` of pi(x0), steers the full
/// system and checks that the projected endpoint reaches the target.
inline ControllabilityReport verify_quotient_controllability(const ControlSystem& sys, const Projection& proj, const Vec& x0,
                                                             double radius, int trials, SteeringOptions opt = {}) {
  ControllabilityReport rep;
  rep.trials = trials;
  if (sys.has_poly_frame() && sys.param_dim() == 0) {
    std::vector<double> xv = to_std(x0);
    auto flag = derived_flag(sys.vector_fields(), xv, 8, 1e-9);
    rep.bracket_generating_checked = true;
    rep.bracket_generating = is_bracket_generating(flag);
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vec y0 = proj.map(x0);
  for (int t = 0; t < trials; ++t) {
    Vec dir(proj.dim);
    for (int i = 0; i < proj.dim; ++i) dir(i) = g(rng);
    dir.normalize();
    const double r = radius * std::pow(unif(rng), 1.0 / proj.dim);
    auto res = steer(sys, proj, x0, y0 + r * dir, opt, rng);
    if (res.reached) {
      ++rep.successes;
      rep.max_error = std::max(rep.max_error, res.error);
    }
    rep.results.push_back(std::move(res));
  }
  return rep;
}

inline ControllabilityReport verify_quotient_controllability(const ControlSystem& sys, const std::vector<std::size_t>& keep,
                                                             const Vec& x0, double radius, int trials, SteeringOptions opt = {}) {
  return verify_quotient_controllability(sys, Projection::coordinates(sys.state_dim(), keep), x0, radius, trials, opt);
}

}  // namespace geoctl
