#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "geoctl/cartan/duality.hpp"
#include "geoctl/core/parallel.hpp"
#include "geoctl/srmetric/pmp.hpp"

namespace geoctl {

struct ConeGeodesicOptions {
  double window = 0.5;
  double radius = 0.03;
  double step = 0.01;
  std::uint64_t seed = 3;
  int jobs = 1;
};

struct ConeGeodesicSample {
  Vec z;                       ///< start on Z
  double distance = 0;         ///< normal quotient geodesic vs projected leaf
  double max_b = 0;            ///< eliminated K-control along the arc
  double pmp = 0;              ///< max equation residual of the quotient system
  double drift = 0;            ///< Hamiltonian drift
  double embedding_sigma = 0;  ///< smallest singular value of [g, g_w] (spot check)
  std::string failure;         ///< integration error, if any
  Polyline geodesic, leaf;
};

struct ConeGeodesicReport {
  std::vector<ConeGeodesicSample> x_side;  ///< (E/pi_X, e_E) vs pi_X-images of L-leaves
  std::vector<ConeGeodesicSample> y_side;  ///< (E/pi_Y, e_E) vs pi_Y-images of K-leaves
  double max_distance = 0, max_b = 0;  ///< x side
  double max_dual_distance = 0;         ///< y side
  double tol = 0;
  bool passed = false;                  ///< x side within tol, |b| <= 1e-10
  bool dual_passed = false;
};

namespace detail {

/// Covector with <g, p> = 1 and <g_w, p> = 0 plus a random component
/// annihilating both: the lift with vanishing fiber costate is normal.
inline Vec lift_compatible_covector(const ParamFieldJet& j, std::mt19937_64& rng, double spread = 0.3) {
  Mat a(2, j.g.size());
  a.row(0) = j.g.transpose();
  a.row(1) = j.gw.transpose();
  Vec rhs(2);
  rhs << 1.0, 0.0;
  Vec p = lstsq(a, rhs);
  const Mat N = left_nullspace(a.transpose(), 1e-12);
  std::normal_distribution<double> g;
  Vec c(N.cols());
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
  return p + spread * p.norm() * N * c / std::max(1e-300, c.norm());
}

/// Covector on Y with <g, q> = 1, <g_v, q> = 0 that also annihilates
/// [eta1,eta2], [eta1,[eta1,eta2]] and [eta2,[eta1,eta2]].
inline Vec lift_compatible_covector_y(const ProlongedChart& pc, const ParamFieldJet& j, const Vec& y) {
  const auto& f = pc.base.frame;
  const auto x3 = lie_bracket(f[0], f[1]);
  Mat a(5, 5);
  a.row(0) = j.g.transpose();
  a.row(1) = j.gw.transpose();
  a.row(2) = CompiledField(x3)(y).transpose();
  a.row(3) = CompiledField(lie_bracket(f[0], x3))(y).transpose();
  a.row(4) = CompiledField(lie_bracket(f[1], x3))(y).transpose();
  Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible()) throw DegeneratePoint("lift-compatible covector: conditions are dependent", 0.0);
  return lu.solve(Vec::Unit(5, 0));
}

inline double smallest_sv(const Vec& a, const Vec& b) {
  Mat m(a.size(), 2);
  m << a / a.norm(), b / b.norm();
  return Eigen::JacobiSVD<Mat>(m).singularValues()(1);
}

}  // namespace detail

/// Normal geodesics of the quotient problems against projected leaves:
/// (E/pi_X, e_E) vs pi_X-images of unit-speed fibers (L-leaves), and
/// (E/pi_Y, e_E) vs pi_Y-images of unit-speed K-leaves. On the Y side the
/// lift with vanishing fiber costate is an extremal of E only for special
/// covectors; those of lift_compatible_covector_y are used.
inline ConeGeodesicReport verify_cone_geodesics(const LocalLeafSpace& ls, int npoints, double tol,
                                                const ConeGeodesicOptions& opt = {}) {
  const auto& pc = ls.prolonged();
  ConeGeodesicReport rep;
  rep.tol = tol;
  rep.x_side.resize(static_cast<std::size_t>(npoints));
  rep.y_side.resize(static_cast<std::size_t>(npoints));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < npoints; ++k) {
    Vec d(6);
    for (int i = 0; i < 6; ++i) d(i) = g(rng);
    const Vec z = ls.basepoint() + opt.radius * d / d.norm();
    rep.x_side[static_cast<std::size_t>(k)].z = z;
    rep.y_side[static_cast<std::size_t>(k)].z = z;
    seeds.push_back(rng());
  }
  const PmpSystem sx = pmp_system(ls, PmpProblem::EmodN_eE, ChartChoice::xw);
  const PmpSystem sy = pmp_system(ls, PmpProblem::EmodP_eE, ChartChoice::yv);
  const ParamFieldFn cone = ls.cone_fn();
  const ParamFieldFn fiber = fiber_direction_fn(pc);
  // The eliminated coefficient of the kernel direction: b on X, lambda on Y.
  auto finish = [](ConeGeodesicSample& s, const PmpSystem& sys, const BiExtremalArc& arc, int kernel) {
    for (const auto& u : arc.controls) s.max_b = std::max(s.max_b, std::abs(u(kernel)));
    s.pmp = pmp_residual(sys.problem, arc).max_equation();
    s.drift = arc.hamiltonian_drift();
  };
  parallel_for(npoints, opt.jobs, [&](int k) {
    std::mt19937_64 local(seeds[static_cast<std::size_t>(k)]);
    auto guarded = [](ConeGeodesicSample& s, auto&& body) {
      try {
        body();
      } catch (const Error& e) {
        s.failure = e.what();
        s.distance = std::numeric_limits<double>::infinity();
      }
    };
    guarded(rep.x_side[static_cast<std::size_t>(k)], [&] {
      auto& s = rep.x_side[static_cast<std::size_t>(k)];
      const auto pt = ls.chartmap(s.z);
      const auto j = cone(pt.x, pt.w);
      s.embedding_sigma = detail::smallest_sv(j.g, j.gw);
      const Vec p0 = detail::lift_compatible_covector(j, local);
      const double T = 1.2 * opt.window / j.g.norm();
      const auto arc = integrate_quotient_normal(sx, cone, pt.x, pt.w, p0, T, opt.step);
      finish(s, sx, arc, 1);
      s.geodesic = arc.states;
      s.leaf = fiber_image(ls, s.z.head(5), s.z(5), 1.02 * opt.window, opt.step);
      s.distance = window_distance(s.leaf, s.geodesic, opt.window);
    });
    guarded(rep.y_side[static_cast<std::size_t>(k)], [&] {
      auto& s = rep.y_side[static_cast<std::size_t>(k)];
      const Vec y = s.z.head(5);
      const auto j = fiber(y, s.z(5));
      s.embedding_sigma = detail::smallest_sv(j.g, j.gw);
      const Vec q0 = detail::lift_compatible_covector_y(pc, j, y);
      const double T = 1.2 * opt.window / j.g.norm();
      const auto arc = integrate_quotient_normal(sy, fiber, y, s.z(5), q0, T, opt.step);
      finish(s, sy, arc, 0);
      s.geodesic = arc.states;
      for (const auto& q : k_leaf(pc, s.z, T, opt.step).points) s.leaf.push_back(q.head(5));
      s.distance = window_distance(s.leaf, s.geodesic, opt.window);
    });
  });
  for (const auto& s : rep.x_side) {
    rep.max_distance = std::max(rep.max_distance, s.distance);
    rep.max_b = std::max(rep.max_b, s.max_b);
  }
  double dual_b = 0;
  for (const auto& s : rep.y_side) {
    rep.max_dual_distance = std::max(rep.max_dual_distance, s.distance);
    dual_b = std::max(dual_b, s.max_b);
  }
  rep.passed = rep.max_distance <= tol && rep.max_b <= 1e-10;
  rep.dual_passed = rep.max_dual_distance <= tol && dual_b <= 1e-10;
  return rep;
}

}  // namespace geoctl
