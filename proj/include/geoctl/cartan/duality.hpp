#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "geoctl/cartan/curves.hpp"
#include "geoctl/cartan/leaf_space.hpp"
#include "geoctl/core/parallel.hpp"
#include "geoctl/extremals/implicit_flow.hpp"

namespace geoctl {

struct DualityOptions {
  double window = 0.5;      ///< arclength compared on each curve
  double radius = 0.03;     ///< fiber base points within this distance of y0
  double step = 0.01;       ///< sampling of fibers and abnormal arcs
  int ncovectors = 3;       ///< abnormal arcs per fiber (uniqueness check)
  double kleaf_time = 0.1;  ///< half-length of the K-leaf mapped by chartmap
  double kleaf_tol = 1e-7;
  std::uint64_t seed = 2;
  int jobs = 1;
};

struct DualityFiber {
  Vec y;
  double v0 = 0;
  Vec x0;
  double w0 = 0;
  double distance = 0;      ///< pi_X-image of the pi_Y-fiber vs cone abnormal
  double uniqueness = 0;    ///< spread of abnormal arcs from different covectors
  double kleaf_spread = 0;  ///< max |chartmap(K-leaf point) - x0|
  Polyline candidate, abnormal;
};

struct DualityReport {
  std::vector<DualityFiber> fibers;
  double max_distance = 0, max_uniqueness = 0, max_kleaf_spread = 0;
  double tol = 0;
  bool passed = false;
};

/// pi_X-image of the pi_Y-fiber through (y, v0), v increasing, until its
/// arclength reaches L.
inline Polyline fiber_image(const LocalLeafSpace& ls, const Vec& y, double v0, double L, double dv) {
  Polyline out;
  Vec z(6);
  z << y, v0;
  double s = 0;
  for (int k = 0; s < L; ++k) {
    z(5) = v0 + k * dv;
    if (z(5) - v0 > M_PI / 2) throw ChartTooLarge("fiber image too short within a quarter turn");
    out.push_back(ls.chartmap(z).x);
    if (out.size() > 1) s += (out.back() - out[out.size() - 2]).norm();
  }
  return out;
}

/// Random unit p with <c,p> = <c_w,p> = 0 and <c_ww,p> != 0.
inline Vec cone_abnormal_covector(const ParamFieldJet& j, std::mt19937_64& rng) {
  Mat a(5, 2);
  a << j.g, j.gw;
  const Mat N = left_nullspace(a, 1e-12);
  std::normal_distribution<double> g;
  for (int attempt = 0; attempt < 20; ++attempt) {
    Vec c(N.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
    Vec p = N * c;
    p /= p.norm();
    if (std::abs(j.gww.dot(p)) > 1e-3 * j.gww.norm()) return p;
  }
  throw DegeneratePoint("cone abnormal: <c_ww, p> vanishes on the admissible covectors", 0.0);
}

/// Abnormal extremal of the cone system x' = a c(x, w) at unit parameter
/// speed, until its arclength reaches L.
inline ImplicitArc cone_abnormal(const LocalLeafSpace& ls, const Vec& x0, double w0, const Vec& p0, double L, double step) {
  const auto model = linear_model(ls.cone_fn());
  double T = 1.1 * L / ls.jet(x0, w0).c.norm();
  for (int tries = 0; tries < 6; ++tries) {
    auto arc = integrate_implicit(model, x0, Vec::Constant(1, w0), p0, T, step, 1e-7);
    if (arclength(arc.xs) >= L) return arc;
    T *= 1.5;
  }
  throw ChartTooLarge("cone abnormal too short within the time bound");
}

/// Compares pi_X-images of pi_Y-fibers with abnormal extremals of the cone
/// system, for nfibers fibers near pi_Y(z0).
inline DualityReport verify_duality(const LocalLeafSpace& ls, int nfibers, double tol, const DualityOptions& opt = {}) {
  DualityReport rep;
  rep.tol = tol;
  rep.fibers.resize(static_cast<std::size_t>(nfibers));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  const Vec z0 = ls.basepoint();
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < nfibers; ++k) {
    Vec d(5);
    for (int i = 0; i < 5; ++i) d(i) = g(rng);
    auto& f = rep.fibers[static_cast<std::size_t>(k)];
    f.y = z0.head(5) + opt.radius * d / d.norm();
    f.v0 = z0(5) + u(rng);
    seeds.push_back(rng());
  }
  parallel_for(nfibers, opt.jobs, [&](int k) {
    auto& f = rep.fibers[static_cast<std::size_t>(k)];
    std::mt19937_64 local(seeds[static_cast<std::size_t>(k)]);
    Vec z(6);
    z << f.y, f.v0;
    const auto start = ls.chartmap(z);
    f.x0 = start.x;
    f.w0 = start.w;
    f.candidate = fiber_image(ls, f.y, f.v0, 1.02 * opt.window, opt.step);
    const auto jet = ls.cone_jet(f.x0, f.w0);
    std::vector<Polyline> arcs;
    for (int i = 0; i < std::max(1, opt.ncovectors); ++i)
      arcs.push_back(cone_abnormal(ls, f.x0, f.w0, cone_abnormal_covector(jet, local), opt.window, opt.step).xs);
    f.abnormal = arcs[0];
    f.distance = window_distance(f.candidate, f.abnormal, opt.window);
    for (std::size_t i = 1; i < arcs.size(); ++i)
      f.uniqueness = std::max(f.uniqueness, window_distance(arcs[0], arcs[i], opt.window));
    for (double sgn : {1.0, -1.0}) {
      const auto leaf = k_leaf(ls.prolonged(), z, sgn * opt.kleaf_time, opt.step);
      for (const auto& q : leaf.points) f.kleaf_spread = std::max(f.kleaf_spread, (ls.chartmap(q).x - f.x0).norm());
    }
  });
  for (const auto& f : rep.fibers) {
    rep.max_distance = std::max(rep.max_distance, f.distance);
    rep.max_uniqueness = std::max(rep.max_uniqueness, f.uniqueness);
    rep.max_kleaf_spread = std::max(rep.max_kleaf_spread, f.kleaf_spread);
  }
  rep.passed = rep.max_distance <= tol && rep.max_uniqueness <= tol && rep.max_kleaf_spread <= opt.kleaf_tol;
  return rep;
}

}  // namespace geoctl
