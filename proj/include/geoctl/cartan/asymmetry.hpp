#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "geoctl/cartan/prolongation.hpp"
#include "geoctl/core/parallel.hpp"
#include "geoctl/extremals/abnormal.hpp"
#include "geoctl/extremals/classify.hpp"

namespace geoctl {

struct AsymmetryOptions {
  double radius = 0.05;   ///< initial points within this distance of z0
  double horizon = 0.5;
  double step = 2e-3;
  double classify_threshold = 1e-8;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct AsymmetryArc {
  Vec z0, p0;
  bool irregular_start = false;  ///< p0 sampled for the K-tangent frame
  double l_residual = 0;         ///< max sin-angle between velocity and xi
  double k_residual = 0;         ///< max sin-angle between velocity and eta
  ClassifyReport classification;
  BiExtremalArc arc;
};

struct AsymmetryReport {
  std::vector<AsymmetryArc> arcs;
  int l_tangent = 0, k_tangent = 0, neither = 0;
  int misclassified = 0;
  double tol = 0;
  bool passed = false;
};

namespace detail {

inline double off_line(const Vec& v, const Vec& dir) {
  const double n = v.norm();
  if (n == 0) return 0;
  const Vec d = dir / dir.norm();
  return (v - d.dot(v) * d).norm() / n;
}

/// Random unit covector in the annihilator of the columns of a.
inline Vec random_annihilator(const Mat& a, std::mt19937_64& rng) {
  const Mat N = left_nullspace(a, 1e-10);
  if (N.cols() == 0) throw DegeneratePoint("annihilator is trivial", 0.0);
  std::normal_distribution<double> g;
  Vec c(N.cols());
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
  const Vec p = N * c;
  return p / p.norm();
}

}  // namespace detail

/// Abnormal extremals of the prolonged frame {xi, eta} from covectors of
/// both kinds. Each must be tangent to L = span{xi} (and regular) or to
/// K = span{eta} (and totally irregular).
inline AsymmetryReport verify_asymmetry(const ProlongedChart& pc, const Vec& z0, int nsamples, double tol,
                                        const AsymmetryOptions& opt = {}) {
  if (z0.size() != 6) throw DimensionMismatch("verify_asymmetry: point must be (y, v)");
  AsymmetryReport rep;
  rep.tol = tol;
  rep.arcs.resize(static_cast<std::size_t>(nsamples));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  for (int k = 0; k < nsamples; ++k) {
    Vec d(6);
    for (int i = 0; i < 6; ++i) d(i) = g(rng);
    auto& a = rep.arcs[static_cast<std::size_t>(k)];
    a.z0 = z0 + opt.radius * d / d.norm();
    a.irregular_start = k % 2 == 1;
    a.p0 = detail::random_annihilator(a.irregular_start ? pc.k_span(a.z0) : Mat(pc.spans(a.z0).e2), rng);
  }
  const auto spans = pc.span_fn();
  AbnormalOptions aopt;
  aopt.step = opt.step;
  parallel_for(nsamples, opt.jobs, [&](int k) {
    auto& a = rep.arcs[static_cast<std::size_t>(k)];
    a.arc = integrate_abnormal_rank2(a.irregular_start ? pc.irregular_frame() : pc.regular_frame(), a.z0, a.p0,
                                     opt.horizon, aopt);
    for (std::size_t i = 0; i < a.arc.size(); ++i) {
      const Vec& z = a.arc.states[i];
      const Vec& u = a.arc.controls[i];
      const Vec xi = (*pc.xi_f)(z), eta = (*pc.eta_f)(z);
      const Vec vel = u(0) * xi + u(1) * eta;
      a.l_residual = std::max(a.l_residual, detail::off_line(vel, xi));
      a.k_residual = std::max(a.k_residual, detail::off_line(vel, eta));
    }
    a.classification = classify_abnormal(spans, a.arc, opt.classify_threshold, 5);
  });
  for (const auto& a : rep.arcs) {
    const bool l = a.l_residual <= tol, kk = a.k_residual <= tol;
    if (l) ++rep.l_tangent;
    else if (kk) ++rep.k_tangent;
    else ++rep.neither;
    const auto t = a.classification.type;
    if ((l && t != AbnormalType::regular) || (kk && t != AbnormalType::totally_irregular)) ++rep.misclassified;
  }
  rep.passed = rep.neither == 0 && rep.misclassified == 0;
  return rep;
}

}  // namespace geoctl
