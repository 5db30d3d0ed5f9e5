#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "geoctl/core/error.hpp"
#include "geoctl/core/linalg.hpp"

namespace geoctl {

using Polyline = std::vector<Vec>;

inline double arclength(const Polyline& c) {
  double s = 0;
  for (std::size_t k = 1; k < c.size(); ++k) s += (c[k] - c[k - 1]).norm();
  return s;
}

/// Initial piece of arclength L, ending at an interpolated point.
/// Throws if the curve is shorter than L.
inline Polyline truncate_arclength(const Polyline& c, double L) {
  if (c.empty()) throw InvalidArgument("truncate_arclength: empty curve");
  Polyline out{c[0]};
  double s = 0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double d = (c[k] - c[k - 1]).norm();
    if (s + d >= L) {
      const double t = d > 0 ? (L - s) / d : 0.0;
      out.push_back(c[k - 1] + t * (c[k] - c[k - 1]));
      return out;
    }
    s += d;
    out.push_back(c[k]);
  }
  throw InvalidArgument("truncate_arclength: curve shorter than the window");
}

inline double point_segment_distance(const Vec& p, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const double l2 = ab.squaredNorm();
  const double t = l2 > 0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

inline double point_polyline_distance(const Vec& p, const Polyline& c) {
  if (c.size() == 1) return (p - c[0]).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < c.size(); ++k) best = std::min(best, point_segment_distance(p, c[k - 1], c[k]));
  return best;
}

/// max over points of a of the distance to the polyline b.
inline double directed_curve_distance(const Polyline& a, const Polyline& b) {
  double m = 0;
  for (const auto& p : a) m = std::max(m, point_polyline_distance(p, b));
  return m;
}

/// Symmetric (Hausdorff-type) distance between sampled curves.
inline double symmetric_curve_distance(const Polyline& a, const Polyline& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("symmetric_curve_distance: empty curve");
  return std::max(directed_curve_distance(a, b), directed_curve_distance(b, a));
}

/// Symmetric distance of the initial arclength-L windows of two curves
/// starting at (nearly) the same point.
inline double window_distance(const Polyline& a, const Polyline& b, double L) {
  return symmetric_curve_distance(truncate_arclength(a, L), truncate_arclength(b, L));
}

}  // namespace geoctl
