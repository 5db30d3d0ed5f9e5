#pragma once

#include <functional>
#include <limits>
#include <string>

#include "geoctl/extremals/arc.hpp"

namespace geoctl {

enum class AbnormalType { regular, totally_irregular, other };

inline std::string to_string(AbnormalType t) {
  switch (t) {
    case AbnormalType::regular: return "regular";
    case AbnormalType::totally_irregular: return "totally_irregular";
    case AbnormalType::other: return "other";
  }
  return "?";
}

/// Spanning vectors (columns) of E^(2) and E^(3) at a point.
struct FlagSpans {
  Mat e2, e3;
};
using FlagSpanFn = std::function<FlagSpans(const Vec& z)>;

struct ClassifyReport {
  AbnormalType type = AbnormalType::other;
  double max_res2 = 0.0;  ///< max over samples of |Q2^T p| / |p|
  double min_res3 = 0.0;  ///< min over samples of |Q3^T p| / |p|
  double max_res3 = 0.0;
};

/// Relative distance of p from the annihilator of span(cols): |Q^T p| / |p|
/// with Q an orthonormal basis of the span.
inline double annihilator_residual(const Mat& cols, const Vec& p, double rank_tol = 1e-8) {
  const Mat q = orthonormal_range(cols, rank_tol);
  return (q.transpose() * p).norm() / p.norm();
}

/// Regular if p in E2-perp minus E3-perp at every sample, totally irregular
/// if p in E3-perp at every sample, otherwise other.
inline ClassifyReport classify_abnormal(const FlagSpanFn& spans, const BiExtremalArc& arc, double threshold = 1e-8,
                                        std::size_t stride = 1) {
  if (!arc.abnormal()) throw InvalidArgument("classify_abnormal: arc is not abnormal");
  if (arc.states.empty()) throw InvalidArgument("classify_abnormal: empty arc");
  ClassifyReport rep;
  rep.min_res3 = std::numeric_limits<double>::infinity();
  bool all2 = true, all3 = true, none3 = true;
  for (std::size_t k = 0; k < arc.size(); k += std::max<std::size_t>(1, stride)) {
    const auto s = spans(arc.states[k]);
    const double r2 = annihilator_residual(s.e2, arc.costates[k]);
    const double r3 = annihilator_residual(s.e3, arc.costates[k]);
    rep.max_res2 = std::max(rep.max_res2, r2);
    rep.max_res3 = std::max(rep.max_res3, r3);
    rep.min_res3 = std::min(rep.min_res3, r3);
    all2 = all2 && r2 <= threshold;
    all3 = all3 && r3 <= threshold;
    none3 = none3 && r3 > threshold;
  }
  if (all3) rep.type = AbnormalType::totally_irregular;
  else if (all2 && none3) rep.type = AbnormalType::regular;
  return rep;
}

}  // namespace geoctl
