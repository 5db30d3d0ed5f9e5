#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "geoctl/cartan/prolongation.hpp"
#include "geoctl/core/linalg.hpp"

namespace geoctl {

/// A metric on a distribution, presented by declaring a frame orthonormal.
struct SubRiemannianMetric {
  std::vector<NumFieldPtr> frame;
  std::vector<std::string> names;

  int rank() const { return static_cast<int>(frame.size()); }

  Mat frame_matrix(const Vec& z) const {
    if (frame.empty()) throw InvalidArgument("metric has an empty frame");
    Mat m(frame[0]->out_dim(), rank());
    for (int i = 0; i < rank(); ++i) m.col(i) = (*frame[static_cast<std::size_t>(i)])(z);
    return m;
  }

  /// Frame coordinates of v; throws if v is not in the span at z.
  Vec coordinates(const Vec& z, const Vec& v, double tol = 1e-9) const {
    const Mat m = frame_matrix(z);
    const Vec a = lstsq(m, v);
    if ((m * a - v).norm() > tol * std::max(1.0, v.norm())) throw InvalidArgument("vector is not in the distribution");
    return a;
  }

  double norm2(const Vec& z, const Vec& v) const { return coordinates(z, v).squaredNorm(); }
};

enum class EnergyKind { eL, eK, eE };

/// Which control coordinates are penalized: S_L (L-frame coefficients) and
/// S_K (K-frame coefficients).
struct EnergySelector {
  EnergyKind which = EnergyKind::eE;
  std::vector<int> SL, SK;

  std::vector<int> indices() const {
    std::vector<int> out;
    if (which != EnergyKind::eK) out.insert(out.end(), SL.begin(), SL.end());
    if (which != EnergyKind::eL) out.insert(out.end(), SK.begin(), SK.end());
    return out;
  }
};

/// g_E(v + w, v + w) = g_L(v, v) + g_K(w, w) on E = L + K.
struct ProductMetricStructure {
  SubRiemannianMetric gL, gK, gE;

  /// (a, b): coordinates of a vector of E in the L-frame and the K-frame.
  std::pair<Vec, Vec> split(const Vec& z, const Vec& v) const {
    const Vec c = gE.coordinates(z, v);
    return {c.head(gL.rank()), c.tail(gK.rank())};
  }

  double norm2(const Vec& z, const Vec& v) const { return gE.norm2(z, v); }

  EnergySelector selector(EnergyKind k) const {
    EnergySelector s;
    s.which = k;
    for (int i = 0; i < gL.rank(); ++i) s.SL.push_back(i);
    for (int i = 0; i < gK.rank(); ++i) s.SK.push_back(gL.rank() + i);
    return s;
  }
};

/// Product metric; the frames must span complementary subspaces at every
/// sample point.
inline ProductMetricStructure product_metric(const SubRiemannianMetric& gL, const SubRiemannianMetric& gK,
                                             const std::vector<Vec>& samples, double tol = 1e-9) {
  ProductMetricStructure s;
  s.gL = gL;
  s.gK = gK;
  s.gE.frame = gL.frame;
  s.gE.frame.insert(s.gE.frame.end(), gK.frame.begin(), gK.frame.end());
  s.gE.names = gL.names;
  s.gE.names.insert(s.gE.names.end(), gK.names.begin(), gK.names.end());
  for (const auto& z : samples)
    if (numeric_rank(s.gE.frame_matrix(z), tol) != gL.rank() + gK.rank())
      throw InvalidArgument("product_metric: L and K frames are not complementary");
  return s;
}

/// Distance on P(R^2) with the quotient metric of the unit circle.
inline double projective_fiber_distance(double a1, double a2) {
  const double d = std::fmod(std::abs(a1 - a2), M_PI);
  return std::min(d, M_PI - d);
}

/// Sub-Riemannian Cartan structure: g_L makes xi = d/dv unit (v is arclength
/// on the fibers P(D_y)); g_K is induced from g_D through pi_Y*: K -> D.
struct SRCartan {
  std::shared_ptr<const ProlongedChart> prolonged;
  ProductMetricStructure metric;

  /// Length of a pi_Y-fiber in g_L.
  static double fiber_length() { return M_PI; }

  /// g_D-norm of pi_Y* eta at z.
  double induced_k_norm(const Vec& z) const {
    const auto& pc = *prolonged;
    const Vec y = z.head(5);
    Mat d(5, 2);
    d << CompiledField(pc.base.frame[0])(y), CompiledField(pc.base.frame[1])(y);
    const Vec e = (*pc.eta_f)(z).head(5);
    const Vec a = lstsq(d, e);
    if ((d * a - e).norm() > 1e-9) throw InvalidArgument("pi_Y* eta is not in D");
    return a.norm();
  }
};

/// gD is the metric declaring the model frame orthonormal.
inline SRCartan build_srcartan(const CartanModel& model, const std::vector<PolyVectorField>& gD) {
  if (gD.size() != 2 || !(gD[0] == model.frame[0]) || !(gD[1] == model.frame[1]))
    throw InvalidArgument("build_srcartan: metric frame differs from the model frame");
  SRCartan s;
  s.prolonged = std::make_shared<const ProlongedChart>(prolong(model));
  const auto& pc = *s.prolonged;
  std::vector<Vec> samples;
  const Vec y0 = to_vec(to_double(model.base_point));
  for (int k = 0; k < 6; ++k) {
    Vec z(6);
    z << y0, k * M_PI / 6;
    samples.push_back(z);
  }
  s.metric = product_metric({{pc.xi_f}, {"xi"}}, {{pc.eta_f}, {"eta"}}, samples);
  return s;
}

}  // namespace geoctl
