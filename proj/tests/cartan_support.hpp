#pragma once

#include <memory>

#include "geoctl/cartan/leaf_space.hpp"
#include "geoctl/cartan/prolongation.hpp"
#include "test_support.hpp"

namespace geoctl::testing {

/// M5 with X2 tilted by x2 d/dx1; Cartan, with nonzero rho.
inline std::vector<PolyVectorField> sheared_m5_frame() {
  const auto n = xnames(5);
  return {field({"1", "0", "0", "0", "0"}, n), field({"x2", "1", "x1", "x1^2/2", "x1*x2"}, n)};
}

inline std::shared_ptr<const ProlongedChart> prolonged(const std::vector<PolyVectorField>& frame) {
  const auto cm = certify_cartan(Chart::numbered("x", 5), frame, RationalVector(5, Rational(0)));
  return std::make_shared<const ProlongedChart>(prolong(cm));
}

inline const std::shared_ptr<const ProlongedChart>& m5_prolonged() {
  static const auto pc = prolonged(m5_frame());
  return pc;
}

inline const std::shared_ptr<const ProlongedChart>& sheared_prolonged() {
  static const auto pc = prolonged(sheared_m5_frame());
  return pc;
}

inline Vec leaf_base() {
  Vec z0(6);
  z0 << 0.1, -0.05, 0.02, 0.01, -0.03, 0.3;
  return z0;
}

inline const LocalLeafSpace& m5_leaf_space() {
  static const LocalLeafSpace ls(m5_prolonged(), leaf_base());
  return ls;
}

inline Vec random_z(std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::uniform_real_distribution<double> a(0.0, M_PI);
  Vec z(6);
  for (int i = 0; i < 5; ++i) z(i) = u(rng);
  z(5) = a(rng);
  return z;
}

}  // namespace geoctl::testing
