#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace geoctl {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;

inline double to_double(const Rational& q) { return q.get_d(); }

inline std::vector<double> to_double(const RationalVector& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& q : v) out.push_back(q.get_d());
  return out;
}

/// Exact rational from a double (every finite double is a dyadic rational).
inline Rational from_double(double d) {
  Rational q(d);
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace geoctl
