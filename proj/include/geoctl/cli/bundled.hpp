#pragma once

#include <vector>

#include "geoctl/io/model_file.hpp"

namespace geoctl::cli {

inline ModelFile m5_model() {
  auto m = make_model("m5", {"x1", "x2", "x3", "x4", "x5"},
                      {{"X1", {"1", "0", "0", "0", "0"}}, {"X2", {"0", "1", "x1", "(1/2)*x1^2", "x1*x2"}}});
  ProblemBlock ab;
  ab.kind = "abnormal";
  ab.covector = std::vector<double>{0, 0, 0, 0, 1};
  ab.horizon = 1.0;
  m.problems["abnormal"] = ab;
  ProblemBlock nm;
  nm.kind = "normal";
  nm.covector = std::vector<double>{1, 0.5, 0.25, -0.5, 0.75};
  nm.horizon = 1.0;
  m.problems["normal"] = nm;
  ProblemBlock st;
  st.kind = "steer";
  st.keep = std::vector<std::size_t>{0, 1, 2};
  st.radius = 0.1;
  st.samples = 10;
  st.tol = 1e-4;
  st.step = 1e-2;
  m.problems["steer"] = st;
  ProblemBlock du;
  du.kind = "duality";
  du.fiber = 0.3;
  du.samples = 20;
  m.problems["duality"] = du;
  return m;
}

inline ModelFile heisenberg_model() {
  auto m = make_model("heisenberg", {"x", "y", "z"}, {{"X", {"1", "0", "0"}}, {"Y", {"0", "1", "x"}}});
  ProblemBlock nm;
  nm.kind = "normal";
  nm.covector = std::vector<double>{1, 0, 2};
  nm.horizon = 1.0;
  m.problems["normal"] = nm;
  ProblemBlock st;
  st.kind = "steer";
  st.keep = std::vector<std::size_t>{0, 1};
  st.radius = 0.1;
  st.samples = 10;
  st.tol = 1e-4;
  st.step = 1e-2;
  m.problems["steer"] = st;
  return m;
}

/// Coordinate planes: involutive, growth (2, 2).
inline ModelFile involutive_model() {
  return make_model("involutive", {"x1", "x2", "x3", "x4", "x5"},
                    {{"X1", {"1", "0", "0", "0", "0"}}, {"X2", {"0", "1", "0", "0", "0"}}});
}

/// M5 with X2 tilted by x2 d/dx1: Cartan, but rho + rho_vv does not vanish.
inline ModelFile sheared_m5_model() {
  auto m = make_model("sheared_m5", {"x1", "x2", "x3", "x4", "x5"},
                      {{"X1", {"1", "0", "0", "0", "0"}}, {"X2", {"x2", "1", "x1", "(1/2)*x1^2", "x1*x2"}}});
  ProblemBlock du;
  du.kind = "duality";
  du.fiber = 0.3;
  du.samples = 20;
  m.problems["duality"] = du;
  return m;
}

inline std::vector<ModelFile> bundled_models() {
  return {m5_model(), heisenberg_model(), involutive_model(), sheared_m5_model()};
}

}  // namespace geoctl::cli
