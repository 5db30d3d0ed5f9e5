// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "cartan_support.hpp"
#include "geoctl/cartan/asymmetry.hpp"
#include "geoctl/cartan/duality.hpp"
#include "geoctl/control/control_system.hpp"
#include "geoctl/control/steering.hpp"
#include "geoctl/extremals/abnormal.hpp"
#include "geoctl/extremals/classify.hpp"
#include "geoctl/extremals/normal.hpp"
#include "geoctl/extremals/residual.hpp"
#include "geoctl/flags/derived_flag.hpp"
#include "geoctl/srmetric/cone_geodesics.hpp"
#include "geoctl/srmetric/lifting.hpp"
#include "geoctl/srmetric/pmp.hpp"
#include "oracles.hpp"

using namespace geoctl;
using namespace geoctl::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ControlSystem m5() { return make_system(Chart::numbered("x", 5), m5_frame()); }
ControlSystem heis() { return make_system(Chart({"x", "y", "z"}), heisenberg_frame()); }

double eval_pairing(const PolyVectorField& f, const Vec& x, const Vec& p) {
  const std::vector<double> xs(x.data(), x.data() + x.size());
  double s = 0;
  for (std::size_t i = 0; i < f.nvars(); ++i) s += p(static_cast<Eigen::Index>(i)) * f[i].eval(xs);
  return s;
}

/// Abnormal arcs of M5 from random points and random covectors in the
/// annihilator of X1, X2, [X1,X2].
std::vector<BiExtremalArc> m5_abnormal_arcs(int n, std::uint64_t seed) {
  const auto fr = m5_frame();
  const auto af = abnormal_frame(fr[0], fr[1]);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::normal_distribution<double> g;
  std::vector<BiExtremalArc> arcs;
  while (static_cast<int>(arcs.size()) < n) {
    Vec x0(5);
    for (int i = 0; i < 5; ++i) x0(i) = u(rng);
    Mat A(5, 3);
    A << (*af.x1)(x0), (*af.x2)(x0), (*af.w)(x0);
    const Mat N = left_nullspace(A, 1e-12);
    const Vec p0 = N * Vec::NullaryExpr(N.cols(), [&](Eigen::Index) { return g(rng); });
    arcs.push_back(integrate_abnormal_rank2(af, x0, p0 / p0.norm(), 1.0));
  }
  return arcs;
}

ControlSignal random_signal(std::mt19937_64& rng, int m, int N) {
  std::normal_distribution<double> g;
  std::vector<Vec> s;
  for (int k = 0; k < N; ++k) s.push_back(Vec::NullaryExpr(m, [&](Eigen::Index) { return g(rng); }));
  return ControlSignal(0, 1, s);
}

/// Arc controls averaged over `intervals` equal pieces of [t0, t1].
ControlSignal resample(const BiExtremalArc& arc, int intervals) {
  const double t0 = arc.times.front(), t1 = arc.times.back(), w = (t1 - t0) / intervals;
  std::vector<Vec> s(static_cast<std::size_t>(intervals), Vec::Zero(arc.controls[0].size()));
  std::vector<int> count(static_cast<std::size_t>(intervals), 0);
  for (std::size_t k = 0; k + 1 < arc.size(); ++k) {
    const double tm = 0.5 * (arc.times[k] + arc.times[k + 1]);
    const auto i = static_cast<std::size_t>(std::min<int>(intervals - 1, static_cast<int>((tm - t0) / w)));
    s[i] += 0.5 * (arc.controls[k] + arc.controls[k + 1]);
    ++count[i];
  }
  for (std::size_t i = 0; i < s.size(); ++i) s[i] /= std::max(1, count[i]);
  return ControlSignal(t0, t1, s);
}

Outcome growth_vectors() {
  std::mt19937_64 rng(101);
  const auto fr = m5_frame();
  std::vector<RationalVector> pts;
  for (int k = 0; k < 100; ++k) pts.push_back(random_point(rng, 5));
  const auto t0 = std::chrono::steady_clock::now();
  int good = 0;
  for (const auto& x : pts) {
    const auto f = derived_flag(fr, x, 4);
    good += f.exact && f.growth == std::vector<int>{2, 3, 5};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {good == 100 && secs < 5.0, std::to_string(good) + "/100 exact (2,3,5)" + fmt(", %.2f s", secs)};
}

Outcome prolongation_growth() {
  std::mt19937_64 rng(102);
  const auto& pc = *m5_prolonged();
  int good = 0;
  for (int k = 0; k < 10; ++k) good += pc.flag(random_z(rng), 6, 1e-6).growth == std::vector<int>{2, 3, 4, 5, 6};
  return {good == 10, std::to_string(good) + "/10 points with growth (2,3,4,5,6)"};
}

Outcome normal_conservation() {
  std::mt19937_64 rng(103);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0;
  int bad = 0;
  for (const auto& sys : {m5(), heis()}) {
    const auto prob = OptimalControlProblem::full_energy(sys);
    const int n = sys.state_dim();
    for (int k = 0; k < 20; ++k) {
      const Vec x0 = Vec::NullaryExpr(n, [&](Eigen::Index) { return u(rng); });
      const Vec p = Vec::NullaryExpr(n, [&](Eigen::Index) { return g(rng); });
      const auto arc = integrate_normal(prob, x0, p, 1.0, 1e-3);
      const double r = arc.hamiltonian_drift() / std::max(1.0, std::abs(arc.hamiltonian.front()));
      worst = std::max(worst, r);
      bad += r > 1e-8;
    }
  }
  return {bad == 0, "40 arcs, max drift/max(1,h0) " + fmt("%.2e", worst)};
}

Outcome optimality_cross_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto prob = OptimalControlProblem::full_energy(heis());
  const HeisenbergTranscription oracle(200, 1.0);
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> uxy(-0.5, 0.5), uz(-0.2, 0.2);
  double max_end = 0, max_gap = 0;
  int bad = 0;
  const int ntargets = 6;
  ShootingOptions sopt;
  sopt.multistarts = 6;
  for (int k = 0; k < ntargets; ++k) {
    const Eigen::Vector3d target(uxy(rng), uxy(rng), uz(rng));
    const auto arc = shoot_normal(prob, Vec::Zero(3), target, 1.0, 1e-10, sopt);
    const auto tr = oracle.solve(target, 8, 200 + k);
    if (!tr.converged) {
      ++bad;
      continue;
    }
    const double e_shoot = arc_energy(prob, arc);
    const double end = (arc.states.back() - tr.endpoint).norm();
    const double gap = std::abs(e_shoot - tr.energy) / std::max(tr.energy, 1e-12);
    max_end = std::max(max_end, end);
    max_gap = std::max(max_gap, gap);
    bad += end > 1e-4 || gap > 1e-3;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {bad == 0 && secs < 60, std::to_string(ntargets) + " targets, endpoint " + fmt("%.2e", max_end) +
                                     ", energy gap " + fmt("%.2e", max_gap) + fmt(", %.1f s", secs)};
}

Outcome abnormal_constraints() {
  const auto fr = m5_frame();
  const auto w = lie_bracket(fr[0], fr[1]);
  double worst = 0;
  for (const auto& arc : m5_abnormal_arcs(20, 105)) {
    if (arc.times.back() < 1.0 - 1e-12) return {false, "arc stopped early"};
    for (std::size_t k = 0; k < arc.size(); ++k)
      for (const auto* f : {&fr[0], &fr[1], &w})
        worst = std::max(worst, std::abs(eval_pairing(*f, arc.states[k], arc.costates[k])));
  }
  return {worst <= 1e-7, "20 arcs, max pairing " + fmt("%.2e", worst)};
}

Outcome asymmetry() {
  AsymmetryOptions opt;
  const auto rep = verify_asymmetry(*m5_prolonged(), leaf_base(), 20, 1e-6, opt);
  return {rep.passed && static_cast<int>(rep.arcs.size()) >= 20,
          std::to_string(rep.l_tangent) + " L-tangent, " + std::to_string(rep.k_tangent) + " K-tangent, " +
              std::to_string(rep.neither) + " neither, " + std::to_string(rep.misclassified) + " misclassified"};
}

Outcome duality() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = verify_duality(m5_leaf_space(), 5, 1e-4);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {rep.passed && secs < 300,
          "5 fibers, max distance " + fmt("%.2e", rep.max_distance) + fmt(", %.1f s", secs)};
}

Outcome cone_geodesics() {
  const auto rep = verify_cone_geodesics(m5_leaf_space(), 5, 1e-4);
  return {rep.passed, "5 arcs, max distance " + fmt("%.2e", rep.max_distance) + ", max |b| " + fmt("%.2e", rep.max_b)};
}

Outcome lift_pipeline() {
  const auto& ls = m5_leaf_space();
  const auto sE = pmp_system(ls, PmpProblem::E_eE, ChartChoice::xw);
  const auto sEX = pmp_system(ls, PmpProblem::EmodN_eE, ChartChoice::xw);
  const auto sLX = pmp_system(ls, PmpProblem::LmodN_eL, ChartChoice::xw);
  std::mt19937_64 rng(109);
  std::normal_distribution<double> g;
  double lifted = 0, change = 0;
  for (int k = 0; k < 10; ++k) {
    const Vec z = ls.basepoint() + 0.03 * random_z(rng, 1.0).normalized();
    const auto pt = ls.chartmap(z);
    const Vec p0 = cone_abnormal_covector(ls.cone_jet(pt.x, pt.w), rng);
    const auto qa = quotient_abnormal_arc(ls, pt.x, pt.w, p0, 0.3, 5e-3);
    const double r1 = pmp_residual(sEX.problem, qa).max_equation();
    const auto red = reduce_biextremal(qa);
    std::vector<double> noise;
    for (std::size_t i = 0; i < qa.size(); ++i) noise.push_back(g(rng));
    const auto ext = extend_biextremal(red, noise);
    change = std::max({change, std::abs(r1 - pmp_residual(sLX.problem, red).max_equation()),
                       std::abs(r1 - pmp_residual(sEX.problem, ext).max_equation())});
    lifted = std::max(lifted, pmp_residual(sE.problem, lift_abnormal(ext, ls)).max_equation());
  }
  return {lifted <= 1e-8 && change <= 1e-12,
          "10 arcs, lifted residual " + fmt("%.2e", lifted) + ", reduce/extend change " + fmt("%.2e", change)};
}

Outcome quotient_systems() {
  const auto sys = m5();
  const std::vector<std::size_t> keep{0, 1, 2};
  std::mt19937_64 rng(110);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    const Vec x0 = Vec::NullaryExpr(5, [&](Eigen::Index) { return u(rng); });
    worst = std::max(worst, quotient_trajectory_residual(sys, keep, random_signal(rng, 2, 8), x0, 1e-3));
  }
  SteeringOptions opt;
  opt.tol = 1e-4;
  const auto rep = verify_quotient_controllability(sys, keep, Vec::Zero(5), 0.1, 10, opt);
  return {worst <= 1e-9 && rep.successes == 10,
          "trajectory residual " + fmt("%.2e", worst) + ", steering " + std::to_string(rep.successes) +
              "/10, max error " + fmt("%.2e", rep.max_error)};
}

Outcome singular_controls() {
  const auto sys = m5();
  int abnormal_singular = 0, random_regular = 0;
  for (const auto& arc : m5_abnormal_arcs(20, 111))
    abnormal_singular += is_singular_control(sys, resample(arc, 50), arc.states.front()).singular;
  std::mt19937_64 rng(112);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int k = 0; k < 20; ++k) {
    const Vec x0 = Vec::NullaryExpr(5, [&](Eigen::Index) { return u(rng); });
    random_regular += !is_singular_control(sys, random_signal(rng, 2, 20), x0).singular;
  }
  return {abnormal_singular == 20 && random_regular == 20, std::to_string(abnormal_singular) +
                                                               "/20 abnormal singular, " +
                                                               std::to_string(random_regular) +
                                                               "/20 random nonsingular"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"growth vectors of M5", growth_vectors},
      {"prolongation growth", prolongation_growth},
      {"normal Hamiltonian conservation", normal_conservation},
      {"shooting vs transcription", optimality_cross_check},
      {"abnormal constraint preservation", abnormal_constraints},
      {"abnormal asymmetry", asymmetry},
      {"leaf-space duality", duality},
      {"cone geodesics", cone_geodesics},
      {"abnormal lift pipeline", lift_pipeline},
      {"quotient systems", quotient_systems},
      {"singular-control consistency", singular_controls},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("criterion %2zu %s  %s: %s [%.2f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
