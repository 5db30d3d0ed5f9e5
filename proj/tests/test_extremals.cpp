#include <gtest/gtest.h>

#include <random>

#include "geoctl/control/control_system.hpp"
#include "geoctl/extremals/abnormal.hpp"
#include "geoctl/extremals/classify.hpp"
#include "geoctl/extremals/implicit_flow.hpp"
#include "geoctl/extremals/normal.hpp"
#include "geoctl/extremals/problem.hpp"
#include "geoctl/extremals/residual.hpp"
#include "test_support.hpp"

using namespace geoctl;
using namespace geoctl::testing;

namespace {

Vec v(std::initializer_list<double> l) {
  Vec r(static_cast<Eigen::Index>(l.size()));
  Eigen::Index i = 0;
  for (double d : l) r(i++) = d;
  return r;
}

ControlSystem m5() { return make_system(Chart::numbered("x", 5), m5_frame()); }
ControlSystem heis() { return make_system(Chart({"x", "y", "z"}), heisenberg_frame()); }
ControlSystem flat2() {
  return make_system(Chart({"x1", "x2"}), {PolyVectorField::coordinate(2, 0), PolyVectorField::coordinate(2, 1)});
}

AbnormalFrame m5_abnormal() { return abnormal_frame(m5_frame()[0], m5_frame()[1]); }

/// Random p at x annihilating X1, X2, [X1,X2] of M5, unit norm.
Vec admissible_m5(const Vec& x, std::mt19937_64& rng) {
  const auto f = m5_abnormal();
  Mat A(5, 3);
  A << (*f.x1)(x), (*f.x2)(x), (*f.w)(x);
  const Mat N = left_nullspace(A, 1e-12);
  std::normal_distribution<double> g;
  Vec c(N.cols());
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
  Vec p = N * c;
  return p / p.norm();
}

}  // namespace

TEST(Hamiltonian, DxOneAlongFirstField) { EXPECT_DOUBLE_EQ(hamiltonian(m5(), Vec::Zero(5), v({1, 0, 0, 0, 0}), v({1, 0})), 1.0); }

TEST(Hamiltonian, AnnihilatingCovectorGivesZero) {
  EXPECT_DOUBLE_EQ(hamiltonian(m5(), Vec::Zero(5), v({0, 0, 1, 2, 3}), v({0.4, -2})), 0.0);
}

TEST(Hamiltonian, CoefficientOfDx3) {
  EXPECT_DOUBLE_EQ(hamiltonian(m5(), v({1, 0, 0, 0, 0}), v({0, 0, 1, 0, 0}), v({0, 1})), 1.0);
}

TEST(OcpHamiltonian, AbnormalEqualsPlainHamiltonian) {
  const auto prob = OptimalControlProblem::full_energy(m5());
  const Vec x = v({0.1, 0.2, 0.3, 0.4, 0.5}), p = v({1, -1, 2, 0, 3}), u = v({0.7, -0.2});
  EXPECT_DOUBLE_EQ(ocp_hamiltonian(prob, x, p, u, 0.0), hamiltonian(m5(), x, p, u));
}

TEST(OcpHamiltonian, ZeroControlAndDirectFormula) {
  const auto prob = OptimalControlProblem::full_energy(m5());
  EXPECT_DOUBLE_EQ(ocp_hamiltonian(prob, Vec::Zero(5), v({1, 2, 3, 4, 5}), Vec::Zero(2), -1.0), 0.0);
  EXPECT_DOUBLE_EQ(ocp_hamiltonian(prob, Vec::Zero(5), v({1, 0, 0, 0, 0}), v({1, 0}), -1.0), 0.5);
  EXPECT_THROW(ocp_hamiltonian(prob, Vec::Zero(5), v({1, 0, 0, 0, 0}), v({1, 0}), 0.5), InvalidArgument);
}

TEST(NormalHamiltonian, Examples) {
  EXPECT_DOUBLE_EQ(normal_hamiltonian(OptimalControlProblem::full_energy(m5()), Vec::Zero(5), v({0, 0, 1, 1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(normal_hamiltonian(OptimalControlProblem::full_energy(flat2()), Vec::Zero(2), v({3, 4})), 12.5);
  EXPECT_DOUBLE_EQ(normal_hamiltonian(OptimalControlProblem::full_energy(m5()), v({1, 0, 0, 0, 0}), v({0, 0, 1, 0, 0})), 0.5);
}

TEST(IntegrateNormal, FlatFrameStraightLine) {
  const auto prob = OptimalControlProblem::full_energy(flat2());
  const auto arc = integrate_normal(prob, v({1, 2}), v({0.3, -0.4}), 2.0);
  EXPECT_LE((arc.states.back() - v({1.6, 1.2})).norm(), 1e-12);
  EXPECT_LE(arc.hamiltonian_drift(), 1e-15);
  EXPECT_EQ(arc.p0, -1.0);
  const auto r = pmp_residual(prob, arc);
  EXPECT_LE(r.max_equation(), 1e-9);
}

TEST(IntegrateNormal, HeisenbergProjectsToCircle) {
  // With p = (0, 1, -2) the (x, y) curve is a circle of radius 1/2 through 0.
  const auto prob = OptimalControlProblem::full_energy(heis());
  const auto arc = integrate_normal(prob, Vec::Zero(3), v({0, 1, -2}), 1.0);
  // Fit the circle centre from three samples and check every sample.
  const Vec a = arc.states[0].head(2), b = arc.states[300].head(2), c = arc.states[700].head(2);
  Mat M(2, 2);
  M << 2 * (b - a).transpose(), 2 * (c - a).transpose();
  const Vec rhs = v({b.squaredNorm() - a.squaredNorm(), c.squaredNorm() - a.squaredNorm()});
  const Vec centre = M.lu().solve(rhs);
  const double R = (a - centre).norm();
  EXPECT_NEAR(R, 0.5, 1e-9);
  for (const auto& s : arc.states) EXPECT_NEAR((s.head(2) - centre).norm(), R, 1e-9);
}

TEST(IntegrateNormal, ConservationAndEliminationOnFreeNilpotent) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const auto prob = OptimalControlProblem::full_energy(m5());
  for (int t = 0; t < 5; ++t) {
    Vec p(5);
    for (int i = 0; i < 5; ++i) p(i) = g(rng);
    const auto arc = integrate_normal(prob, Vec::Zero(5), p, 1.0);
    EXPECT_LE(arc.hamiltonian_drift(), 1e-8 * std::max(1.0, arc.hamiltonian[0]));
    EXPECT_EQ(arc.max_constraint(), 0.0);
    const auto r = pmp_residual(prob, arc);
    EXPECT_LE(r.stationarity, 1e-12);
    EXPECT_LE(r.state, 1e-8);
    EXPECT_LE(r.costate, 1e-8);
  }
}

TEST(IntegrateNormal, PartialEnergyKeepsFreeConstraint) {
  // Heisenberg with energy only on u1; p must annihilate X2 initially.
  const auto prob = OptimalControlProblem::partial_energy(heis(), {0});
  EXPECT_THROW(integrate_normal(prob, Vec::Zero(3), v({1, 1, 0}), 1.0), PreconditionViolation);
  EXPECT_THROW(integrate_normal(prob, Vec::Zero(3), v({1, 0, 0.5}), 1.0), DegeneratePoint);
  const auto arc = integrate_normal(prob, Vec::Zero(3), v({1, 0, 0}), 1.0);
  for (const auto& c : arc.constraints) EXPECT_LE(std::abs(c(1)), 1e-9);
  EXPECT_LE(arc.hamiltonian_drift(), 1e-9);
}

TEST(ShootNormal, FlatSegment) {
  const auto prob = OptimalControlProblem::full_energy(flat2());
  const auto arc = shoot_normal(prob, Vec::Zero(2), v({1, 0}), 1.0, 1e-10);
  EXPECT_LE((arc.costates[0] - v({1, 0})).norm(), 1e-8);
  EXPECT_LE((arc.states.back() - v({1, 0})).norm(), 1e-10);
}

TEST(ShootNormal, HeisenbergNotBelowTranscriptionOptimum) {
  // The minimal energy to reach (0,0,a) in unit time is pi * a * 2 (a circle
  // enclosing area a): 0.2 pi for a = 0.1.
  const auto prob = OptimalControlProblem::full_energy(heis());
  const auto arc = shoot_normal(prob, Vec::Zero(3), v({0, 0, 0.1}), 1.0, 1e-9);
  EXPECT_LE((arc.states.back() - v({0, 0, 0.1})).norm(), 1e-9);
  EXPECT_GE(arc_energy(prob, arc), 0.2 * M_PI - 1e-3);
  EXPECT_NEAR(arc_energy(prob, arc), 0.2 * M_PI, 1e-3);
}

TEST(ShootNormal, UnreachableTargetFails) {
  const auto sys = make_system(Chart({"x1", "x2"}), {PolyVectorField::coordinate(2, 0)});
  ShootingOptions opt;
  opt.multistarts = 3;
  EXPECT_THROW(shoot_normal(OptimalControlProblem::full_energy(sys), Vec::Zero(2), v({0.2, 0.3}), 1.0, 1e-8, opt),
               ShootingFailed);
}

TEST(Abnormal, Dx5GivesStraightLine) {
  const auto arc = integrate_abnormal_rank2(m5_abnormal(), Vec::Zero(5), v({0, 0, 0, 0, 1}), 1.0);
  for (std::size_t k = 0; k < arc.size(); ++k) {
    EXPECT_LE((arc.controls[k] - v({1, 0})).norm(), 1e-15);
    EXPECT_LE((arc.states[k] - v({arc.times[k], 0, 0, 0, 0})).norm(), 1e-12);
    EXPECT_LE((arc.costates[k] - v({0, 0, 0, 0, 1})).norm(), 1e-15);
  }
  EXPECT_EQ(arc.p0, 0.0);
  const auto r = pmp_residual(OptimalControlProblem::full_energy(m5()), arc);
  EXPECT_LE(r.max_equation(), 1e-8);
}

TEST(Abnormal, Dx4GivesMinusSecondField) {
  const auto arc = integrate_abnormal_rank2(m5_abnormal(), Vec::Zero(5), v({0, 0, 0, 1, 0}), 0.5);
  EXPECT_LE((arc.controls[0] - v({0, -1})).norm(), 1e-15);
  EXPECT_LE((arc.states.back() - v({0, -0.5, 0, 0, 0})).norm(), 1e-12);
}

TEST(Abnormal, PreconditionsRejected) {
  try {
    integrate_abnormal_rank2(m5_abnormal(), Vec::Zero(5), v({1, 0, 0, 0, 1}), 1.0);
    FAIL();
  } catch (const PreconditionViolation& e) {
    EXPECT_EQ(e.constraint(), "<p,X1> = 0");
  }
  EXPECT_THROW(integrate_abnormal_rank2(m5_abnormal(), Vec::Zero(5), v({0, 0, 1, 0, 0}), 1.0), PreconditionViolation);
  EXPECT_THROW(integrate_abnormal_rank2(m5_abnormal(), Vec::Zero(5), Vec::Zero(5), 1.0), PreconditionViolation);
}

TEST(Abnormal, ConstraintsPreservedAndScaleInvariant) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const Vec x0 = Vec::Random(5) * 0.5;
    const Vec p0 = admissible_m5(x0, rng);
    const auto a = integrate_abnormal_rank2(m5_abnormal(), x0, p0, 1.0);
    EXPECT_LE(a.max_constraint(), 1e-7);
    const auto b = integrate_abnormal_rank2(m5_abnormal(), x0, 3.5 * p0, 1.0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_LE((a.states[k] - b.states[k]).norm(), 1e-9);
      EXPECT_LE((3.5 * a.costates[k] - b.costates[k]).norm(), 1e-9);
    }
    // Negative scaling reverses orientation: same curve, opposite direction.
    const auto c = integrate_abnormal_rank2(m5_abnormal(), x0, -p0, 1.0);
    EXPECT_LE((c.controls[0] + a.controls[0]).norm(), 1e-12);
  }
}

TEST(Abnormal, DegeneratePointLocated) {
  // Flat frame on R^5 padded: brackets vanish, so h1 = h2 = 0.
  const auto x1 = PolyVectorField::coordinate(5, 0), x2 = PolyVectorField::coordinate(5, 1);
  try {
    integrate_abnormal_rank2(abnormal_frame(x1, x2), Vec::Zero(5), v({0, 0, 1, 0, 0}), 1.0);
    FAIL();
  } catch (const DegeneratePoint& e) {
    EXPECT_EQ(e.time(), 0.0);
  }
}

TEST(Abnormal, TrajectoriesAreSingularControls) {
  std::mt19937_64 rng(7);
  const auto sys = m5();
  for (int t = 0; t < 3; ++t) {
    const Vec x0 = Vec::Random(5) * 0.5;
    const auto arc = integrate_abnormal_rank2(m5_abnormal(), x0, admissible_m5(x0, rng), 1.0);
    std::vector<Vec> s;
    for (int k = 0; k < 10; ++k) s.push_back(arc.controls[static_cast<std::size_t>(k * 100 + 50)]);
    EXPECT_TRUE(is_singular_control(sys, ControlSignal(0, 1, s), x0).singular);
  }
}

TEST(PmpResidual, RandomArcFailsStationarity) {
  const auto prob = OptimalControlProblem::full_energy(m5());
  auto arc = integrate_normal(prob, Vec::Zero(5), v({1, 0.5, 0.2, 0, 0}), 0.2);
  for (auto& u : arc.controls) u += v({0.3, -0.2});
  EXPECT_GT(pmp_residual(prob, arc).stationarity, 0.1);
}

TEST(Classify, SyntheticMembership) {
  // E2 = span{e1,e2,e3}, E3 = span{e1..e4} on R^5.
  FlagSpanFn spans = [](const Vec&) {
    FlagSpans s;
    s.e2 = Mat::Identity(5, 3);
    s.e3 = Mat::Identity(5, 4);
    return s;
  };
  BiExtremalArc arc;
  arc.times = {0, 1};
  arc.states = {Vec::Zero(5), Vec::Zero(5)};
  arc.costates = {v({0, 0, 0, 1, 1}), v({0, 0, 0, 0.5, 1})};
  EXPECT_EQ(classify_abnormal(spans, arc).type, AbnormalType::regular);
  arc.costates = {v({0, 0, 0, 0, 1}), v({0, 0, 0, 0, 2})};
  EXPECT_EQ(classify_abnormal(spans, arc).type, AbnormalType::totally_irregular);
  arc.costates = {v({0, 0, 0, 0, 1}), v({0, 0, 1e-3, 0, 2})};
  EXPECT_EQ(classify_abnormal(spans, arc).type, AbnormalType::other);
}

TEST(ImplicitFlow, ParameterFreeReducesToHamiltonFlow) {
  // K = 1/2 |p|^2 + 1/2 w^2 p1 with w fixed at 0 by K_w = w p1 = 0.
  ImplicitModel m = [](const Vec& x, const Vec& w, const Vec& p) {
    ImplicitDerivs d;
    d.K = 0.5 * p.squaredNorm() + 0.5 * w(0) * w(0) * p(0);
    d.Kx = Vec::Zero(x.size());
    d.Kp = p;
    d.Kp(0) += 0.5 * w(0) * w(0);
    d.Kw = Vec::Constant(1, w(0) * p(0));
    d.Kww = Mat::Constant(1, 1, p(0));
    d.Kwx = Mat::Zero(1, x.size());
    d.Kwp = Mat::Zero(1, p.size());
    d.Kwp(0, 0) = w(0);
    return d;
  };
  const auto arc = integrate_implicit(m, Vec::Zero(2), Vec::Zero(1), v({1, 2}), 1.0, 1e-2);
  EXPECT_LE((arc.xs.back() - v({1, 2})).norm(), 1e-13);
  EXPECT_LE(std::abs(arc.ws.back()(0)), 1e-15);
  EXPECT_THROW(integrate_implicit(m, Vec::Zero(2), Vec::Constant(1, 0.5), v({1, 2}), 1.0, 1e-2), PreconditionViolation);
}
