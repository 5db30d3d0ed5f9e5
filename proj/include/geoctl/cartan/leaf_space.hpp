#pragma once

#include <cmath>
#include <limits>
#include <memory>

#include "geoctl/cartan/prolongation.hpp"
#include "geoctl/control/control_system.hpp"
#include "geoctl/extremals/implicit_flow.hpp"

namespace geoctl {

struct LeafSpaceOptions {
  double flow_step = 2.5e-3;  ///< largest RK4 step along eta
  double max_time = 0.75;     ///< bound on the hitting time of the slice
  double fd_step = 1e-3;      ///< x-derivatives, Richardson with fd_step / 2
};

/// Chart components of xi = (c, f) and of its first two w-derivatives at (x, w).
struct ChartJet {
  Vec c, cw, cww;
  double f = 0, fw = 0, fww = 0;
};

/// Local leaf space X of the eta-foliation near z0. The slice through z0 is
/// orthogonal to n = eta(z0)/|eta(z0)|, with orthonormal basis B of its
/// tangent space. Chart (x, w) on Z: z = Psi(x, w) = Phi_w(z0 + B x), where
/// Phi is the eta-flow, so eta = d/dw and pi_X(z) = x.
class LocalLeafSpace {
 public:
  struct Point {
    Vec x;
    double w = 0;
  };

  LocalLeafSpace(std::shared_ptr<const ProlongedChart> pc, const Vec& z0, LeafSpaceOptions opt = {})
      : pc_(std::move(pc)), z0_(z0), opt_(opt) {
    if (z0.size() != 6) throw DimensionMismatch("leaf_space: base point must be (y, v)");
    const Vec e = (*pc_->eta_f)(z0);
    if (!(e.norm() > 1e-12)) throw DegeneratePoint("leaf_space: eta vanishes at the base point", 0.0);
    n_ = e / e.norm();
    Mat a(6, 6);
    a.col(0) = n_;
    // Complete n with the coordinate axes least aligned with it.
    Eigen::Index skip;
    n_.cwiseAbs().maxCoeff(&skip);
    for (Eigen::Index i = 0, k = 1; i < 6; ++i)
      if (i != skip) a.col(k++) = Vec::Unit(6, i);
    Eigen::HouseholderQR<Mat> qr(a);
    const Mat q = qr.householderQ();
    b_ = q.rightCols(5);
  }

  const ProlongedChart& prolonged() const { return *pc_; }
  std::shared_ptr<const ProlongedChart> prolonged_ptr() const { return pc_; }
  const Vec& basepoint() const { return z0_; }
  const Vec& normal() const { return n_; }
  const Mat& basis() const { return b_; }
  const LeafSpaceOptions& options() const { return opt_; }

  int steps_for(double t) const { return std::max(4, static_cast<int>(std::ceil(std::abs(t) / opt_.flow_step))); }

  /// Phi_t(z); with M, also the variational matrix D Phi_t.
  Vec flow(const Vec& z, double t, Mat* M = nullptr) const {
    const int n = steps_for(t);
    const double h = t / n;
    const NumField& eta = *pc_->eta_f;
    Vec x = z;
    if (M) M->setIdentity(6, 6);
    Mat j1, j2, j3, j4;
    for (int k = 0; k < n; ++k) {
      const Vec k1 = eta(x);
      const Vec x2 = x + 0.5 * h * k1;
      const Vec k2 = eta(x2);
      const Vec x3 = x + 0.5 * h * k2;
      const Vec k3 = eta(x3);
      const Vec x4 = x + h * k3;
      const Vec k4 = eta(x4);
      if (M) {
        eta.jacobian(x, j1);
        eta.jacobian(x2, j2);
        eta.jacobian(x3, j3);
        eta.jacobian(x4, j4);
        const Mat K1 = j1 * *M;
        const Mat K2 = j2 * (*M + 0.5 * h * K1);
        const Mat K3 = j3 * (*M + 0.5 * h * K2);
        const Mat K4 = j4 * (*M + h * K3);
        *M += (h / 6.0) * (K1 + 2 * K2 + 2 * K3 + K4);
      }
      x += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    if (!x.allFinite()) throw IntegrationDiverged("eta-flow blew up", t);
    return x;
  }

  /// (x, w) with Psi(x, w) = z: Newton on the hitting time of the slice,
  /// safeguarded by bisection once a sign change is bracketed.
  Point chartmap(const Vec& z) const {
    if (z.size() != 6) throw DimensionMismatch("chartmap: point must be (y, v)");
    double tau = 0, lo = 0, hi = 0;
    bool has_lo = false, has_hi = false;
    double best_tau = 0, best_g = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 100; ++it) {
      const Vec zt = flow(z, tau);
      const double g = n_.dot(zt - z0_);
      if (std::abs(g) < best_g) {
        best_g = std::abs(g);
        best_tau = tau;
      }
      if (std::abs(g) <= 1e-14) break;
      if (g < 0) {
        lo = tau;
        has_lo = true;
      } else {
        hi = tau;
        has_hi = true;
      }
      const double dg = n_.dot((*pc_->eta_f)(zt));
      double next = std::abs(dg) > 1e-12 ? tau - g / dg : tau - std::copysign(0.1 * opt_.max_time, g * dg);
      const double cap = 0.25 * opt_.max_time;
      next = std::clamp(next, tau - cap, tau + cap);
      if (has_lo && has_hi) {
        const double a = std::min(lo, hi), b = std::max(lo, hi);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (b - a < 1e-15 * std::max(1.0, std::abs(tau))) break;
      }
      if (std::abs(next) > opt_.max_time)
        throw ChartTooLarge("leaf misses the transversal slice within the flow-time bound");
      tau = next;
    }
    if (best_g > 1e-10) throw ChartTooLarge("chartmap: hitting time of the slice did not converge");
    const Vec zt = flow(z, best_tau);
    return {b_.transpose() * (zt - z0_), -best_tau};
  }

  Vec psi(const Vec& x, double w) const { return flow(z0_ + b_ * x, w); }

  /// D Psi = [M B, eta(Psi)].
  Mat dpsi(const Vec& x, double w) const {
    Mat M;
    const Vec z = flow(z0_ + b_ * x, w, &M);
    Mat d(6, 6);
    d.leftCols(5) = M * b_;
    d.col(5) = (*pc_->eta_f)(z);
    return d;
  }

  /// xi, [eta,xi] and [eta,[eta,xi]] pulled back to the chart: since
  /// eta = d/dw there, the last two are the w-derivatives of the first.
  ChartJet jet(const Vec& x, double w) const {
    if (!(std::abs(w) <= opt_.max_time)) throw ChartTooLarge("leaf coordinate w outside the flow-time bound");
    Mat M;
    const Vec z = flow(z0_ + b_ * x, w, &M);
    Mat d(6, 6);
    d.leftCols(5) = M * b_;
    d.col(5) = (*pc_->eta_f)(z);
    Eigen::PartialPivLU<Mat> lu(d);
    Mat rhs(6, 3);
    rhs << (*pc_->xi_f)(z), -(*pc_->e12)(z), -(*pc_->e212)(z);
    const Mat sol = lu.solve(rhs);
    ChartJet j;
    j.c = sol.col(0).head(5);
    j.cw = sol.col(1).head(5);
    j.cww = sol.col(2).head(5);
    j.f = sol(5, 0);
    j.fw = sol(5, 1);
    j.fww = sol(5, 2);
    return j;
  }

  /// Cone generator c(x, w) with derivatives; x-derivatives by Richardson
  /// central differences.
  ParamFieldJet cone_jet(const Vec& x, double w) const {
    const ChartJet j0 = jet(x, w);
    ParamFieldJet out;
    out.g = j0.c;
    out.gw = j0.cw;
    out.gww = j0.cww;
    out.gx.resize(5, 5);
    out.gwx.resize(5, 5);
    const double h = opt_.fd_step;
    for (int i = 0; i < 5; ++i) {
      Vec d1[2], d2[2];
      for (int pass = 0; pass < 2; ++pass) {
        const double hh = pass == 0 ? h : h / 2;
        const ChartJet p = jet(x + hh * Vec::Unit(5, i), w), m = jet(x - hh * Vec::Unit(5, i), w);
        d1[pass] = (p.c - m.c) / (2 * hh);
        d2[pass] = (p.cw - m.cw) / (2 * hh);
      }
      out.gx.col(i) = (4 * d1[1] - d1[0]) / 3;
      out.gwx.col(i) = (4 * d2[1] - d2[0]) / 3;
    }
    return out;
  }

  ParamFieldFn cone_fn() const {
    return [this](const Vec& x, double w) { return cone_jet(x, w); };
  }

  /// Numerical Jacobian (5 x 6) of the x-part of chartmap at z.
  Mat chartmap_jacobian(const Vec& z, double h = 1e-5) const {
    Mat J(5, 6);
    for (int i = 0; i < 6; ++i) {
      const Vec e = Vec::Unit(6, i);
      J.col(i) = (chartmap(z + h * e).x - chartmap(z - h * e).x) / (2 * h);
    }
    return J;
  }

  /// xi in the chart: R^6 -> R^6, (x, w) -> (c, f).
  NumFieldPtr xi_chart() const {
    auto self = std::make_shared<LocalLeafSpace>(*this);
    return std::make_shared<LambdaField>(
        6, 6,
        [self](const Vec& z, Vec& out) {
          const auto j = self->jet(z.head(5), z(5));
          out.resize(6);
          out << j.c, j.f;
        },
        [self](const Vec& z, Mat& jac) { self->chart_jacobian(z, jac, true); });
  }

  /// eta in the chart: d/dw.
  static NumFieldPtr eta_chart() {
    return std::make_shared<LambdaField>(
        6, 6, [](const Vec&, Vec& out) { out = Vec::Unit(6, 5); }, [](const Vec&, Mat& jac) { jac.setZero(6, 6); });
  }

  /// Cone generator as a parametrized field R^(5+1) -> R^5.
  NumFieldPtr cone_field() const {
    auto self = std::make_shared<LocalLeafSpace>(*this);
    return std::make_shared<LambdaField>(
        6, 5, [self](const Vec& z, Vec& out) { out = self->jet(z.head(5), z(5)).c; },
        [self](const Vec& z, Mat& jac) { self->chart_jacobian(z, jac, false); });
  }

 private:
  void chart_jacobian(const Vec& z, Mat& jac, bool with_f) const {
    const Vec x = z.head(5);
    const double w = z(5);
    const int rows = with_f ? 6 : 5;
    auto stack = [&](const ChartJet& j, bool deriv) {
      Vec v(rows);
      if (with_f) v << (deriv ? j.cw : j.c), (deriv ? j.fw : j.f);
      else v = deriv ? j.cw : j.c;
      return v;
    };
    jac.resize(rows, 6);
    jac.col(5) = stack(jet(x, w), true);
    const double h = opt_.fd_step;
    for (int i = 0; i < 5; ++i) {
      Vec d[2];
      for (int pass = 0; pass < 2; ++pass) {
        const double hh = pass == 0 ? h : h / 2;
        d[pass] = (stack(jet(x + hh * Vec::Unit(5, i), w), false) - stack(jet(x - hh * Vec::Unit(5, i), w), false)) / (2 * hh);
      }
      jac.col(i) = (4 * d[1] - d[0]) / 3;
    }
  }

  std::shared_ptr<const ProlongedChart> pc_;
  Vec z0_, n_;
  Mat b_;
  LeafSpaceOptions opt_;
};

inline LocalLeafSpace leaf_space(const ProlongedChart& pc, const Vec& z0, LeafSpaceOptions opt = {}) {
  return LocalLeafSpace(std::make_shared<const ProlongedChart>(pc), z0, opt);
}

/// The cone structure as a control system on X: x' = a c(x, w), controls (a, w).
inline ControlSystem cone_system(const LocalLeafSpace& ls) {
  return make_system(Chart::numbered("x", 5), {ls.cone_field()}, 1, {"a", "w"}, SystemLabel::quotient);
}

}  // namespace geoctl
