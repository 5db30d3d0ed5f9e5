#pragma once

#include <limits>
#include <optional>
#include <random>

#include "geoctl/extremals/arc.hpp"
#include "geoctl/extremals/problem.hpp"

namespace geoctl {

namespace detail {

/// Normal extremal vector field at p0 = -1 on (x, p) for a parameter-free
/// frame. Penalized controls are u_i = <p, X_i>; unpenalized ones are chosen
/// (least squares) so that the constraints <p, X_j> = 0 are preserved.
class NormalFlow {
 public:
  explicit NormalFlow(const OptimalControlProblem& prob) : prob_(prob) {
    if (prob.sys.param_dim() != 0) throw Unsupported("integrate_normal: systems with parameters need the implicit flow");
    const int r = prob.sys.frame_size();
    for (int i = 0; i < r; ++i) (prob.penalized(i) ? pen_ : free_).push_back(i);
  }

  int n() const { return prob_.sys.state_dim(); }

  /// Controls at (x, p).
  Vec controls(const Vec& x, const Vec& p, std::vector<Vec>* vals = nullptr, std::vector<Mat>* jacs = nullptr) const {
    const auto& fields = prob_.sys.dyn->fields();
    const int r = prob_.sys.frame_size();
    std::vector<Vec> v(static_cast<std::size_t>(r));
    std::vector<Mat> j(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
      fields[static_cast<std::size_t>(i)]->value(x, v[static_cast<std::size_t>(i)]);
      fields[static_cast<std::size_t>(i)]->jacobian(x, j[static_cast<std::size_t>(i)]);
    }
    Vec u = Vec::Zero(r);
    for (int i : pen_) u(i) = p.dot(v[static_cast<std::size_t>(i)]);
    if (!free_.empty()) {
      // d/dt <p, X_i> = sum_j u_j <p, [X_j, X_i]>,  [X_j, X_i] = DX_i X_j - DX_j X_i.
      auto br = [&](int a, int b) {
        const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
        return p.dot(j[ub] * v[ua] - j[ua] * v[ub]);
      };
      Mat A(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(free_.size()));
      Vec rhs = Vec::Zero(static_cast<Eigen::Index>(free_.size()));
      for (std::size_t a = 0; a < free_.size(); ++a) {
        for (std::size_t b = 0; b < free_.size(); ++b) A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = br(free_[b], free_[a]);
        for (int s : pen_) rhs(static_cast<Eigen::Index>(a)) -= u(s) * br(s, free_[a]);
      }
      const Vec uf = lstsq(A, rhs);
      const double res = (A * uf - rhs).norm();
      if (res > 1e-8 * (1.0 + rhs.norm()))
        throw DegeneratePoint("partial-energy elimination is inconsistent: unpenalized constraints cannot be preserved");
      for (std::size_t a = 0; a < free_.size(); ++a) u(free_[a]) = uf(static_cast<Eigen::Index>(a));
    }
    if (vals) *vals = std::move(v);
    if (jacs) *jacs = std::move(j);
    return u;
  }

  void rhs(const Vec& z, Vec& dz) const {
    const int nn = n();
    const Vec x = z.head(nn), p = z.tail(nn);
    std::vector<Vec> v;
    std::vector<Mat> j;
    const Vec u = controls(x, p, &v, &j);
    dz.setZero(2 * nn);
    for (std::size_t i = 0; i < v.size(); ++i) {
      dz.head(nn) += u(static_cast<Eigen::Index>(i)) * v[i];
      dz.tail(nn) -= u(static_cast<Eigen::Index>(i)) * (j[i].transpose() * p);
    }
  }

  double energy(const Vec& x, const Vec& p) const {
    const auto& fields = prob_.sys.dyn->fields();
    double h = 0.0;
    Vec v;
    for (int i : pen_) {
      fields[static_cast<std::size_t>(i)]->value(x, v);
      h += 0.5 * std::pow(p.dot(v), 2);
    }
    return h;
  }

  Vec constraints(const Vec& x, const Vec& p, const Vec& u) const {
    const auto& fields = prob_.sys.dyn->fields();
    Vec c(prob_.sys.frame_size());
    Vec v;
    for (int i = 0; i < prob_.sys.frame_size(); ++i) {
      fields[static_cast<std::size_t>(i)]->value(x, v);
      c(i) = p.dot(v) - (prob_.penalized(i) ? u(i) : 0.0);
    }
    return c;
  }

  const std::vector<int>& free_controls() const { return free_; }

 private:
  const OptimalControlProblem& prob_;
  std::vector<int> pen_, free_;
};

}  // namespace detail

/// RK4 integration of the normal extremal flow from (x0, p0cov) with p0 = -1.
inline BiExtremalArc integrate_normal(const OptimalControlProblem& prob, const Vec& x0, const Vec& p0cov, double T,
                                      double step = 1e-3) {
  const int n = prob.sys.state_dim();
  if (x0.size() != n || p0cov.size() != n) throw DimensionMismatch("integrate_normal: dimension mismatch");
  if (!(T > 0) || !(step > 0)) throw InvalidArgument("integrate_normal: horizon and step must be positive");
  detail::NormalFlow flow(prob);
  {
    const Vec c = flow.constraints(x0, p0cov, flow.controls(x0, p0cov));
    for (int j : flow.free_controls())
      if (std::abs(c(j)) > 1e-9 * (1.0 + p0cov.norm()))
        throw PreconditionViolation("<p,X" + std::to_string(j + 1) + "> = 0",
                                    "initial covector does not annihilate an unpenalized frame field");
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(T / step - 1e-9)));
  const double h = T / steps;
  BiExtremalArc arc;
  arc.p0 = -1.0;
  Vec z(2 * n);
  z << x0, p0cov;
  auto record = [&](double t, const Vec& zz) {
    const Vec x = zz.head(n), p = zz.tail(n);
    const Vec u = flow.controls(x, p);
    arc.times.push_back(t);
    arc.states.push_back(x);
    arc.costates.push_back(p);
    arc.controls.push_back(u);
    arc.constraints.push_back(flow.constraints(x, p, u));
    arc.hamiltonian.push_back(flow.energy(x, p));
  };
  record(0.0, z);
  Vec k1, k2, k3, k4;
  for (int s = 0; s < steps; ++s) {
    flow.rhs(z, k1);
    flow.rhs(z + 0.5 * h * k1, k2);
    flow.rhs(z + 0.5 * h * k2, k3);
    flow.rhs(z + h * k3, k4);
    z += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!z.allFinite()) throw IntegrationDiverged("normal extremal blew up", arc.times.back());
    record((s + 1) * h, z);
  }
  return arc;
}

/// Energy 1/2 int sum_S u_i^2 dt of a sampled arc (trapezoid rule).
inline double arc_energy(const OptimalControlProblem& prob, const BiExtremalArc& arc) {
  double e = 0.0;
  for (std::size_t k = 1; k < arc.size(); ++k)
    e += 0.5 * (arc.times[k] - arc.times[k - 1]) * (prob.cost(arc.controls[k]) + prob.cost(arc.controls[k - 1]));
  return e;
}

struct ShootingOptions {
  double step = 1e-3;
  int max_iter = 40;
  int multistarts = 12;
  unsigned seed = 1;
  double fd_step = 1e-6;
  /// Return the lowest-energy converged start instead of the first one.
  bool minimize_energy = true;
};

/// Newton shooting on p0cov -> End(p0cov) = x1 with finite-difference
/// Jacobian and backtracking, over several random starts.
inline BiExtremalArc shoot_normal(const OptimalControlProblem& prob, const Vec& x0, const Vec& x1, double T, double tol,
                                  const ShootingOptions& opt = {}) {
  const int n = prob.sys.state_dim();
  if (x1.size() != n) throw DimensionMismatch("shoot_normal: target dimension mismatch");
  auto end = [&](const Vec& p) { return integrate_normal(prob, x0, p, T, opt.step).states.back(); };
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  const double base = std::max(1.0, (x1 - x0).norm() / T);
  const double scales[] = {1.0, 3.0, 10.0};
  double best_res = std::numeric_limits<double>::infinity();
  std::optional<BiExtremalArc> best;
  double best_energy = std::numeric_limits<double>::infinity();
  for (int s = 0; s < opt.multistarts; ++s) {
    Vec p(n);
    for (int i = 0; i < n; ++i) p(i) = base * scales[s % 3] * g(rng);
    double res = std::numeric_limits<double>::infinity();
    try {
      Vec r = end(p) - x1;
      res = r.norm();
      for (int it = 0; it < opt.max_iter && res > tol; ++it) {
        Mat J(n, n);
        for (int j = 0; j < n; ++j) {
          const double hj = opt.fd_step * std::max(1.0, std::abs(p(j)));
          Vec pp = p, pm = p;
          pp(j) += hj;
          pm(j) -= hj;
          J.col(j) = (end(pp) - end(pm)) / (2 * hj);
        }
        const Vec dp = lstsq(J, -r);
        double lam = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 12; ++ls, lam *= 0.5) {
          const Vec pn = p + lam * dp;
          const Vec rn = end(pn) - x1;
          if (rn.allFinite() && rn.norm() < res) {
            p = pn;
            r = rn;
            res = rn.norm();
            improved = true;
            break;
          }
        }
        if (!improved) break;
      }
    } catch (const Error&) {
      continue;
    }
    best_res = std::min(best_res, res);
    if (res <= tol) {
      auto arc = integrate_normal(prob, x0, p, T, opt.step);
      const double e = arc_energy(prob, arc);
      if (e < best_energy) {
        best_energy = e;
        best = std::move(arc);
      }
      if (!opt.minimize_energy) break;
    }
  }
  if (!best) throw ShootingFailed("shooting did not converge from any start", best_res);
  return *best;
}

}  // namespace geoctl
