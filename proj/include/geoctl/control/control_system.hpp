#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geoctl/core/error.hpp"
#include "geoctl/core/linalg.hpp"
#include "geoctl/vecfield/numfield.hpp"
#include "geoctl/vecfield/vector_field.hpp"

namespace geoctl {

/// x' = f(x, u) with first derivatives.
class Dynamics {
 public:
  virtual ~Dynamics() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual void f(const Vec& x, const Vec& u, Vec& out) const = 0;
  virtual void jac(const Vec& x, const Vec& u, Mat& fx, Mat& fu) const = 0;
};

/// Control-affine frame dynamics with parameters:
///   f(x, (u, w)) = sum_i u_i X_i(x, w)
/// Each field maps (x, w) in R^{n+k} to R^n. Controls are ordered as the r
/// frame coefficients followed by the k parameters.
class FrameDynamics : public Dynamics {
 public:
  FrameDynamics(int n, int k, std::vector<NumFieldPtr> fields) : n_(n), k_(k), fields_(std::move(fields)) {
    if (fields_.empty()) throw InvalidArgument("frame dynamics needs at least one field");
    for (const auto& f : fields_)
      if (f->in_dim() != n_ + k_ || f->out_dim() != n_)
        throw DimensionMismatch("frame field does not map R^(n+k) to R^n");
  }

  int state_dim() const override { return n_; }
  int control_dim() const override { return static_cast<int>(fields_.size()) + k_; }
  int frame_size() const { return static_cast<int>(fields_.size()); }
  int param_dim() const { return k_; }
  const std::vector<NumFieldPtr>& fields() const { return fields_; }

  void f(const Vec& x, const Vec& u, Vec& out) const override {
    const Vec z = stack(x, u);
    out.setZero(n_);
    Vec v;
    for (int i = 0; i < frame_size(); ++i) {
      if (u(i) == 0.0) continue;
      fields_[i]->value(z, v);
      out += u(i) * v;
    }
  }

  void jac(const Vec& x, const Vec& u, Mat& fx, Mat& fu) const override {
    const Vec z = stack(x, u);
    fx.setZero(n_, n_);
    fu.setZero(n_, control_dim());
    Vec v;
    Mat j;
    for (int i = 0; i < frame_size(); ++i) {
      fields_[i]->value(z, v);
      fu.col(i) = v;
      if (u(i) == 0.0) continue;
      fields_[i]->jacobian(z, j);
      fx += u(i) * j.leftCols(n_);
      if (k_ > 0) fu.rightCols(k_) += u(i) * j.rightCols(k_);
    }
  }

  /// Evaluates X_i at (x, w).
  Vec field_value(int i, const Vec& x, const Vec& w) const {
    Vec z(n_ + k_);
    z << x, w;
    return (*fields_[i])(z);
  }

 private:
  Vec stack(const Vec& x, const Vec& u) const {
    if (x.size() != n_ || u.size() != control_dim()) throw DimensionMismatch("frame dynamics: state or control dimension mismatch");
    Vec z(n_ + k_);
    z.head(n_) = x;
    if (k_ > 0) z.tail(k_) = u.tail(k_);
    return z;
  }
  int n_, k_;
  std::vector<NumFieldPtr> fields_;
};

/// Axis-aligned open box.
struct Box {
  std::vector<double> lo, hi;
  bool contains(const Vec& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x(i) > lo[i] && x(i) < hi[i])) return false;
    return true;
  }
};

enum class SystemLabel { base, restriction, quotient };

inline std::string to_string(SystemLabel l) {
  switch (l) {
    case SystemLabel::base: return "base";
    case SystemLabel::restriction: return "restriction";
    case SystemLabel::quotient: return "quotient";
  }
  return "?";
}

/// A frame-presented control system x' = sum u_i X_i(x, w).
struct ControlSystem {
  Chart chart;
  std::vector<std::string> control_names;
  SystemLabel label = SystemLabel::base;
  std::optional<Box> box;
  std::shared_ptr<const FrameDynamics> dyn;
  /// Polynomial presentation when available (components over chart ++ params).
  std::vector<ProjectedField> poly_frame;

  int state_dim() const { return dyn->state_dim(); }
  int control_dim() const { return dyn->control_dim(); }
  int frame_size() const { return dyn->frame_size(); }
  int param_dim() const { return dyn->param_dim(); }
  bool has_poly_frame() const { return !poly_frame.empty(); }

  /// The frame as plain vector fields; requires a parameter-free polynomial frame.
  std::vector<PolyVectorField> vector_fields() const {
    if (poly_frame.empty() || param_dim() != 0) throw Unsupported("system has no parameter-free polynomial frame");
    std::vector<PolyVectorField> out;
    for (const auto& f : poly_frame) out.emplace_back(f.components);
    return out;
  }
};

inline std::vector<std::string> default_control_names(int r) {
  std::vector<std::string> names;
  for (int i = 1; i <= r; ++i) names.push_back("u" + std::to_string(i));
  return names;
}

/// Base system from polynomial frame fields on a chart.
inline ControlSystem make_system(const Chart& chart, const std::vector<PolyVectorField>& frame,
                                 std::vector<std::string> control_names = {}) {
  if (frame.empty()) throw InvalidArgument("control system needs a nonempty frame");
  ControlSystem s;
  s.chart = chart;
  std::vector<NumFieldPtr> fields;
  for (const auto& x : frame) {
    if (x.nvars() != chart.dim()) throw DimensionMismatch("frame field dimension differs from chart");
    fields.push_back(std::make_shared<CompiledField>(x));
    s.poly_frame.push_back(ProjectedField{chart, {}, x.components()});
  }
  const int n = static_cast<int>(chart.dim());
  s.dyn = std::make_shared<FrameDynamics>(n, 0, fields);
  s.control_names = control_names.empty() ? default_control_names(static_cast<int>(frame.size())) : control_names;
  return s;
}

/// System from numerically defined fields on (x, w).
inline ControlSystem make_system(const Chart& chart, std::vector<NumFieldPtr> fields, int nparams,
                                 std::vector<std::string> control_names, SystemLabel label = SystemLabel::base) {
  ControlSystem s;
  s.chart = chart;
  s.dyn = std::make_shared<FrameDynamics>(static_cast<int>(chart.dim()), nparams, std::move(fields));
  if (static_cast<int>(control_names.size()) != s.dyn->control_dim())
    throw DimensionMismatch("control names do not match control dimension");
  s.control_names = std::move(control_names);
  s.label = label;
  return s;
}

/// Piecewise-constant control on a uniform grid of N intervals over [t0, t1].
struct ControlSignal {
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<Vec> samples;

  ControlSignal() = default;
  ControlSignal(double a, double b, std::vector<Vec> s) : t0(a), t1(b), samples(std::move(s)) {
    if (!(t0 < t1)) throw InvalidArgument("control signal needs t0 < t1");
    if (samples.empty()) throw InvalidArgument("control signal needs at least one interval");
    for (const auto& u : samples)
      if (u.size() != samples[0].size()) throw DimensionMismatch("control samples of differing dimension");
  }

  static ControlSignal constant(double t0, double t1, const Vec& u, int n = 1) {
    return ControlSignal(t0, t1, std::vector<Vec>(static_cast<std::size_t>(n), u));
  }

  int intervals() const { return static_cast<int>(samples.size()); }
  int dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].size()); }
  double width() const { return (t1 - t0) / intervals(); }

  const Vec& at(double t) const {
    int k = static_cast<int>(std::floor((t - t0) / width()));
    k = std::clamp(k, 0, intervals() - 1);
    return samples[static_cast<std::size_t>(k)];
  }

  /// Controls flattened interval-major: (u_0, u_1, ...).
  Vec flatten() const {
    Vec v(intervals() * dim());
    for (int k = 0; k < intervals(); ++k) v.segment(k * dim(), dim()) = samples[static_cast<std::size_t>(k)];
    return v;
  }
  static ControlSignal unflatten(double t0, double t1, const Vec& v, int m) {
    std::vector<Vec> s;
    for (Eigen::Index k = 0; k < v.size() / m; ++k) s.push_back(v.segment(k * m, m));
    return ControlSignal(t0, t1, s);
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  ControlSignal signal;

  const Vec& endpoint() const { return states.back(); }
};

namespace detail {

inline int substeps(const ControlSignal& sig, double step) {
  if (!(step > 0.0)) throw InvalidArgument("integration step must be positive");
  if (step > sig.width() * (1 + 1e-12)) throw InvalidArgument("integration step exceeds control interval width");
  return std::max(1, static_cast<int>(std::ceil(sig.width() / step - 1e-9)));
}

inline bool finite(const Vec& x) { return x.allFinite(); }

inline Vec rk4_step(const Dynamics& d, const Vec& x, const Vec& u, double h) {
  Vec k1, k2, k3, k4;
  d.f(x, u, k1);
  d.f(x + 0.5 * h * k1, u, k2);
  d.f(x + 0.5 * h * k2, u, k3);
  d.f(x + h * k3, u, k4);
  return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace detail

/// Fixed-step classical RK4 trajectory; steps are aligned to control intervals.
inline Trajectory integrate(const ControlSystem& sys, const ControlSignal& sig, const Vec& x0, double step) {
  const auto& d = *sys.dyn;
  if (x0.size() != d.state_dim()) throw DimensionMismatch("integrate: initial state dimension mismatch");
  if (sig.dim() != d.control_dim()) throw DimensionMismatch("integrate: control dimension mismatch");
  const int m = detail::substeps(sig, step);
  const double h = sig.width() / m;
  Trajectory tr;
  tr.signal = sig;
  tr.times.reserve(static_cast<std::size_t>(sig.intervals() * m + 1));
  tr.states.reserve(tr.times.capacity());
  tr.times.push_back(sig.t0);
  tr.states.push_back(x0);
  if (sys.box && !sys.box->contains(x0)) throw DomainExit("initial state outside the restriction box", sig.t0);
  Vec x = x0;
  for (int k = 0; k < sig.intervals(); ++k) {
    const Vec& u = sig.samples[static_cast<std::size_t>(k)];
    for (int s = 0; s < m; ++s) {
      const double t = sig.t0 + k * sig.width() + (s + 1) * h;
      Vec xn = detail::rk4_step(d, x, u, h);
      if (!detail::finite(xn)) throw IntegrationDiverged("non-finite state during integration", tr.times.back());
      if (sys.box && !sys.box->contains(xn)) throw DomainExit("trajectory left the restriction box", t);
      x = std::move(xn);
      tr.times.push_back(t);
      tr.states.push_back(x);
    }
  }
  return tr;
}

inline Vec endpoint(const ControlSystem& sys, const ControlSignal& sig, const Vec& x0, double step = 1e-3) {
  return integrate(sys, sig, x0, std::min(step, sig.width())).endpoint();
}

/// Same frame restricted to an open box; nested restriction intersects boxes.
inline ControlSystem restrict(const ControlSystem& sys, const Box& box) {
  const auto n = static_cast<std::size_t>(sys.state_dim());
  if (box.lo.size() != n || box.hi.size() != n) throw DimensionMismatch("restrict: box dimension mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(box.lo[i] < box.hi[i])) throw InvalidArgument("restrict: empty box");
  ControlSystem r = sys;
  r.label = SystemLabel::restriction;
  if (sys.box) {
    Box b = box;
    for (std::size_t i = 0; i < n; ++i) {
      b.lo[i] = std::max(b.lo[i], sys.box->lo[i]);
      b.hi[i] = std::min(b.hi[i], sys.box->hi[i]);
    }
    r.box = b;
  } else {
    r.box = box;
  }
  return r;
}

/// Quotient by the coordinate projection onto `keep`. The dropped coordinates
/// are appended to the control parameters.
inline ControlSystem quotient(const ControlSystem& sys, const std::vector<std::size_t>& keep_in) {
  const int n = sys.state_dim();
  const int k = sys.param_dim();
  std::vector<std::size_t> keep = keep_in;
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty() || static_cast<int>(keep.size()) >= n) throw InvalidArgument("quotient: keep must be a proper nonempty subset");
  if (static_cast<int>(keep.back()) >= n) throw DimensionMismatch("quotient: keep index out of range");
  const int nk = static_cast<int>(keep.size());
  std::vector<bool> kept(static_cast<std::size_t>(n), false);
  for (auto i : keep) kept[i] = true;
  // perm[j]: position in the new input vector (kept, old params, dropped) of old input j.
  std::vector<int> perm(static_cast<std::size_t>(n + k));
  std::vector<std::string> qnames, dropped;
  int kpos = 0, dpos = 0;
  for (int j = 0; j < n; ++j) {
    if (kept[static_cast<std::size_t>(j)]) {
      perm[static_cast<std::size_t>(j)] = kpos++;
      qnames.push_back(sys.chart.names[static_cast<std::size_t>(j)]);
    } else {
      perm[static_cast<std::size_t>(j)] = nk + k + dpos++;
      dropped.push_back(sys.chart.names[static_cast<std::size_t>(j)]);
    }
  }
  for (int j = 0; j < k; ++j) perm[static_cast<std::size_t>(n + j)] = nk + j;
  std::vector<int> rows(keep.begin(), keep.end());
  std::vector<NumFieldPtr> fields;
  for (const auto& f : sys.dyn->fields())
    fields.push_back(std::make_shared<ProjectedNumField>(std::make_shared<PermutedNumField>(f, perm), rows));
  ControlSystem q;
  q.chart = Chart(qnames);
  q.control_names = sys.control_names;
  for (const auto& d : dropped) q.control_names.push_back(d);
  q.label = SystemLabel::quotient;
  q.dyn = std::make_shared<FrameDynamics>(nk, k + static_cast<int>(dropped.size()), fields);
  if (sys.box) {
    Box b;
    for (auto i : keep) {
      b.lo.push_back(sys.box->lo[i]);
      b.hi.push_back(sys.box->hi[i]);
    }
    q.box = b;
  }
  for (const auto& pf : sys.poly_frame) {
    ProjectedField out;
    out.chart = q.chart;
    out.params = pf.params;
    for (const auto& d : dropped) out.params.push_back(d);
    for (auto i : keep) out.components.push_back(pf.components[i].remap(static_cast<std::size_t>(n + k), perm));
    q.poly_frame.push_back(out);
  }
  return q;
}

/// Max over grid points of |d/dt pi(x) - F_q(pi(x), (u, dropped x))| along the
/// trajectory of `sig`. Derivatives by the five-point stencil, skipping points
/// whose stencil crosses a control switch.
inline double quotient_trajectory_residual(const ControlSystem& sys, const std::vector<std::size_t>& keep,
                                           const ControlSignal& sig, const Vec& x0, double step) {
  const auto q = quotient(sys, keep);
  std::vector<std::size_t> kept = keep, dropped;
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  for (std::size_t j = 0; j < static_cast<std::size_t>(sys.state_dim()); ++j)
    if (!std::binary_search(kept.begin(), kept.end(), j)) dropped.push_back(j);
  const auto tr = integrate(sys, sig, x0, step);
  auto proj = [&](const Vec& x) {
    Vec y(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) y(static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(kept[i]));
    return y;
  };
  const double h = tr.times[1] - tr.times[0];
  const double w = sig.width();
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < tr.states.size(); ++k) {
    const double t = tr.times[k];
    const double a = std::floor((tr.times[k - 2] - sig.t0) / w + 1e-9), b = std::floor((tr.times[k + 2] - sig.t0) / w - 1e-9);
    if (a != b) continue;
    const Vec d = (proj(tr.states[k - 2]) - 8 * proj(tr.states[k - 1]) + 8 * proj(tr.states[k + 1]) -
                   proj(tr.states[k + 2])) / (12 * h);
    const Vec& u = sig.at(t);
    Vec uq(q.control_dim());
    uq << u, Vec::Zero(static_cast<Eigen::Index>(dropped.size()));
    for (std::size_t i = 0; i < dropped.size(); ++i)
      uq(u.size() + static_cast<Eigen::Index>(i)) = tr.states[k](static_cast<Eigen::Index>(dropped[i]));
    Vec f;
    q.dyn->f(proj(tr.states[k]), uq, f);
    worst = std::max(worst, (d - f).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Derivative of the endpoint with respect to every piecewise-constant control
/// value, by exact differentiation of the discrete RK4 map. Columns are
/// interval-major: column k*m + i is d End / d u_{k,i}.
inline Mat endpoint_jacobian(const ControlSystem& sys, const ControlSignal& sig, const Vec& x0, double step = 1e-3) {
  const auto& d = *sys.dyn;
  const int n = d.state_dim();
  const int m = d.control_dim();
  if (sig.dim() != m) throw DimensionMismatch("endpoint_jacobian: control dimension mismatch");
  step = std::min(step, sig.width());
  const int ns = detail::substeps(sig, step);
  const double h = sig.width() / ns;
  const int N = sig.intervals();
  std::vector<Mat> phi(static_cast<std::size_t>(N)), bmat(static_cast<std::size_t>(N));
  Vec x = x0;
  Vec k1, k2, k3, k4;
  Mat a1, b1, a2, b2, a3, b3, a4, b4;
  for (int k = 0; k < N; ++k) {
    const Vec& u = sig.samples[static_cast<std::size_t>(k)];
    Mat P = Mat::Identity(n, n);
    Mat B = Mat::Zero(n, m);
    for (int s = 0; s < ns; ++s) {
      // Sensitivities of each stage with respect to (x, u) at the step start.
      d.f(x, u, k1);
      d.jac(x, u, a1, b1);
      const Vec x2 = x + 0.5 * h * k1;
      d.f(x2, u, k2);
      d.jac(x2, u, a2, b2);
      const Vec x3 = x + 0.5 * h * k2;
      d.f(x3, u, k3);
      d.jac(x3, u, a3, b3);
      const Vec x4 = x + h * k3;
      d.f(x4, u, k4);
      d.jac(x4, u, a4, b4);
      const Mat I = Mat::Identity(n, n);
      const Mat dk1x = a1;
      const Mat dk1u = b1;
      const Mat dk2x = a2 * (I + 0.5 * h * dk1x);
      const Mat dk2u = a2 * (0.5 * h * dk1u) + b2;
      const Mat dk3x = a3 * (I + 0.5 * h * dk2x);
      const Mat dk3u = a3 * (0.5 * h * dk2u) + b3;
      const Mat dk4x = a4 * (I + h * dk3x);
      const Mat dk4u = a4 * (h * dk3u) + b4;
      const Mat Sx = I + (h / 6.0) * (dk1x + 2 * dk2x + 2 * dk3x + dk4x);
      const Mat Su = (h / 6.0) * (dk1u + 2 * dk2u + 2 * dk3u + dk4u);
      P = Sx * P;
      B = Sx * B + Su;
      x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!detail::finite(x)) throw IntegrationDiverged("non-finite state during integration", sig.t0 + k * sig.width());
    }
    phi[static_cast<std::size_t>(k)] = P;
    bmat[static_cast<std::size_t>(k)] = B;
  }
  Mat J(n, m * N);
  Mat acc = Mat::Identity(n, n);
  for (int k = N - 1; k >= 0; --k) {
    J.block(0, k * m, n, m) = acc * bmat[static_cast<std::size_t>(k)];
    acc = acc * phi[static_cast<std::size_t>(k)];
  }
  return J;
}

struct SingularityReport {
  bool singular = false;
  int rank = 0;
  double smallest_sv = 0.0;
  double largest_sv = 0.0;
};

/// Singular iff the endpoint Jacobian has numerical rank < n, counting
/// singular values above tol times the largest.
inline SingularityReport is_singular_control(const ControlSystem& sys, const ControlSignal& sig, const Vec& x0,
                                             double tol = 1e-8, double step = 1e-3) {
  const Mat J = endpoint_jacobian(sys, sig, x0, step);
  Eigen::JacobiSVD<Mat> svd(J);
  const auto& s = svd.singularValues();
  SingularityReport r;
  const int n = sys.state_dim();
  r.largest_sv = s.size() ? s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * r.largest_sv) ++r.rank;
  r.smallest_sv = static_cast<int>(s.size()) >= n ? s(n - 1) : 0.0;
  r.singular = r.rank < n;
  return r;
}

}  // namespace geoctl
