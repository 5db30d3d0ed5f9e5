#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "geoctl/core/error.hpp"
#include "geoctl/core/linalg.hpp"
#include "geoctl/vecfield/numfield.hpp"
#include "geoctl/vecfield/polynomial.hpp"

namespace geoctl {

/// Element N / D^k of the localized ring Q[y_1..y_n, c, s] / (c^2 + s^2 - 1),
/// where c = cos v, s = sin v and D is the ring's fixed denominator.
struct TrigFrac {
  Polynomial num;
  unsigned dpow = 0;
};

/// The ring of functions on Z = (y, v) used by the prolonged frame.
/// Variables are y_1..y_n (indices 0..n-1), then c (n) and s (n+1).
/// Normal form: degree in s at most one.
class TrigRing {
 public:
  TrigRing(std::size_t n, const Polynomial& denominator) : n_(n) {
    if (denominator.nvars() != n + 2) throw DimensionMismatch("trig ring: denominator has the wrong variable count");
    den_ = reduce(denominator);
    if (den_.is_zero()) throw InvalidArgument("trig ring: zero denominator");
    if (den_.is_constant()) den_ = Polynomial::constant(n + 2, 1);
    pows_.push_back(Polynomial::constant(n + 2, 1));
    dden_.reserve(n + 1);
    for (std::size_t j = 0; j < n; ++j) dden_.push_back(reduce(den_.derivative(j)));
    dden_.push_back(vderiv_poly(den_));
  }

  std::size_t n() const { return n_; }
  std::size_t nvars() const { return n_ + 2; }
  const Polynomial& denominator() const { return den_; }
  bool trivial_denominator() const { return den_.is_constant(); }

  Polynomial y(std::size_t i) const { return Polynomial::variable(nvars(), i); }
  Polynomial c() const { return Polynomial::variable(nvars(), n_); }
  Polynomial s() const { return Polynomial::variable(nvars(), n_ + 1); }
  Polynomial one() const { return Polynomial::constant(nvars(), 1); }

  /// Rewrites s^2 as 1 - c^2.
  Polynomial reduce(const Polynomial& p) const {
    if (p.degree_in(n_ + 1) < 2) return p;
    Polynomial out(nvars());
    const Polynomial omc = one() - c() * c();
    for (const auto& [e, coef] : p.terms()) {
      const unsigned k = e[n_ + 1];
      Polynomial::Exponent base = e;
      base[n_ + 1] = k % 2;
      Polynomial term = Polynomial::monomial(base, coef);
      if (k >= 2) term = term * omc.pow(k / 2);
      out += term;
    }
    return out;
  }

  /// Lifts a polynomial over y_1..y_n into the ring.
  Polynomial lift(const Polynomial& p) const {
    if (p.nvars() != n_) throw DimensionMismatch("trig ring: lift expects a polynomial over y");
    std::vector<int> map(n_);
    for (std::size_t i = 0; i < n_; ++i) map[i] = static_cast<int>(i);
    return p.remap(nvars(), map);
  }

  TrigFrac make(const Polynomial& num, unsigned dpow = 0) const {
    TrigFrac f{reduce(num), trivial_denominator() ? 0U : dpow};
    normalize(f);
    return f;
  }
  TrigFrac zero() const { return {Polynomial(nvars()), 0}; }

  bool is_zero(const TrigFrac& f) const { return f.num.is_zero(); }

  TrigFrac add(const TrigFrac& a, const TrigFrac& b) const {
    const unsigned k = std::max(a.dpow, b.dpow);
    TrigFrac r{reduce(a.num * pow(k - a.dpow) + b.num * pow(k - b.dpow)), k};
    normalize(r);
    return r;
  }
  TrigFrac neg(const TrigFrac& a) const { return {-a.num, a.dpow}; }
  TrigFrac sub(const TrigFrac& a, const TrigFrac& b) const { return add(a, neg(b)); }
  TrigFrac mul(const TrigFrac& a, const TrigFrac& b) const {
    if (a.num.is_zero() || b.num.is_zero()) return zero();
    TrigFrac r{reduce(a.num * b.num), a.dpow + b.dpow};
    normalize(r);
    return r;
  }

  /// d/dy_j for j < n, d/dv for j == n.
  TrigFrac deriv(const TrigFrac& f, std::size_t j) const {
    if (f.num.is_zero()) return zero();
    const Polynomial dn = j < n_ ? reduce(f.num.derivative(j)) : vderiv_poly(f.num);
    if (f.dpow == 0) return make(dn);
    // (N' D - k N D') / D^(k+1)
    TrigFrac r{reduce(dn * den_ - Rational(f.dpow) * f.num * dden_[j]), f.dpow + 1};
    normalize(r);
    return r;
  }

  /// Value at z = (y, v).
  double eval(const TrigFrac& f, const Vec& z) const {
    std::vector<double> pt = point(z);
    double v = f.num.eval(pt);
    if (f.dpow) v /= std::pow(den_.eval(pt), static_cast<double>(f.dpow));
    return v;
  }

  /// (y, cos v, sin v) from (y, v).
  std::vector<double> point(const Vec& z) const {
    if (static_cast<std::size_t>(z.size()) != n_ + 1) throw DimensionMismatch("trig ring: point must be (y, v)");
    std::vector<double> pt(nvars());
    for (std::size_t i = 0; i < n_; ++i) pt[i] = z(static_cast<Eigen::Index>(i));
    pt[n_] = std::cos(z(static_cast<Eigen::Index>(n_)));
    pt[n_ + 1] = std::sin(z(static_cast<Eigen::Index>(n_)));
    return pt;
  }

  std::string to_string(const TrigFrac& f, const std::vector<std::string>& ynames) const {
    std::vector<std::string> names = ynames;
    names.push_back("cos(v)");
    names.push_back("sin(v)");
    std::string s = f.num.to_string(names);
    if (f.dpow == 0) return s;
    s = "(" + s + ")/(" + den_.to_string(names) + ")";
    if (f.dpow > 1) s += "^" + std::to_string(f.dpow);
    return s;
  }

 private:
  // d/dv = -s d/dc + c d/ds
  Polynomial vderiv_poly(const Polynomial& p) const {
    return reduce(c() * p.derivative(n_ + 1) - s() * p.derivative(n_));
  }

  const Polynomial& pow(unsigned k) const {
    while (pows_.size() <= k) pows_.push_back(reduce(pows_.back() * den_));
    return pows_[k];
  }

  void normalize(TrigFrac& f) const {
    if (f.num.is_zero() || trivial_denominator()) {
      f.dpow = 0;
      return;
    }
    while (f.dpow > 0) {
      auto q = divide_exact(f.num, den_);
      if (!q) break;
      f.num = reduce(*q);
      --f.dpow;
    }
  }

  std::size_t n_;
  Polynomial den_;
  std::vector<Polynomial> dden_;
  mutable std::vector<Polynomial> pows_;
};

using TrigRingPtr = std::shared_ptr<const TrigRing>;

/// Vector field on Z = (y, v) with components in a TrigRing: n components
/// along y followed by the d/dv component.
class ZField {
 public:
  ZField() = default;
  ZField(TrigRingPtr ring, std::vector<TrigFrac> comps) : ring_(std::move(ring)), comps_(std::move(comps)) {
    if (comps_.size() != ring_->n() + 1) throw DimensionMismatch("ZField: expected n + 1 components");
  }

  static ZField vertical(const TrigRingPtr& ring) {
    std::vector<TrigFrac> c(ring->n() + 1, ring->zero());
    c.back() = ring->make(ring->one());
    return ZField(ring, std::move(c));
  }

  const TrigRingPtr& ring() const { return ring_; }
  const std::vector<TrigFrac>& components() const { return comps_; }
  const TrigFrac& operator[](std::size_t i) const { return comps_[i]; }
  std::size_t dim() const { return comps_.size(); }

  bool is_zero() const {
    for (const auto& c : comps_)
      if (!ring_->is_zero(c)) return false;
    return true;
  }

  TrigFrac apply(const TrigFrac& f) const {
    TrigFrac acc = ring_->zero();
    for (std::size_t j = 0; j < comps_.size(); ++j) {
      if (ring_->is_zero(comps_[j])) continue;
      acc = ring_->add(acc, ring_->mul(comps_[j], ring_->deriv(f, j)));
    }
    return acc;
  }

  Vec eval(const Vec& z) const {
    Vec out(static_cast<Eigen::Index>(comps_.size()));
    for (std::size_t i = 0; i < comps_.size(); ++i) out(static_cast<Eigen::Index>(i)) = ring_->eval(comps_[i], z);
    return out;
  }

  ZField operator-() const {
    std::vector<TrigFrac> c;
    for (const auto& f : comps_) c.push_back(ring_->neg(f));
    return ZField(ring_, std::move(c));
  }

 private:
  TrigRingPtr ring_;
  std::vector<TrigFrac> comps_;
};

inline ZField lie_bracket(const ZField& x, const ZField& y) {
  if (x.dim() != y.dim() || x.ring() != y.ring()) throw DimensionMismatch("lie_bracket: fields over different rings");
  const auto& r = *x.ring();
  std::vector<TrigFrac> c;
  c.reserve(x.dim());
  for (std::size_t k = 0; k < x.dim(); ++k) c.push_back(r.sub(x.apply(y[k]), y.apply(x[k])));
  return ZField(x.ring(), std::move(c));
}

// Hooks for FlagBuilder<ZField>.
inline ZField bracket_of(const ZField& a, const ZField& b) { return lie_bracket(a, b); }
inline std::vector<double> eval_field(const ZField& x, const std::vector<double>& p) { return to_std(x.eval(to_vec(p))); }
inline std::size_t field_dim(const ZField& x) { return x.dim(); }

/// Compiled evaluation of a ZField with its symbolic Jacobian in (y, v).
class ZNumField : public NumField {
 public:
  explicit ZNumField(const ZField& f) : ring_(f.ring()) {
    const auto m = f.dim();
    std::vector<Polynomial> nums;
    for (std::size_t i = 0; i < m; ++i) {
      nums.push_back(f[i].num);
      vpow_.push_back(f[i].dpow);
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const auto d = ring_->deriv(f[i], j);
        nums.push_back(d.num);
        jpow_.push_back(d.dpow);
      }
    nums.push_back(ring_->denominator());
    polys_ = CompiledPolynomials(nums);
    dim_ = static_cast<int>(m);
  }

  int in_dim() const override { return dim_; }
  int out_dim() const override { return dim_; }

  void value(const Vec& z, Vec& out) const override {
    thread_local std::vector<double> buf;
    const double inv = eval_all(z, buf);
    out.resize(dim_);
    for (int i = 0; i < dim_; ++i) out(i) = buf[static_cast<std::size_t>(i)] * ipow(inv, vpow_[static_cast<std::size_t>(i)]);
  }

  void jacobian(const Vec& z, Mat& jac) const override {
    thread_local std::vector<double> buf;
    const double inv = eval_all(z, buf);
    jac.resize(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) {
        const auto k = static_cast<std::size_t>(i * dim_ + j);
        jac(i, j) = buf[static_cast<std::size_t>(dim_) + k] * ipow(inv, jpow_[k]);
      }
  }

 private:
  // Fills buf with every compiled value; returns 1 / denominator.
  double eval_all(const Vec& z, std::vector<double>& buf) const {
    if (z.size() != dim_) throw DimensionMismatch("ZNumField: point must be (y, v)");
    const auto pt = ring_->point(z);
    buf.resize(polys_.size());
    polys_.eval(pt.data(), buf.data());
    return 1.0 / buf.back();
  }
  static double ipow(double x, unsigned k) {
    double r = 1.0;
    for (unsigned i = 0; i < k; ++i) r *= x;
    return r;
  }

  TrigRingPtr ring_;
  CompiledPolynomials polys_;
  std::vector<unsigned> vpow_, jpow_;
  int dim_ = 0;
};

}  // namespace geoctl
