#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "geoctl/core/linalg.hpp"
#include "geoctl/vecfield/polynomial.hpp"
#include "geoctl/vecfield/vector_field.hpp"

namespace geoctl {

/// Smooth map R^in -> R^out evaluated in double precision, with Jacobian.
/// Used for frame fields (out == in), projected fields (inputs are state
/// followed by parameters) and numerically defined fields.
class NumField {
 public:
  virtual ~NumField() = default;
  virtual int in_dim() const = 0;
  virtual int out_dim() const = 0;
  virtual void value(const Vec& z, Vec& out) const = 0;

  /// out_dim x in_dim. Default: Richardson-extrapolated central differences.
  virtual void jacobian(const Vec& z, Mat& jac) const {
    const int n = in_dim();
    jac.resize(out_dim(), n);
    Vec zp = z, zm = z, fp(out_dim()), fm(out_dim()), d1(out_dim()), d2(out_dim());
    for (int j = 0; j < n; ++j) {
      const double h = 1e-4 * std::max(1.0, std::abs(z(j)));
      for (int pass = 0; pass < 2; ++pass) {
        const double hh = pass == 0 ? h : h / 2;
        zp(j) = z(j) + hh;
        zm(j) = z(j) - hh;
        value(zp, fp);
        value(zm, fm);
        (pass == 0 ? d1 : d2) = (fp - fm) / (2 * hh);
      }
      zp(j) = zm(j) = z(j);
      jac.col(j) = (4 * d2 - d1) / 3;
    }
  }

  Vec operator()(const Vec& z) const {
    Vec out(out_dim());
    value(z, out);
    return out;
  }
};

using NumFieldPtr = std::shared_ptr<const NumField>;

/// Polynomial map compiled to double evaluation, together with its
/// symbolically differentiated Jacobian.
class CompiledField : public NumField {
 public:
  explicit CompiledField(const std::vector<Polynomial>& comps) {
    if (comps.empty()) throw InvalidArgument("compiled field needs at least one component");
    in_ = static_cast<int>(comps[0].nvars());
    out_ = static_cast<int>(comps.size());
    values_ = CompiledPolynomials(comps);
    std::vector<Polynomial> d;
    d.reserve(comps.size() * in_);
    for (const auto& c : comps)
      for (int j = 0; j < in_; ++j) d.push_back(c.derivative(static_cast<std::size_t>(j)));
    derivs_ = CompiledPolynomials(d);
  }
  explicit CompiledField(const PolyVectorField& x) : CompiledField(x.components()) {}
  explicit CompiledField(const ProjectedField& x) : CompiledField(x.components) {}

  int in_dim() const override { return in_; }
  int out_dim() const override { return out_; }

  void value(const Vec& z, Vec& out) const override {
    if (z.size() != in_) throw DimensionMismatch("compiled field: input dimension mismatch");
    out.resize(out_);
    values_.eval(z.data(), out.data());
  }

  void jacobian(const Vec& z, Mat& jac) const override {
    if (z.size() != in_) throw DimensionMismatch("compiled field: input dimension mismatch");
    thread_local std::vector<double> buf;
    buf.resize(static_cast<std::size_t>(out_) * in_);
    derivs_.eval(z.data(), buf.data());
    jac.resize(out_, in_);
    for (int i = 0; i < out_; ++i)
      for (int j = 0; j < in_; ++j) jac(i, j) = buf[static_cast<std::size_t>(i) * in_ + j];
  }

 private:
  int in_ = 0;
  int out_ = 0;
  CompiledPolynomials values_;
  CompiledPolynomials derivs_;
};

/// Field defined by callbacks; the Jacobian falls back to finite differences
/// when none is supplied.
class LambdaField : public NumField {
 public:
  using ValueFn = std::function<void(const Vec&, Vec&)>;
  using JacFn = std::function<void(const Vec&, Mat&)>;

  LambdaField(int in, int out, ValueFn v, JacFn j = nullptr)
      : in_(in), out_(out), v_(std::move(v)), j_(std::move(j)) {}

  int in_dim() const override { return in_; }
  int out_dim() const override { return out_; }
  void value(const Vec& z, Vec& out) const override {
    out.resize(out_);
    v_(z, out);
  }
  void jacobian(const Vec& z, Mat& jac) const override {
    if (j_) j_(z, jac);
    else NumField::jacobian(z, jac);
  }

 private:
  int in_, out_;
  ValueFn v_;
  JacFn j_;
};

/// Rows `rows` of an underlying map.
class ProjectedNumField : public NumField {
 public:
  ProjectedNumField(NumFieldPtr base, std::vector<int> rows) : base_(std::move(base)), rows_(std::move(rows)) {}
  int in_dim() const override { return base_->in_dim(); }
  int out_dim() const override { return static_cast<int>(rows_.size()); }
  void value(const Vec& z, Vec& out) const override {
    Vec full;
    base_->value(z, full);
    out.resize(out_dim());
    for (int i = 0; i < out_dim(); ++i) out(i) = full(rows_[i]);
  }
  void jacobian(const Vec& z, Mat& jac) const override {
    Mat full;
    base_->jacobian(z, full);
    jac.resize(out_dim(), full.cols());
    for (int i = 0; i < out_dim(); ++i) jac.row(i) = full.row(rows_[i]);
  }

 private:
  NumFieldPtr base_;
  std::vector<int> rows_;
};

/// Composition with a permutation of the inputs: value(z) = base(z[perm]).
/// perm[j] is the index in z feeding base input j.
class PermutedNumField : public NumField {
 public:
  PermutedNumField(NumFieldPtr base, std::vector<int> perm) : base_(std::move(base)), perm_(std::move(perm)) {}
  int in_dim() const override { return base_->in_dim(); }
  int out_dim() const override { return base_->out_dim(); }
  void value(const Vec& z, Vec& out) const override { base_->value(gather(z), out); }
  void jacobian(const Vec& z, Mat& jac) const override {
    Mat b;
    base_->jacobian(gather(z), b);
    jac.setZero(b.rows(), b.cols());
    for (int j = 0; j < b.cols(); ++j) jac.col(perm_[j]) = b.col(j);
  }

 private:
  Vec gather(const Vec& z) const {
    Vec g(z.size());
    for (int j = 0; j < static_cast<int>(perm_.size()); ++j) g(j) = z(perm_[j]);
    return g;
  }
  NumFieldPtr base_;
  std::vector<int> perm_;
};

/// The zero map R^in -> R^out.
class ZeroField : public NumField {
 public:
  ZeroField(int in, int out) : in_(in), out_(out) {}
  int in_dim() const override { return in_; }
  int out_dim() const override { return out_; }
  void value(const Vec&, Vec& out) const override { out.setZero(out_); }
  void jacobian(const Vec&, Mat& jac) const override { jac.setZero(out_, in_); }

 private:
  int in_, out_;
};

}  // namespace geoctl
