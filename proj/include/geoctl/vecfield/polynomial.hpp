#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geoctl/core/error.hpp"
#include "geoctl/core/rational.hpp"

namespace geoctl {

/// Sparse multivariate polynomial with exact rational coefficients.
/// Terms are keyed by exponent vectors of length nvars(); zero coefficients
/// are never stored.
class Polynomial {
 public:
  using Exponent = std::vector<unsigned>;
  using Terms = std::map<Exponent, Rational>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, const Rational& c) {
    Polynomial p(nvars);
    p.add_term(Exponent(nvars, 0), c);
    return p;
  }

  static Polynomial variable(std::size_t nvars, std::size_t i) {
    if (i >= nvars) throw DimensionMismatch("variable index out of range");
    Polynomial p(nvars);
    Exponent e(nvars, 0);
    e[i] = 1;
    p.add_term(e, Rational(1));
    return p;
  }

  static Polynomial monomial(const Exponent& e, const Rational& c) {
    Polynomial p(e.size());
    p.add_term(e, c);
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total(terms_.begin()->first) == 0);
  }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, total(e));
    return d;
  }

  unsigned degree_in(std::size_t var) const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[var]);
    return d;
  }

  void add_term(const Exponent& e, const Rational& c) {
    if (e.size() != nvars_) throw DimensionMismatch("exponent length differs from nvars");
    if (sgn(c) == 0) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      terms_.emplace(e, c);
    } else {
      it->second += c;
      if (sgn(it->second) == 0) terms_.erase(it);
    }
  }

  Rational coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial& operator*=(const Rational& s) {
    if (sgn(s) == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }
  Polynomial operator-() const { return *this * Rational(-1); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check(b);
    Polynomial r(a.nvars_);
    if (a.is_zero() || b.is_zero()) return r;
    Exponent e(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    }
    return r;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  Polynomial pow(unsigned k) const {
    Polynomial r = constant(nvars_, 1);
    Polynomial base = *this;
    while (k) {
      if (k & 1U) r *= base;
      k >>= 1U;
      if (k) base *= base;
    }
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

  Polynomial derivative(std::size_t var) const {
    if (var >= nvars_) throw DimensionMismatch("derivative: variable index out of range");
    Polynomial r(nvars_);
    for (const auto& [e, c] : terms_) {
      if (e[var] == 0) continue;
      Exponent d = e;
      --d[var];
      r.add_term(d, c * e[var]);
    }
    return r;
  }

  /// Evaluation with any ring type constructible from a Rational via `conv`.
  template <class T, class Conv>
  T eval_with(const std::vector<T>& x, Conv conv) const {
    if (x.size() != nvars_) throw DimensionMismatch("poly_eval: point dimension differs from nvars");
    T acc = conv(Rational(0));
    for (const auto& [e, c] : terms_) {
      T m = conv(c);
      for (std::size_t i = 0; i < nvars_; ++i)
        for (unsigned k = 0; k < e[i]; ++k) m = m * x[i];
      acc = acc + m;
    }
    return acc;
  }

  Rational eval(const RationalVector& x) const {
    return eval_with<Rational>(x, [](const Rational& q) { return q; });
  }

  double eval(const std::vector<double>& x) const {
    return eval_with<double>(x, [](const Rational& q) { return q.get_d(); });
  }

  /// Re-index variables: old variable i becomes new variable map[i] in a ring
  /// with `new_nvars` variables. map[i] < 0 requires variable i to be absent.
  Polynomial remap(std::size_t new_nvars, const std::vector<int>& map) const {
    if (map.size() != nvars_) throw DimensionMismatch("remap: map length differs from nvars");
    Polynomial r(new_nvars);
    Exponent ne(new_nvars);
    for (const auto& [e, c] : terms_) {
      std::fill(ne.begin(), ne.end(), 0U);
      for (std::size_t i = 0; i < nvars_; ++i) {
        if (e[i] == 0) continue;
        if (map[i] < 0 || static_cast<std::size_t>(map[i]) >= new_nvars)
          throw DimensionMismatch("remap: dropped variable occurs in polynomial");
        ne[static_cast<std::size_t>(map[i])] += e[i];
      }
      r.add_term(ne, c);
    }
    return r;
  }

  /// Componentwise minimum exponent over all terms.
  Exponent monomial_content() const {
    if (terms_.empty()) return Exponent(nvars_, 0);
    Exponent m = terms_.begin()->first;
    for (const auto& [e, c] : terms_)
      for (std::size_t i = 0; i < nvars_; ++i) m[i] = std::min(m[i], e[i]);
    return m;
  }

  /// Positive rational g with every coefficient / g an integer with gcd 1.
  Rational rational_content() const {
    if (terms_.empty()) return Rational(1);
    mpz_class num = 0;
    mpz_class den = 1;
    for (const auto& [e, c] : terms_) {
      num = gcd(num, mpz_class(c.get_num()));
      den = lcm(den, mpz_class(c.get_den()));
    }
    Rational g(num, den);
    g.canonicalize();
    return g;
  }

  /// Divide by a monomial that divides every term.
  Polynomial divide_monomial(const Exponent& m) const {
    Polynomial r(nvars_);
    for (const auto& [e, c] : terms_) {
      Exponent d = e;
      for (std::size_t i = 0; i < nvars_; ++i) {
        if (d[i] < m[i]) throw InvalidArgument("divide_monomial: monomial does not divide");
        d[i] -= m[i];
      }
      r.add_term(d, c);
    }
    return r;
  }

  /// Leading term in lexicographic order (largest exponent vector).
  std::pair<Exponent, Rational> leading_term() const {
    if (terms_.empty()) throw InvalidArgument("leading_term of zero polynomial");
    auto it = terms_.rbegin();
    return {it->first, it->second};
  }

  std::string to_string(const std::vector<std::string>& names) const {
    if (names.size() != nvars_) throw DimensionMismatch("to_string: names length differs from nvars");
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [e, c] = *it;
      Rational a = abs(c);
      if (first) {
        if (sgn(c) < 0) os << "-";
      } else {
        os << (sgn(c) < 0 ? " - " : " + ");
      }
      first = false;
      const bool has_vars = total(e) > 0;
      if (!has_vars || a != 1) {
        if (a.get_den() == 1) os << a.get_str();
        else os << "(" << a.get_str() << ")";
        if (has_vars) os << "*";
      }
      bool fv = true;
      for (std::size_t i = 0; i < nvars_; ++i) {
        if (e[i] == 0) continue;
        if (!fv) os << "*";
        fv = false;
        os << names[i];
        if (e[i] > 1) os << "^" << e[i];
      }
    }
    return os.str();
  }

 private:
  static unsigned total(const Exponent& e) {
    unsigned s = 0;
    for (auto k : e) s += k;
    return s;
  }
  void check(const Polynomial& o) const {
    if (o.nvars_ != nvars_) throw DimensionMismatch("polynomials over different variable counts");
  }

  std::size_t nvars_ = 0;
  Terms terms_;
};

/// Exact quotient a / b when b divides a; std::nullopt otherwise.
inline std::optional<Polynomial> divide_exact(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw InvalidArgument("divide_exact: division by zero");
  Polynomial q(a.nvars());
  Polynomial r = a;
  const auto [lb, cb] = b.leading_term();
  while (!r.is_zero()) {
    const auto [lr, cr] = r.leading_term();
    Polynomial::Exponent d(a.nvars());
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (lr[i] < lb[i]) return std::nullopt;
      d[i] = lr[i] - lb[i];
    }
    Polynomial t = Polynomial::monomial(d, cr / cb);
    q += t;
    r -= t * b;
  }
  return q;
}

/// Free-function evaluation, exact or double.
inline Rational poly_eval(const Polynomial& p, const RationalVector& x) { return p.eval(x); }
inline double poly_eval(const Polynomial& p, const std::vector<double>& x) { return p.eval(x); }

/// Double-precision evaluator for a family of polynomials over the same
/// variables; powers are shared across the family.
class CompiledPolynomials {
 public:
  CompiledPolynomials() = default;
  explicit CompiledPolynomials(const std::vector<Polynomial>& ps) {
    if (!ps.empty()) nvars_ = ps[0].nvars();
    maxdeg_.assign(nvars_, 0);
    offsets_.push_back(0);
    for (const auto& p : ps) {
      if (p.nvars() != nvars_) throw DimensionMismatch("compiled family over mixed variable counts");
      for (const auto& [e, c] : p.terms()) {
        Term t;
        t.coef = c.get_d();
        for (std::size_t i = 0; i < nvars_; ++i) {
          if (e[i] == 0) continue;
          t.factors.emplace_back(static_cast<unsigned>(i), e[i]);
          maxdeg_[i] = std::max(maxdeg_[i], e[i]);
        }
        terms_.push_back(std::move(t));
      }
      offsets_.push_back(terms_.size());
    }
    stride_ = 1;
    for (auto d : maxdeg_) stride_ = std::max<std::size_t>(stride_, d + 1);
  }

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t nvars() const { return nvars_; }

  /// out[k] = value of polynomial k at x.
  void eval(const double* x, double* out) const {
    thread_local std::vector<double> pw;
    pw.assign(nvars_ * stride_, 1.0);
    for (std::size_t i = 0; i < nvars_; ++i)
      for (unsigned k = 1; k <= maxdeg_[i]; ++k) pw[i * stride_ + k] = pw[i * stride_ + k - 1] * x[i];
    for (std::size_t p = 0; p + 1 < offsets_.size(); ++p) {
      double acc = 0.0;
      for (std::size_t t = offsets_[p]; t < offsets_[p + 1]; ++t) {
        double m = terms_[t].coef;
        for (const auto& [v, k] : terms_[t].factors) m *= pw[v * stride_ + k];
        acc += m;
      }
      out[p] = acc;
    }
  }

 private:
  struct Term {
    double coef = 0.0;
    std::vector<std::pair<unsigned, unsigned>> factors;
  };
  std::size_t nvars_ = 0;
  std::size_t stride_ = 1;
  std::vector<unsigned> maxdeg_;
  std::vector<Term> terms_;
  std::vector<std::size_t> offsets_;
};

}  // namespace geoctl
