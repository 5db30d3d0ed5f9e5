#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "geoctl/core/error.hpp"
#include "geoctl/vecfield/polynomial.hpp"

namespace geoctl {

/// Recursive-descent parser for polynomial expressions such as
/// "x1*x2 + (1/2)*x1^2". Division is only allowed by nonzero constants.
class PolynomialParser {
 public:
  explicit PolynomialParser(std::vector<std::string> names) : names_(std::move(names)) {}

  Polynomial parse(std::string_view text) const {
    State st{text, 0};
    skip(st);
    if (st.pos == text.size()) throw ParseError("empty expression", 1);
    Polynomial p = expr(st);
    skip(st);
    if (st.pos != text.size())
      throw ParseError(std::string("unexpected character '") + text[st.pos] + "'", st.pos + 1);
    return p;
  }

 private:
  struct State {
    std::string_view s;
    std::size_t pos;
  };

  static void skip(State& st) {
    while (st.pos < st.s.size() && std::isspace(static_cast<unsigned char>(st.s[st.pos]))) ++st.pos;
  }
  static bool accept(State& st, char c) {
    skip(st);
    if (st.pos < st.s.size() && st.s[st.pos] == c) {
      ++st.pos;
      return true;
    }
    return false;
  }

  Polynomial expr(State& st) const {
    Polynomial acc = term(st);
    for (;;) {
      if (accept(st, '+')) acc += term(st);
      else if (accept(st, '-')) acc -= term(st);
      else return acc;
    }
  }

  Polynomial term(State& st) const {
    Polynomial acc = unary(st);
    for (;;) {
      if (accept(st, '*')) {
        acc *= unary(st);
      } else if (accept(st, '/')) {
        skip(st);
        const std::size_t col = st.pos + 1;
        Polynomial d = unary(st);
        if (!d.is_constant()) throw ParseError("division by a non-constant expression", col);
        const Rational c = d.coefficient(Polynomial::Exponent(names_.size(), 0));
        if (sgn(c) == 0) throw ParseError("division by zero", col);
        acc *= Rational(1) / c;
      } else {
        return acc;
      }
    }
  }

  Polynomial unary(State& st) const {
    if (accept(st, '-')) return -unary(st);
    if (accept(st, '+')) return unary(st);
    return power(st);
  }

  Polynomial power(State& st) const {
    Polynomial base = primary(st);
    if (accept(st, '^')) {
      skip(st);
      const std::size_t start = st.pos;
      while (st.pos < st.s.size() && std::isdigit(static_cast<unsigned char>(st.s[st.pos]))) ++st.pos;
      if (start == st.pos) throw ParseError("expected nonnegative integer exponent", start + 1);
      const std::string digits(st.s.substr(start, st.pos - start));
      if (digits.size() > 4) throw ParseError("exponent too large", start + 1);
      return base.pow(static_cast<unsigned>(std::stoul(digits)));
    }
    return base;
  }

  Polynomial primary(State& st) const {
    skip(st);
    const std::size_t n = names_.size();
    if (st.pos >= st.s.size()) throw ParseError("unexpected end of expression", st.pos + 1);
    const char c = st.s[st.pos];
    if (c == '(') {
      ++st.pos;
      Polynomial p = expr(st);
      if (!accept(st, ')')) throw ParseError("expected ')'", st.pos + 1);
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = st.pos;
      while (st.pos < st.s.size() && std::isdigit(static_cast<unsigned char>(st.s[st.pos]))) ++st.pos;
      std::string intpart(st.s.substr(start, st.pos - start));
      std::string frac;
      if (st.pos < st.s.size() && st.s[st.pos] == '.') {
        ++st.pos;
        const std::size_t fs = st.pos;
        while (st.pos < st.s.size() && std::isdigit(static_cast<unsigned char>(st.s[st.pos]))) ++st.pos;
        frac = std::string(st.s.substr(fs, st.pos - fs));
      }
      if (intpart.empty() && frac.empty()) throw ParseError("malformed number", start + 1);
      if (intpart.empty()) intpart = "0";
      mpz_class den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      Rational q(mpz_class(intpart + frac, 10), den);
      q.canonicalize();
      return Polynomial::constant(n, q);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = st.pos;
      while (st.pos < st.s.size() &&
             (std::isalnum(static_cast<unsigned char>(st.s[st.pos])) || st.s[st.pos] == '_'))
        ++st.pos;
      const std::string name(st.s.substr(start, st.pos - start));
      for (std::size_t i = 0; i < n; ++i)
        if (names_[i] == name) return Polynomial::variable(n, i);
      throw ParseError("unknown variable '" + name + "'", start + 1);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", st.pos + 1);
  }

  std::vector<std::string> names_;
};

inline Polynomial parse_polynomial(std::string_view text, const std::vector<std::string>& names) {
  return PolynomialParser(names).parse(text);
}

}  // namespace geoctl
