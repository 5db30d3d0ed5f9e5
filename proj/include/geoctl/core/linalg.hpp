#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "geoctl/core/error.hpp"
#include "geoctl/core/rational.hpp"

namespace geoctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense rational matrix stored row-major as nested vectors.
using RationalMatrix = std::vector<RationalVector>;

inline Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

/// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(RationalMatrix& a) {
  std::vector<std::size_t> pivots;
  if (a.empty()) return pivots;
  const std::size_t rows = a.size();
  const std::size_t cols = a[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && sgn(a[piv][c]) == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[r], a[piv]);
    const Rational inv = 1 / a[r][c];
    for (std::size_t j = c; j < cols; ++j) a[r][j] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || sgn(a[i][c]) == 0) continue;
      const Rational f = a[i][c];
      for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

/// Exact rank by fraction-free (Bareiss) elimination on the common-denominator
/// integer matrix.
inline std::size_t exact_rank(const RationalMatrix& a) {
  if (a.empty()) return 0;
  const std::size_t rows = a.size();
  const std::size_t cols = a[0].size();
  std::vector<std::vector<mpz_class>> m(rows, std::vector<mpz_class>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (a[i].size() != cols) throw DimensionMismatch("exact_rank: ragged matrix");
    mpz_class den = 1;
    for (const auto& q : a[i]) den = lcm(den, mpz_class(q.get_den()));
    for (std::size_t j = 0; j < cols; ++j) m[i][j] = a[i][j].get_num() * (den / a[i][j].get_den());
  }
  mpz_class prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && m[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[rank], m[piv]);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        m[i][j] = (m[rank][c] * m[i][j] - m[i][c] * m[rank][j]) / prev;
      }
      m[i][c] = 0;
    }
    prev = m[rank][c];
    ++rank;
  }
  return rank;
}

/// Basis of {x : A x = 0}, one basis vector per free column.
inline std::vector<RationalVector> exact_nullspace(RationalMatrix a, std::size_t cols) {
  std::vector<RationalVector> basis;
  if (a.empty()) {
    for (std::size_t j = 0; j < cols; ++j) {
      RationalVector e(cols, Rational(0));
      e[j] = 1;
      basis.push_back(e);
    }
    return basis;
  }
  const auto pivots = rref(a);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : pivots) is_pivot[p] = true;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    RationalVector v(cols, Rational(0));
    v[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][f];
    basis.push_back(v);
  }
  return basis;
}

/// Numerical rank: singular values above rel_tol times the largest.
inline int numeric_rank(const Mat& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

/// Orthonormal basis (columns) of the column space of `a` at relative tolerance.
inline Mat orthonormal_range(const Mat& a, double rel_tol) {
  if (a.cols() == 0) return Mat(a.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  const int r = numeric_rank(a, rel_tol);
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis (columns) of the left nullspace of `a`, i.e. covectors
/// annihilating every column.
inline Mat left_nullspace(const Mat& a, double rel_tol) {
  const Eigen::Index n = a.rows();
  if (a.cols() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU);
  const int r = numeric_rank(a, rel_tol);
  return svd.matrixU().rightCols(n - r);
}

/// Minimum-norm least-squares solution.
inline Vec lstsq(const Mat& a, const Vec& b) {
  return a.completeOrthogonalDecomposition().solve(b);
}

}  // namespace geoctl
