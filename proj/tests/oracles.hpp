#pragma once

// Test-only reference computations. Deliberately written against raw
// row-major arrays and long double where useful so they share no code path
// with the library under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "epmp/linalg.hpp"

namespace oracle {

inline std::vector<double> naive_matvec(const epmp::DenseMatrix& a, const std::vector<double>& v) {
  const std::size_t n = a.size();
  const double* m = a.values().data();
  std::vector<double> y(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s = s + m[j * n + k] * v[k];
    y[j] = s;
  }
  return y;
}

inline long double sum_of_squares(const std::vector<double>& v) {
  // Pairwise summation in extended precision.
  std::vector<long double> terms;
  for (double x : v) terms.push_back(static_cast<long double>(x) * x);
  while (terms.size() > 1) {
    std::vector<long double> next;
    for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(terms[i] + terms[i + 1]);
    if (terms.size() % 2) next.push_back(terms.back());
    terms.swap(next);
  }
  return terms.empty() ? 0.0L : terms[0];
}

inline double euclidean_norm(const std::vector<double>& v) {
  return static_cast<double>(std::sqrt(sum_of_squares(v)));
}

struct SymmetricEigen {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // vectors[i] pairs with values[i]
};

/// Cyclic Jacobi rotations for a symmetric matrix.
inline SymmetricEigen jacobi_eigen(const epmp::DenseMatrix& a_in) {
  const std::size_t n = a_in.size();
  std::vector<double> a(a_in.values().begin(), a_in.values().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * n + j]; };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += A(i, j) * A(i, j);
        if (i != j) off += A(i, j) * A(i, j);
      }
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return A(x, x) < A(y, y); });
  SymmetricEigen out;
  for (std::size_t idx : order) {
    out.values.push_back(A(idx, idx));
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = V(k, idx);
    out.vectors.push_back(std::move(col));
  }
  return out;
}

/// Random orthogonal matrix (row-major) from Gram-Schmidt on random columns.
inline std::vector<double> random_orthogonal(std::size_t n, unsigned seed) {
  const auto g = epmp::random_matrix(n, seed);
  std::vector<std::vector<double>> cols(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) cols[j][i] = g(i, j);
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < j; ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += cols[k][i] * cols[j][i];
        for (std::size_t i = 0; i < n; ++i) cols[j][i] -= d * cols[k][i];
      }
    const double len = euclidean_norm(cols[j]);
    for (double& x : cols[j]) x /= len;
  }
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q[i * n + j] = cols[j][i];
  return q;
}

/// Q·A·Qᵀ with plain triple loops.
inline epmp::DenseMatrix conjugate(const epmp::DenseMatrix& a, const std::vector<double>& q) {
  const std::size_t n = a.size();
  std::vector<double> qa(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) qa[i * n + j] += q[i * n + k] * a(k, j);
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) out[i * n + j] += qa[i * n + k] * q[j * n + k];
  return epmp::DenseMatrix(n, std::move(out));
}

}  // namespace oracle
