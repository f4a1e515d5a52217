#pragma once

// Arnoldi factorization A·Q_k = Q_{k+1}·H̄_k with modified Gram-Schmidt, Ritz
// value extraction, and a small dense shifted-QR eigensolver used both for
// Ritz values and as the project-wide reference eigensolver.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epmp/error.hpp"
#include "epmp/linalg.hpp"
#include "epmp/solver.hpp"

namespace epmp {

using Eigenvalue = std::complex<double>;

/// Small rectangular row-major matrix, zero-initialized.
class SmallMatrix {
 public:
  SmallMatrix() = default;
  SmallMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

  /// Leading r×c block.
  SmallMatrix block(std::size_t r, std::size_t c) const {
    SmallMatrix out(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) out(i, j) = (*this)(i, j);
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

struct ArnoldiFactorization {
  std::size_t steps = 0;      // k
  bool breakdown = false;     // an invariant subspace was found at step k
  std::vector<Vector> basis;  // q_1..q_{k+1}; only k vectors after a breakdown
  SmallMatrix h;              // (k+1)×k upper Hessenberg

  /// Leading k×k block H_k.
  SmallMatrix square_h() const { return h.block(steps, steps); }
};

/// Runs k Arnoldi steps from the unit vector q1. Each step multiplies the
/// newest basis vector by A, orthogonalizes it against all previous ones in
/// modified Gram-Schmidt order (a second pass is made when the remaining
/// overlap exceeds 1e-8), and normalizes. Stops early when the new vector's
/// norm falls below 1e-12·‖A‖_F.
inline ArnoldiFactorization arnoldi_factorize(const DenseMatrix& a, std::span<const double> q1,
                                              std::size_t k) {
  const std::size_t n = a.size();
  detail::require_same_length(n, q1.size(), "arnoldi_factorize");
  if (k < 1 || k >= n) {
    throw Error(Errc::invalid_argument,
                "Arnoldi step count must satisfy 1 <= k < n (k = " + std::to_string(k) +
                    ", n = " + std::to_string(n) + ")");
  }
  if (std::abs(norm(q1) - 1.0) > 1e-8) {
    throw Error(Errc::invalid_argument, "Arnoldi start vector must have unit norm");
  }
  const double breakdown_tol = 1e-12 * frobenius_norm(a);

  ArnoldiFactorization f;
  f.h = SmallMatrix(k + 1, k);
  f.basis.emplace_back(q1.begin(), q1.end());

  for (std::size_t j = 0; j < k; ++j) {
    Vector w = matvec(a, f.basis[j]);
    for (std::size_t i = 0; i <= j; ++i) {
      const double hij = detail::dot(f.basis[i], w);
      f.h(i, j) = hij;
      for (std::size_t t = 0; t < n; ++t) w[t] -= hij * f.basis[i][t];
    }
    double wn = norm(w);
    double drift = 0.0;
    if (wn > 0.0) {
      for (std::size_t i = 0; i <= j; ++i)
        drift = std::max(drift, std::abs(detail::dot(f.basis[i], w)) / wn);
    }
    if (drift > 1e-8) {
      for (std::size_t i = 0; i <= j; ++i) {
        const double c = detail::dot(f.basis[i], w);
        f.h(i, j) += c;
        for (std::size_t t = 0; t < n; ++t) w[t] -= c * f.basis[i][t];
      }
      wn = norm(w);
    }
    f.h(j + 1, j) = wn;
    f.steps = j + 1;
    if (wn < breakdown_tol) {
      f.breakdown = true;
      break;
    }
    for (double& x : w) x /= wn;
    f.basis.push_back(std::move(w));
  }
  if (f.breakdown) f.h = f.h.block(f.steps + 1, f.steps);
  return f;
}

/// ‖A·Q_k − Q_{k+1}·H̄_k‖_F, or ‖A·Q_k − Q_k·H_k‖_F after a breakdown.
inline double arnoldi_residual(const DenseMatrix& a, const ArnoldiFactorization& f) {
  const std::size_t n = a.size();
  const std::size_t rows = std::min(f.basis.size(), f.steps + 1);
  double s = 0.0;
  for (std::size_t j = 0; j < f.steps; ++j) {
    Vector r = matvec(a, f.basis[j]);
    for (std::size_t i = 0; i < rows; ++i) {
      const double hij = f.h(i, j);
      for (std::size_t t = 0; t < n; ++t) r[t] -= f.basis[i][t] * hij;
    }
    for (double x : r) s += x * x;
  }
  return std::sqrt(s);
}

namespace qr_detail {

/// Householder vector v and β with (I − β v vᵀ) x = ∓‖x‖ e₁. β = 0 when x = 0.
template <std::size_t N>
inline double house(std::array<double, N>& v, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += v[i] * v[i];
  if (s == 0.0) return 0.0;
  const double alpha = -std::copysign(std::sqrt(s), v[0]);
  v[0] -= alpha;
  double vv = 0.0;
  for (std::size_t i = 0; i < len; ++i) vv += v[i] * v[i];
  return vv == 0.0 ? 0.0 : 2.0 / vv;
}

inline void reduce_to_hessenberg(SmallMatrix& h) {
  const std::size_t n = h.rows();
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double s = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) s += h(i, k) * h(i, k);
    if (s == 0.0) continue;
    const double alpha = -std::copysign(std::sqrt(s), h(k + 1, k));
    for (std::size_t i = k + 1; i < n; ++i) v[i] = h(i, k);
    v[k + 1] -= alpha;
    double vv = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vv += v[i] * v[i];
    if (vv == 0.0) continue;
    const double beta = 2.0 / vv;
    for (std::size_t j = k; j < n; ++j) {
      double d = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) d += v[i] * h(i, j);
      d *= beta;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= d * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) d += h(i, j) * v[j];
      d *= beta;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= d * v[j];
    }
    h(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

/// Eigenvalues of [[a, b], [c, d]].
inline std::pair<Eigenvalue, Eigenvalue> eig2x2(double a, double b, double c, double d) {
  const double p = 0.5 * (a - d);
  const double disc = p * p + b * c;
  if (disc >= 0.0) {
    const double z = p + std::copysign(std::sqrt(disc), p);
    const double l1 = d + z;
    const double l2 = z != 0.0 ? d - (b * c) / z : d + z;
    return {Eigenvalue(l1, 0.0), Eigenvalue(l2, 0.0)};
  }
  const double mid = d + p;
  const double im = std::sqrt(-disc);
  return {Eigenvalue(mid, im), Eigenvalue(mid, -im)};
}

/// Applies P = I − β v vᵀ (|v| = len) to rows r0..r0+len−1, columns c0..c1
/// from the left, and to columns r0.. of rows q0..q1 from the right.
inline void reflect(SmallMatrix& h, const double* v, std::size_t len, double beta, std::size_t r0,
                    std::size_t c0, std::size_t c1, std::size_t q0, std::size_t q1) {
  for (std::size_t j = c0; j <= c1; ++j) {
    double d = 0.0;
    for (std::size_t i = 0; i < len; ++i) d += v[i] * h(r0 + i, j);
    d *= beta;
    for (std::size_t i = 0; i < len; ++i) h(r0 + i, j) -= d * v[i];
  }
  for (std::size_t i = q0; i <= q1; ++i) {
    double d = 0.0;
    for (std::size_t t = 0; t < len; ++t) d += h(i, r0 + t) * v[t];
    d *= beta;
    for (std::size_t t = 0; t < len; ++t) h(i, r0 + t) -= d * v[t];
  }
}

/// One implicit double-shift (Francis) sweep on the active window [lo, hi],
/// with shifts given by the trace s and determinant t of their 2×2 generator.
inline void francis_sweep(SmallMatrix& h, std::size_t lo, std::size_t hi, double s, double t) {
  double x = h(lo, lo) * h(lo, lo) + h(lo, lo + 1) * h(lo + 1, lo) - s * h(lo, lo) + t;
  double y = h(lo + 1, lo) * (h(lo, lo) + h(lo + 1, lo + 1) - s);
  double z = h(lo + 1, lo) * h(lo + 2, lo + 1);
  for (std::size_t k = lo; k + 2 <= hi; ++k) {
    std::array<double, 3> v{x, y, z};
    const double beta = house(v, 3);
    if (beta != 0.0) {
      const std::size_t c0 = k > lo ? k - 1 : lo;
      reflect(h, v.data(), 3, beta, k, c0, hi, lo, std::min(k + 3, hi));
      if (k > lo) {
        h(k + 1, k - 1) = 0.0;
        h(k + 2, k - 1) = 0.0;
      }
    }
    x = h(k + 1, k);
    y = h(k + 2, k);
    if (k + 3 <= hi) z = h(k + 3, k);
  }
  std::array<double, 2> v{x, y};
  const double beta = house(v, 2);
  if (beta != 0.0) {
    reflect(h, v.data(), 2, beta, hi - 1, hi - 2, hi, lo, hi);
    h(hi, hi - 2) = 0.0;
  }
}

}  // namespace qr_detail

/// All eigenvalues of a small dense matrix: Householder reduction to
/// Hessenberg form, then Francis double-shift QR with deflation on negligible
/// subdiagonals and exceptional shifts every 10 stalled sweeps. 2×2 blocks
/// are resolved in closed form, yielding conjugate pairs for complex
/// eigenvalues. Throws Errc::no_convergence after 50·n sweeps.
inline std::vector<Eigenvalue> hessenberg_qr_eig(SmallMatrix h) {
  const std::size_t n = h.rows();
  if (n == 0 || h.cols() != n) throw Error(Errc::non_square, "QR eigensolver needs a square matrix");
  if (n > 2000) throw Error(Errc::invalid_argument, "QR eigensolver is limited to n <= 2000");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(h(i, j))) throw Error(Errc::non_finite, "QR input is not finite");

  qr_detail::reduce_to_hessenberg(h);
  double hnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i > 0 ? i - 1 : 0; j < n; ++j) hnorm = std::max(hnorm, std::abs(h(i, j)));

  constexpr double ulp = std::numeric_limits<double>::epsilon();
  std::vector<Eigenvalue> eig;
  eig.reserve(n);
  const std::size_t max_sweeps = 50 * n;
  std::size_t sweeps = 0;
  std::size_t stalled = 0;

  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
  while (hi >= 0) {
    const auto uhi = static_cast<std::size_t>(hi);
    std::size_t lo = uhi;
    while (lo > 0) {
      double scale = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
      if (scale == 0.0) scale = hnorm;
      if (std::abs(h(lo, lo - 1)) <= ulp * scale) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == uhi) {
      eig.emplace_back(h(uhi, uhi), 0.0);
      hi -= 1;
      stalled = 0;
      continue;
    }
    if (lo + 1 == uhi) {
      auto [l1, l2] = qr_detail::eig2x2(h(lo, lo), h(lo, uhi), h(uhi, lo), h(uhi, uhi));
      eig.push_back(l1);
      eig.push_back(l2);
      hi -= 2;
      stalled = 0;
      continue;
    }
    if (sweeps >= max_sweeps) {
      throw Error(Errc::no_convergence,
                  "QR iteration did not converge: " + std::to_string(eig.size()) + " of " +
                      std::to_string(n) + " eigenvalues deflated after " +
                      std::to_string(sweeps) + " sweeps");
    }
    ++sweeps;
    ++stalled;
    double s = h(uhi - 1, uhi - 1) + h(uhi, uhi);
    double t = h(uhi - 1, uhi - 1) * h(uhi, uhi) - h(uhi - 1, uhi) * h(uhi, uhi - 1);
    if (stalled % 10 == 0) {
      const double w = std::abs(h(uhi, uhi - 1)) + std::abs(h(uhi - 1, uhi - 2));
      const double c = 0.75 * w + h(uhi, uhi);
      s = 2.0 * c;
      t = c * c + 0.4375 * w * w;
    }
    qr_detail::francis_sweep(h, lo, uhi, s, t);
  }
  return eig;
}

inline SmallMatrix to_small(const DenseMatrix& a) {
  SmallMatrix m(a.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m(i, j) = a(i, j);
  return m;
}

inline std::vector<Eigenvalue> hessenberg_qr_eig(const DenseMatrix& a) {
  return hessenberg_qr_eig(to_small(a));
}

/// Sorts by descending modulus, ties broken by descending real part.
inline void sort_by_magnitude(std::vector<Eigenvalue>& eig) {
  std::stable_sort(eig.begin(), eig.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (ma != mb) return ma > mb;
    return a.real() > b.real();
  });
}

/// Eigenvalues of H_k sorted by descending magnitude.
inline std::vector<Eigenvalue> ritz_values(const ArnoldiFactorization& f) {
  if (f.steps < 1) throw Error(Errc::invalid_argument, "factorization has no steps");
  auto eig = hessenberg_qr_eig(f.square_h());
  sort_by_magnitude(eig);
  return eig;
}

namespace detail {

/// Solves (M − shift·I) x = b by Gaussian elimination with partial pivoting.
/// Zero pivots are replaced by a tiny multiple of the matrix scale, which is
/// what inverse iteration wants near an exact eigenvalue.
inline Vector shifted_solve(const SmallMatrix& m, double shift, Vector b) {
  const std::size_t n = m.rows();
  SmallMatrix lu = m;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lu(i, i) -= shift;
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(lu(i, j)));
  }
  const double tiny = std::max(scale, 1.0) * std::numeric_limits<double>::epsilon();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      std::swap(b[k], b[piv]);
    }
    if (std::abs(lu(k, k)) < tiny) lu(k, k) = tiny;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
      b[i] -= f * b[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= lu(k, j) * b[j];
    b[k] = s / lu(k, k);
  }
  return b;
}

}  // namespace detail

/// Dominant eigenpair by explicitly restarted Arnoldi: factorize with
/// min(krylov_dim, n − 1) steps, take the largest-magnitude Ritz value, build
/// its Ritz vector by inverse iteration on H_k, and restart from its image
/// until the residual drops below cfg.res_tol. `iterations` counts matvecs.
inline EigenEstimate arnoldi_solve(const DenseMatrix& a, const EpmpConfig& cfg,
                                   std::size_t krylov_dim = 30) {
  cfg.validate();
  const std::size_t n = a.size();
  std::mt19937_64 rng(cfg.seed);
  Vector q = normalize(detail::random_start(n, rng));
  auto product = [&a](std::span<const double> v) { return matvec(a, v); };

  if (n == 1) {
    Evaluation e = evaluate(product, q);
    EigenEstimate out = detail::finish(e, norm(e.image));
    out.iterations = 1;
    out.converged = true;
    return out;
  }

  const std::size_t k = std::min(krylov_dim, n - 1);
  EigenEstimate out;
  std::size_t matvecs = 0;
  while (true) {
    const ArnoldiFactorization f = arnoldi_factorize(a, q, k);
    matvecs += f.steps;
    const SmallMatrix hk = f.square_h();
    const double theta = ritz_values(f).front().real();

    Vector y(f.steps, 1.0);
    for (int pass = 0; pass < 3; ++pass) y = normalize(detail::shifted_solve(hk, theta, y));
    Vector x(n, 0.0);
    for (std::size_t j = 0; j < f.steps; ++j)
      for (std::size_t t = 0; t < n; ++t) x[t] += y[j] * f.basis[j][t];

    const Evaluation e = evaluate(product, x);
    ++matvecs;
    out = detail::finish(e, norm(e.image));
    out.iterations = matvecs;
    out.converged = e.fitness < cfg.res_tol;
    if (out.converged || f.breakdown || matvecs >= cfg.max_iter) break;
    // Restart from A·x rather than x: with k = 1 the Ritz vector is the start
    // vector itself and the iteration would not move.
    q = normalize(e.image);
  }
  out.temperature = cfg.t0;
  return out;
}

}  // namespace epmp
