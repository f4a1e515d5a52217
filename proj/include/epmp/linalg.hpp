#pragma once

// Dense primitives shared by every solver: the square operator type, the
// ascending-k row kernel, normalization, Rayleigh quotient, the eigen-residual
// fitness and planted-spectrum test matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epmp/error.hpp"

namespace epmp {

using Vector = std::vector<double>;

/// Square real matrix in row-major storage. Immutable once constructed; every
/// constructor rejects non-finite entries.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  /// n×n zero matrix.
  explicit DenseMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {
    if (n == 0) throw Error(Errc::invalid_argument, "matrix dimension must be positive");
  }

  DenseMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
    if (n == 0) throw Error(Errc::invalid_argument, "matrix dimension must be positive");
    if (values_.size() != n * n) {
      throw Error(Errc::non_square, "expected " + std::to_string(n * n) + " values, got " +
                                        std::to_string(values_.size()));
    }
    for (double x : values_) {
      if (!std::isfinite(x)) throw Error(Errc::non_finite, "matrix entry is not finite");
    }
  }

  static DenseMatrix identity(std::size_t n) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    return DenseMatrix(n, std::move(v));
  }

  static DenseMatrix diagonal(std::span<const double> d) {
    const std::size_t n = d.size();
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = d[i];
    return DenseMatrix(n, std::move(v));
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_, n_};
  }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// Eigenvalues sorted by descending absolute value (stable for ties).
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw Error(Errc::invalid_argument, "spectrum must be nonempty");
    for (double x : values_) {
      if (!std::isfinite(x)) throw Error(Errc::non_finite, "spectrum value is not finite");
    }
    std::stable_sort(values_.begin(), values_.end(),
                     [](double a, double b) { return std::abs(a) > std::abs(b); });
  }

  /// λ₁, λ₂ followed by n−2 values drawn uniformly from [0, 1).
  static Spectrum gapped(std::size_t n, double lambda1, double lambda2, std::uint64_t seed) {
    if (n < 2) throw Error(Errc::invalid_argument, "gapped spectrum needs n >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> v{lambda1, lambda2};
    for (std::size_t i = 2; i < n; ++i) v.push_back(unit(rng));
    return Spectrum(std::move(v));
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(Errc::dimension_mismatch, std::string(what) + ": length " + std::to_string(b) +
                                              " does not match dimension " + std::to_string(a));
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// One output entry of A·v. Accumulation runs in ascending column order; the
/// sequential and row-block parallel paths both call this so their results are
/// bit-identical.
inline double row_dot(std::span<const double> row, std::span<const double> v) noexcept {
  double acc = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) acc += row[k] * v[k];
  return acc;
}

inline Vector matvec(const DenseMatrix& a, std::span<const double> v) {
  detail::require_same_length(a.size(), v.size(), "matvec");
  Vector y(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) y[j] = row_dot(a.row(j), v);
  return y;
}

inline double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Throws Errc::zero_vector when v has zero norm.
inline Vector normalize(std::span<const double> v) {
  const double len = norm(v);
  if (!(len > 0.0)) throw Error(Errc::zero_vector, "cannot normalize a zero vector");
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= len;
  return out;
}

inline double rayleigh_quotient(const DenseMatrix& a, std::span<const double> v) {
  detail::require_same_length(a.size(), v.size(), "rayleigh_quotient");
  const double vv = detail::dot(v, v);
  if (!(vv > 0.0)) throw Error(Errc::zero_vector, "rayleigh quotient of a zero vector");
  const Vector av = matvec(a, v);
  return detail::dot(v, av) / vv;
}

/// A unit iterate together with its image under A, the Rayleigh quotient and
/// the eigen-residual. Solvers carry this around so an accepted candidate's
/// product is never recomputed.
struct Evaluation {
  Vector unit;
  Vector image;
  double rho = 0.0;
  double fitness = 0.0;

  bool operator==(const Evaluation&) const = default;
};

/// Builds an Evaluation from an already-normalized vector and its image.
inline Evaluation evaluate_unit(Vector unit, Vector image) {
  Evaluation e{std::move(unit), std::move(image), 0.0, 0.0};
  e.rho = detail::dot(e.unit, e.image) / detail::dot(e.unit, e.unit);
  double s = 0.0;
  for (std::size_t i = 0; i < e.unit.size(); ++i) {
    const double r = e.image[i] - e.rho * e.unit[i];
    s += r * r;
  }
  e.fitness = std::sqrt(s);
  return e;
}

/// Normalizes v and evaluates it with the supplied product operator.
template <typename Apply>
Evaluation evaluate(Apply&& apply, std::span<const double> v) {
  Vector unit = normalize(v);
  Vector image = apply(std::span<const double>(unit));
  return evaluate_unit(std::move(unit), std::move(image));
}

/// Eigen-residual ‖A·v̂ − ρ(v̂)·v̂‖₂ of the normalized vector; zero exactly at
/// eigenvectors.
inline double fitness(const DenseMatrix& a, std::span<const double> v) {
  detail::require_same_length(a.size(), v.size(), "fitness");
  return evaluate([&a](std::span<const double> u) { return matvec(a, u); }, v).fitness;
}

inline double frobenius_norm(const DenseMatrix& a) { return norm(a.values()); }

inline double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

/// max |A − Aᵀ| over all entries.
inline double asymmetry(const DenseMatrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) m = std::max(m, std::abs(a(i, j) - a(j, i)));
  return m;
}

/// Unit vector with independent standard-normal entries.
inline Vector random_unit_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector u(n);
  double len = 0.0;
  do {
    for (double& x : u) x = gauss(rng);
    len = norm(u);
  } while (!(len > 0.0));
  for (double& x : u) x /= len;
  return u;
}

/// Symmetric matrix with the given eigenvalues: diag(spectrum) conjugated by
/// `reflections` seeded Householder reflections (all n by default). Each
/// two-sided reflection is applied as a symmetric rank-2 update, which keeps
/// the result exactly symmetric.
inline DenseMatrix generate_planted(std::size_t n, const Spectrum& spectrum, std::uint64_t seed,
                                    std::size_t reflections) {
  if (spectrum.size() != n) {
    throw Error(Errc::dimension_mismatch, "spectrum has " + std::to_string(spectrum.size()) +
                                              " values for n = " + std::to_string(n));
  }
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = spectrum[i];

  std::mt19937_64 rng(seed);
  Vector w(n);
  for (std::size_t r = 0; r < reflections && n > 1; ++r) {
    const Vector u = random_unit_vector(n, rng);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a[i * n + k] * u[k];
      w[i] = s;
    }
    const double c = detail::dot(u, w);
    // (I − 2uuᵀ) A (I − 2uuᵀ) = A − 2(u wᵀ + w uᵀ) + 4c u uᵀ
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        a[i * n + j] -= 2.0 * (u[i] * w[j] + w[i] * u[j]) - 4.0 * c * (u[i] * u[j]);
      }
    }
  }
  return DenseMatrix(n, std::move(a));
}

inline DenseMatrix generate_planted(std::size_t n, const Spectrum& spectrum, std::uint64_t seed) {
  return generate_planted(n, spectrum, seed, n);
}

/// Dense matrix with independent uniform entries in [-1, 1).
inline DenseMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> v(n * n);
  for (double& x : v) x = unit(rng);
  return DenseMatrix(n, std::move(v));
}

}  // namespace epmp
