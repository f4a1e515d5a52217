#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

#include "epmp/error.hpp"
#include "epmp/linalg.hpp"

namespace epmp {

/// Outcome of one EPMP iteration.
enum class SaDecision { accept_improved, converged, accept_worse, mutate };

inline const char* to_string(SaDecision d) {
  switch (d) {
    case SaDecision::accept_improved: return "ACCEPT_IMPROVED";
    case SaDecision::converged: return "CONVERGED";
    case SaDecision::accept_worse: return "ACCEPT_WORSE";
    case SaDecision::mutate: return "MUTATE";
  }
  return "?";
}

/// Geometric cooling: T·alpha.
constexpr double cooling_step(double temperature, double alpha) noexcept {
  return temperature * alpha;
}

/// Decides between keeping a worse-or-equal candidate and mutating. `r` is a
/// uniform draw from [0, 1) supplied by the caller's generator.
///
/// The default is the Metropolis rule: ACCEPT_WORSE iff r < exp(−(p_new − p_cur)/T).
/// With `literal` set the exponent keeps the positive sign, so the threshold
/// is never below one and r below it selects MUTATE.
inline SaDecision metropolis_decide(double p_new, double p_cur, double temperature, double r,
                                    bool literal = false) {
  if (!(temperature > 0.0)) {
    throw Error(Errc::invalid_argument, "temperature must be positive");
  }
  const double gap = p_new - p_cur;
  if (literal) {
    return r < std::exp(gap / temperature) ? SaDecision::mutate : SaDecision::accept_worse;
  }
  return r < std::exp(-gap / temperature) ? SaDecision::accept_worse : SaDecision::mutate;
}

/// Perturbs each entry with probability p_mut by N(0, σ²), where
/// σ = sigma0·min(T, 1)·‖v‖_∞. If no entry was selected a single uniformly
/// chosen index is perturbed instead. The result is renormalized.
///
/// Draw order (fixed, part of the reproducibility contract): for each index a
/// uniform selector, then a normal draw if selected; finally the fallback index.
inline Vector mutate(std::span<const double> v, double temperature, std::mt19937_64& rng,
                     double p_mut, double sigma0) {
  if (v.empty()) throw Error(Errc::zero_vector, "cannot mutate an empty vector");
  double inf_norm = 0.0;
  for (double x : v) inf_norm = std::max(inf_norm, std::abs(x));
  if (!(inf_norm > 0.0)) throw Error(Errc::zero_vector, "cannot mutate a zero vector");

  const double sigma = sigma0 * std::min(temperature, 1.0) * inf_norm;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : std::numeric_limits<double>::min());

  Vector out(v.begin(), v.end());
  bool any = false;
  for (double& x : out) {
    if (unit(rng) < p_mut) {
      x += noise(rng);
      any = true;
    }
  }
  if (!any) {
    std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
    out[pick(rng)] += noise(rng);
  }
  return normalize(out);
}

}  // namespace epmp
