#pragma once

// Sequential dominant-eigenpair solvers: the plain power method baseline and
// the annealing/mutation-augmented power iteration (EPMP). The EPMP loop is a
// template over the product operator so the row-block parallel engine can
// drive the exact same control flow.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "epmp/annealing.hpp"
#include "epmp/error.hpp"
#include "epmp/linalg.hpp"

namespace epmp {

struct EpmpConfig {
  double eps = 1e-8;        // relative fitness-change stop tolerance
  double t0 = 1.0;          // initial temperature
  double alpha = 0.95;      // cooling rate, in (0, 1)
  std::size_t max_iter = 50000;
  double p_mut = 0.05;      // per-entry mutation probability
  double sigma0 = 0.1;      // mutation noise base scale
  std::uint64_t seed = 0;
  double res_tol = 1e-10;   // absolute residual treated as converged
  bool literal_paper_sa = false;
  bool absolute_delta = false;  // Metropolis on P(y) − P(v) instead of (P(y) − P(v)) / P(y)
  bool record_history = false;

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
    if (!(eps > 0.0)) fail("eps must be positive");
    if (!(t0 > 0.0)) fail("t0 must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie strictly inside (0, 1)");
    if (max_iter < 1) fail("max_iter must be at least 1");
    if (!(p_mut >= 0.0 && p_mut <= 1.0)) fail("p_mut must lie in [0, 1]");
    if (!(sigma0 > 0.0)) fail("sigma0 must be positive");
    if (!(res_tol > 0.0)) fail("res_tol must be positive");
  }
};

/// One EPMP iteration as seen by the decision rule.
struct IterationRecord {
  double p_current = 0.0;
  double p_candidate = 0.0;
  SaDecision decision = SaDecision::accept_improved;

  bool operator==(const IterationRecord&) const = default;
};

struct EigenEstimate {
  double lambda = 0.0;      // signed, Rayleigh quotient of the eigenvector
  double lambda_abs = 0.0;  // norm of the final un-normalized product
  Vector eigenvector;       // unit norm
  double residual = 0.0;    // fitness of the eigenvector
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t mutations = 0;
  std::size_t worse_accepts = 0;
  std::size_t improved_accepts = 0;
  std::size_t reseeds = 0;
  double temperature = 0.0;     // temperature when the loop exited
  std::vector<double> history;          // candidate fitness per iteration (opt-in)
  std::vector<IterationRecord> trace;   // EPMP decisions per iteration (opt-in)

  bool operator==(const EigenEstimate&) const = default;
};

namespace detail {

inline Vector random_start(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = unit(rng);
  return v;
}

inline EigenEstimate finish(const Evaluation& e, double lambda_abs) {
  EigenEstimate out;
  out.lambda = e.rho;
  out.lambda_abs = lambda_abs;
  out.eigenvector = e.unit;
  out.residual = e.fitness;
  return out;
}

/// Next temperature; floored at the smallest normal double so the
/// Metropolis test stays defined on very long runs.
inline double cool(double temperature, double alpha) {
  return std::max(cooling_step(temperature, alpha), std::numeric_limits<double>::min());
}

}  // namespace detail

/// Plain power iteration v ← A·v / ‖A·v‖ from a seeded random start, stopping
/// once the eigen-residual drops below cfg.res_tol.
template <typename Apply>
EigenEstimate power_method_with(std::size_t n, Apply&& apply, const EpmpConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  Evaluation cur = evaluate(apply, detail::random_start(n, rng));
  double image_norm = norm(cur.image);
  std::vector<double> history;

  std::size_t it = 0;
  bool converged = false;
  while (it < cfg.max_iter) {
    ++it;
    if (!(norm(cur.image) > 0.0)) {
      throw Error(Errc::zero_vector, "power iterate collapsed to the zero vector");
    }
    image_norm = norm(cur.image);
    cur = evaluate(apply, cur.image);
    if (cfg.record_history) history.push_back(cur.fitness);
    if (cur.fitness < cfg.res_tol) {
      converged = true;
      break;
    }
  }
  EigenEstimate out = detail::finish(cur, image_norm);
  out.iterations = it;
  out.converged = converged;
  out.temperature = cfg.t0;
  out.history = std::move(history);
  return out;
}

inline EigenEstimate power_method(const DenseMatrix& a, const EpmpConfig& cfg) {
  return power_method_with(
      a.size(), [&a](std::span<const double> v) { return matvec(a, v); }, cfg);
}

/// The EPMP loop. Per iteration, with v the current unit iterate and y = A·v:
///   - stop when |(P(y) − P(v)) / P(y)| < eps, P(y) < res_tol, or P(y) ≈ 0;
///   - otherwise keep y when it improves the fitness P;
///   - otherwise draw r and let metropolis_decide choose between keeping y
///     and mutating v, with the gap taken relative to P(y);
///   - cool the temperature.
/// All randomness comes from one generator seeded with cfg.seed, so the
/// result is a pure function of (A, cfg) regardless of how `apply` computes
/// its product, provided the product itself is bit-reproducible.
template <typename Apply>
EigenEstimate epmp_with(std::size_t n, Apply&& apply, const EpmpConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto fresh = [&] { return evaluate(apply, detail::random_start(n, rng)); };
  Evaluation cur = fresh();
  Evaluation best = cur;
  double temperature = cfg.t0;

  EigenEstimate out;
  std::size_t it = 0;
  while (it < cfg.max_iter) {
    ++it;
    const double y_norm = norm(cur.image);
    if (!(y_norm > 0.0)) {
      // v lies in the null space; restart from the seed stream.
      ++out.reseeds;
      cur = fresh();
      if (cfg.record_history) out.history.push_back(cur.fitness);
      temperature = detail::cool(temperature, cfg.alpha);
      continue;
    }
    Evaluation cand = evaluate(apply, cur.image);
    const double p_new = cand.fitness;
    const double p_cur = cur.fitness;
    if (cfg.record_history) out.history.push_back(p_new);
    auto record = [&](SaDecision d) {
      if (cfg.record_history) out.trace.push_back({p_cur, p_new, d});
    };

    const bool stop = p_new < 1e-300 || p_new < cfg.res_tol ||
                      std::abs((p_new - p_cur) / p_new) < cfg.eps;
    if (stop) {
      record(SaDecision::converged);
      EigenEstimate done = detail::finish(cand, y_norm);
      done.iterations = it;
      done.converged = true;
      done.mutations = out.mutations;
      done.worse_accepts = out.worse_accepts;
      done.improved_accepts = out.improved_accepts;
      done.reseeds = out.reseeds;
      done.temperature = temperature;
      done.history = std::move(out.history);
      done.trace = std::move(out.trace);
      return done;
    }

    if (p_new < p_cur) {
      record(SaDecision::accept_improved);
      ++out.improved_accepts;
      cur = std::move(cand);
    } else {
      const double r = unit(rng);
      // By default the gap is measured relative to P(y), as in the stop test,
      // which keeps T dimensionless: the walk on c·A matches the one on A.
      const SaDecision d =
          cfg.absolute_delta || cfg.literal_paper_sa
              ? metropolis_decide(p_new, p_cur, temperature, r, cfg.literal_paper_sa)
              : metropolis_decide(1.0, p_cur / p_new, temperature, r);
      record(d);
      if (d == SaDecision::accept_worse) {
        ++out.worse_accepts;
        cur = std::move(cand);
      } else {
        ++out.mutations;
        const Vector mutated = mutate(cur.unit, temperature, rng, cfg.p_mut, cfg.sigma0);
        cur = evaluate(apply, mutated);
      }
    }
    if (cur.fitness < best.fitness) best = cur;
    temperature = detail::cool(temperature, cfg.alpha);
  }

  // Iteration cap: report the best iterate seen.
  EigenEstimate capped = detail::finish(best, norm(best.image));
  capped.iterations = it;
  capped.converged = false;
  capped.mutations = out.mutations;
  capped.worse_accepts = out.worse_accepts;
  capped.improved_accepts = out.improved_accepts;
  capped.reseeds = out.reseeds;
  capped.temperature = temperature;
  capped.history = std::move(out.history);
  capped.trace = std::move(out.trace);
  return capped;
}

inline EigenEstimate epmp_sequential(const DenseMatrix& a, const EpmpConfig& cfg) {
  return epmp_with(
      a.size(), [&a](std::span<const double> v) { return matvec(a, v); }, cfg);
}

/// A − λ·v·vᵀ for symmetric A and unit v.
inline DenseMatrix deflate_hotelling(const DenseMatrix& a, double lambda,
                                     std::span<const double> v) {
  detail::require_same_length(a.size(), v.size(), "deflate_hotelling");
  if (std::abs(norm(v) - 1.0) > 1e-8) {
    throw Error(Errc::invalid_argument, "deflation vector must have unit norm");
  }
  if (asymmetry(a) > 1e-8 * std::max(1.0, max_abs(a))) {
    throw Error(Errc::not_symmetric, "Hotelling deflation requires a symmetric matrix");
  }
  const std::size_t n = a.size();
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] -= lambda * (v[i] * v[j]);
  return DenseMatrix(n, std::move(out));
}

}  // namespace epmp
