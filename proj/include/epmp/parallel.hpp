#pragma once

// Row-block parallel matvec and the parallel EPMP driver.
//
// The engine follows a broadcast / compute / gather cycle: the coordinator
// publishes v, each worker computes its contiguous block of y = A·v into a
// private segment, and the coordinator concatenates the segments in block
// order. Every output entry is produced by the same row_dot kernel as the
// sequential matvec, so results are bit-identical for every worker count.
// The coordinator acts as worker 1 and owns all randomness.

#include <algorithm>
#include <barrier>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "epmp/error.hpp"
#include "epmp/linalg.hpp"
#include "epmp/solver.hpp"

namespace epmp {

/// Contiguous rows [start_row, start_row + row_count) owned by one worker.
struct RowBlock {
  std::size_t owner = 1;  // 1-based worker index
  std::size_t start_row = 0;
  std::size_t row_count = 0;
  std::vector<double> data;  // row_count·n values, row-major

  bool operator==(const RowBlock&) const = default;
};

struct ParallelPlan {
  std::size_t p = 1;
  std::size_t n = 0;
  std::vector<RowBlock> blocks;  // descriptors only; data left empty
};

struct CostEstimate {
  std::uint64_t flops_per_worker_per_iter = 0;
  std::uint64_t broadcast_volume_per_iter = 0;
  std::uint64_t gather_volume_per_iter = 0;

  bool operator==(const CostEstimate&) const = default;
};

/// The first n mod p blocks receive ⌈n/p⌉ rows, the rest ⌊n/p⌋.
inline ParallelPlan partition_rows(std::size_t n, std::size_t p) {
  if (p < 1 || p > n) {
    throw Error(Errc::invalid_argument, "worker count must satisfy 1 <= p <= n (p = " +
                                            std::to_string(p) + ", n = " + std::to_string(n) +
                                            ")");
  }
  ParallelPlan plan{p, n, {}};
  const std::size_t base = n / p;
  const std::size_t extra = n % p;
  std::size_t row = 0;
  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t count = base + (i < extra ? 1 : 0);
    plan.blocks.push_back(RowBlock{i + 1, row, count, {}});
    row += count;
  }
  return plan;
}

/// Copies each worker's rows of A into its block.
inline std::vector<RowBlock> distribute_rows(const DenseMatrix& a, const ParallelPlan& plan) {
  detail::require_same_length(plan.n, a.size(), "distribute_rows");
  std::vector<RowBlock> blocks = plan.blocks;
  const auto values = a.values();
  for (RowBlock& b : blocks) {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(b.start_row * plan.n);
    b.data.assign(first, first + static_cast<std::ptrdiff_t>(b.row_count * plan.n));
  }
  return blocks;
}

/// Per-iteration cost: every worker processes at most ⌈n/p⌉ rows at 2n flops
/// per row; v is broadcast and y gathered once each.
inline CostEstimate cost_model(std::size_t n, std::size_t p) {
  if (p < 1 || p > n) throw Error(Errc::invalid_argument, "cost_model requires 1 <= p <= n");
  const std::uint64_t rows = (n + p - 1) / p;
  return {2ULL * n * rows, n, n};
}

/// Computes one block of y; optionally tallies the multiply-adds performed.
inline void block_matvec(const RowBlock& block, std::size_t n, std::span<const double> v,
                         std::span<double> out, std::uint64_t* multiply_adds = nullptr) {
  for (std::size_t r = 0; r < block.row_count; ++r) {
    out[r] = row_dot(std::span<const double>(block.data.data() + r * n, n), v);
  }
  if (multiply_adds) *multiply_adds += static_cast<std::uint64_t>(block.row_count) * n;
}

/// Persistent worker pool for repeated A·v products over fixed row blocks.
/// p − 1 threads are spawned; the calling thread serves as worker 1 and the
/// coordinator. Not reentrant: apply() must be called from one thread.
class RowBlockEngine {
 public:
  RowBlockEngine(ParallelPlan plan, std::vector<RowBlock> blocks)
      : plan_(std::move(plan)),
        blocks_(std::move(blocks)),
        segments_(blocks_.size()),
        counts_(blocks_.size(), 0),
        start_(static_cast<std::ptrdiff_t>(blocks_.size())),
        done_(static_cast<std::ptrdiff_t>(blocks_.size())) {
    if (blocks_.size() != plan_.p) {
      throw Error(Errc::dimension_mismatch, "block count does not match the plan");
    }
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const RowBlock& b = blocks_[i];
      const RowBlock& d = plan_.blocks[i];
      if (b.start_row != d.start_row || b.row_count != d.row_count ||
          b.data.size() != b.row_count * plan_.n) {
        throw Error(Errc::dimension_mismatch, "row block " + std::to_string(i + 1) +
                                                  " does not match the plan");
      }
      segments_[i].resize(b.row_count);
    }
    for (std::size_t w = 1; w < blocks_.size(); ++w) {
      threads_.emplace_back([this, w] { worker_loop(w); });
    }
  }

  RowBlockEngine(const DenseMatrix& a, std::size_t p)
      : RowBlockEngine(partition_rows(a.size(), p), distribute_rows(a, partition_rows(a.size(), p))) {}

  ~RowBlockEngine() {
    if (!threads_.empty()) {
      stop_ = true;
      start_.arrive_and_wait();
      threads_.clear();
    }
  }

  RowBlockEngine(const RowBlockEngine&) = delete;
  RowBlockEngine& operator=(const RowBlockEngine&) = delete;

  const ParallelPlan& plan() const noexcept { return plan_; }

  /// Enables per-worker multiply-add counting (reset on every enable).
  void set_counting(bool on) {
    counting_ = on;
    std::fill(counts_.begin(), counts_.end(), 0);
  }
  const std::vector<std::uint64_t>& multiply_adds() const noexcept { return counts_; }

  Vector apply(std::span<const double> v) {
    detail::require_same_length(plan_.n, v.size(), "parallel_matvec");
    // broadcast
    input_ = v;
    if (!threads_.empty()) start_.arrive_and_wait();
    compute(0);
    if (!threads_.empty()) done_.arrive_and_wait();
    // gather, in block order
    Vector y;
    y.reserve(plan_.n);
    for (const auto& seg : segments_) y.insert(y.end(), seg.begin(), seg.end());
    return y;
  }

  Vector operator()(std::span<const double> v) { return apply(v); }

 private:
  void compute(std::size_t w) {
    block_matvec(blocks_[w], plan_.n, input_, segments_[w], counting_ ? &counts_[w] : nullptr);
  }

  void worker_loop(std::size_t w) {
    while (true) {
      start_.arrive_and_wait();
      if (stop_) return;
      compute(w);
      done_.arrive_and_wait();
    }
  }

  ParallelPlan plan_;
  std::vector<RowBlock> blocks_;
  std::vector<std::vector<double>> segments_;
  std::vector<std::uint64_t> counts_;
  std::span<const double> input_;
  bool counting_ = false;
  bool stop_ = false;
  std::barrier<> start_;
  std::barrier<> done_;
  std::vector<std::jthread> threads_;
};

/// One-shot row-block product. p = 1 takes the sequential path.
inline Vector parallel_matvec(const ParallelPlan& plan, const std::vector<RowBlock>& blocks,
                              std::span<const double> v) {
  detail::require_same_length(plan.n, v.size(), "parallel_matvec");
  if (plan.p == 1) {
    Vector y(plan.n);
    block_matvec(blocks.at(0), plan.n, v, y);
    return y;
  }
  RowBlockEngine engine(plan, blocks);
  return engine.apply(v);
}

/// EPMP with the product computed by p row-block workers. Bit-identical to
/// epmp_sequential for every p.
inline EigenEstimate epmp_parallel(const DenseMatrix& a, const EpmpConfig& cfg, std::size_t p) {
  cfg.validate();
  if (p == 1) return epmp_sequential(a, cfg);
  RowBlockEngine engine(a, p);
  return epmp_with(a.size(), engine, cfg);
}

}  // namespace epmp
