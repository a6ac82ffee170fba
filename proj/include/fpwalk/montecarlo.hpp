#pragma once

// Seeded Monte Carlo for first-passage functionals of arbitrary increments,
// including continuous laws and real starting points.
//
// Each batch draws from its own std::mt19937_64 seeded from (seed, batch
// index), and batch statistics are reduced in batch order, so results do not
// depend on the number of worker threads.

#include <cstdint>

#include "fpwalk/increments.hpp"

namespace fpwalk {

struct McConfig {
  std::uint64_t seed = 1;
  std::int64_t batches = 100;           // >= 2, batch-means variance
  std::int64_t paths_per_batch = 10000; // >= 1
  std::int64_t horizon = 1000;          // step cap for stopping-time runs
  unsigned workers = 1;                 // 0 = hardware concurrency

  void validate() const;
};

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // batch-means standard error
  double lo = 0.0;       // 95% interval
  double hi = 0.0;
  std::int64_t n_paths = 0;
};

struct McStopping {
  McEstimate overshoot;           // E[|x + S_tau| | tau <= horizon]
  McEstimate survival;            // P(tau > horizon)
  double truncated_fraction = 0.0;
};

/// P(x + S_n >= y, tau_x > n).
[[nodiscard]] McEstimate mc_tail(const IncrementModel& dist, double x, double y, std::int64_t n, const McConfig& cfg);

/// Overshoot and survival at cfg.horizon; paths still alive at the horizon
/// are counted in truncated_fraction and excluded from the overshoot mean.
[[nodiscard]] McStopping mc_stopping(const IncrementModel& dist, double x, const McConfig& cfg);

/// Seed of the generator used for batch `batch` (splitmix64 mixing).
[[nodiscard]] std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t batch) noexcept;

}  // namespace fpwalk
