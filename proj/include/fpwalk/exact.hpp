#pragma once

// Exact dynamic programming for integer walks absorbed on {<= 0}.
//
// The walk starts at x >= 0 and is killed at the first step n >= 1 with
// x + S_n <= 0; x = 0 itself is alive at time 0. Positions are stored on the
// full reachable grid 0..x + n * max_offset without any upper truncation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fpwalk/increments.hpp"

namespace fpwalk {

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{512} << 20;  // bytes

class BudgetExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Sum with pairwise (cascade) reduction.
[[nodiscard]] double pairwise_sum(std::span<const double> values) noexcept;

/// Mass removed by one step of the killed walk, with the overshoot moments
/// E[|x+S_k|^m; tau_x = k] for m = 1, 2.
struct KillStep {
  double mass = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};

/// Streaming forward evolution of the killed walk.
///
/// Holds only the current sub-probability row; use SurvivalTable when every
/// row is needed.
class KilledWalk {
public:
  KilledWalk(const LatticeIncrement& dist, std::int64_t x, std::int64_t max_steps,
             std::size_t memory_budget = kDefaultMemoryBudget);

  /// Advance one step. Throws std::out_of_range past max_steps.
  KillStep step();

  [[nodiscard]] std::int64_t time() const noexcept { return time_; }
  [[nodiscard]] std::int64_t start() const noexcept { return x_; }

  /// Lowest and highest position that may carry mass at the current time.
  [[nodiscard]] std::int64_t lo() const noexcept { return lo_; }
  [[nodiscard]] std::int64_t hi() const noexcept { return hi_; }

  /// P(x + S_k = w, tau_x > k); zero off the active range.
  [[nodiscard]] double at(std::int64_t w) const noexcept;
  /// Current row over positions lo()..hi().
  [[nodiscard]] std::span<const double> row() const noexcept;

  /// P(tau_x > k).
  [[nodiscard]] double live_mass() const noexcept;
  /// P(tau_x <= k), accumulated with compensation.
  [[nodiscard]] double killed_mass() const noexcept { return killed_ + killed_c_; }

  /// P(x + S_k >= y, tau_x > k).
  [[nodiscard]] double tail(double y) const noexcept;
  /// E[x + S_k; tau_x > k].
  [[nodiscard]] double live_first_moment() const noexcept;

private:
  LatticeIncrement dist_;
  std::int64_t x_;
  std::int64_t max_steps_;
  std::int64_t time_ = 0;
  std::int64_t lo_;
  std::int64_t hi_;
  std::vector<double> cur_;
  std::vector<double> next_;
  double killed_ = 0.0;
  double killed_c_ = 0.0;
};

/// Every row of the killed walk for k = 0..n.
class SurvivalTable {
public:
  [[nodiscard]] std::int64_t start() const noexcept { return x_; }
  [[nodiscard]] std::int64_t horizon() const noexcept { return static_cast<std::int64_t>(rows_.size()) - 1; }

  /// P(x + S_k = w, tau_x > k).
  [[nodiscard]] double at(std::int64_t k, std::int64_t w) const;
  [[nodiscard]] std::int64_t row_lo(std::int64_t k) const { return rows_.at(static_cast<std::size_t>(k)).lo; }
  [[nodiscard]] std::span<const double> row(std::int64_t k) const { return rows_.at(static_cast<std::size_t>(k)).mass; }

  [[nodiscard]] double live_mass(std::int64_t k) const { return live_.at(static_cast<std::size_t>(k)); }
  [[nodiscard]] double killed_mass(std::int64_t k) const { return killed_.at(static_cast<std::size_t>(k)); }

private:
  friend SurvivalTable survival_evolve(const LatticeIncrement&, std::int64_t, std::int64_t, std::size_t);
  struct Row {
    std::int64_t lo = 0;
    std::vector<double> mass;
  };
  std::int64_t x_ = 0;
  std::vector<Row> rows_;
  std::vector<double> live_;
  std::vector<double> killed_;
};

/// Per-step kill mass and overshoot moments; index k = 1..n (index 0 unused).
struct StoppingProfile {
  std::int64_t x = 0;
  std::int64_t n = 0;
  std::vector<double> pk;   // P(tau_x = k)
  std::vector<double> m1k;  // E[|x + S_tau|; tau_x = k]
  std::vector<double> m2k;  // E[|x + S_tau|^2; tau_x = k]
  double total_p = 0.0;
  double total_m1 = 0.0;
  double total_m2 = 0.0;
  double residual = 0.0;    // P(tau_x > n)
};

[[nodiscard]] SurvivalTable survival_evolve(const LatticeIncrement& dist, std::int64_t x, std::int64_t n,
                                            std::size_t memory_budget = kDefaultMemoryBudget);

/// P(tau_x > n).
[[nodiscard]] double survival_prob(const LatticeIncrement& dist, std::int64_t x, std::int64_t n);

/// P(x + S_n >= y, tau_x > n).
[[nodiscard]] double tail_prob(const LatticeIncrement& dist, std::int64_t x, double y, std::int64_t n);

[[nodiscard]] StoppingProfile stopping_profile(const LatticeIncrement& dist, std::int64_t x, std::int64_t n);

/// E[tau_x ^ n] = sum_k k P(tau_x = k) + n P(tau_x > n).
[[nodiscard]] double expected_min_tau(const StoppingProfile& profile);
[[nodiscard]] double expected_min_tau(const LatticeIncrement& dist, std::int64_t x, std::int64_t n);

/// Law of the free walk S_n on positions min_position .. min_position + size - 1.
struct FreePmf {
  std::int64_t min_position = 0;
  std::vector<double> mass;

  [[nodiscard]] double at(std::int64_t s) const noexcept;
  [[nodiscard]] std::int64_t max_position() const noexcept {
    return min_position + static_cast<std::int64_t>(mass.size()) - 1;
  }
};

/// Streaming convolution powers of the increment law.
class FreeWalk {
public:
  explicit FreeWalk(const LatticeIncrement& dist);
  void step();
  [[nodiscard]] std::int64_t time() const noexcept { return time_; }
  [[nodiscard]] const FreePmf& pmf() const noexcept { return pmf_; }

private:
  LatticeIncrement dist_;
  std::int64_t time_ = 0;
  FreePmf pmf_;
  std::vector<double> scratch_;
};

[[nodiscard]] FreePmf free_pmf(const LatticeIncrement& dist, std::int64_t n);

}  // namespace fpwalk
