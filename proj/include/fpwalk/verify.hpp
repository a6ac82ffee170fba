#pragma once

// Empirical checks of the inequalities around the corrected diffusion
// approximation, with the exact engine as ground truth.
//
// Walks with sigma != 1 are checked in normalised units: positions are
// divided by sigma, so x' = x / sigma, E' = E|S_tau_x| / sigma and the third
// moment enters through the Lyapunov ratio lambda = beta3 / sigma^3. Windows
// of unit length become windows of length sigma on the integer lattice.
//
// Every report stores lhs / rhs with the absolute constant left out. Bounds
// whose constant is explicit carry it in `constant` and set `holds`; the
// others only estimate it as the largest ratio seen.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fpwalk/exact.hpp"
#include "fpwalk/increments.hpp"
#include "fpwalk/ladder.hpp"

namespace fpwalk {

inline constexpr double kGamma0 = 0.4785;

struct VerifyGrid {
  std::vector<std::int64_t> n{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::vector<std::int64_t> x{0, 1, 2, 5, 10, 20};  // floor(n^{1/4}) and floor(n^{1/2}) are added per n
  bool scaled_x = true;
  std::vector<double> z{0.0, 0.5, 1.0, 2.0, 5.0};   // window lengths, normalised units
  std::vector<std::int64_t> u{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 50, 100};
  std::vector<std::int64_t> be_n{1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::int64_t rate_n_min = 64;                     // rate fits use grid n >= rate_n_min
  unsigned workers = 0;                             // 0 = hardware concurrency

  [[nodiscard]] std::vector<std::int64_t> x_values(std::int64_t n) const;
  [[nodiscard]] std::int64_t n_max() const;
};

struct BoundRow {
  std::int64_t x = 0;
  double y = 0.0;
  double z = 0.0;
  std::int64_t n = 0;
  double lhs = 0.0;
  double rhs_scaled = 0.0;
  double ratio = 0.0;
};

struct BoundReport {
  std::string bound_id;
  std::string dist;
  std::string grid;
  double max_ratio = 0.0;
  BoundRow argmax;
  std::optional<double> constant;  // explicit constant, when the bound has one
  bool holds = true;               // max_ratio <= constant; true when there is no constant
  double estimated_constant = 0.0; // = max_ratio
  std::vector<BoundRow> rows;
  std::size_t evaluated = 0;       // grid points seen, kept or not

  /// Update the maximum; `keep` also stores the row for export.
  void add(const BoundRow& row, bool keep = true);
  void finish();
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::int64_t n_min = 0;
  std::int64_t n_max = 0;
  std::size_t points = 0;
};

/// Least-squares line through (log n, log err); needs at least 2 points with err > 0.
[[nodiscard]] RateFit fit_rate(const std::vector<std::int64_t>& n, const std::vector<double>& err);

/// Killed walk from x recorded once up to the largest grid horizon.
struct WalkRecord {
  std::int64_t x = 0;
  std::vector<double> live;  // P(tau_x > k), k = 0..n_max
  std::vector<double> pk;    // P(tau_x = k), k = 0..n_max (entry 0 is 0)
  std::vector<double> m1k;   // E[|x + S_tau|; tau_x = k]
  std::vector<double> m2k;   // E[|x + S_tau|^2; tau_x = k]
  std::map<std::int64_t, FreePmf> rows;  // killed-walk law at grid horizons (min_position = lo)
};

/// Exact data for one distribution, shared by all checks.
class Workbench {
public:
  Workbench(LatticeIncrement dist, VerifyGrid grid = {});

  [[nodiscard]] const LatticeIncrement& dist() const noexcept { return dist_; }
  [[nodiscard]] const VerifyGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const MomentSummary& moments() const noexcept { return m_; }
  [[nodiscard]] double sigma() const noexcept { return sigma_; }
  [[nodiscard]] double lambda() const noexcept { return m_.lyapunov; }
  [[nodiscard]] const LadderLaw& ladder() const noexcept { return law_; }

  /// Every start point used by some grid horizon.
  [[nodiscard]] const std::vector<std::int64_t>& starts() const noexcept { return starts_; }
  [[nodiscard]] const WalkRecord& walk(std::int64_t x) const;
  [[nodiscard]] const FreePmf& free(std::int64_t n) const;
  [[nodiscard]] const LadderStats& stats(std::int64_t x) const;

  /// Optional display name used in reports.
  void set_name(std::string name) { name_ = std::move(name); }

private:
  LatticeIncrement dist_;
  VerifyGrid grid_;
  std::string name_;
  MomentSummary m_;
  double sigma_ = 1.0;
  LadderLaw law_;
  std::vector<std::int64_t> starts_;
  std::map<std::int64_t, WalkRecord> walks_;
  std::map<std::int64_t, FreePmf> free_;
  std::map<std::int64_t, LadderStats> stats_;
};

// Bounds with explicit constants.
[[nodiscard]] BoundReport check_classical_be(const Workbench& wb);
[[nodiscard]] BoundReport check_concentration(const Workbench& wb);      // free walk windows
[[nodiscard]] BoundReport check_concentration_killed(const Workbench& wb);
[[nodiscard]] BoundReport check_tau_tail(const Workbench& wb);
[[nodiscard]] BoundReport check_mogulskii(const Workbench& wb);
[[nodiscard]] BoundReport check_concrete_local(const Workbench& wb);
[[nodiscard]] BoundReport check_truncated_overshoot(const Workbench& wb);
/// Empty optional unless sigma = 1 and the span is 1.
[[nodiscard]] std::optional<BoundReport> check_local_clt_lattice(const Workbench& wb);

/// Every explicit-constant check that applies to the distribution.
[[nodiscard]] std::vector<BoundReport> check_explicit_bounds(const Workbench& wb);

/// Largest observed ratio for the bounds whose constant is not specified.
[[nodiscard]] std::vector<BoundReport> estimate_constants(const Workbench& wb);

struct ErrorCurve {
  std::vector<std::int64_t> n;
  std::vector<double> corrected;   // sup_y |exact - corrected approximation|
  std::vector<double> reflection;  // sup_y |exact - reflection term|
};

struct Thm1Result {
  BoundReport report;   // estimated A1
  RateFit rate;         // x = 0
  ErrorCurve curve;     // x = 0, n >= rate_n_min
};

struct CorollaryResult {
  BoundReport survival;  // |P(tau > n) / (sqrt(2/(pi sigma^2)) E n^{-1/2}) - 1|, estimated A2 from x = 0
  BoundReport rayleigh;  // sup_y |P(x + S_n >= y | tau > n) - exp(-y^2 / 2 sigma^2 n)|
  double A2 = 0.0;
  double A3 = 0.0;
  RateFit rate;          // survival error at x = 0
  std::vector<std::int64_t> n;
  std::vector<double> survival_error;  // x = 0
};

[[nodiscard]] Thm1Result check_thm1(const Workbench& wb);
[[nodiscard]] CorollaryResult check_corollary(const Workbench& wb);
[[nodiscard]] BoundReport check_ales(const Workbench& wb);

struct ImprovedResult {
  BoundReport envelope;     // estimated C for the beta3^2 envelope
  BoundReport local_window; // estimated A in the sharpened window bound
  double R = 0.0;
};

/// Requires span 1; R = 1 / V.
[[nodiscard]] ImprovedResult check_improved(const Workbench& wb);

/// Sup over integers y >= 0 of |P(x + S_n >= y, tau_x > n) - approx(y)|,
/// with the overshoot mean `overshoot` in the correction (0 gives the pure
/// reflection term).
[[nodiscard]] double sup_tail_error(const FreePmf& row, double x, std::int64_t n, double sigma, double overshoot);

}  // namespace fpwalk
