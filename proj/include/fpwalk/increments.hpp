#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace fpwalk {

/// Absolute tolerance for the zero-mean and unit-mass checks.
inline constexpr double kMeanTolerance = 1e-12;

/// Step distribution supported on a finite set of integers.
///
/// Construction validates the distribution: probabilities are nonnegative and
/// sum to one, the mean is zero, and both signs occur in the support. A
/// distribution failing the mean check is rejected rather than re-centred.
class LatticeIncrement {
public:
  LatticeIncrement(std::vector<std::int64_t> offsets, std::vector<double> probs);

  [[nodiscard]] std::span<const std::int64_t> offsets() const noexcept { return offsets_; }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] std::size_t size() const noexcept { return offsets_.size(); }

  /// Largest upward jump (> 0).
  [[nodiscard]] std::int64_t max_offset() const noexcept { return offsets_.back(); }
  /// Largest downward jump, as a positive number.
  [[nodiscard]] std::int64_t max_down() const noexcept { return -offsets_.front(); }

  /// P(X = k); zero off the support.
  [[nodiscard]] double prob(std::int64_t k) const noexcept;

  [[nodiscard]] std::string describe() const;

  friend bool operator==(const LatticeIncrement&, const LatticeIncrement&) = default;

private:
  std::vector<std::int64_t> offsets_;  // sorted ascending, distinct
  std::vector<double> probs_;
};

enum class ContinuousFamily { gaussian, laplace, uniform_symmetric };

/// Named absolutely continuous mean-zero family.
///
/// `scale` is the standard deviation for gaussian, the Laplace scale b for
/// laplace, and the half-width a of U[-a, a] for uniform_symmetric.
class ContinuousIncrement {
public:
  ContinuousIncrement(ContinuousFamily family, double scale);

  [[nodiscard]] ContinuousFamily family() const noexcept { return family_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }

  /// Sup norm of the density.
  [[nodiscard]] double density_sup() const noexcept;

  [[nodiscard]] std::string describe() const;

  friend bool operator==(const ContinuousIncrement&, const ContinuousIncrement&) = default;

private:
  ContinuousFamily family_;
  double scale_;
};

using IncrementModel = std::variant<LatticeIncrement, ContinuousIncrement>;

struct MomentSummary {
  double mean = 0.0;
  double sigma2 = 0.0;    // E X^2
  double beta3 = 0.0;     // E|X|^3
  double lyapunov = 0.0;  // beta3 / sigma^3

  [[nodiscard]] double sigma() const;
};

struct Peakedness {
  double V = 0.0;
  double argsup = 0.0;          // t at which the supremum was found
  bool at_endpoint = false;     // supremum is the t -> 0 (or 2 pi) limit
  std::size_t grid_points = 0;  // resolution of the initial scan
};

[[nodiscard]] MomentSummary moments(const LatticeIncrement& dist);
[[nodiscard]] MomentSummary moments(const ContinuousIncrement& dist);
[[nodiscard]] MomentSummary moments(const IncrementModel& dist);

/// Characteristic function E exp(i t X).
[[nodiscard]] std::complex<double> charfn(const LatticeIncrement& dist, double t);

/// 1 - |phi(t)|^2, evaluated without cancellation near t = 0.
[[nodiscard]] double charfn_defect(const LatticeIncrement& dist, double t);

/// Maximal lattice span: gcd of the pairwise differences of support points.
[[nodiscard]] std::int64_t span(const LatticeIncrement& dist);

/// Bobkov-Ulyanov peakedness V = -sup_{t in (0, 2pi)} log|phi(t)| / (1 - cos t).
///
/// Scans `grid_points` interior points, adds the endpoint limit -sigma^2 as a
/// candidate and refines the best interior point with Brent's method.
/// Throws std::domain_error unless span(dist) == 1.
[[nodiscard]] Peakedness peakedness_V(const LatticeIncrement& dist,
                                      std::size_t grid_points = std::size_t{1} << 16);

// Parsing: {"offsets": [...], "probs": [...]} or {"family": "gaussian", "scale": 1.0}.
[[nodiscard]] IncrementModel parse_increment(const nlohmann::json& j);
[[nodiscard]] IncrementModel load_increment(const std::string& path);
[[nodiscard]] nlohmann::json to_json(const IncrementModel& dist);
[[nodiscard]] std::string describe(const IncrementModel& dist);

// The three walks used throughout the test suite.
namespace walks {
[[nodiscard]] LatticeIncrement ssrw();        // {-1: 1/2, +1: 1/2}
[[nodiscard]] LatticeIncrement lazy();        // {-1: 1/4, 0: 1/2, +1: 1/4}
[[nodiscard]] LatticeIncrement skew_m1_0_2(); // {-1: 1/3, 0: 1/2, +2: 1/6}
}  // namespace walks

}  // namespace fpwalk
