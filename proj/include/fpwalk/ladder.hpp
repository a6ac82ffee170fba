#pragma once

// Open-horizon functionals of integer walks: ladder heights, renewal
// functions, overshoot laws and the occupation measure of the walk killed at
// tau_0.
//
// Truncating the dynamic program at a finite horizon leaves a residual of
// order n^{-1/2}, so these quantities are computed without a time horizon:
//
//  * ladder-height laws from the Wiener-Hopf factorisation
//      1 - E z^X = (1 - E z^{chi+}) (1 - E z^{-chi-})
//    (strict ascending chi+, weak descending chi-), with the roots of
//    z^a (1 - E z^X) split by the unit circle;
//  * overshoots and E theta(u) from the chi- renewal sequence;
//  * H from the chi+ renewal sequence;
//  * the occupation measure phi and the harmonic functions u -> E|u+S_tau_u|^m
//    as bounded solutions of the one-step equations on a finite section,
//    independent of the factorisation.
//
// The horizon-truncated dynamic program stays available in ladder_stats_dp as
// a cross-check with an explicit residual.

#include <cstdint>
#include <vector>

#include "fpwalk/increments.hpp"

namespace fpwalk {

struct LadderLaw {
  std::vector<double> descending;  // P(chi- = j), j = 0..max_down
  std::vector<double> ascending;   // P(chi+ = j), j = 0..max_offset (entry 0 is 0)
  double mean_descending = 0.0;    // E|S_{tau_0}|
  double mean_ascending = 0.0;
  double defect = 0.0;             // max coefficient error of the factorisation
};

struct LadderStats {
  std::int64_t x = 0;
  double absStau = 0.0;     // E|S_{tau_x}|
  double overshoot1 = 0.0;  // E|x + S_{tau_x}|
  double overshoot2 = 0.0;  // E|x + S_{tau_x}|^2
  double residual = 0.0;    // probability mass not accounted for
  std::int64_t horizon = 0; // steps used; 0 for the horizon-free computation
  bool converged = true;
};

struct LadderOptions {
  std::int64_t horizon = 1024;                  // first checkpoint of the doubling
  double tol = 1e-8;                            // residual live-mass target
  std::int64_t step_cap = std::int64_t{1} << 14; // the DP costs O(n^2)
};

struct RenewalTable {
  std::vector<double> H;           // H(x) = sum_j P(chi+_1 + ... + chi+_j <= x), x = 0..x_max + 1
  std::vector<double> phi;         // phi(x) = sum_k P(S_k in [x, x+1), tau_0 > k), x = 0..x_max
  std::vector<double> theta_mean;  // E theta(u), u = 0..x_max
  double residual = 0.0;           // factorisation defect
  double phi_residual = 0.0;       // change of phi between the last two section sizes

  /// Left-continuous renewal function: expected number of ladder heights
  /// strictly below x (H(x-) on the integers, zero at x = 0).
  [[nodiscard]] double H_left(std::int64_t x) const;
};

/// Values on 0..x_max of a solution of a one-step equation on a finite
/// section, with the change between the last two section sizes.
struct SectionSolution {
  std::vector<double> values;
  double residual = 0.0;
  std::int64_t section = 0;
};

struct OvershootPoint {
  std::int64_t x = 0;
  double overshoot = 0.0;  // E|x + S_{tau_x}|
};

struct OvershootScan {
  std::vector<OvershootPoint> points;
  double last_difference = 0.0;  // |E_last - E_second_last|, the plateau diagnostic
};

/// Throws std::domain_error if the offsets have a common divisor > 1 (the
/// walk then lives on a sublattice; rescale it first).
[[nodiscard]] LadderLaw ladder_law(const LatticeIncrement& dist);

/// Law of |x + S_{tau_x}| on 0..max_down.
[[nodiscard]] std::vector<double> overshoot_law(const LatticeIncrement& dist, std::int64_t x);
[[nodiscard]] std::vector<double> overshoot_law(const LadderLaw& law, std::int64_t x);

/// E theta(u) for u = 0..u_max, theta(u) = inf{j >= 1: chi-_1 + ... + chi-_j >= u}.
[[nodiscard]] std::vector<double> expected_ladder_count(const LadderLaw& law, std::int64_t u_max);

/// Horizon-free ladder statistics from the overshoot law; absStau = x + overshoot1.
[[nodiscard]] LadderStats ladder_stats(const LatticeIncrement& dist, std::int64_t x);
[[nodiscard]] LadderStats ladder_stats(const LadderLaw& law, std::int64_t x);

/// Horizon-truncated dynamic program, doubling the horizon until the live
/// mass drops below opts.tol or opts.step_cap is hit (converged = false).
[[nodiscard]] LadderStats ladder_stats_dp(const LatticeIncrement& dist, std::int64_t x, const LadderOptions& opts = {});

/// Renewal function, occupation measure and E theta on 0..x_max. The phi
/// section doubles until successive sizes agree to `tol`.
[[nodiscard]] RenewalTable renewal_tables(const LatticeIncrement& dist, std::int64_t x_max, double tol = 1e-12);

/// Occupation measure phi(0..x_max) of the walk killed at tau_0, from the
/// forward equation phi(y) = sum_w phi(w) p(y - w), phi(0) = 1.
[[nodiscard]] SectionSolution occupation_measure(const LatticeIncrement& dist, std::int64_t x_max, double tol = 1e-12);

/// u -> E|u + S_{tau_u}|^power for u = 0..x_max, from the backward equation
/// h(u) = E[|u + X|^power; u + X <= 0] + E[h(u + X); u + X >= 1].
[[nodiscard]] SectionSolution harmonic_overshoot(const LatticeIncrement& dist, int power, std::int64_t x_max,
                                                 double tol = 1e-12);

/// E|x + S_{tau_x}| over the given starts; last_difference is the change
/// between the last two entries.
[[nodiscard]] OvershootScan overshoot_scan(const LatticeIncrement& dist, const std::vector<std::int64_t>& xs);

}  // namespace fpwalk
