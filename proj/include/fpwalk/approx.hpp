#pragma once

// Corrected diffusion approximation for P(x + S_n >= y, tau_x > n) and the
// constant-free envelopes of the error bounds it comes with.
//
// The reflection term is the Brownian answer; the correction adds the
// overshoot mean E|x + S_{tau_x}| times a Gaussian density factor.

#include <cstdint>
#include <string>
#include <utility>

namespace fpwalk {

/// Standard normal distribution function, via std::erfc (no cancellation in
/// either tail; underflows to 0 below about -38).
[[nodiscard]] double normal_cdf(double z) noexcept;

/// Phi((y + x) / (sigma sqrt n)) - Phi((y - x) / (sigma sqrt n)).
[[nodiscard]] double reflection_term(double x, double y, double n, double sigma);

/// 2 E|x + S_{tau_x}| exp(-y^2 / (2 sigma^2 n)) / sqrt(2 pi sigma^2 n).
[[nodiscard]] double correction_term(double y, double n, double sigma, double overshoot_mean);

/// exp(-y^2 / (2 sigma^2 n)), the limiting tail of the walk conditioned to survive.
[[nodiscard]] double rayleigh_tail(double y, double n, double sigma);

struct ApproxTerms {
  double reflection = 0.0;
  double correction = 0.0;
  double total = 0.0;
  double rayleigh = 0.0;
};

[[nodiscard]] ApproxTerms corrected_tail(double x, double y, double n, double sigma, double overshoot_mean);

enum class EnvelopeKind { thm1, ales, corollary2, corollary3, improved };

[[nodiscard]] std::string to_string(EnvelopeKind kind);

/// Right-hand side of an error bound with its absolute constant left out.
struct BoundEnvelope {
  EnvelopeKind kind = EnvelopeKind::thm1;
  double scaled_value = 0.0;
  std::string constant_symbol;
};

/// beta3^3 E|S_{tau_x}| / (sigma^9 sqrt(n) (x + sqrt(n))), constant A1.
[[nodiscard]] BoundEnvelope thm1_envelope(double beta3, double sigma, double absStau, double x, double n);

/// beta3 / sqrt(n), constant A. For sigma != 1 pass the Lyapunov ratio.
[[nodiscard]] BoundEnvelope ales_envelope(double beta3, double n);

/// (beta3^3 / (sigma^9 sqrt n), x^2 / (sigma^2 n)) for the A2 and A3 terms; requires x <= sqrt(n).
[[nodiscard]] std::pair<BoundEnvelope, BoundEnvelope> corollary_envelopes(double beta3, double sigma, double x, double n);

/// beta3^2 E|S_{tau_x}| / (sigma^6 sqrt(n) (x + sqrt(n))) (1 + R beta3 / sqrt(n)), constant C.
/// R = 1/V for span-1 lattices, the squared density sup for continuous laws.
[[nodiscard]] BoundEnvelope improved_envelope(double beta3, double sigma, double absStau, double x, double n, double R);

}  // namespace fpwalk
