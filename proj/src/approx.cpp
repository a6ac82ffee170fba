#include "fpwalk/approx.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fpwalk {

namespace {

void check_scale(double n, double sigma) {
  if (!(n > 0.0)) throw std::invalid_argument("n must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
}

BoundEnvelope envelope(EnvelopeKind kind, double value, const char* symbol) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw std::invalid_argument("envelope value must be finite and nonnegative");
  return {kind, value, symbol};
}

}  // namespace

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double reflection_term(double x, double y, double n, double sigma) {
  check_scale(n, sigma);
  if (x < 0.0) throw std::invalid_argument("x must be nonnegative");
  const double s = sigma * std::sqrt(n);
  // Difference of upper tails: accurate when both arguments are large.
  return 0.5 * std::erfc((y - x) / (s * std::numbers::sqrt2)) - 0.5 * std::erfc((y + x) / (s * std::numbers::sqrt2));
}

double rayleigh_tail(double y, double n, double sigma) {
  check_scale(n, sigma);
  return std::exp(-y * y / (2.0 * sigma * sigma * n));
}

double correction_term(double y, double n, double sigma, double overshoot_mean) {
  check_scale(n, sigma);
  if (overshoot_mean < 0.0) throw std::invalid_argument("overshoot mean must be nonnegative");
  return 2.0 * overshoot_mean * rayleigh_tail(y, n, sigma) / std::sqrt(2.0 * std::numbers::pi * sigma * sigma * n);
}

ApproxTerms corrected_tail(double x, double y, double n, double sigma, double overshoot_mean) {
  ApproxTerms t;
  t.reflection = reflection_term(x, y, n, sigma);
  t.correction = correction_term(y, n, sigma, overshoot_mean);
  t.total = t.reflection + t.correction;
  t.rayleigh = rayleigh_tail(y, n, sigma);
  return t;
}

std::string to_string(EnvelopeKind kind) {
  switch (kind) {
    case EnvelopeKind::thm1: return "thm1";
    case EnvelopeKind::ales: return "ales";
    case EnvelopeKind::corollary2: return "corollary2";
    case EnvelopeKind::corollary3: return "corollary3";
    case EnvelopeKind::improved: return "improved";
  }
  return "unknown";
}

BoundEnvelope thm1_envelope(double beta3, double sigma, double absStau, double x, double n) {
  check_scale(n, sigma);
  const double rn = std::sqrt(n);
  return envelope(EnvelopeKind::thm1, std::pow(beta3, 3) * absStau / (std::pow(sigma, 9) * rn * (x + rn)), "A1");
}

BoundEnvelope ales_envelope(double beta3, double n) {
  check_scale(n, 1.0);
  return envelope(EnvelopeKind::ales, beta3 / std::sqrt(n), "A");
}

std::pair<BoundEnvelope, BoundEnvelope> corollary_envelopes(double beta3, double sigma, double x, double n) {
  check_scale(n, sigma);
  if (x > std::sqrt(n)) throw std::invalid_argument("corollary envelopes need x <= sqrt(n)");
  return {envelope(EnvelopeKind::corollary2, std::pow(beta3, 3) / (std::pow(sigma, 9) * std::sqrt(n)), "A2"),
          envelope(EnvelopeKind::corollary3, x * x / (sigma * sigma * n), "A3")};
}

BoundEnvelope improved_envelope(double beta3, double sigma, double absStau, double x, double n, double R) {
  check_scale(n, sigma);
  if (R < 0.0) throw std::invalid_argument("R must be nonnegative");
  const double rn = std::sqrt(n);
  const double base = beta3 * beta3 * absStau / (std::pow(sigma, 6) * rn * (x + rn));
  return envelope(EnvelopeKind::improved, base * (1.0 + R * beta3 / rn), "C");
}

}  // namespace fpwalk
