#include "fpwalk/increments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace fpwalk {

namespace {

double parse_probability(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    // Accept exact rationals such as "1/3".
    const auto s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      const double num = std::stod(s.substr(0, slash));
      const double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) throw std::invalid_argument("zero denominator");
      return num / den;
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse probability '" + s + "'");
    }
  }
  throw std::invalid_argument("probability must be a number or a \"p/q\" string");
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw std::invalid_argument("unknown key '" + key + "' in distribution spec");
  }
}

}  // namespace

LatticeIncrement::LatticeIncrement(std::vector<std::int64_t> offsets, std::vector<double> probs) {
  if (offsets.size() != probs.size())
    throw std::invalid_argument("offsets and probs must have the same length");
  if (offsets.size() < 2) throw std::invalid_argument("lattice increment needs at least two support points");

  std::vector<std::size_t> order(offsets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return offsets[a] < offsets[b]; });

  double total = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto k = offsets[order[i]];
    const double p = probs[order[i]];
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("probabilities must be finite and nonnegative");
    if (i > 0 && k == offsets[order[i - 1]]) throw std::invalid_argument("duplicate offset " + std::to_string(k));
    total += p;
    mean += static_cast<double>(k) * p;
    if (p > 0.0) {
      offsets_.push_back(k);
      probs_.push_back(p);
    }
  }
  if (std::abs(total - 1.0) > kMeanTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total << ", not 1";
    throw std::invalid_argument(os.str());
  }
  if (std::abs(mean) > kMeanTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "increment mean is " << mean << "; zero-mean distributions only (no re-centring)";
    throw std::invalid_argument(os.str());
  }
  if (offsets_.empty() || offsets_.front() >= 0 || offsets_.back() <= 0)
    throw std::invalid_argument("support must contain a negative and a positive offset");
}

double LatticeIncrement::prob(std::int64_t k) const noexcept {
  const auto it = std::lower_bound(offsets_.begin(), offsets_.end(), k);
  if (it == offsets_.end() || *it != k) return 0.0;
  return probs_[static_cast<std::size_t>(it - offsets_.begin())];
}

std::string LatticeIncrement::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << "lattice{";
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    if (i) os << ',';
    os << offsets_[i] << ':' << probs_[i];
  }
  os << '}';
  return os.str();
}

ContinuousIncrement::ContinuousIncrement(ContinuousFamily family, double scale)
    : family_(family), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("continuous increment scale must be positive");
}

double ContinuousIncrement::density_sup() const noexcept {
  switch (family_) {
    case ContinuousFamily::gaussian: return 1.0 / (scale_ * std::sqrt(2.0 * std::numbers::pi));
    case ContinuousFamily::laplace: return 1.0 / (2.0 * scale_);
    case ContinuousFamily::uniform_symmetric: return 1.0 / (2.0 * scale_);
  }
  return 0.0;
}

std::string ContinuousIncrement::describe() const {
  std::ostringstream os;
  switch (family_) {
    case ContinuousFamily::gaussian: os << "gaussian"; break;
    case ContinuousFamily::laplace: os << "laplace"; break;
    case ContinuousFamily::uniform_symmetric: os << "uniform-symmetric"; break;
  }
  os << "(scale=" << scale_ << ')';
  return os.str();
}

double MomentSummary::sigma() const { return std::sqrt(sigma2); }

MomentSummary moments(const LatticeIncrement& dist) {
  MomentSummary m;
  const auto ks = dist.offsets();
  const auto ps = dist.probs();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double k = static_cast<double>(ks[i]);
    m.mean += k * ps[i];
    m.sigma2 += k * k * ps[i];
    m.beta3 += std::abs(k) * k * k * ps[i];
  }
  m.lyapunov = m.beta3 / std::pow(m.sigma2, 1.5);
  return m;
}

MomentSummary moments(const ContinuousIncrement& dist) {
  const double s = dist.scale();
  MomentSummary m;
  switch (dist.family()) {
    case ContinuousFamily::gaussian:
      m.sigma2 = s * s;
      m.beta3 = 2.0 * std::sqrt(2.0 / std::numbers::pi) * s * s * s;
      break;
    case ContinuousFamily::laplace:
      m.sigma2 = 2.0 * s * s;
      m.beta3 = 6.0 * s * s * s;
      break;
    case ContinuousFamily::uniform_symmetric:
      m.sigma2 = s * s / 3.0;
      m.beta3 = s * s * s / 4.0;
      break;
  }
  m.lyapunov = m.beta3 / std::pow(m.sigma2, 1.5);
  return m;
}

MomentSummary moments(const IncrementModel& dist) {
  return std::visit([](const auto& d) { return moments(d); }, dist);
}

std::complex<double> charfn(const LatticeIncrement& dist, double t) {
  std::complex<double> acc{0.0, 0.0};
  const auto ks = dist.offsets();
  const auto ps = dist.probs();
  for (std::size_t i = 0; i < ks.size(); ++i) acc += ps[i] * std::polar(1.0, t * static_cast<double>(ks[i]));
  return acc;
}

double charfn_defect(const LatticeIncrement& dist, double t) {
  // 1 - |phi|^2 = sum_{j,k} p_j p_k (1 - cos(t (k_j - k_k))) = sum 2 p_j p_k sin^2(t d / 2)
  const auto ks = dist.offsets();
  const auto ps = dist.probs();
  double acc = 0.0;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    for (std::size_t k = j + 1; k < ks.size(); ++k) {
      const double s = std::sin(0.5 * t * static_cast<double>(ks[k] - ks[j]));
      acc += 4.0 * ps[j] * ps[k] * s * s;
    }
  }
  return acc;
}

std::int64_t span(const LatticeIncrement& dist) {
  const auto ks = dist.offsets();
  std::int64_t g = 0;
  for (std::size_t i = 1; i < ks.size(); ++i) g = std::gcd(g, ks[i] - ks[0]);
  return g;
}

Peakedness peakedness_V(const LatticeIncrement& dist, std::size_t grid_points) {
  if (const auto h = span(dist); h != 1)
    throw std::domain_error("peakedness V needs maximal span 1 (span is " + std::to_string(h) + ")");
  if (grid_points < 3) throw std::invalid_argument("peakedness grid needs at least 3 points");

  // Ratio log|phi(t)| / (1 - cos t); -inf where |phi| vanishes.
  auto ratio = [&](double t) {
    const double defect = charfn_defect(dist, t);
    if (defect >= 1.0 - 1e-300) return -std::numeric_limits<double>::infinity();
    const double s = std::sin(0.5 * t);
    return 0.5 * std::log1p(-defect) / (2.0 * s * s);
  };

  const double two_pi = 2.0 * std::numbers::pi;
  const double h = two_pi / static_cast<double>(grid_points + 1);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 1; i <= grid_points; ++i) {
    const double r = ratio(h * static_cast<double>(i));
    if (r > best) {
      best = r;
      best_i = i;
    }
  }

  Peakedness out;
  out.grid_points = grid_points;
  out.argsup = h * static_cast<double>(best_i);

  const double lo = h * static_cast<double>(best_i - 1);
  const double hi = h * static_cast<double>(best_i + 1);
  if (lo > 0.0 && hi < two_pi) {
    const auto [t, neg] = boost::math::tools::brent_find_minima([&](double t) { return -ratio(t); }, lo, hi, 52);
    if (-neg > best) {
      best = -neg;
      out.argsup = t;
    }
  }

  // Removable singularities at 0 and 2 pi: the ratio tends to -sigma^2.
  const double endpoint = -moments(dist).sigma2;
  if (endpoint >= best) {
    best = endpoint;
    out.argsup = 0.0;
    out.at_endpoint = true;
  }
  out.V = -best;
  return out;
}

IncrementModel parse_increment(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("distribution spec must be a JSON object");
  if (j.contains("family")) {
    reject_unknown_keys(j, {"family", "scale"});
    const auto name = j.at("family").get<std::string>();
    const double scale = j.value("scale", 1.0);
    if (name == "gaussian") return ContinuousIncrement(ContinuousFamily::gaussian, scale);
    if (name == "laplace") return ContinuousIncrement(ContinuousFamily::laplace, scale);
    if (name == "uniform-symmetric" || name == "uniform")
      return ContinuousIncrement(ContinuousFamily::uniform_symmetric, scale);
    throw std::invalid_argument("unknown continuous family '" + name + "'");
  }
  reject_unknown_keys(j, {"offsets", "probs"});
  if (!j.contains("offsets") || !j.contains("probs"))
    throw std::invalid_argument("lattice spec needs \"offsets\" and \"probs\"");
  auto offsets = j.at("offsets").get<std::vector<std::int64_t>>();
  std::vector<double> probs;
  for (const auto& p : j.at("probs")) probs.push_back(parse_probability(p));
  return LatticeIncrement(std::move(offsets), std::move(probs));
}

IncrementModel load_increment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open distribution file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_increment(j);
}

nlohmann::json to_json(const IncrementModel& dist) {
  if (const auto* l = std::get_if<LatticeIncrement>(&dist)) {
    return {{"offsets", std::vector<std::int64_t>(l->offsets().begin(), l->offsets().end())},
            {"probs", std::vector<double>(l->probs().begin(), l->probs().end())}};
  }
  const auto& c = std::get<ContinuousIncrement>(dist);
  std::string name = "gaussian";
  if (c.family() == ContinuousFamily::laplace) name = "laplace";
  if (c.family() == ContinuousFamily::uniform_symmetric) name = "uniform-symmetric";
  return {{"family", name}, {"scale", c.scale()}};
}

std::string describe(const IncrementModel& dist) {
  return std::visit([](const auto& d) { return d.describe(); }, dist);
}

namespace walks {
LatticeIncrement ssrw() { return LatticeIncrement({-1, 1}, {0.5, 0.5}); }
LatticeIncrement lazy() { return LatticeIncrement({-1, 0, 1}, {0.25, 0.5, 0.25}); }
LatticeIncrement skew_m1_0_2() { return LatticeIncrement({-1, 0, 2}, {1.0 / 3.0, 0.5, 1.0 / 6.0}); }
}  // namespace walks

}  // namespace fpwalk
