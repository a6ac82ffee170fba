#include "fpwalk/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fpwalk {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform on [0, 1) from the top 53 bits; independent of the library's distributions.
double uniform01(std::mt19937_64& rng) noexcept { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class Sampler {
public:
  explicit Sampler(const IncrementModel& dist) : dist_(dist) {
    if (const auto* lat = std::get_if<LatticeIncrement>(&dist)) {
      double c = 0.0;
      for (double p : lat->probs()) cdf_.push_back(c += p);
      cdf_.back() = 1.0;
      values_.assign(lat->offsets().begin(), lat->offsets().end());
    }
  }

  double operator()(std::mt19937_64& rng) const {
    if (!values_.empty()) {
      const double u = uniform01(rng);
      const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      return values_[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1))];
    }
    const auto& c = std::get<ContinuousIncrement>(dist_);
    switch (c.family()) {
      case ContinuousFamily::gaussian: {
        std::normal_distribution<double> g(0.0, c.scale());
        return g(rng);
      }
      case ContinuousFamily::laplace: {
        const double u = uniform01(rng) + 0x1.0p-54 - 0.5;  // open interval, no log(0)
        return -c.scale() * std::copysign(std::log1p(-2.0 * std::abs(u)), u);
      }
      case ContinuousFamily::uniform_symmetric:
        return c.scale() * (2.0 * uniform01(rng) - 1.0);
    }
    return 0.0;
  }

private:
  const IncrementModel& dist_;
  std::vector<double> cdf_;
  std::vector<double> values_;
};

// Sufficient statistics of one batch.
struct BatchStats {
  double hits = 0.0;      // tail: indicator sum; stopping: number stopped
  double sum = 0.0;       // stopping: overshoot sum over stopped paths
  double survived = 0.0;  // stopping: paths alive at the horizon
};

std::vector<BatchStats> run_batches(const McConfig& cfg, const std::function<BatchStats(std::mt19937_64&)>& batch) {
  cfg.validate();
  const auto B = static_cast<std::size_t>(cfg.batches);
  std::vector<BatchStats> out(B);
  unsigned workers = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, B));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t b = next++; b < B; b = next++) {
      std::mt19937_64 rng(batch_seed(cfg.seed, b));
      out[b] = batch(rng);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return out;
}

double batch_stderr(const std::vector<double>& z) {
  const auto B = static_cast<double>(z.size());
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= B;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (B - 1.0) / B);
}

void normal_interval(McEstimate& e) {
  e.lo = e.mean - kZ95 * e.stderr_;
  e.hi = e.mean + kZ95 * e.stderr_;
}

// Wilson score interval for a proportion.
void wilson_interval(McEstimate& e) {
  const auto n = static_cast<double>(e.n_paths);
  const double z2 = kZ95 * kZ95;
  const double centre = (e.mean + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = kZ95 * std::sqrt(e.mean * (1.0 - e.mean) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  e.lo = std::max(0.0, std::min(e.mean, centre - half));
  e.hi = std::min(1.0, std::max(e.mean, centre + half));
}

McEstimate proportion(const std::vector<double>& counts, std::int64_t per_batch) {
  McEstimate e;
  std::vector<double> z;
  z.reserve(counts.size());
  double total = 0.0;
  for (double c : counts) {
    total += c;
    z.push_back(c / static_cast<double>(per_batch));
  }
  e.n_paths = per_batch * static_cast<std::int64_t>(counts.size());
  e.mean = total / static_cast<double>(e.n_paths);
  e.stderr_ = batch_stderr(z);
  const double expected_min = std::min(total, static_cast<double>(e.n_paths) - total);
  if (expected_min < 10.0)
    wilson_interval(e);
  else
    normal_interval(e);
  return e;
}

void check_start(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("start point x must be finite and nonnegative");
}

}  // namespace

void McConfig::validate() const {
  if (batches < 2) throw std::invalid_argument("Monte Carlo needs at least 2 batches");
  if (paths_per_batch < 1) throw std::invalid_argument("Monte Carlo needs at least 1 path per batch");
  if (horizon < 1) throw std::invalid_argument("Monte Carlo horizon must be positive");
}

std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t batch) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(batch + 0x632be59bd9b4e019ULL));
}

McEstimate mc_tail(const IncrementModel& dist, double x, double y, std::int64_t n, const McConfig& cfg) {
  check_start(x);
  if (n < 0) throw std::invalid_argument("n must be nonnegative");
  const Sampler sample(dist);
  const auto stats = run_batches(cfg, [&](std::mt19937_64& rng) {
    BatchStats s;
    for (std::int64_t p = 0; p < cfg.paths_per_batch; ++p) {
      double pos = x;
      bool alive = true;
      for (std::int64_t k = 0; k < n; ++k) {
        pos += sample(rng);
        if (pos <= 0.0) {
          alive = false;
          break;
        }
      }
      if (alive && pos >= y) s.hits += 1.0;
    }
    return s;
  });
  std::vector<double> counts;
  counts.reserve(stats.size());
  for (const auto& s : stats) counts.push_back(s.hits);
  return proportion(counts, cfg.paths_per_batch);
}

McStopping mc_stopping(const IncrementModel& dist, double x, const McConfig& cfg) {
  check_start(x);
  const Sampler sample(dist);
  const auto stats = run_batches(cfg, [&](std::mt19937_64& rng) {
    BatchStats s;
    for (std::int64_t p = 0; p < cfg.paths_per_batch; ++p) {
      double pos = x;
      bool stopped = false;
      for (std::int64_t k = 0; k < cfg.horizon; ++k) {
        pos += sample(rng);
        if (pos <= 0.0) {
          stopped = true;
          break;
        }
      }
      if (stopped) {
        s.hits += 1.0;
        s.sum += -pos;
      } else {
        s.survived += 1.0;
      }
    }
    return s;
  });

  McStopping out;
  std::vector<double> alive;
  alive.reserve(stats.size());
  double stopped = 0.0;
  double sum = 0.0;
  for (const auto& s : stats) {
    alive.push_back(s.survived);
    stopped += s.hits;
    sum += s.sum;
  }
  out.survival = proportion(alive, cfg.paths_per_batch);
  out.truncated_fraction = out.survival.mean;

  // Ratio estimator; the standard error linearises each batch around the pooled ratio.
  McEstimate& ov = out.overshoot;
  ov.n_paths = static_cast<std::int64_t>(stopped);
  if (stopped > 0.0) {
    ov.mean = sum / stopped;
    const double per = stopped / static_cast<double>(stats.size());
    std::vector<double> z;
    z.reserve(stats.size());
    for (const auto& s : stats) z.push_back((s.sum - ov.mean * s.hits) / per);
    ov.stderr_ = batch_stderr(z);
  }
  normal_interval(ov);
  return out;
}

}  // namespace fpwalk
