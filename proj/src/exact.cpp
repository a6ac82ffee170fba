#include "fpwalk/exact.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fpwalk {

namespace {

// Neumaier compensated accumulation.
void compensated_add(double& sum, double& comp, double v) noexcept {
  const double t = sum + v;
  if (std::abs(sum) >= std::abs(v))
    comp += (sum - t) + v;
  else
    comp += (v - t) + sum;
  sum = t;
}

void check_start(std::int64_t x, std::int64_t n) {
  if (x < 0) throw std::invalid_argument("start point x must be a nonnegative integer");
  if (n < 0) throw std::invalid_argument("horizon n must be nonnegative");
}

std::string mib(double bytes) {
  std::ostringstream os;
  os.precision(4);
  os << bytes / (1024.0 * 1024.0) << " MiB";
  return os.str();
}

}  // namespace

double pairwise_sum(std::span<const double> values) noexcept {
  constexpr std::size_t kBlock = 64;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

KilledWalk::KilledWalk(const LatticeIncrement& dist, std::int64_t x, std::int64_t max_steps,
                       std::size_t memory_budget)
    : dist_(dist), x_(x), max_steps_(max_steps), lo_(x), hi_(x) {
  check_start(x, max_steps);
  const auto cells = static_cast<double>(x) + static_cast<double>(max_steps) * static_cast<double>(dist.max_offset()) + 1.0;
  const double bytes = 2.0 * cells * sizeof(double);
  if (bytes > static_cast<double>(memory_budget)) {
    std::ostringstream os;
    os << "killed walk grid for x=" << x << ", n=" << max_steps << " needs " << static_cast<std::uint64_t>(cells)
       << " positions (" << mib(bytes) << "), over the budget of " << mib(static_cast<double>(memory_budget));
    throw BudgetExceeded(os.str());
  }
  cur_.assign(static_cast<std::size_t>(cells), 0.0);
  next_.assign(static_cast<std::size_t>(cells), 0.0);
  cur_[static_cast<std::size_t>(x)] = 1.0;
}

KillStep KilledWalk::step() {
  if (time_ >= max_steps_) throw std::out_of_range("killed walk advanced past its step budget");
  const auto ks = dist_.offsets();
  const auto ps = dist_.probs();
  const std::int64_t down = dist_.max_down();

  KillStep kill;
  for (std::int64_t w = lo_; w <= std::min(hi_, down); ++w) {
    const double m = cur_[static_cast<std::size_t>(w)];
    if (m == 0.0) continue;
    for (std::size_t i = 0; i < ks.size() && w + ks[i] <= 0; ++i) {
      const double q = m * ps[i];
      const auto depth = static_cast<double>(-(w + ks[i]));
      kill.mass += q;
      kill.m1 += q * depth;
      kill.m2 += q * depth * depth;
    }
  }

  const std::int64_t nlo = std::max<std::int64_t>(1, lo_ - down);
  const std::int64_t nhi = hi_ + dist_.max_offset();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const std::int64_t o = ks[i];
    const double q = ps[i];
    const std::int64_t from = std::max(nlo, lo_ + o);
    const std::int64_t to = std::min(nhi, hi_ + o);
    double* dst = next_.data();
    const double* src = cur_.data();
    for (std::int64_t p = from; p <= to; ++p) dst[p] += q * src[p - o];
  }
  std::fill(cur_.begin() + lo_, cur_.begin() + hi_ + 1, 0.0);
  std::swap(cur_, next_);
  lo_ = nlo;
  hi_ = nhi;
  ++time_;
  compensated_add(killed_, killed_c_, kill.mass);
  return kill;
}

double KilledWalk::at(std::int64_t w) const noexcept {
  if (w < lo_ || w > hi_) return 0.0;
  return cur_[static_cast<std::size_t>(w)];
}

std::span<const double> KilledWalk::row() const noexcept {
  return std::span<const double>(cur_).subspan(static_cast<std::size_t>(lo_), static_cast<std::size_t>(hi_ - lo_ + 1));
}

double KilledWalk::live_mass() const noexcept { return pairwise_sum(row()); }

double KilledWalk::tail(double y) const noexcept {
  const double first = std::max(static_cast<double>(lo_), std::ceil(y));
  if (first > static_cast<double>(hi_)) return 0.0;
  const auto from = static_cast<std::int64_t>(first);
  return pairwise_sum(row().subspan(static_cast<std::size_t>(from - lo_)));
}

double KilledWalk::live_first_moment() const noexcept {
  double s = 0.0;
  double c = 0.0;
  for (std::int64_t w = lo_; w <= hi_; ++w) compensated_add(s, c, static_cast<double>(w) * cur_[static_cast<std::size_t>(w)]);
  return s + c;
}

double SurvivalTable::at(std::int64_t k, std::int64_t w) const {
  const auto& r = rows_.at(static_cast<std::size_t>(k));
  const std::int64_t i = w - r.lo;
  if (i < 0 || i >= static_cast<std::int64_t>(r.mass.size())) return 0.0;
  return r.mass[static_cast<std::size_t>(i)];
}

SurvivalTable survival_evolve(const LatticeIncrement& dist, std::int64_t x, std::int64_t n, std::size_t memory_budget) {
  check_start(x, n);
  const double cells = (static_cast<double>(n) + 1.0) *
                       (static_cast<double>(x) + static_cast<double>(n) * static_cast<double>(dist.max_offset()) + 1.0);
  const double bytes = cells * sizeof(double);
  if (bytes > static_cast<double>(memory_budget)) {
    std::ostringstream os;
    os << "survival table for x=" << x << ", n=" << n << " needs up to " << static_cast<std::uint64_t>(cells)
       << " cells (" << mib(bytes) << "), over the budget of " << mib(static_cast<double>(memory_budget));
    throw BudgetExceeded(os.str());
  }

  SurvivalTable table;
  table.x_ = x;
  KilledWalk walk(dist, x, n, memory_budget);
  auto snapshot = [&] {
    const auto r = walk.row();
    table.rows_.push_back({walk.lo(), std::vector<double>(r.begin(), r.end())});
    table.live_.push_back(walk.live_mass());
    table.killed_.push_back(walk.killed_mass());
  };
  snapshot();
  for (std::int64_t k = 1; k <= n; ++k) {
    walk.step();
    snapshot();
  }
  return table;
}

double survival_prob(const LatticeIncrement& dist, std::int64_t x, std::int64_t n) {
  KilledWalk walk(dist, x, n);
  for (std::int64_t k = 0; k < n; ++k) walk.step();
  return walk.live_mass();
}

double tail_prob(const LatticeIncrement& dist, std::int64_t x, double y, std::int64_t n) {
  KilledWalk walk(dist, x, n);
  for (std::int64_t k = 0; k < n; ++k) walk.step();
  return walk.tail(y);
}

StoppingProfile stopping_profile(const LatticeIncrement& dist, std::int64_t x, std::int64_t n) {
  StoppingProfile prof;
  prof.x = x;
  prof.n = n;
  prof.pk.assign(static_cast<std::size_t>(n + 1), 0.0);
  prof.m1k.assign(static_cast<std::size_t>(n + 1), 0.0);
  prof.m2k.assign(static_cast<std::size_t>(n + 1), 0.0);
  KilledWalk walk(dist, x, n);
  for (std::int64_t k = 1; k <= n; ++k) {
    const auto kill = walk.step();
    prof.pk[static_cast<std::size_t>(k)] = kill.mass;
    prof.m1k[static_cast<std::size_t>(k)] = kill.m1;
    prof.m2k[static_cast<std::size_t>(k)] = kill.m2;
  }
  prof.total_p = pairwise_sum(prof.pk);
  prof.total_m1 = pairwise_sum(prof.m1k);
  prof.total_m2 = pairwise_sum(prof.m2k);
  prof.residual = walk.live_mass();
  return prof;
}

double expected_min_tau(const StoppingProfile& profile) {
  double s = 0.0;
  double c = 0.0;
  for (std::size_t k = 1; k < profile.pk.size(); ++k) compensated_add(s, c, static_cast<double>(k) * profile.pk[k]);
  return s + c + static_cast<double>(profile.n) * profile.residual;
}

double expected_min_tau(const LatticeIncrement& dist, std::int64_t x, std::int64_t n) {
  return expected_min_tau(stopping_profile(dist, x, n));
}

double FreePmf::at(std::int64_t s) const noexcept {
  const std::int64_t i = s - min_position;
  if (i < 0 || i >= static_cast<std::int64_t>(mass.size())) return 0.0;
  return mass[static_cast<std::size_t>(i)];
}

FreeWalk::FreeWalk(const LatticeIncrement& dist) : dist_(dist) { pmf_.mass = {1.0}; }

void FreeWalk::step() {
  const auto ks = dist_.offsets();
  const auto ps = dist_.probs();
  const std::int64_t width = ks.back() - ks.front();
  const std::size_t old_size = pmf_.mass.size();
  scratch_.assign(old_size + static_cast<std::size_t>(width), 0.0);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto shift = static_cast<std::size_t>(ks[i] - ks.front());
    const double q = ps[i];
    double* dst = scratch_.data() + shift;
    for (std::size_t j = 0; j < old_size; ++j) dst[j] += q * pmf_.mass[j];
  }
  std::swap(pmf_.mass, scratch_);
  pmf_.min_position += ks.front();
  ++time_;
}

FreePmf free_pmf(const LatticeIncrement& dist, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("horizon n must be nonnegative");
  FreeWalk walk(dist);
  for (std::int64_t k = 0; k < n; ++k) walk.step();
  return walk.pmf();
}

}  // namespace fpwalk
