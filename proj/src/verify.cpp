#include "fpwalk/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fpwalk/approx.hpp"

namespace fpwalk {

namespace {

// Run fn(i) for i in [0, count) on up to `workers` threads. Each index writes
// only its own slot, so the result does not depend on the schedule.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
}

double snap_integer(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-12 ? r : v;
}

// Prefix sums over a row: P(index < i).
std::vector<double> prefix(const FreePmf& row) {
  std::vector<double> c(row.mass.size() + 1, 0.0);
  for (std::size_t i = 0; i < row.mass.size(); ++i) c[i + 1] = c[i] + row.mass[i];
  return c;
}

// Mass of the integers in [from, to] under a row with the given prefix sums.
double range_mass(const FreePmf& row, const std::vector<double>& c, std::int64_t from, std::int64_t to) {
  from = std::max(from, row.min_position);
  to = std::min(to, row.max_position());
  if (from > to) return 0.0;
  return c[static_cast<std::size_t>(to - row.min_position + 1)] - c[static_cast<std::size_t>(from - row.min_position)];
}

// Largest mass of `width` consecutive integers; returns (mass, first integer).
std::pair<double, std::int64_t> max_window(const FreePmf& row, const std::vector<double>& c, std::int64_t width) {
  double best = 0.0;
  std::int64_t at = row.min_position;
  for (std::int64_t s = row.min_position - width + 1; s <= row.max_position(); ++s) {
    const double m = range_mass(row, c, s, s + width - 1);
    if (m > best) {
      best = m;
      at = s;
    }
  }
  return {best, at};
}

double gamma1(double lambda, double z) { return std::numbers::sqrt2 * lambda + z / std::sqrt(std::numbers::pi); }

std::string grid_text(const Workbench& wb, const char* what) {
  std::ostringstream os;
  os << what << "; n in [" << wb.grid().n.front() << ", " << wb.grid().n.back() << "]";
  return os.str();
}

BoundReport make_report(const Workbench& wb, std::string id, std::optional<double> constant, const char* grid) {
  BoundReport r;
  r.bound_id = std::move(id);
  r.dist = wb.name();
  r.grid = grid_text(wb, grid);
  r.constant = constant;
  return r;
}

BoundRow row_of(std::int64_t x, double y, double z, std::int64_t n, double lhs, double rhs) {
  return {x, y, z, n, lhs, rhs, rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0)};
}

bool on_grid(const Workbench& wb, std::int64_t n) {
  const auto& g = wb.grid().n;
  return std::find(g.begin(), g.end(), n) != g.end();
}

}  // namespace

// --- grid and report plumbing ---------------------------------------------

std::vector<std::int64_t> VerifyGrid::x_values(std::int64_t n) const {
  std::set<std::int64_t> xs(x.begin(), x.end());
  if (scaled_x) {
    xs.insert(static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(n), 0.25) + 1e-12)));
    xs.insert(static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(n)) + 1e-12)));
  }
  return {xs.begin(), xs.end()};
}

std::int64_t VerifyGrid::n_max() const {
  std::int64_t m = 0;
  for (auto v : n) m = std::max(m, v);
  return m;
}

void BoundReport::add(const BoundRow& row, bool keep) {
  if (evaluated++ == 0 || row.ratio > max_ratio) {
    max_ratio = row.ratio;
    argmax = row;
  }
  if (keep) rows.push_back(row);
}

void BoundReport::finish() {
  estimated_constant = max_ratio;
  holds = !constant || max_ratio <= *constant * (1.0 + 1e-12);
}

RateFit fit_rate(const std::vector<std::int64_t>& n, const std::vector<double>& err) {
  if (n.size() != err.size()) throw std::invalid_argument("rate fit needs matching n and error vectors");
  std::vector<double> lx;
  std::vector<double> ly;
  RateFit fit;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(err[i] > 0.0)) continue;
    lx.push_back(std::log(static_cast<double>(n[i])));
    ly.push_back(std::log(err[i]));
    fit.n_min = fit.points == 0 ? n[i] : std::min(fit.n_min, n[i]);
    fit.n_max = std::max(fit.n_max, n[i]);
    ++fit.points;
  }
  if (fit.points < 2) throw std::invalid_argument("rate fit needs at least two positive errors");
  const auto k = static_cast<double>(fit.points);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

// --- workbench ---------------------------------------------------------------

Workbench::Workbench(LatticeIncrement dist, VerifyGrid grid)
    : dist_(std::move(dist)), grid_(std::move(grid)), name_(dist_.describe()), m_(fpwalk::moments(dist_)),
      sigma_(snap_integer(std::sqrt(m_.sigma2))), law_(ladder_law(dist_)) {
  if (grid_.n.empty()) throw std::invalid_argument("verify grid needs at least one horizon");
  for (auto v : grid_.n)
    if (v < 1) throw std::invalid_argument("verify horizons must be positive");
  std::sort(grid_.n.begin(), grid_.n.end());
  std::sort(grid_.be_n.begin(), grid_.be_n.end());

  std::set<std::int64_t> xs;
  for (auto n : grid_.n)
    for (auto x : grid_.x_values(n)) xs.insert(x);
  starts_.assign(xs.begin(), xs.end());

  std::set<std::int64_t> ladder_points(xs);
  ladder_points.insert(grid_.u.begin(), grid_.u.end());
  for (auto x : ladder_points) stats_.emplace(x, ladder_stats(law_, x));

  const std::int64_t n_max = grid_.n_max();
  std::vector<WalkRecord> records(starts_.size());
  parallel_for(starts_.size(), grid_.workers, [&](std::size_t i) {
    WalkRecord& rec = records[i];
    rec.x = starts_[i];
    const auto N = static_cast<std::size_t>(n_max + 1);
    rec.live.assign(N, 0.0);
    rec.pk.assign(N, 0.0);
    rec.m1k.assign(N, 0.0);
    rec.m2k.assign(N, 0.0);
    KilledWalk walk(dist_, rec.x, n_max);
    rec.live[0] = 1.0;
    for (std::int64_t k = 1; k <= n_max; ++k) {
      const auto kill = walk.step();
      const auto j = static_cast<std::size_t>(k);
      rec.pk[j] = kill.mass;
      rec.m1k[j] = kill.m1;
      rec.m2k[j] = kill.m2;
      rec.live[j] = walk.live_mass();
      if (std::binary_search(grid_.n.begin(), grid_.n.end(), k)) {
        const auto r = walk.row();
        rec.rows.emplace(k, FreePmf{walk.lo(), std::vector<double>(r.begin(), r.end())});
      }
    }
  });
  for (auto& rec : records) walks_.emplace(rec.x, std::move(rec));

  std::set<std::int64_t> free_points(grid_.n.begin(), grid_.n.end());
  free_points.insert(grid_.be_n.begin(), grid_.be_n.end());
  FreeWalk fw(dist_);
  for (auto n : free_points) {
    while (fw.time() < n) fw.step();
    free_.emplace(n, fw.pmf());
  }
}

const WalkRecord& Workbench::walk(std::int64_t x) const {
  const auto it = walks_.find(x);
  if (it == walks_.end()) throw std::out_of_range("start " + std::to_string(x) + " is not on the verify grid");
  return it->second;
}

const FreePmf& Workbench::free(std::int64_t n) const {
  const auto it = free_.find(n);
  if (it == free_.end()) throw std::out_of_range("horizon " + std::to_string(n) + " is not on the verify grid");
  return it->second;
}

const LadderStats& Workbench::stats(std::int64_t x) const {
  const auto it = stats_.find(x);
  if (it == stats_.end()) throw std::out_of_range("start " + std::to_string(x) + " has no ladder statistics");
  return it->second;
}

// --- bounds with explicit constants ------------------------------------------

BoundReport check_classical_be(const Workbench& wb) {
  auto rep = make_report(wb, "classical_be", kGamma0, "free walk, sup over atoms");
  const double s = wb.sigma();
  for (auto n : wb.grid().be_n) {
    const auto& pmf = wb.free(n);
    const double scale = s * std::sqrt(static_cast<double>(n));
    double below = 0.0;
    double gap = 0.0;
    double at = 0.0;
    for (std::size_t i = 0; i < pmf.mass.size(); ++i) {
      if (pmf.mass[i] == 0.0) continue;
      const double z = static_cast<double>(pmf.min_position + static_cast<std::int64_t>(i)) / scale;
      const double phi = normal_cdf(z);
      const double upto = below + pmf.mass[i];
      const double g = std::max(std::abs(below - phi), std::abs(upto - phi));
      if (g > gap) {
        gap = g;
        at = z;
      }
      below = upto;
    }
    rep.add(row_of(0, at, 0.0, n, gap, wb.lambda() / std::sqrt(static_cast<double>(n))));
  }
  rep.finish();
  return rep;
}

BoundReport check_concentration(const Workbench& wb) {
  auto rep = make_report(wb, "concentration", 1.0, "free walk, closed windows of length z");
  const double s = wb.sigma();
  for (auto n : wb.grid().n) {
    const auto& pmf = wb.free(n);
    const auto c = prefix(pmf);
    for (double z : wb.grid().z) {
      const auto width = static_cast<std::int64_t>(std::floor(s * z + 1e-12)) + 1;
      const auto [mass, at] = max_window(pmf, c, width);
      rep.add(row_of(0, static_cast<double>(at) / s, z, n, mass, gamma1(wb.lambda(), z) / std::sqrt(2.0 * static_cast<double>(n))));
    }
  }
  rep.finish();
  return rep;
}

BoundReport check_concentration_killed(const Workbench& wb) {
  auto rep = make_report(wb, "concentration_killed", 1.0, "killed walk, closed windows of length z");
  const double s = wb.sigma();
  for (auto n : wb.grid().n) {
    for (auto x : wb.grid().x_values(n)) {
      const auto& rec = wb.walk(x);
      const auto& row = rec.rows.at(n);
      const auto c = prefix(row);
      const double half = rec.live[static_cast<std::size_t>(n / 2)];
      for (double z : wb.grid().z) {
        const auto width = static_cast<std::int64_t>(std::floor(s * z + 1e-12)) + 1;
        const auto [mass, at] = max_window(row, c, width);
        rep.add(row_of(x, static_cast<double>(at) / s, z, n, mass, gamma1(wb.lambda(), z) / std::sqrt(static_cast<double>(n)) * half));
      }
    }
  }
  rep.finish();
  return rep;
}

BoundReport check_tau_tail(const Workbench& wb) {
  auto rep = make_report(wb, "tau_tail", 6.0, "n >= 8 lambda^2");
  const double s = wb.sigma();
  const double lam = wb.lambda();
  for (auto n : wb.grid().n) {
    if (static_cast<double>(n) < 8.0 * lam * lam) continue;
    for (auto x : wb.grid().x_values(n)) {
      const double E = wb.stats(x).absStau / s;
      const double rhs = E / (static_cast<double>(x) / s + std::sqrt(static_cast<double>(n)));
      rep.add(row_of(x, 0.0, 0.0, n, wb.walk(x).live[static_cast<std::size_t>(n)], rhs));
    }
  }
  rep.finish();
  return rep;
}

BoundReport check_mogulskii(const Workbench& wb) {
  auto rep = make_report(wb, "mogulskii", 3.0, "overshoot mean over u");
  const double rhs = wb.moments().beta3 / wb.moments().sigma2;
  const auto a = static_cast<double>(wb.dist().max_down());
  for (auto u : wb.grid().u) {
    const auto& st = wb.stats(u);
    // Unaccounted mass could carry at most the largest overshoot.
    rep.add(row_of(u, 0.0, 0.0, 0, st.overshoot1 + st.residual * a, rhs));
  }
  rep.finish();
  return rep;
}

BoundReport check_concrete_local(const Workbench& wb) {
  auto rep = make_report(wb, "concrete_local", 288.0, "n >= 32 lambda^2 + 4, windows [y, y + 1), sup over real y >= 0");
  const double s = wb.sigma();
  const double lam = wb.lambda();
  const double g1 = gamma1(lam, 1.0);
  for (auto n : wb.grid().n) {
    if (static_cast<double>(n) < 32.0 * lam * lam + 4.0) continue;
    const double rn = std::sqrt(static_cast<double>(n));
    for (auto x : wb.grid().x_values(n)) {
      const auto& row = wb.walk(x).rows.at(n);
      const auto c = prefix(row);
      const double E = wb.stats(x).absStau / s;
      const double denom = static_cast<double>(n) * (static_cast<double>(x) / s + rn);
      // The window content changes only when an end crosses an integer, and the
      // right-hand side grows with y, so the sup sits at a left end b where
      // either b or b + sigma is an integer (taken as a limit from the right).
      BoundRow best;
      bool have = false;
      auto consider = [&](double b, double mass) {
        if (b < 0.0) return;
        const BoundRow r = row_of(x, b / s, 1.0, n, mass, g1 * E * (b / s + 4.0 * lam) / denom);
        if (!have || r.ratio > best.ratio) {
          best = r;
          have = true;
        }
      };
      for (std::int64_t m = std::max<std::int64_t>(0, row.min_position); m <= row.max_position() + 1; ++m) {
        const auto md = static_cast<double>(m);
        // Left end at m: windows [m, m + s) and (m, m + s].
        consider(md, std::max(range_mass(row, c, m, static_cast<std::int64_t>(std::ceil(md + s)) - 1),
                              range_mass(row, c, m + 1, static_cast<std::int64_t>(std::floor(md + s)))));
        // Right end at m: windows [m - s, m) and (m - s, m].
        consider(md - s, std::max(range_mass(row, c, static_cast<std::int64_t>(std::ceil(md - s)), m - 1),
                                  range_mass(row, c, static_cast<std::int64_t>(std::floor(md - s)) + 1, m)));
      }
      consider(0.0, std::max(range_mass(row, c, 0, static_cast<std::int64_t>(std::ceil(s)) - 1),
                             range_mass(row, c, 1, static_cast<std::int64_t>(std::floor(s)))));
      if (have) rep.add(best);
    }
  }
  rep.finish();
  return rep;
}

BoundReport check_truncated_overshoot(const Workbench& wb) {
  auto rep = make_report(wb, "truncated_overshoot", 8.0, "all x, n");
  const double s = wb.sigma();
  for (auto n : wb.grid().n) {
    const double rn = std::sqrt(static_cast<double>(n));
    for (auto x : wb.grid().x_values(n)) {
      const auto& rec = wb.walk(x);
      double m1 = 0.0;
      for (std::int64_t k = 1; k <= n; ++k) m1 += rec.m1k[static_cast<std::size_t>(k)];
      const double E = wb.stats(x).absStau / s;
      rep.add(row_of(x, 0.0, 0.0, n, m1 / s, rn * E / (static_cast<double>(x) / s + rn)));
    }
  }
  rep.finish();
  return rep;
}

std::optional<BoundReport> check_local_clt_lattice(const Workbench& wb) {
  if (wb.sigma() != 1.0 || span(wb.dist()) != 1) return std::nullopt;
  const double V = peakedness_V(wb.dist()).V;
  auto rep = make_report(wb, "local_clt_lattice", 76.0 / std::numbers::pi + 24.0 / (std::numbers::pi * V),
                         "free walk, sup over integers");
  const double beta3 = wb.moments().beta3;
  for (auto n : wb.grid().be_n) {
    const auto& pmf = wb.free(n);
    const auto nd = static_cast<double>(n);
    const double rn = std::sqrt(nd);
    double gap = 0.0;
    std::int64_t at = 0;
    for (std::int64_t x = pmf.min_position - 1; x <= pmf.max_position() + 1; ++x) {
      const auto xd = static_cast<double>(x);
      const double g = std::abs(rn * pmf.at(x) - std::exp(-xd * xd / (2.0 * nd)) / std::sqrt(2.0 * std::numbers::pi));
      if (g > gap) {
        gap = g;
        at = x;
      }
    }
    rep.add(row_of(0, static_cast<double>(at), 0.0, n, gap, beta3 / rn));
  }
  rep.finish();
  return rep;
}

std::vector<BoundReport> check_explicit_bounds(const Workbench& wb) {
  std::vector<BoundReport> out;
  out.push_back(check_classical_be(wb));
  out.push_back(check_concentration(wb));
  out.push_back(check_concentration_killed(wb));
  out.push_back(check_tau_tail(wb));
  out.push_back(check_mogulskii(wb));
  out.push_back(check_concrete_local(wb));
  out.push_back(check_truncated_overshoot(wb));
  if (auto lclt = check_local_clt_lattice(wb)) out.push_back(std::move(*lclt));
  return out;
}

// --- constants the bounds leave unspecified ------------------------------------

std::vector<BoundReport> estimate_constants(const Workbench& wb) {
  const double s = wb.sigma();
  const double lam = wb.lambda();
  const double lam2 = lam * lam;
  const std::int64_t n_max = wb.grid().n_max();
  std::vector<BoundReport> out;

  {
    auto rep = make_report(wb, "second_moment", std::nullopt, "overshoot second moment over u");
    for (auto u : wb.grid().u) {
      const auto& st = wb.stats(u);
      rep.add(row_of(u, 0.0, 0.0, 0, st.overshoot2 / (s * s), st.absStau / s * lam2));
    }
    rep.finish();
    out.push_back(std::move(rep));
  }

  {
    const auto k0 = static_cast<std::int64_t>(std::ceil(32.0 * lam2 + 5.0));
    auto p = make_report(wb, "stopping_prob", std::nullopt, "k >= 32 lambda^2 + 5");
    auto m1 = make_report(wb, "stopping_overshoot", std::nullopt, "k >= 32 lambda^2 + 5");
    auto g = make_report(wb, "stopping_gamma1", std::nullopt, "k >= 32 lambda^2 + 5");
    auto m2 = make_report(wb, "stopping_overshoot_sq", std::nullopt, "k >= 32 lambda^2 + 5");
    for (auto x : wb.starts()) {
      const auto& rec = wb.walk(x);
      const double E = wb.stats(x).absStau / s;
      const double xs = static_cast<double>(x) / s;
      for (std::int64_t k = k0; k <= n_max; ++k) {
        const auto j = static_cast<std::size_t>(k);
        const auto kd = static_cast<double>(k);
        const double base = E / (kd * (xs + std::sqrt(kd)));
        const bool keep = on_grid(wb, k);
        p.add(row_of(x, 0.0, 0.0, k, rec.pk[j], base * lam2), keep);
        m1.add(row_of(x, 0.0, 0.0, k, rec.m1k[j] / s, base * lam2), keep);
        g.add(row_of(x, 0.0, 0.0, k, std::numbers::sqrt2 * lam * rec.pk[j] + rec.m1k[j] / s / std::sqrt(std::numbers::pi),
                     base * lam2 * lam),
              keep);
        m2.add(row_of(x, 0.0, 0.0, k, rec.m2k[j] / (s * s), E / (std::sqrt(kd) * (xs + std::sqrt(kd))) * lam2), keep);
      }
    }
    for (auto* r : {&p, &m1, &g, &m2}) {
      r->finish();
      out.push_back(std::move(*r));
    }
  }

  {
    auto te = make_report(wb, "truncated_tau_mean", std::nullopt, "n >= 8 lambda^2");
    auto w = make_report(wb, "weighted_overshoot", std::nullopt, "n >= 32 lambda^2 + 5");
    auto sq = make_report(wb, "truncated_overshoot_sq", std::nullopt, "n >= 32 lambda^2 + 5");
    for (auto n : wb.grid().n) {
      const auto nd = static_cast<double>(n);
      const double rn = std::sqrt(nd);
      for (auto x : wb.grid().x_values(n)) {
        const auto& rec = wb.walk(x);
        const double E = wb.stats(x).absStau / s;
        const double xs = static_cast<double>(x) / s;
        double tau_mean = nd * rec.live[static_cast<std::size_t>(n)];
        double weighted = 0.0;
        double second = 0.0;
        for (std::int64_t k = 1; k <= n; ++k) {
          const auto j = static_cast<std::size_t>(k);
          tau_mean += static_cast<double>(k) * rec.pk[j];
          weighted += static_cast<double>(k) * rec.m1k[j] / s;
          second += rec.m2k[j] / (s * s);
        }
        if (nd >= 8.0 * lam2) te.add(row_of(x, 0.0, 0.0, n, tau_mean, lam * nd * E / (xs + rn)));
        if (nd >= 32.0 * lam2 + 5.0) {
          w.add(row_of(x, 0.0, 0.0, n, weighted, lam2 * nd * E / (xs + rn)));
          sq.add(row_of(x, 0.0, 0.0, n, second, lam2 * rn * E / (xs + rn)));
        }
      }
    }
    for (auto* r : {&te, &w, &sq}) {
      r->finish();
      out.push_back(std::move(*r));
    }
  }

  {
    auto rep = make_report(wb, "third_moment", std::nullopt, "free walk E|S_n / sigma|^3");
    for (auto n : wb.grid().be_n) {
      const auto& pmf = wb.free(n);
      double m3 = 0.0;
      for (std::size_t i = 0; i < pmf.mass.size(); ++i)
        m3 += pmf.mass[i] * std::pow(std::abs(static_cast<double>(pmf.min_position + static_cast<std::int64_t>(i))) / s, 3);
      const auto nd = static_cast<double>(n);
      rep.add(row_of(0, 0.0, 0.0, n, m3, lam * nd + std::pow(nd, 1.5)));
    }
    rep.finish();
    out.push_back(std::move(rep));
  }

  {
    // H(x) <= 2 E|S_{tau_0}| (x + c2 beta3): ratio is (H / (2 E') - x') / lambda.
    auto rep = make_report(wb, "renewal_c2", std::nullopt, "renewal function on 0..200");
    const auto t = renewal_tables(wb.dist(), 200);
    const double E0 = wb.stats(0).absStau / s;
    for (std::int64_t x = 0; x <= 200; ++x) {
      const double lhs = t.H[static_cast<std::size_t>(x)] / (2.0 * E0) - static_cast<double>(x) / s;
      rep.add(row_of(x, 0.0, 0.0, 0, lhs, lam), x <= 20 || x % 20 == 0);
    }
    rep.finish();
    out.push_back(std::move(rep));
  }
  return out;
}

// --- approximation errors --------------------------------------------------

double sup_tail_error(const FreePmf& row, double x, std::int64_t n, double sigma, double overshoot) {
  // tail(y) = P(x + S_n >= y, tau > n) for integers y >= 0; live positions are >= 1.
  const auto nd = static_cast<double>(n);
  double tail = 0.0;
  for (double v : row.mass) tail += v;
  double sup = 0.0;
  const std::int64_t top = row.max_position() + 1;
  double above = 0.0;  // mass strictly above y, accumulated from the top
  for (std::int64_t y = top; y >= 0; --y) {
    const double exact = y <= row.min_position ? tail : above + row.at(y);
    sup = std::max(sup, std::abs(exact - corrected_tail(x, static_cast<double>(y), nd, sigma, overshoot).total));
    above += row.at(y);
  }
  return sup;
}

namespace {

// A grid with fewer than two usable sizes gets a NaN slope instead of an error.
RateFit fit_if_possible(const std::vector<std::int64_t>& n, const std::vector<double>& err) {
  if (std::count_if(err.begin(), err.end(), [](double e) { return e > 0.0; }) >= 2) return fit_rate(n, err);
  RateFit fit;
  fit.slope = fit.intercept = fit.r2 = std::numeric_limits<double>::quiet_NaN();
  return fit;
}

}  // namespace

Thm1Result check_thm1(const Workbench& wb) {
  Thm1Result res;
  res.report = make_report(wb, "thm1", std::nullopt, "sup over integer y >= 0");
  const double s = wb.sigma();
  const double lam = wb.lambda();
  for (auto n : wb.grid().n) {
    for (auto x : wb.grid().x_values(n)) {
      const auto& st = wb.stats(x);
      const auto& row = wb.walk(x).rows.at(n);
      const double err = sup_tail_error(row, static_cast<double>(x), n, s, st.overshoot1);
      const double env = thm1_envelope(lam, 1.0, st.absStau / s, static_cast<double>(x) / s, static_cast<double>(n)).scaled_value;
      res.report.add(row_of(x, 0.0, 0.0, n, err, env));
      if (x == 0 && n >= wb.grid().rate_n_min) {
        res.curve.n.push_back(n);
        res.curve.corrected.push_back(err);
        res.curve.reflection.push_back(sup_tail_error(row, 0.0, n, s, 0.0));
      }
    }
  }
  res.report.finish();
  res.rate = fit_if_possible(res.curve.n, res.curve.corrected);
  return res;
}

CorollaryResult check_corollary(const Workbench& wb) {
  CorollaryResult res;
  res.survival = make_report(wb, "corollary_survival", std::nullopt, "x <= sqrt(n), envelope lambda^3/sqrt(n) + x'^2/n");
  res.rayleigh = make_report(wb, "corollary_rayleigh", std::nullopt, "x <= sqrt(n), sup over integer y >= 0");
  const double s = wb.sigma();
  const double lam3 = std::pow(wb.lambda(), 3);

  struct Point {
    std::int64_t x;
    std::int64_t n;
    double err;
    double env2;
    double env3;
  };
  std::vector<Point> pts;
  for (auto n : wb.grid().n) {
    const auto nd = static_cast<double>(n);
    const double rn = std::sqrt(nd);
    for (auto x : wb.grid().x_values(n)) {
      const double xs = static_cast<double>(x) / s;
      if (xs > rn) continue;
      const auto& rec = wb.walk(x);
      const auto& row = rec.rows.at(n);
      const double live = rec.live[static_cast<std::size_t>(n)];
      const double E = wb.stats(x).absStau / s;
      const double e3 = std::abs(live / (std::sqrt(2.0 / std::numbers::pi) * E / rn) - 1.0);

      double e2 = 0.0;
      double above = 0.0;
      double total = 0.0;
      for (double v : row.mass) total += v;
      for (std::int64_t y = row.max_position() + 1; y >= 0; --y) {
        const double exact = (y <= row.min_position ? total : above + row.at(y)) / live;
        e2 = std::max(e2, std::abs(exact - rayleigh_tail(static_cast<double>(y), nd, s)));
        above += row.at(y);
      }

      const double env2 = lam3 / rn;
      const double env3 = xs * xs / nd;
      res.survival.add(row_of(x, 0.0, 0.0, n, e3, env2 + env3));
      res.rayleigh.add(row_of(x, 0.0, 0.0, n, e2, env2 + env3));
      pts.push_back({x, n, std::max(e2, e3), env2, env3});
      if (x == 0 && n >= wb.grid().rate_n_min) {
        res.n.push_back(n);
        res.survival_error.push_back(e3);
      }
    }
  }
  res.survival.finish();
  res.rayleigh.finish();
  for (const auto& p : pts)
    if (p.x == 0) res.A2 = std::max(res.A2, p.err / p.env2);
  for (const auto& p : pts)
    if (p.env3 > 0.0) res.A3 = std::max(res.A3, std::max(0.0, p.err - res.A2 * p.env2) / p.env3);
  res.rate = fit_if_possible(res.n, res.survival_error);
  return res;
}

BoundReport check_ales(const Workbench& wb) {
  auto rep = make_report(wb, "ales", std::nullopt, "sup over x of |P(tau_x > n) - reflection|");
  const double s = wb.sigma();
  for (auto n : wb.grid().n) {
    const auto nd = static_cast<double>(n);
    for (auto x : wb.grid().x_values(n)) {
      const double err = std::abs(wb.walk(x).live[static_cast<std::size_t>(n)] - reflection_term(static_cast<double>(x), 0.0, nd, s));
      rep.add(row_of(x, 0.0, 0.0, n, err, ales_envelope(wb.lambda(), nd).scaled_value));
    }
  }
  rep.finish();
  return rep;
}

ImprovedResult check_improved(const Workbench& wb) {
  ImprovedResult res;
  res.R = 1.0 / peakedness_V(wb.dist()).V;
  res.envelope = make_report(wb, "improved", std::nullopt, "sup over integer y >= 0, R = 1/V");
  res.local_window = make_report(wb, "improved_window", std::nullopt, "free walk, closed windows of length 1, R = 1/V");
  const double s = wb.sigma();
  const double lam = wb.lambda();
  for (auto n : wb.grid().n) {
    const auto nd = static_cast<double>(n);
    for (auto x : wb.grid().x_values(n)) {
      const auto& st = wb.stats(x);
      const double err = sup_tail_error(wb.walk(x).rows.at(n), static_cast<double>(x), n, s, st.overshoot1);
      const double env = improved_envelope(lam, 1.0, st.absStau / s, static_cast<double>(x) / s, nd, res.R).scaled_value;
      res.envelope.add(row_of(x, 0.0, 0.0, n, err, env));
    }
    const auto& pmf = wb.free(n);
    const auto c = prefix(pmf);
    const auto width = static_cast<std::int64_t>(std::floor(s + 1e-12)) + 1;
    const auto [mass, at] = max_window(pmf, c, width);
    const double r2n = std::sqrt(2.0 * nd);
    res.local_window.add(row_of(0, static_cast<double>(at) / s, 1.0, n, mass, (1.0 + res.R * lam / r2n) / r2n));
  }
  res.envelope.finish();
  res.local_window.finish();
  return res;
}

}  // namespace fpwalk
