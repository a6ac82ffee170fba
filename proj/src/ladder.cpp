#include "fpwalk/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/Polynomials>

#include "fpwalk/exact.hpp"

namespace fpwalk {

namespace {

using cplx = std::complex<double>;

constexpr std::int64_t kMaxSection = std::int64_t{1} << 22;

// Divide the ascending-coefficient polynomial c by (z - 1); the remainder is dropped.
std::vector<double> deflate_unit_root(const std::vector<double>& c) {
  const std::size_t d = c.size() - 1;
  std::vector<double> r(d, 0.0);
  r[d - 1] = c[d];
  for (std::size_t k = d - 1; k >= 1; --k) r[k - 1] = c[k] + r[k];
  return r;
}

cplx horner(const std::vector<double>& c, cplx z) {
  cplx v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * z + c[k];
  return v;
}

cplx horner_derivative(const std::vector<double>& c, cplx z) {
  cplx v = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) v = v * z + static_cast<double>(k) * c[k];
  return v;
}

cplx polish(const std::vector<double>& c, cplx z) {
  for (int it = 0; it < 8; ++it) {
    const cplx d = horner_derivative(c, z);
    if (std::abs(d) == 0.0) break;
    const cplx step = horner(c, z) / d;
    z -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

// Multiply the ascending-coefficient polynomial p by (1 - s * z).
void multiply_linear(std::vector<cplx>& p, cplx s) {
  p.push_back(0.0);
  for (std::size_t k = p.size() - 1; k >= 1; --k) p[k] -= s * p[k - 1];
}

std::vector<double> descending_renewal(const LadderLaw& law, std::int64_t upto) {
  // u(s) = expected number of ladder indices j >= 0 with chi-_1 + ... + chi-_j = s.
  const auto& f = law.descending;
  const auto a = static_cast<std::int64_t>(f.size()) - 1;
  const double stay = 1.0 - f[0];
  std::vector<double> u(static_cast<std::size_t>(std::max<std::int64_t>(upto, 0)), 0.0);
  if (upto <= 0) return u;
  u[0] = 1.0 / stay;
  for (std::int64_t s = 1; s < upto; ++s) {
    double acc = 0.0;
    for (std::int64_t i = 1; i <= std::min(s, a); ++i) acc += f[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(s - i)];
    u[static_cast<std::size_t>(s)] = acc / stay;
  }
  return u;
}

void check_x(std::int64_t x) {
  if (x < 0) throw std::invalid_argument("start point x must be a nonnegative integer");
}

// Solve one section of size L and return the values on 0..x_max.
using SectionSolver = std::vector<double> (*)(const LatticeIncrement&, int, std::int64_t, std::int64_t);

std::vector<double> solve_occupation(const LatticeIncrement& dist, int /*power*/, std::int64_t x_max, std::int64_t L) {
  // Unknowns phi(1..L); phi(0) = 1; phi(w) = phi(L) for w > L.
  const auto ks = dist.offsets();
  const auto ps = dist.probs();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(L) * (ks.size() + 1));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(L);
  for (std::int64_t y = 1; y <= L; ++y) {
    const auto row = static_cast<int>(y - 1);
    trip.emplace_back(row, row, 1.0);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const std::int64_t w = y - ks[i];
      if (w < 0) continue;
      if (w == 0) {
        rhs[row] += ps[i];
        continue;
      }
      trip.emplace_back(row, static_cast<int>(std::min(w, L) - 1), -ps[i]);
    }
  }
  Eigen::SparseMatrix<double> A(L, L);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("occupation section solve failed");
  const Eigen::VectorXd sol = lu.solve(rhs);
  std::vector<double> out(static_cast<std::size_t>(x_max + 1));
  out[0] = 1.0;
  for (std::int64_t y = 1; y <= x_max; ++y) out[static_cast<std::size_t>(y)] = sol[y - 1];
  return out;
}

std::vector<double> solve_harmonic(const LatticeIncrement& dist, int power, std::int64_t x_max, std::int64_t L) {
  // Unknowns h(0..L); h(w) = h(L) for w > L.
  const auto ks = dist.offsets();
  const auto ps = dist.probs();
  const std::int64_t size = L + 1;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(size) * (ks.size() + 1));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  for (std::int64_t w = 0; w <= L; ++w) {
    const auto row = static_cast<int>(w);
    trip.emplace_back(row, row, 1.0);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const std::int64_t t = w + ks[i];
      if (t <= 0) {
        rhs[row] += ps[i] * std::pow(static_cast<double>(-t), power);
        continue;
      }
      trip.emplace_back(row, static_cast<int>(std::min(t, L)), -ps[i]);
    }
  }
  Eigen::SparseMatrix<double> A(size, size);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("harmonic section solve failed");
  const Eigen::VectorXd sol = lu.solve(rhs);
  return std::vector<double>(sol.data(), sol.data() + x_max + 1);
}

SectionSolution solve_doubling(SectionSolver solver, const LatticeIncrement& dist, int power, std::int64_t x_max,
                               double tol) {
  check_x(x_max);
  const std::int64_t reach = dist.max_offset() + dist.max_down();
  std::int64_t L = std::max<std::int64_t>(64, 4 * (x_max + 1) + 16 * reach);
  SectionSolution out;
  out.values = solver(dist, power, x_max, L);
  for (;;) {
    const std::int64_t L2 = 2 * L;
    auto next = solver(dist, power, x_max, L2);
    double diff = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) diff = std::max(diff, std::abs(next[i] - out.values[i]));
    out.values = std::move(next);
    out.residual = diff;
    out.section = L2;
    L = L2;
    if (diff <= tol || 2 * L > kMaxSection) break;
  }
  return out;
}

}  // namespace

double RenewalTable::H_left(std::int64_t x) const {
  if (x <= 0) return 0.0;
  return H.at(static_cast<std::size_t>(x - 1));
}

LadderLaw ladder_law(const LatticeIncrement& dist) {
  std::int64_t g = 0;
  for (auto k : dist.offsets()) g = std::gcd(g, k < 0 ? -k : k);
  if (g != 1)
    throw std::domain_error("offsets share the common divisor " + std::to_string(g) +
                            "; divide them out before computing ladder heights");

  const std::int64_t a = dist.max_down();
  const std::int64_t b = dist.max_offset();
  const auto deg = static_cast<std::size_t>(a + b);

  // Q(z) = z^a (1 - E z^X), a polynomial of degree a + b with a double root at 1.
  std::vector<double> q(deg + 1, 0.0);
  q[static_cast<std::size_t>(a)] = 1.0;
  for (std::size_t i = 0; i < dist.size(); ++i) q[static_cast<std::size_t>(dist.offsets()[i] + a)] -= dist.probs()[i];
  const std::vector<double> r = deflate_unit_root(deflate_unit_root(q));

  std::vector<cplx> inner;
  std::vector<cplx> outer;
  if (r.size() > 1) {
    Eigen::VectorXd coeff(static_cast<Eigen::Index>(r.size()));
    for (std::size_t k = 0; k < r.size(); ++k) coeff[static_cast<Eigen::Index>(k)] = r[k];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeff);
    for (Eigen::Index k = 0; k < solver.roots().size(); ++k) {
      const cplx z = polish(r, solver.roots()[k]);
      (std::abs(z) < 1.0 ? inner : outer).push_back(z);
    }
  }
  if (static_cast<std::int64_t>(inner.size()) != a - 1 || static_cast<std::int64_t>(outer.size()) != b - 1)
    throw std::runtime_error("root split of the factorisation failed: " + std::to_string(inner.size()) + " inside, " +
                             std::to_string(outer.size()) + " outside the unit circle");

  // 1 - F+(z) = (1 - z) prod_outer (1 - z / r).
  std::vector<cplx> gp{1.0, -1.0};
  for (const cplx& z : outer) multiply_linear(gp, 1.0 / z);
  // 1 - F-(w) = c (1 - w) prod_inner (1 - w z), c matched on the top coefficient.
  std::vector<cplx> gm{1.0, -1.0};
  for (const cplx& z : inner) multiply_linear(gm, z);
  const double c = -dist.prob(b) / gp.back().real();
  for (auto& v : gm) v *= c;

  LadderLaw law;
  law.ascending.assign(static_cast<std::size_t>(b + 1), 0.0);
  law.descending.assign(static_cast<std::size_t>(a + 1), 0.0);
  for (std::int64_t j = 1; j <= b; ++j) law.ascending[static_cast<std::size_t>(j)] = -gp[static_cast<std::size_t>(j)].real();
  law.descending[0] = 1.0 - gm[0].real();
  for (std::int64_t j = 1; j <= a; ++j) law.descending[static_cast<std::size_t>(j)] = -gm[static_cast<std::size_t>(j)].real();

  for (std::int64_t j = 0; j <= b; ++j) law.mean_ascending += static_cast<double>(j) * law.ascending[static_cast<std::size_t>(j)];
  for (std::int64_t j = 0; j <= a; ++j) law.mean_descending += static_cast<double>(j) * law.descending[static_cast<std::size_t>(j)];

  // Defect: coefficients of (1 - F+(z)) (1 - F-(1/z)) against 1 - E z^X,
  // plus total-mass and sign errors of both laws.
  std::vector<double> prod(deg + 1, 0.0);  // index k + a for power k
  for (std::int64_t i = 0; i <= b; ++i)
    for (std::int64_t j = 0; j <= a; ++j)
      prod[static_cast<std::size_t>(i - j + a)] += gp[static_cast<std::size_t>(i)].real() * gm[static_cast<std::size_t>(j)].real();
  double defect = 0.0;
  for (std::size_t k = 0; k <= deg; ++k) defect = std::max(defect, std::abs(prod[k] - q[k]));
  double sp = 0.0;
  double sm = 0.0;
  for (double v : law.ascending) {
    sp += v;
    defect = std::max(defect, -v);
  }
  for (double v : law.descending) {
    sm += v;
    defect = std::max(defect, -v);
  }
  defect = std::max({defect, std::abs(sp - 1.0), std::abs(sm - 1.0)});
  law.defect = defect;
  return law;
}

std::vector<double> overshoot_law(const LadderLaw& law, std::int64_t x) {
  check_x(x);
  if (x == 0) return law.descending;
  const auto a = static_cast<std::int64_t>(law.descending.size()) - 1;
  const auto u = descending_renewal(law, x);
  std::vector<double> out(law.descending.size(), 0.0);
  for (std::int64_t r = 0; r < a; ++r) {
    double acc = 0.0;
    for (std::int64_t s = std::max<std::int64_t>(0, x + r - a); s <= x - 1; ++s)
      acc += u[static_cast<std::size_t>(s)] * law.descending[static_cast<std::size_t>(x + r - s)];
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

std::vector<double> overshoot_law(const LatticeIncrement& dist, std::int64_t x) {
  return overshoot_law(ladder_law(dist), x);
}

std::vector<double> expected_ladder_count(const LadderLaw& law, std::int64_t u_max) {
  check_x(u_max);
  const auto u = descending_renewal(law, u_max);
  std::vector<double> theta(static_cast<std::size_t>(u_max + 1), 1.0);
  double acc = 0.0;
  for (std::int64_t v = 1; v <= u_max; ++v) {
    acc += u[static_cast<std::size_t>(v - 1)];
    theta[static_cast<std::size_t>(v)] = acc;
  }
  return theta;
}

LadderStats ladder_stats(const LadderLaw& law, std::int64_t x) {
  const auto ov = overshoot_law(law, x);
  LadderStats st;
  st.x = x;
  double mass = 0.0;
  for (std::size_t r = 0; r < ov.size(); ++r) {
    const auto d = static_cast<double>(r);
    mass += ov[r];
    st.overshoot1 += d * ov[r];
    st.overshoot2 += d * d * ov[r];
  }
  st.absStau = static_cast<double>(x) + st.overshoot1;
  st.residual = std::max(std::abs(mass - 1.0), law.defect);
  return st;
}

LadderStats ladder_stats(const LatticeIncrement& dist, std::int64_t x) { return ladder_stats(ladder_law(dist), x); }

LadderStats ladder_stats_dp(const LatticeIncrement& dist, std::int64_t x, const LadderOptions& opts) {
  check_x(x);
  if (opts.horizon < 1 || opts.step_cap < opts.horizon) throw std::invalid_argument("need 1 <= horizon <= step_cap");
  KilledWalk walk(dist, x, opts.step_cap);
  double m1 = 0.0;
  double m2 = 0.0;
  std::int64_t checkpoint = opts.horizon;
  LadderStats st;
  st.x = x;
  for (;;) {
    while (walk.time() < checkpoint) {
      const auto k = walk.step();
      m1 += k.m1;
      m2 += k.m2;
    }
    st.residual = walk.live_mass();
    if (st.residual < opts.tol || checkpoint == opts.step_cap) break;
    checkpoint = std::min(2 * checkpoint, opts.step_cap);
  }
  st.horizon = walk.time();
  st.overshoot1 = m1;
  st.overshoot2 = m2;
  st.absStau = static_cast<double>(x) + m1;
  st.converged = st.residual < opts.tol;
  return st;
}

SectionSolution occupation_measure(const LatticeIncrement& dist, std::int64_t x_max, double tol) {
  return solve_doubling(&solve_occupation, dist, 0, x_max, tol);
}

SectionSolution harmonic_overshoot(const LatticeIncrement& dist, int power, std::int64_t x_max, double tol) {
  if (power < 0) throw std::invalid_argument("power must be nonnegative");
  return solve_doubling(&solve_harmonic, dist, power, x_max, tol);
}

RenewalTable renewal_tables(const LatticeIncrement& dist, std::int64_t x_max, double tol) {
  check_x(x_max);
  const LadderLaw law = ladder_law(dist);
  RenewalTable t;
  t.residual = law.defect;

  // Renewal sequence of the strict ascending ladder heights; H tabulated on 0..x_max + 1.
  const auto& f = law.ascending;
  const auto b = static_cast<std::int64_t>(f.size()) - 1;
  std::vector<double> u(static_cast<std::size_t>(x_max + 2), 0.0);
  u[0] = 1.0;
  for (std::int64_t s = 1; s <= x_max + 1; ++s) {
    double acc = 0.0;
    for (std::int64_t i = 1; i <= std::min(s, b); ++i) acc += f[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(s - i)];
    u[static_cast<std::size_t>(s)] = acc;
  }
  t.H.resize(u.size());
  std::partial_sum(u.begin(), u.end(), t.H.begin());

  auto phi = occupation_measure(dist, x_max, tol);
  t.phi = std::move(phi.values);
  t.phi_residual = phi.residual;
  t.theta_mean = expected_ladder_count(law, x_max);
  return t;
}

OvershootScan overshoot_scan(const LatticeIncrement& dist, const std::vector<std::int64_t>& xs) {
  const LadderLaw law = ladder_law(dist);
  OvershootScan scan;
  scan.points.reserve(xs.size());
  for (auto x : xs) scan.points.push_back({x, ladder_stats(law, x).overshoot1});
  if (scan.points.size() >= 2)
    scan.last_difference = std::abs(scan.points.back().overshoot - scan.points[scan.points.size() - 2].overshoot);
  return scan;
}

}  // namespace fpwalk
