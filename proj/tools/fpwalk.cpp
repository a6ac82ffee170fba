// fpwalk: experiment runner for walks killed at zero.
//
//   fpwalk exact   --dist lazy.json --x 1 --n 2 --out results/
//   fpwalk approx  --dist lazy.json --x 5 --n 100
//   fpwalk mc      --dist gauss.json --x 0.5 --n 50 --seed 7
//   fpwalk verify  [--dist walk.json] [--grid grid.json]
//   fpwalk scan    --dist walk.json
//
// Exit codes: 0 success, 1 a bound with an explicit constant failed, 2 bad
// configuration or input.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpwalk/approx.hpp"
#include "fpwalk/csv.hpp"
#include "fpwalk/exact.hpp"
#include "fpwalk/increments.hpp"
#include "fpwalk/ladder.hpp"
#include "fpwalk/montecarlo.hpp"
#include "fpwalk/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fpwalk;

namespace {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config;
  std::vector<std::string> dist;
  std::optional<double> x;
  std::vector<double> y;
  std::optional<std::int64_t> n;
  std::string grid;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> tol;
  std::optional<unsigned> workers;
};

const std::map<std::string, LatticeIncrement (*)()>& builtin_walks() {
  static const std::map<std::string, LatticeIncrement (*)()> m{
      {"ssrw", &walks::ssrw}, {"lazy", &walks::lazy}, {"skew", &walks::skew_m1_0_2}};
  return m;
}

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON in ") + what + " '" + path + "': " + e.what());
  }
}

// A distribution given as a builtin name, a path, or an inline object.
json resolve_dist(const json& spec) {
  if (spec.is_string()) {
    const auto name = spec.get<std::string>();
    if (const auto it = builtin_walks().find(name); it != builtin_walks().end()) return to_json(IncrementModel(it->second()));
    return to_json(parse_increment(read_json_file(name, "distribution file")));
  }
  return to_json(parse_increment(spec));
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

VerifyGrid parse_grid(const json& g) {
  reject_unknown(g, {"n", "x", "scaled_x", "z", "u", "be_n", "rate_n_min"}, "grid");
  VerifyGrid grid;
  if (g.contains("n")) grid.n = g["n"].get<std::vector<std::int64_t>>();
  if (g.contains("x")) grid.x = g["x"].get<std::vector<std::int64_t>>();
  if (g.contains("scaled_x")) grid.scaled_x = g["scaled_x"].get<bool>();
  if (g.contains("z")) grid.z = g["z"].get<std::vector<double>>();
  if (g.contains("u")) grid.u = g["u"].get<std::vector<std::int64_t>>();
  if (g.contains("be_n")) grid.be_n = g["be_n"].get<std::vector<std::int64_t>>();
  if (g.contains("rate_n_min")) grid.rate_n_min = g["rate_n_min"].get<std::int64_t>();
  for (auto v : grid.n)
    if (v < 1) throw ConfigError("grid horizons must be positive");
  for (auto v : grid.x)
    if (v < 0) throw ConfigError("grid start points must be nonnegative");
  return grid;
}

json grid_json(const VerifyGrid& g) {
  return json{{"n", g.n}, {"x", g.x}, {"scaled_x", g.scaled_x}, {"z", g.z}, {"u", g.u}, {"be_n", g.be_n}, {"rate_n_min", g.rate_n_min}};
}

// Merged run configuration: file first, then flags. The canonical JSON
// (distribution inlined, defaults filled) is what the output hash covers.
struct RunConfig {
  std::string command;
  std::vector<json> dists;
  std::optional<double> x;
  std::vector<double> y;
  std::optional<std::int64_t> n;
  std::uint64_t seed = 1;
  std::string out = ".";
  double tol = 1e-8;
  unsigned workers = 1;
  McConfig mc;
  VerifyGrid grid;
  std::vector<std::int64_t> xs;  // scan starts

  [[nodiscard]] json canonical() const {
    json j{{"command", command}, {"dists", dists}, {"seed", seed}, {"tol", tol}};
    if (x) j["x"] = *x;
    if (!y.empty()) j["y"] = y;
    if (n) j["n"] = *n;
    j["mc"] = {{"batches", mc.batches}, {"paths_per_batch", mc.paths_per_batch}, {"horizon", mc.horizon}};
    if (command == "verify" || command == "scan") j["grid"] = grid_json(grid);
    if (command == "scan") j["xs"] = xs;
    return j;
  }
};

RunConfig build_config(const std::string& command, const Flags& f) {
  RunConfig rc;
  rc.command = command;
  json file = json::object();
  if (!f.config.empty()) file = read_json_file(f.config, "config file");
  reject_unknown(file, {"dist", "dists", "x", "y", "n", "seed", "out", "tol", "workers", "mc", "grid", "xs"}, "config");

  try {
    if (file.contains("dist")) rc.dists.push_back(resolve_dist(file["dist"]));
    if (file.contains("dists"))
      for (const auto& d : file["dists"]) rc.dists.push_back(resolve_dist(d));
    if (file.contains("x")) rc.x = file["x"].get<double>();
    if (file.contains("y")) rc.y = file["y"].is_array() ? file["y"].get<std::vector<double>>() : std::vector<double>{file["y"].get<double>()};
    if (file.contains("n")) rc.n = file["n"].get<std::int64_t>();
    if (file.contains("seed")) rc.seed = file["seed"].get<std::uint64_t>();
    if (file.contains("out")) rc.out = file["out"].get<std::string>();
    if (file.contains("tol")) rc.tol = file["tol"].get<double>();
    if (file.contains("workers")) rc.workers = file["workers"].get<unsigned>();
    if (file.contains("mc")) {
      const auto& m = file["mc"];
      reject_unknown(m, {"batches", "paths_per_batch", "horizon"}, "mc");
      if (m.contains("batches")) rc.mc.batches = m["batches"].get<std::int64_t>();
      if (m.contains("paths_per_batch")) rc.mc.paths_per_batch = m["paths_per_batch"].get<std::int64_t>();
      if (m.contains("horizon")) rc.mc.horizon = m["horizon"].get<std::int64_t>();
    }
    if (file.contains("grid")) rc.grid = parse_grid(file["grid"]);
    if (file.contains("xs")) rc.xs = file["xs"].get<std::vector<std::int64_t>>();

    if (!f.dist.empty()) {
      rc.dists.clear();
      for (const auto& d : f.dist) rc.dists.push_back(resolve_dist(json(d)));
    }
    if (f.x) rc.x = f.x;
    if (!f.y.empty()) rc.y = f.y;
    if (f.n) rc.n = f.n;
    if (f.seed) rc.seed = *f.seed;
    if (!f.out.empty()) rc.out = f.out;
    if (f.tol) rc.tol = *f.tol;
    if (f.workers) rc.workers = *f.workers;
    if (!f.grid.empty()) rc.grid = parse_grid(read_json_file(f.grid, "grid file"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value in config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  rc.mc.seed = rc.seed;
  rc.mc.workers = rc.workers;
  rc.grid.workers = rc.workers;
  if (rc.x && *rc.x < 0.0) throw ConfigError("x must be nonnegative");
  if (rc.n && *rc.n < 0) throw ConfigError("n must be nonnegative");
  if (!(rc.tol > 0.0)) throw ConfigError("tol must be positive");
  try {
    rc.mc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

IncrementModel model_of(const json& d) { return parse_increment(d); }

const LatticeIncrement& need_lattice(const IncrementModel& m, const char* command) {
  const auto* lat = std::get_if<LatticeIncrement>(&m);
  if (!lat) throw ConfigError(std::string(command) + " needs a lattice distribution");
  return *lat;
}

std::int64_t integer_x(const RunConfig& rc) {
  const double x = rc.x.value_or(0.0);
  if (x != std::floor(x)) throw ConfigError("the exact engine needs an integer start point x");
  return static_cast<std::int64_t>(x);
}

const json& single_dist(const RunConfig& rc) {
  if (rc.dists.size() != 1) throw ConfigError(rc.command + " needs exactly one distribution (--dist)");
  return rc.dists.front();
}

std::ofstream open_out(const RunConfig& rc, const std::string& name) {
  fs::create_directories(rc.out);
  std::ofstream f(fs::path(rc.out) / name, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + (fs::path(rc.out) / name).string() + "'");
  return f;
}

bool ladder_ok(const LatticeIncrement& d) {
  std::int64_t g = 0;
  for (auto o : d.offsets()) g = std::gcd(g, o);
  return g == 1;
}

// --- commands ---------------------------------------------------------------

int cmd_exact(const RunConfig& rc) {
  const auto model = model_of(single_dist(rc));
  const auto& dist = need_lattice(model, "exact");
  const std::int64_t x = integer_x(rc);
  const std::int64_t n = rc.n.value_or(0);
  const json cfg = rc.canonical();

  const auto table = survival_evolve(dist, x, n);
  const auto profile = stopping_profile(dist, x, n);
  {
    auto f = open_out(rc, "survival.csv");
    write_survival_table(f, cfg, table);
  }
  {
    auto f = open_out(rc, "profile.csv");
    write_profile(f, cfg, profile);
  }
  auto f = open_out(rc, "ladder.csv");
  CsvWriter w(f, cfg, {"quantity", "value"});
  const double live = table.live_mass(n);
  w.row({std::string("survival_prob"), live});
  w.row({std::string("killed_mass"), table.killed_mass(n)});
  w.row({std::string("expected_min_tau"), expected_min_tau(profile)});
  for (double y : rc.y) w.row({"tail_prob(y=" + format_double(y) + ")", tail_prob(dist, x, y, n)});
  std::cout << "P(tau > " << n << ") = " << format_double(live) << "\n";
  // Ladder heights need coprime offsets; the finite-n tables above do not.
  if (!ladder_ok(dist)) return 0;
  const auto law = ladder_law(dist);
  const auto st = ladder_stats(law, x);
  w.row({std::string("absStau"), st.absStau});
  w.row({std::string("overshoot1"), st.overshoot1});
  w.row({std::string("overshoot2"), st.overshoot2});
  w.row({std::string("ladder_residual"), st.residual});
  w.row({std::string("descending_ladder_mean"), law.mean_descending});
  w.row({std::string("ascending_ladder_mean"), law.mean_ascending});
  std::cout << "E|S_tau| = " << format_double(st.absStau) << ", E|x + S_tau| = " << format_double(st.overshoot1) << "\n";
  return 0;
}

struct OvershootSource {
  double mean = 0.0;
  std::string how;
};

OvershootSource overshoot_for(const IncrementModel& model, double x, const RunConfig& rc) {
  if (const auto* lat = std::get_if<LatticeIncrement>(&model)) {
    if (x == std::floor(x) && ladder_ok(*lat)) return {ladder_stats(*lat, static_cast<std::int64_t>(x)).overshoot1, "exact"};
  }
  const auto mc = mc_stopping(model, x, rc.mc);
  return {mc.overshoot.mean, "monte carlo"};
}

double improvement_R(const IncrementModel& model) {
  if (const auto* lat = std::get_if<LatticeIncrement>(&model)) {
    if (span(*lat) != 1) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 / peakedness_V(*lat).V;
  }
  const double p = std::get<ContinuousIncrement>(model).density_sup();
  return p * p;
}

int cmd_approx(const RunConfig& rc) {
  const auto model = model_of(single_dist(rc));
  const auto m = moments(model);
  const double sigma = m.sigma();
  const double x = rc.x.value_or(0.0);
  const std::int64_t n = rc.n.value_or(100);
  if (n < 1) throw ConfigError("approx needs n >= 1");
  const auto nd = static_cast<double>(n);

  std::vector<double> ys = rc.y;
  if (ys.empty()) {
    const double s = sigma * std::sqrt(nd);
    std::set<double> g{0.0, 1.0, std::floor(s), std::floor(2.0 * s)};
    ys.assign(g.begin(), g.end());
  }
  const auto ov = overshoot_for(model, x, rc);
  const double absStau = x + ov.mean;
  const double R = improvement_R(model);
  // Envelopes in normalised units, as in the verify suite.
  const double lam = m.lyapunov;
  const double thm1 = thm1_envelope(lam, 1.0, absStau / sigma, x / sigma, nd).scaled_value;
  const double ales = ales_envelope(lam, nd).scaled_value;
  const double improved =
      std::isnan(R) ? R : improved_envelope(lam, 1.0, absStau / sigma, x / sigma, nd, R).scaled_value;

  auto f = open_out(rc, "approx.csv");
  CsvWriter w(f, rc.canonical(),
              {"x", "y", "n", "reflection", "correction", "total", "rayleigh", "thm1_env", "ales_env", "improved_env"},
              "overshoot " + ov.how);
  for (double y : ys) {
    const auto t = corrected_tail(x, y, nd, sigma, ov.mean);
    w.row({x, y, n, t.reflection, t.correction, t.total, t.rayleigh, thm1, ales, improved});
  }
  std::cout << "E|x + S_tau| = " << format_double(ov.mean) << " (" << ov.how << ")\n";
  return 0;
}

int cmd_mc(const RunConfig& rc) {
  const auto model = model_of(single_dist(rc));
  const double x = rc.x.value_or(0.0);
  const std::int64_t n = rc.n.value_or(rc.mc.horizon);
  McConfig cfg = rc.mc;
  cfg.horizon = std::max<std::int64_t>(1, n);
  const auto* lat = std::get_if<LatticeIncrement>(&model);
  const bool exact_ok = lat && x == std::floor(x);
  const auto xi = static_cast<std::int64_t>(x);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<McRow> rows;
  for (double y : rc.y.empty() ? std::vector<double>{0.0} : rc.y) {
    const auto e = mc_tail(model, x, y, n, cfg);
    rows.push_back({"tail(y=" + format_double(y) + ")", e, 0.0, exact_ok ? tail_prob(*lat, xi, y, n) : nan});
  }
  const auto st = mc_stopping(model, x, cfg);
  double exact_ov = nan;
  double exact_surv = nan;
  if (exact_ok) {
    const auto prof = stopping_profile(*lat, xi, cfg.horizon);
    exact_ov = prof.total_p > 0.0 ? prof.total_m1 / prof.total_p : nan;
    exact_surv = prof.residual;
  }
  rows.push_back({"overshoot_given_stopped", st.overshoot, st.truncated_fraction, exact_ov});
  rows.push_back({"survival", st.survival, st.truncated_fraction, exact_surv});
  auto f = open_out(rc, "mc.csv");
  write_mc(f, rc.canonical(), rows, rc.seed);
  std::cout << "seed " << rc.seed << ", " << rows.front().estimate.n_paths << " paths per quantity\n";
  return 0;
}

json report_json(const BoundReport& r) {
  json j{{"bound_id", r.bound_id},
         {"dist", r.dist},
         {"grid", r.grid},
         {"max_ratio", r.max_ratio},
         {"estimated_constant", r.estimated_constant},
         {"evaluated", r.evaluated},
         {"argmax", {{"x", r.argmax.x}, {"y", r.argmax.y}, {"z", r.argmax.z}, {"n", r.argmax.n}}}};
  if (r.constant) {
    j["constant"] = *r.constant;
    j["holds"] = r.holds;
  }
  return j;
}

json rate_json(const RateFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"n_min", f.n_min}, {"n_max", f.n_max}};
}

std::vector<json> default_dists() {
  std::vector<json> out;
  for (const auto& name : {"ssrw", "lazy", "skew"}) out.push_back(resolve_dist(json(name)));
  return out;
}

int cmd_verify(RunConfig rc) {
  if (rc.dists.empty()) rc.dists = default_dists();
  const json cfg = rc.canonical();
  std::vector<BoundReport> all;
  json summary{{"version", library_version()}, {"distributions", json::array()}};
  bool ok = true;
  for (const auto& d : rc.dists) {
    const auto model = model_of(d);
    const auto& dist = need_lattice(model, "verify");
    Workbench wb(dist, rc.grid);
    json entry{{"dist", wb.name()}, {"sigma", wb.sigma()}, {"lyapunov", wb.lambda()}, {"explicit", json::array()},
               {"estimated", json::array()}};
    for (auto& r : check_explicit_bounds(wb)) {
      ok = ok && r.holds;
      std::cout << (r.holds ? "holds  " : "FAILS  ") << wb.name() << "  " << r.bound_id << "  max ratio "
                << format_double(r.max_ratio) << " <= " << format_double(*r.constant) << "\n";
      entry["explicit"].push_back(report_json(r));
      all.push_back(std::move(r));
    }
    for (auto& r : estimate_constants(wb)) {
      entry["estimated"].push_back(report_json(r));
      all.push_back(std::move(r));
    }
    auto thm1 = check_thm1(wb);
    entry["A1"] = thm1.report.estimated_constant;
    entry["thm1_rate"] = rate_json(thm1.rate);
    all.push_back(std::move(thm1.report));
    auto cor = check_corollary(wb);
    entry["A2"] = cor.A2;
    entry["A3"] = cor.A3;
    entry["corollary_rate"] = rate_json(cor.rate);
    all.push_back(std::move(cor.survival));
    all.push_back(std::move(cor.rayleigh));
    auto ales = check_ales(wb);
    entry["A"] = ales.estimated_constant;
    all.push_back(std::move(ales));
    if (span(dist) == 1) {
      auto imp = check_improved(wb);
      entry["C_improved"] = imp.envelope.estimated_constant;
      entry["A_window"] = imp.local_window.estimated_constant;
      entry["R"] = imp.R;
      all.push_back(std::move(imp.envelope));
      all.push_back(std::move(imp.local_window));
    }
    summary["distributions"].push_back(std::move(entry));
  }
  summary["all_explicit_hold"] = ok;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  summary["config_hash"] = hash;
  {
    auto f = open_out(rc, "bounds.csv");
    write_bound_rows(f, cfg, all);
  }
  auto f = open_out(rc, "summary.json");
  f << summary.dump(2) << '\n';
  return ok ? 0 : 1;
}

int cmd_scan(RunConfig rc) {
  const auto model = model_of(single_dist(rc));
  const auto& dist = need_lattice(model, "scan");
  if (rc.xs.empty()) rc.xs = {0, 1, 2, 3, 4, 5, 10, 20, 50, 100, 200, 500, 1000};
  const json cfg = rc.canonical();
  const auto scan = overshoot_scan(dist, rc.xs);
  {
    auto f = open_out(rc, "scan.csv");
    CsvWriter w(f, cfg, {"x", "overshoot"}, "last_difference " + format_double(scan.last_difference));
    for (const auto& p : scan.points) w.row({p.x, p.overshoot});
  }
  Workbench wb(dist, rc.grid);
  const auto thm1 = check_thm1(wb);
  const auto cor = check_corollary(wb);
  auto f = open_out(rc, "rates.csv");
  CsvWriter w(f, cfg, {"n", "thm1_corrected", "thm1_reflection", "corollary_survival"},
              "thm1_slope " + format_double(thm1.rate.slope) + " corollary_slope " + format_double(cor.rate.slope));
  for (std::size_t i = 0; i < thm1.curve.n.size(); ++i) {
    const auto it = std::find(cor.n.begin(), cor.n.end(), thm1.curve.n[i]);
    const double c = it == cor.n.end() ? std::numeric_limits<double>::quiet_NaN()
                                       : cor.survival_error[static_cast<std::size_t>(it - cor.n.begin())];
    w.row({thm1.curve.n[i], thm1.curve.corrected[i], thm1.curve.reflection[i], c});
  }
  std::cout << "E|x + S_tau| at x = " << scan.points.back().x << ": " << format_double(scan.points.back().overshoot)
            << " (last difference " << format_double(scan.last_difference) << ")\n";
  return 0;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration");
  sub->add_option("--dist", f.dist, "distribution: JSON file or builtin name (ssrw, lazy, skew)");
  sub->add_option("--x", f.x, "start point");
  sub->add_option("--y", f.y, "threshold(s)");
  sub->add_option("--n", f.n, "number of steps");
  sub->add_option("--grid", f.grid, "JSON grid file");
  sub->add_option("--seed", f.seed, "Monte Carlo seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--tol", f.tol, "tolerance");
  sub->add_option("--workers", f.workers, "worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact, approximate and simulated first-passage functionals of random walks killed at zero"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"exact", "survival table, stopping profile and ladder quantities by dynamic programming"},
      {"approx", "reflection formula, overshoot correction and error envelopes"},
      {"mc", "seeded Monte Carlo estimates with confidence intervals"},
      {"verify", "check every bound over the parameter grid; exit 1 if an explicit bound fails"},
      {"scan", "overshoot as a function of the start point, and convergence rates"},
  };
  for (auto [name, help] : commands) add_common(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig rc = build_config(command, flags);
    if (command == "exact") return cmd_exact(rc);
    if (command == "approx") return cmd_approx(rc);
    if (command == "mc") return cmd_mc(rc);
    if (command == "verify") return cmd_verify(rc);
    return cmd_scan(rc);
  } catch (const ConfigError& e) {
    std::cerr << "fpwalk: " << e.what() << '\n';
  } catch (const BudgetExceeded& e) {
    std::cerr << "fpwalk: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "fpwalk: " << e.what() << '\n';
  } catch (const std::domain_error& e) {
    std::cerr << "fpwalk: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "fpwalk: " << e.what() << '\n';
  }
  return 2;
}
