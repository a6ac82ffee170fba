#include "fpwalk/csv.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <stdexcept>

namespace fpwalk {

namespace {

std::string quote(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void header(std::ostream& out, const nlohmann::json& config, std::string_view note) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  out << "# fpwalk " << library_version() << " config " << hash;
  if (!note.empty()) out << ' ' << note;
  out << '\n';
}

}  // namespace

const char* library_version() noexcept { return FPWALK_VERSION; }

std::uint64_t config_hash(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const nlohmann::json& config, std::initializer_list<std::string_view> columns,
                     std::string_view note)
    : out_(out), columns_(columns.size()) {
  header(out_, config, note);
  bool first = true;
  for (auto c : columns) {
    if (!first) out_ << ',';
    out_ << quote(c);
    first = false;
  }
  out_ << '\n';
}

CsvWriter::CsvWriter(std::ostream& out, const nlohmann::json& config, const std::vector<std::string>& columns,
                     std::string_view note)
    : out_(out), columns_(columns.size()) {
  header(out_, config, note);
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << quote(columns[i]);
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<CsvCell> cells) { row(std::vector<CsvCell>(cells)); }

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CSV row has the wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>)
            out_ << format_double(v);
          else if constexpr (std::is_same_v<T, std::string>)
            out_ << quote(v);
          else
            out_ << v;
        },
        cells[i]);
  }
  out_ << '\n';
}

void write_survival_table(std::ostream& out, const nlohmann::json& config, const SurvivalTable& table) {
  CsvWriter w(out, config, {"k", "position", "mass"});
  for (std::int64_t k = 0; k <= table.horizon(); ++k) {
    const auto row = table.row(k);
    const std::int64_t lo = table.row_lo(k);
    for (std::size_t i = 0; i < row.size(); ++i)
      if (row[i] != 0.0) w.row({k, lo + static_cast<std::int64_t>(i), row[i]});
  }
}

void write_profile(std::ostream& out, const nlohmann::json& config, const StoppingProfile& profile) {
  CsvWriter w(out, config, {"k", "pk", "m1k", "m2k"});
  for (std::int64_t k = 1; k <= profile.n; ++k) {
    const auto j = static_cast<std::size_t>(k);
    w.row({k, profile.pk[j], profile.m1k[j], profile.m2k[j]});
  }
}

void write_bound_rows(std::ostream& out, const nlohmann::json& config, const std::vector<BoundReport>& reports) {
  CsvWriter w(out, config, {"bound_id", "dist", "x", "y", "z", "n", "lhs", "rhs_scaled", "ratio"});
  for (const auto& r : reports)
    for (const auto& row : r.rows) w.row({r.bound_id, r.dist, row.x, row.y, row.z, row.n, row.lhs, row.rhs_scaled, row.ratio});
}

void write_mc(std::ostream& out, const nlohmann::json& config, const std::vector<McRow>& rows, std::uint64_t seed) {
  const std::string note = "seed " + std::to_string(seed);
  CsvWriter w(out, config, {"quantity", "mean", "stderr", "lo", "hi", "n_paths", "truncated_fraction", "exact"}, note);
  for (const auto& r : rows)
    w.row({r.quantity, r.estimate.mean, r.estimate.stderr_, r.estimate.lo, r.estimate.hi, r.estimate.n_paths,
           r.truncated_fraction, r.exact});
}

}  // namespace fpwalk
