#pragma once

// CSV output: ',' separator, '.' decimal point, LF line endings and 17
// significant digits, so doubles round-trip exactly. Every file opens with a
// comment line carrying the library version and a hash of the run config.

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fpwalk/exact.hpp"
#include "fpwalk/montecarlo.hpp"
#include "fpwalk/verify.hpp"

namespace fpwalk {

[[nodiscard]] const char* library_version() noexcept;

/// FNV-1a (64 bit) of the compact JSON dump; key order is canonical in nlohmann::json.
[[nodiscard]] std::uint64_t config_hash(const nlohmann::json& config);

/// General format with 17 significant digits.
[[nodiscard]] std::string format_double(double v);

using CsvCell = std::variant<std::int64_t, double, std::string>;

class CsvWriter {
public:
  /// `note` is appended to the comment line (e.g. the seed of a Monte Carlo run).
  CsvWriter(std::ostream& out, const nlohmann::json& config, std::initializer_list<std::string_view> columns,
            std::string_view note = {});
  CsvWriter(std::ostream& out, const nlohmann::json& config, const std::vector<std::string>& columns,
            std::string_view note = {});

  void row(std::initializer_list<CsvCell> cells);
  void row(const std::vector<CsvCell>& cells);

private:
  std::ostream& out_;
  std::size_t columns_;
};

// Table exports.
void write_survival_table(std::ostream& out, const nlohmann::json& config, const SurvivalTable& table);
void write_profile(std::ostream& out, const nlohmann::json& config, const StoppingProfile& profile);
void write_bound_rows(std::ostream& out, const nlohmann::json& config, const std::vector<BoundReport>& reports);

struct McRow {
  std::string quantity;
  McEstimate estimate;
  double truncated_fraction = 0.0;
  double exact = 0.0;  // NaN when there is no exact value
};
void write_mc(std::ostream& out, const nlohmann::json& config, const std::vector<McRow>& rows, std::uint64_t seed);

}  // namespace fpwalk
