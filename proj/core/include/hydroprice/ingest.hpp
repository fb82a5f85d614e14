#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydroprice/timestamp.hpp"

namespace hydroprice {

enum class Source : std::size_t { hydro = 0, solar = 1, wind = 2, other = 3 };
inline constexpr std::size_t kSourceCount = 4;
inline constexpr std::array<Source, kSourceCount> kAllSources = {
    Source::hydro, Source::solar, Source::wind, Source::other};

std::string_view to_string(Source s);
// hydro/solar/wind by name (case-insensitive); any other fuel label maps to
// Source::other so totals cover the whole system.
Source source_from_label(std::string_view label);

struct PriceRow {
  Timestamp timestamp;
  double lmp = 0.0;
  double mcc = 0.0;
  double mlc = 0.0;
};

struct GenerationReading {
  Timestamp timestamp;
  Source source = Source::other;
  double power_mw = 0.0;
  int interval_minutes = 5;
};

struct HourlyEnergy {
  Timestamp hour;
  Source source = Source::other;
  double mwh = 0.0;
  double covered_minutes = 0.0;
  bool partial = false;  // scaled up from < 60 covered minutes
};

struct HourlyRecord {
  Timestamp timestamp;
  double mec = 0.0;
  std::array<double, kSourceCount> gen_by_source{};
  double total_gen = 0.0;

  double gen(Source s) const { return gen_by_source[static_cast<std::size_t>(s)]; }
};

// Counts of everything ingest dropped or flagged, keyed by cause.
struct IngestReport {
  std::size_t price_rows_read = 0;
  std::size_t generation_readings_read = 0;
  std::size_t hourly_records = 0;
  std::map<std::string, std::size_t> dropped;
  std::map<std::string, std::size_t> flagged;

  void drop(const std::string& cause, std::size_t n = 1);
  void flag(const std::string& cause, std::size_t n = 1);
  std::size_t dropped_count(const std::string& cause) const;
  std::size_t flagged_count(const std::string& cause) const;

  nlohmann::json to_json() const;
};

// MEC = LMP - MCC - MLC. Throws MalformedRecordError(row) on non-finite input.
double compute_mec(double lmp, double mcc, double mlc, std::size_t row = 0);

// Sums power x duration per (source, hour). Readings that straddle an hour
// boundary are split. Hours with less than 60 covered minutes are scaled by
// 60 / covered and flagged. Input need not be sorted; within the repeated
// fall-back hour a second reading with the same (source, timestamp) is
// dropped. Any other overlap throws DataIntegrityError.
std::vector<HourlyEnergy> aggregate_generation(std::span<const GenerationReading> readings,
                                               IngestReport* report = nullptr);

// Inner join on the hour. Output is strictly increasing in time.
std::vector<HourlyRecord> join_hourly(std::span<const PriceRow> prices,
                                      std::span<const HourlyEnergy> generation,
                                      IngestReport* report = nullptr);

// File readers. Format follows the extension: ".jsonl"/".ndjson" is JSON
// lines, anything else is CSV with the documented header.
std::vector<PriceRow> read_prices(std::istream& in, bool json_lines, IngestReport& report);
std::vector<GenerationReading> read_generation(std::istream& in, bool json_lines,
                                               IngestReport& report);
std::vector<PriceRow> read_prices(const std::filesystem::path& path, IngestReport& report);
std::vector<GenerationReading> read_generation(const std::filesystem::path& path,
                                               IngestReport& report);

void write_prices_csv(std::ostream& out, std::span<const PriceRow> rows);
void write_generation_csv(std::ostream& out, std::span<const GenerationReading> readings);
void write_hourly_csv(std::ostream& out, std::span<const HourlyRecord> records);

struct IngestResult {
  std::vector<HourlyRecord> records;
  IngestReport report;
};

IngestResult ingest_files(const std::filesystem::path& prices,
                          const std::filesystem::path& generation);

}  // namespace hydroprice
