#include "hydroprice/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <utility>

#include "hydroprice/errors.hpp"
#include "hydroprice/format.hpp"

namespace hydroprice {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

// nullopt for an empty field; throws for garbage.
std::optional<double> parse_number(std::string_view field, std::size_t line) {
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = field.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw MalformedRecordError(line, "not a number: '" + std::string(field) + "'");
  return v;
}

Timestamp parse_timestamp(std::string_view field, std::size_t line) {
  auto t = Timestamp::parse(field);
  if (!t) throw MalformedRecordError(line, "bad timestamp: '" + std::string(field) + "'");
  return *t;
}

bool is_json_lines(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  return ext == ".jsonl" || ext == ".ndjson";
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open input file: " + p.string());
  return in;
}

void expect_header(std::istream& in, std::string_view expected) {
  std::string header;
  if (!std::getline(in, header)) throw MalformedRecordError(1, "missing header");
  if (trim(header) != expected)
    throw MalformedRecordError(1, "expected header '" + std::string(expected) + "', got '" +
                                      std::string(trim(header)) + "'");
}

std::optional<double> json_number(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw MalformedRecordError(line, std::string(key) + " is not a number");
  return it->get<double>();
}

}  // namespace

std::string_view to_string(Source s) {
  switch (s) {
    case Source::hydro: return "hydro";
    case Source::solar: return "solar";
    case Source::wind: return "wind";
    case Source::other: return "other";
  }
  return "other";
}

Source source_from_label(std::string_view label) {
  std::string lower;
  for (char c : trim(label)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "hydro") return Source::hydro;
  if (lower == "solar") return Source::solar;
  if (lower == "wind") return Source::wind;
  return Source::other;
}

void IngestReport::drop(const std::string& cause, std::size_t n) { dropped[cause] += n; }
void IngestReport::flag(const std::string& cause, std::size_t n) { flagged[cause] += n; }

std::size_t IngestReport::dropped_count(const std::string& cause) const {
  auto it = dropped.find(cause);
  return it == dropped.end() ? 0 : it->second;
}

std::size_t IngestReport::flagged_count(const std::string& cause) const {
  auto it = flagged.find(cause);
  return it == flagged.end() ? 0 : it->second;
}

nlohmann::json IngestReport::to_json() const {
  nlohmann::json j;
  j["price_rows_read"] = price_rows_read;
  j["generation_readings_read"] = generation_readings_read;
  j["hourly_records"] = hourly_records;
  j["dropped"] = nlohmann::json::object();
  for (const auto& [k, v] : dropped) j["dropped"][k] = v;
  j["flagged"] = nlohmann::json::object();
  for (const auto& [k, v] : flagged) j["flagged"][k] = v;
  return j;
}

double compute_mec(double lmp, double mcc, double mlc, std::size_t row) {
  if (!std::isfinite(lmp) || !std::isfinite(mcc) || !std::isfinite(mlc))
    throw MalformedRecordError(row, "non-finite price component");
  return lmp - mcc - mlc;
}

std::vector<HourlyEnergy> aggregate_generation(std::span<const GenerationReading> readings,
                                               IngestReport* report) {
  std::vector<std::size_t> order(readings.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i : order) {
    const auto& r = readings[i];
    if (!std::isfinite(r.power_mw) || r.power_mw < 0.0)
      throw MalformedRecordError(i, "generation power must be finite and >= 0");
    const int m = r.interval_minutes;
    if (m != 5 && m != 10 && m != 15 && m != 60)
      throw MalformedRecordError(i, "interval_minutes must be one of 5, 10, 15, 60");
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = readings[a];
    const auto& y = readings[b];
    if (x.source != y.source) return x.source < y.source;
    return x.timestamp < y.timestamp;
  });

  std::vector<HourlyEnergy> out;
  std::optional<Source> current;
  std::int64_t prev_end = 0;
  std::set<std::int64_t> seen_fall_back;  // per source

  for (std::size_t idx : order) {
    const auto& r = readings[idx];
    if (current != r.source) {
      current = r.source;
      prev_end = std::numeric_limits<std::int64_t>::min();
      seen_fall_back.clear();
    }
    const std::int64_t start = r.timestamp.minutes();
    const std::int64_t end = start + r.interval_minutes;

    if (is_fall_back_hour(r.timestamp)) {
      if (!seen_fall_back.insert(start).second) {
        if (report) report->drop("generation_dst_duplicate");
        continue;
      }
    }
    if (start < prev_end) {
      throw DataIntegrityError("overlapping generation intervals for source " +
                               std::string(to_string(r.source)) + " at " +
                               r.timestamp.to_string());
    }
    prev_end = end;

    for (std::int64_t h = r.timestamp.floor_hour().minutes(); h < end; h += 60) {
      const std::int64_t seg = std::min(end, h + 60) - std::max(start, h);
      if (seg <= 0) continue;
      if (out.empty() || out.back().source != r.source || out.back().hour.minutes() != h) {
        out.push_back(HourlyEnergy{Timestamp::from_minutes(h), r.source, 0.0, 0.0, false});
      }
      out.back().mwh += r.power_mw * static_cast<double>(seg) / 60.0;
      out.back().covered_minutes += static_cast<double>(seg);
    }
  }

  for (auto& e : out) {
    if (e.covered_minutes < 60.0) {
      e.mwh *= 60.0 / e.covered_minutes;
      e.partial = true;
      if (report) report->flag("partial_coverage_source_hours");
    }
  }
  return out;
}

std::vector<HourlyRecord> join_hourly(std::span<const PriceRow> prices,
                                      std::span<const HourlyEnergy> generation,
                                      IngestReport* report) {
  struct GenHour {
    std::array<double, kSourceCount> mwh{};
    std::array<bool, kSourceCount> present{};
  };
  std::map<std::int64_t, GenHour> gen;
  for (const auto& e : generation) {
    auto& slot = gen[e.hour.minutes()];
    const auto s = static_cast<std::size_t>(e.source);
    if (slot.present[s])
      throw DataIntegrityError("duplicate generation hour " + e.hour.to_string() + " for " +
                               std::string(to_string(e.source)));
    slot.present[s] = true;
    slot.mwh[s] = e.mwh;
  }

  std::vector<std::size_t> order(prices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return prices[a].timestamp < prices[b].timestamp;
  });

  std::vector<HourlyRecord> out;
  out.reserve(prices.size());
  std::set<std::int64_t> matched;
  std::optional<Timestamp> last;
  for (std::size_t idx : order) {
    const auto& p = prices[idx];
    if (!p.timestamp.is_top_of_hour())
      throw MalformedRecordError(idx, "price timestamp not on the hour: " + p.timestamp.to_string());
    if (last && *last == p.timestamp) {
      if (is_fall_back_hour(p.timestamp)) {
        if (report) report->drop("price_dst_duplicate");
        continue;
      }
      throw DataIntegrityError("duplicate price timestamp " + p.timestamp.to_string());
    }
    last = p.timestamp;
    const double mec = compute_mec(p.lmp, p.mcc, p.mlc, idx);

    auto it = gen.find(p.timestamp.minutes());
    if (it == gen.end()) {
      if (report) report->drop("price_hour_without_generation");
      continue;
    }
    matched.insert(it->first);
    HourlyRecord rec;
    rec.timestamp = p.timestamp;
    rec.mec = mec;
    rec.gen_by_source = it->second.mwh;
    rec.total_gen = 0.0;
    for (double v : rec.gen_by_source) rec.total_gen += v;
    if (report && !std::all_of(it->second.present.begin(), it->second.present.end(),
                               [](bool b) { return b; }))
      report->flag("hours_missing_a_source");
    if (!(rec.total_gen > 0.0)) {
      if (report) report->drop("zero_total_generation");
      continue;
    }
    out.push_back(rec);
  }
  if (report) {
    const std::size_t unmatched = gen.size() - matched.size();
    if (unmatched > 0) report->drop("generation_hour_without_price", unmatched);
    report->hourly_records = out.size();
  }
  return out;
}

std::vector<PriceRow> read_prices(std::istream& in, bool json_lines, IngestReport& report) {
  std::vector<PriceRow> rows;
  std::string line;
  std::size_t line_no = 0;
  if (!json_lines) {
    expect_header(in, "timestamp,lmp,mcc,mlc");
    line_no = 1;
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++report.price_rows_read;
    Timestamp ts;
    std::optional<double> lmp, mcc, mlc;
    if (json_lines) {
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw MalformedRecordError(line_no, e.what());
      }
      if (!obj.is_object() || !obj.contains("timestamp") || !obj["timestamp"].is_string())
        throw MalformedRecordError(line_no, "missing timestamp");
      ts = parse_timestamp(obj["timestamp"].get<std::string>(), line_no);
      lmp = json_number(obj, "lmp", line_no);
      mcc = json_number(obj, "mcc", line_no);
      mlc = json_number(obj, "mlc", line_no);
    } else {
      const auto f = split_csv(line);
      if (f.size() != 4) throw MalformedRecordError(line_no, "expected 4 fields");
      ts = parse_timestamp(f[0], line_no);
      lmp = parse_number(f[1], line_no);
      mcc = parse_number(f[2], line_no);
      mlc = parse_number(f[3], line_no);
    }
    if (!ts.is_top_of_hour())
      throw MalformedRecordError(line_no, "price timestamp not on the hour");
    if (!lmp || !mcc || !mlc) {
      report.drop("price_missing_value");
      continue;
    }
    if (!std::isfinite(*lmp) || !std::isfinite(*mcc) || !std::isfinite(*mlc))
      throw MalformedRecordError(line_no, "non-finite price component");
    rows.push_back(PriceRow{ts, *lmp, *mcc, *mlc});
  }
  return rows;
}

std::vector<GenerationReading> read_generation(std::istream& in, bool json_lines,
                                               IngestReport& report) {
  std::vector<GenerationReading> rows;
  std::string line;
  std::size_t line_no = 0;
  if (!json_lines) {
    expect_header(in, "timestamp,source,power_mw,interval_min");
    line_no = 1;
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++report.generation_readings_read;
    Timestamp ts;
    std::string source;
    std::optional<double> power, interval;
    if (json_lines) {
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw MalformedRecordError(line_no, e.what());
      }
      if (!obj.is_object() || !obj.contains("timestamp") || !obj["timestamp"].is_string() ||
          !obj.contains("source") || !obj["source"].is_string())
        throw MalformedRecordError(line_no, "missing timestamp or source");
      ts = parse_timestamp(obj["timestamp"].get<std::string>(), line_no);
      source = obj["source"].get<std::string>();
      power = json_number(obj, "power_mw", line_no);
      interval = json_number(obj, "interval_min", line_no);
    } else {
      const auto f = split_csv(line);
      if (f.size() != 4) throw MalformedRecordError(line_no, "expected 4 fields");
      ts = parse_timestamp(f[0], line_no);
      source = std::string(f[1]);
      power = parse_number(f[2], line_no);
      interval = parse_number(f[3], line_no);
    }
    if (!power || !interval) {
      report.drop("generation_missing_value");
      continue;
    }
    const double iv = *interval;
    if (iv != 5 && iv != 10 && iv != 15 && iv != 60)
      throw MalformedRecordError(line_no, "interval_min must be one of 5, 10, 15, 60");
    if (!std::isfinite(*power) || *power < 0.0)
      throw MalformedRecordError(line_no, "power_mw must be finite and >= 0");
    rows.push_back(GenerationReading{ts, source_from_label(source), *power, static_cast<int>(iv)});
  }
  return rows;
}

std::vector<PriceRow> read_prices(const std::filesystem::path& path, IngestReport& report) {
  auto in = open_or_throw(path);
  try {
    return read_prices(in, is_json_lines(path), report);
  } catch (const MalformedRecordError& e) {
    throw MalformedRecordError(e.row(), path.string() + ": " + e.what());
  }
}

std::vector<GenerationReading> read_generation(const std::filesystem::path& path,
                                               IngestReport& report) {
  auto in = open_or_throw(path);
  try {
    return read_generation(in, is_json_lines(path), report);
  } catch (const MalformedRecordError& e) {
    throw MalformedRecordError(e.row(), path.string() + ": " + e.what());
  }
}

void write_prices_csv(std::ostream& out, std::span<const PriceRow> rows) {
  out << "timestamp,lmp,mcc,mlc\n";
  for (const auto& r : rows)
    out << r.timestamp.to_string() << ',' << format_double(r.lmp) << ','
        << format_double(r.mcc) << ',' << format_double(r.mlc) << '\n';
}

void write_generation_csv(std::ostream& out, std::span<const GenerationReading> readings) {
  out << "timestamp,source,power_mw,interval_min\n";
  for (const auto& r : readings)
    out << r.timestamp.to_string() << ',' << to_string(r.source) << ','
        << format_double(r.power_mw) << ',' << r.interval_minutes << '\n';
}

void write_hourly_csv(std::ostream& out, std::span<const HourlyRecord> records) {
  out << "timestamp,mec,hydro_mwh,solar_mwh,wind_mwh,other_mwh,total_mwh\n";
  for (const auto& r : records) {
    out << r.timestamp.to_string() << ',' << format_double(r.mec);
    for (double v : r.gen_by_source) out << ',' << format_double(v);
    out << ',' << format_double(r.total_gen) << '\n';
  }
}

IngestResult ingest_files(const std::filesystem::path& prices,
                          const std::filesystem::path& generation) {
  IngestResult result;
  const auto price_rows = read_prices(prices, result.report);
  const auto readings = read_generation(generation, result.report);
  const auto hourly = aggregate_generation(readings, &result.report);
  result.records = join_hourly(price_rows, hourly, &result.report);
  return result;
}

}  // namespace hydroprice
