#include "hydroprice/series_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hydroprice/errors.hpp"
#include "hydroprice/format.hpp"

namespace hydroprice {

namespace {

constexpr const char* kFrameHeader =
    "timestamp,detrended_price,detrended_volatility,hydro_pct,solar_pct,wind_pct";

}  // namespace

EwmAccumulator::EwmAccumulator(double span) {
  if (!(span >= 2.0)) throw ParameterError("EWMSD span must be >= 2");
  decay_ = 1.0 - 2.0 / (span + 1.0);
}

void EwmAccumulator::add(double x) {
  if (!std::isfinite(x)) throw DomainError("non-finite value in EWMSD input");
  if (count_ == 0) origin_ = x;
  const double xc = x - origin_;
  weight_ = decay_ * weight_ + 1.0;
  const double delta = xc - mean_;
  mean_ += delta / weight_;
  m2_ = decay_ * m2_ + delta * (xc - mean_);
  ++count_;
}

double EwmAccumulator::stddev() const { return count_ < 2 ? 0.0 : std::sqrt(variance()); }

std::vector<double> ewmsd(std::span<const double> series, double span) {
  EwmAccumulator acc(span);
  std::vector<double> out;
  out.reserve(series.size());
  for (double x : series) {
    acc.add(x);
    out.push_back(acc.stddev());
  }
  return out;
}

VolatilitySeries ewmsd(std::span<const Timestamp> timestamps, std::span<const double> series,
                       double span) {
  if (timestamps.size() != series.size()) throw ParameterError("timestamps and series differ in length");
  VolatilitySeries v;
  v.timestamps.assign(timestamps.begin(), timestamps.end());
  v.values = ewmsd(series, span);
  v.span = span;
  return v;
}

double penetration(double source_mwh, double total_gen) {
  if (!(total_gen > 0.0)) throw DomainError("penetration needs positive total generation");
  return 100.0 * source_mwh / total_gen;
}

std::array<double, kSourceCount> penetration(const std::array<double, kSourceCount>& gen_by_source,
                                             double total_gen) {
  std::array<double, kSourceCount> out{};
  for (std::size_t s = 0; s < kSourceCount; ++s) out[s] = penetration(gen_by_source[s], total_gen);
  return out;
}

PenetrationSeries penetration_series(std::span<const HourlyRecord> records) {
  PenetrationSeries p;
  p.timestamps.reserve(records.size());
  for (const auto& r : records) {
    const auto pct = penetration(r.gen_by_source, r.total_gen);
    p.timestamps.push_back(r.timestamp);
    p.hydro_pct.push_back(pct[static_cast<std::size_t>(Source::hydro)]);
    p.solar_pct.push_back(pct[static_cast<std::size_t>(Source::solar)]);
    p.wind_pct.push_back(pct[static_cast<std::size_t>(Source::wind)]);
  }
  return p;
}

void StudyFrame::validate() const {
  const auto n = timestamps.size();
  for (const auto& [name, col] : columns())
    if (col->size() != n) throw DataIntegrityError("study frame column " + name + " has wrong length");
  for (std::size_t i = 1; i < n; ++i)
    if (!(timestamps[i - 1] < timestamps[i]))
      throw DataIntegrityError("study frame timestamps not strictly increasing at " +
                               timestamps[i].to_string());
}

std::vector<std::pair<std::string, const std::vector<double>*>> StudyFrame::columns() const {
  return {{"detrended_price", &detrended_price},
          {"detrended_volatility", &detrended_volatility},
          {"hydro_pct", &hydro_pct},
          {"solar_pct", &solar_pct},
          {"wind_pct", &wind_pct}};
}

const std::vector<double>& StudyFrame::column(const std::string& name) const {
  for (const auto& [n, col] : columns())
    if (n == name) return *col;
  throw ParameterError("no study frame column named " + name);
}

StudyFrame build_study_frame(std::span<const HourlyRecord> records,
                             std::span<const double> detrended_price, double span) {
  if (records.size() != detrended_price.size())
    throw ParameterError("records and detrended price differ in length");
  StudyFrame f;
  auto pen = penetration_series(records);
  f.timestamps = std::move(pen.timestamps);
  f.hydro_pct = std::move(pen.hydro_pct);
  f.solar_pct = std::move(pen.solar_pct);
  f.wind_pct = std::move(pen.wind_pct);
  f.detrended_price.assign(detrended_price.begin(), detrended_price.end());
  f.detrended_volatility = ewmsd(detrended_price, span);
  f.validate();
  return f;
}

void write_study_frame_csv(std::ostream& out, const StudyFrame& frame) {
  out << kFrameHeader << '\n';
  for (std::size_t i = 0; i < frame.size(); ++i) {
    out << frame.timestamps[i].to_string();
    for (const auto& [name, col] : frame.columns()) out << ',' << format_double((*col)[i]);
    out << '\n';
  }
}

StudyFrame read_study_frame_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.substr(0, line.find_last_not_of("\r\n ") + 1) != kFrameHeader)
    throw MalformedRecordError(1, std::string("expected header ") + kFrameHeader);
  StudyFrame f;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    auto ts = Timestamp::parse(field);
    if (!ts) throw MalformedRecordError(line_no, "bad timestamp");
    f.timestamps.push_back(*ts);
    std::vector<double>* cols[] = {&f.detrended_price, &f.detrended_volatility, &f.hydro_pct,
                                   &f.solar_pct, &f.wind_pct};
    for (auto* col : cols) {
      if (!std::getline(ss, field, ',')) throw MalformedRecordError(line_no, "missing field");
      while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw MalformedRecordError(line_no, "bad number '" + field + "'");
      col->push_back(v);
    }
  }
  f.validate();
  return f;
}

DescriptiveStats descriptive_stats(std::span<const double> column) {
  if (column.empty()) throw DomainError("descriptive statistics of an empty column");
  DescriptiveStats s;
  s.n = column.size();
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t mid = s.n / 2;
  s.median = (s.n % 2 == 1) ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  s.mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(s.n);
  if (s.n == 1) {
    s.std = 0.0;
    s.degenerate = true;
  } else {
    double ss = 0.0;
    for (double v : column) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::vector<std::pair<std::string, DescriptiveStats>> descriptive_stats(const StudyFrame& frame) {
  if (frame.size() == 0) throw DomainError("descriptive statistics of an empty frame");
  std::vector<std::pair<std::string, DescriptiveStats>> out;
  for (const auto& [name, col] : frame.columns()) out.emplace_back(name, descriptive_stats(*col));
  return out;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace hydroprice
