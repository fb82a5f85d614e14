#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hydroprice/ingest.hpp"
#include "hydroprice/timestamp.hpp"

namespace hydroprice {

inline constexpr double kDefaultEwmsdSpan = 24.0;

// Exponentially weighted mean/variance with weights (1 - alpha)^lag,
// alpha = 2 / (span + 1). Weighted Welford update; variance is the
// uncorrected (population) weighted variance.
class EwmAccumulator {
 public:
  explicit EwmAccumulator(double span);

  void add(double x);
  double mean() const { return origin_ + mean_; }
  double variance() const { return weight_ > 0.0 ? std::max(0.0, m2_ / weight_) : 0.0; }
  double stddev() const;
  std::size_t count() const { return count_; }

 private:
  double decay_;
  double origin_ = 0.0;  // first observation; values are accumulated relative to it
  double weight_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  std::size_t count_ = 0;
};

struct VolatilitySeries {
  std::vector<Timestamp> timestamps;
  std::vector<double> values;
  double span = kDefaultEwmsdSpan;
};

// EWMSD at every position; value[0] is 0. Throws ParameterError for
// span < 2, DomainError for non-finite input.
std::vector<double> ewmsd(std::span<const double> series, double span);
VolatilitySeries ewmsd(std::span<const Timestamp> timestamps, std::span<const double> series,
                       double span);

// Percent of total_gen for each source. Throws DomainError if total <= 0.
std::array<double, kSourceCount> penetration(const std::array<double, kSourceCount>& gen_by_source,
                                             double total_gen);
double penetration(double source_mwh, double total_gen);

struct PenetrationSeries {
  std::vector<Timestamp> timestamps;
  std::vector<double> hydro_pct, solar_pct, wind_pct;
};
PenetrationSeries penetration_series(std::span<const HourlyRecord> records);

struct StudyFrame {
  std::vector<Timestamp> timestamps;
  std::vector<double> detrended_price;
  std::vector<double> detrended_volatility;
  std::vector<double> hydro_pct;
  std::vector<double> solar_pct;
  std::vector<double> wind_pct;

  std::size_t size() const { return timestamps.size(); }
  // Throws DataIntegrityError on ragged columns or non-increasing time.
  void validate() const;
  // (name, column) in CSV order, excluding timestamp.
  std::vector<std::pair<std::string, const std::vector<double>*>> columns() const;
  const std::vector<double>& column(const std::string& name) const;
};

StudyFrame build_study_frame(std::span<const HourlyRecord> records,
                             std::span<const double> detrended_price, double span);

void write_study_frame_csv(std::ostream& out, const StudyFrame& frame);
StudyFrame read_study_frame_csv(std::istream& in);

struct DescriptiveStats {
  std::size_t n = 0;
  double min = 0.0, max = 0.0, median = 0.0, mean = 0.0, std = 0.0;
  bool degenerate = false;  // single row: std reported as 0
};

// Sample std (n - 1); median averages the middle pair for even n.
// Throws DomainError for an empty column.
DescriptiveStats descriptive_stats(std::span<const double> column);
std::vector<std::pair<std::string, DescriptiveStats>> descriptive_stats(const StudyFrame& frame);

// Linear-interpolation empirical quantile (the R type 7 / numpy default).
double empirical_quantile(std::vector<double> values, double q);

}  // namespace hydroprice
