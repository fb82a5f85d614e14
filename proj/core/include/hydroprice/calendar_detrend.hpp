#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hydroprice/ingest.hpp"
#include "hydroprice/timestamp.hpp"

namespace hydroprice {

enum class Season { winter = 0, spring = 1, summer = 2, fall = 3 };
inline constexpr std::array<Season, 4> kAllSeasons = {Season::winter, Season::spring,
                                                      Season::summer, Season::fall};

std::string_view to_string(Season s);

// Meteorological seasons: DJF winter, MAM spring, JJA summer, SON fall.
Season season_of(Timestamp t);

struct CalendarFeatures {
  unsigned hour = 0;
  Season season = Season::winter;
  bool weekend = false;
};

CalendarFeatures calendar_features(Timestamp t);

// Price ~ hour + season + hour:season + weekend with reference-cell coding
// (hour 0, winter and weekday are the reference levels).
class DetrendModel {
 public:
  static constexpr std::size_t kParameterCount = 1 + 23 + 3 + 69 + 1;

  DetrendModel() = default;
  DetrendModel(Eigen::VectorXd coefficients, double grand_mean, std::size_t n_obs);

  double intercept() const { return coefficients_(0); }
  double grand_mean() const { return grand_mean_; }
  std::size_t n_obs() const { return n_obs_; }
  std::size_t residual_dof() const { return n_obs_ - kParameterCount; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  // Effect of a named level, e.g. "season[summer]" or "hour[7]:season[fall]".
  // Reference levels report 0.
  double effect(const std::string& name) const;

  double fitted(const CalendarFeatures& f) const;

  nlohmann::json to_json() const;
  static DetrendModel from_json(const nlohmann::json& j);

  // Column names in design order, excluding the intercept.
  static const std::vector<std::string>& effect_names();
  static void design_row(const CalendarFeatures& f, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row);

 private:
  Eigen::VectorXd coefficients_ = Eigen::VectorXd::Zero(kParameterCount);
  double grand_mean_ = 0.0;
  std::size_t n_obs_ = 0;
};

// Ordinary least squares on the reference-coded calendar design. Requires
// all four seasons, both weekday and weekend rows, and at least two rows in
// every (hour, season) cell; otherwise throws FitError listing the gaps.
DetrendModel fit_detrend(std::span<const Timestamp> timestamps, std::span<const double> values);
DetrendModel fit_detrend(std::span<const HourlyRecord> records);

// value - fitted + grand_mean.
std::vector<double> detrend(std::span<const Timestamp> timestamps, std::span<const double> values,
                            const DetrendModel& model);

struct DetrendedPoint {
  Timestamp timestamp;
  double detrended_price = 0.0;
};
std::vector<DetrendedPoint> detrend(std::span<const HourlyRecord> records, const DetrendModel& model);

}  // namespace hydroprice
