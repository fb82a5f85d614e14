#include "hydroprice/calendar_detrend.hpp"

#include <algorithm>
#include <cmath>

#include "hydroprice/errors.hpp"
#include "hydroprice/least_squares.hpp"

namespace hydroprice {

namespace {

constexpr std::size_t kHourBase = 1;          // hour[1..23]
constexpr std::size_t kSeasonBase = 24;       // season[spring, summer, fall]
constexpr std::size_t kInteractionBase = 27;  // hour[h]:season[s], h-major
constexpr std::size_t kWeekendIndex = 96;

std::vector<std::string> make_effect_names() {
  std::vector<std::string> names;
  for (int h = 1; h < 24; ++h) names.push_back("hour[" + std::to_string(h) + "]");
  for (std::size_t s = 1; s < 4; ++s)
    names.push_back("season[" + std::string(to_string(kAllSeasons[s])) + "]");
  for (int h = 1; h < 24; ++h)
    for (std::size_t s = 1; s < 4; ++s)
      names.push_back("hour[" + std::to_string(h) + "]:season[" +
                      std::string(to_string(kAllSeasons[s])) + "]");
  names.push_back("weekend[true]");
  return names;
}

}  // namespace

std::string_view to_string(Season s) {
  switch (s) {
    case Season::winter: return "winter";
    case Season::spring: return "spring";
    case Season::summer: return "summer";
    case Season::fall: return "fall";
  }
  return "winter";
}

Season season_of(Timestamp t) {
  switch (t.month()) {
    case 12: case 1: case 2: return Season::winter;
    case 3: case 4: case 5: return Season::spring;
    case 6: case 7: case 8: return Season::summer;
    default: return Season::fall;
  }
}

CalendarFeatures calendar_features(Timestamp t) {
  const unsigned wd = t.weekday();
  return CalendarFeatures{t.hour(), season_of(t), wd == 0 || wd == 6};
}

DetrendModel::DetrendModel(Eigen::VectorXd coefficients, double grand_mean, std::size_t n_obs)
    : coefficients_(std::move(coefficients)), grand_mean_(grand_mean), n_obs_(n_obs) {
  if (static_cast<std::size_t>(coefficients_.size()) != kParameterCount)
    throw ParameterError("detrend model needs " + std::to_string(kParameterCount) + " coefficients");
}

const std::vector<std::string>& DetrendModel::effect_names() {
  static const std::vector<std::string> names = make_effect_names();
  return names;
}

void DetrendModel::design_row(const CalendarFeatures& f, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
  row.setZero();
  row(0) = 1.0;
  const auto s = static_cast<std::size_t>(f.season);
  if (f.hour > 0) row(kHourBase + f.hour - 1) = 1.0;
  if (s > 0) row(kSeasonBase + s - 1) = 1.0;
  if (f.hour > 0 && s > 0) row(kInteractionBase + (f.hour - 1) * 3 + (s - 1)) = 1.0;
  if (f.weekend) row(kWeekendIndex) = 1.0;
}

double DetrendModel::fitted(const CalendarFeatures& f) const {
  if (f.hour > 23) throw DomainError("hour out of range");
  const auto s = static_cast<std::size_t>(f.season);
  double v = coefficients_(0);
  if (f.hour > 0) v += coefficients_(kHourBase + f.hour - 1);
  if (s > 0) v += coefficients_(kSeasonBase + s - 1);
  if (f.hour > 0 && s > 0) v += coefficients_(kInteractionBase + (f.hour - 1) * 3 + (s - 1));
  if (f.weekend) v += coefficients_(kWeekendIndex);
  return v;
}

double DetrendModel::effect(const std::string& name) const {
  const auto& names = effect_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return 0.0;
  return coefficients_(1 + (it - names.begin()));
}

nlohmann::json DetrendModel::to_json() const {
  nlohmann::json j;
  j["intercept"] = intercept();
  j["grand_mean"] = grand_mean_;
  j["n_obs"] = n_obs_;
  j["residual_dof"] = residual_dof();
  j["reference_levels"] = {{"hour", 0}, {"season", "winter"}, {"weekend", false}};
  nlohmann::json effects = nlohmann::json::object();
  const auto& names = effect_names();
  for (std::size_t i = 0; i < names.size(); ++i) effects[names[i]] = coefficients_(1 + i);
  j["effects"] = effects;
  return j;
}

DetrendModel DetrendModel::from_json(const nlohmann::json& j) {
  try {
    Eigen::VectorXd c(kParameterCount);
    c(0) = j.at("intercept").get<double>();
    const auto& effects = j.at("effects");
    const auto& names = effect_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!effects.contains(names[i])) throw FitError("detrend model has no level " + names[i]);
      c(1 + i) = effects.at(names[i]).get<double>();
    }
    return DetrendModel(c, j.at("grand_mean").get<double>(), j.at("n_obs").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad detrend model JSON: ") + e.what());
  }
}

DetrendModel fit_detrend(std::span<const Timestamp> timestamps, std::span<const double> values) {
  if (timestamps.size() != values.size()) throw ParameterError("timestamps and values differ in length");
  const std::size_t n = timestamps.size();

  std::array<std::array<std::size_t, 4>, 24> cell{};
  std::array<std::size_t, 2> weekend_count{};
  std::vector<CalendarFeatures> features(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(values[i])) throw DomainError("non-finite price at row " + std::to_string(i));
    features[i] = calendar_features(timestamps[i]);
    ++cell[features[i].hour][static_cast<std::size_t>(features[i].season)];
    ++weekend_count[features[i].weekend ? 1 : 0];
  }

  std::string missing;
  for (auto s : kAllSeasons) {
    std::size_t total = 0;
    for (int h = 0; h < 24; ++h) total += cell[h][static_cast<std::size_t>(s)];
    if (total == 0) missing += std::string(missing.empty() ? "" : ", ") + "season " + std::string(to_string(s));
  }
  for (int h = 0; h < 24; ++h) {
    for (auto s : kAllSeasons) {
      const auto c = cell[h][static_cast<std::size_t>(s)];
      if (c < 2)
        missing += std::string(missing.empty() ? "" : ", ") + "hour " + std::to_string(h) + "/" +
                   std::string(to_string(s)) + " (" + std::to_string(c) + " rows)";
    }
  }
  if (weekend_count[0] == 0) missing += std::string(missing.empty() ? "" : ", ") + "weekday rows";
  if (weekend_count[1] == 0) missing += std::string(missing.empty() ? "" : ", ") + "weekend rows";
  if (!missing.empty()) throw FitError("calendar design is rank deficient; missing cells: " + missing);

  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(DetrendModel::kParameterCount));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    DetrendModel::design_row(features[i], design.row(static_cast<Eigen::Index>(i)));
    y(static_cast<Eigen::Index>(i)) = values[i];
  }

  Eigen::VectorXd coef;
  try {
    coef = ols_coefficients(design, y);
  } catch (const CollinearityError& e) {
    throw FitError(std::string("calendar design is rank deficient: ") + e.what());
  }
  return DetrendModel(coef, y.mean(), n);
}

DetrendModel fit_detrend(std::span<const HourlyRecord> records) {
  std::vector<Timestamp> ts(records.size());
  std::vector<double> mec(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    ts[i] = records[i].timestamp;
    mec[i] = records[i].mec;
  }
  return fit_detrend(ts, mec);
}

std::vector<double> detrend(std::span<const Timestamp> timestamps, std::span<const double> values,
                            const DetrendModel& model) {
  if (timestamps.size() != values.size()) throw ParameterError("timestamps and values differ in length");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = values[i] - model.fitted(calendar_features(timestamps[i])) + model.grand_mean();
  return out;
}

std::vector<DetrendedPoint> detrend(std::span<const HourlyRecord> records, const DetrendModel& model) {
  std::vector<DetrendedPoint> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out[i].timestamp = records[i].timestamp;
    out[i].detrended_price =
        records[i].mec - model.fitted(calendar_features(records[i].timestamp)) + model.grand_mean();
  }
  return out;
}

}  // namespace hydroprice
