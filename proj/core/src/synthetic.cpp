#include "hydroprice/synthetic.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "hydroprice/calendar_detrend.hpp"
#include "hydroprice/errors.hpp"
#include "hydroprice/random.hpp"

namespace hydroprice {

namespace {

constexpr std::array<double, 4> kSeasonLevel = {6.0, -4.0, 9.0, 0.0};  // winter..fall
constexpr std::array<double, 4> kDiurnalAmp = {8.0, 5.0, 14.0, 6.0};
constexpr std::array<double, 4> kLoadFactor = {1.08, 0.90, 1.15, 0.95};

// Mean share (percent) and half-width of the uniform share noise.
struct ShareShape {
  double level;
  double half_width;
};
constexpr ShareShape kHydroShare{9.0, 6.0};
constexpr ShareShape kWindShare{7.0, 5.0};
constexpr ShareShape kSolarShare{2.5, 1.5};

double calendar_effect(const CalendarFeatures& f) {
  const auto s = static_cast<std::size_t>(f.season);
  const double phase = 2.0 * std::numbers::pi * (static_cast<double>(f.hour) - 9.0) / 24.0;
  return kSeasonLevel[s] + kDiurnalAmp[s] * std::sin(phase) + (f.weekend ? -3.5 : 0.0);
}

double system_load_mw(const CalendarFeatures& f) {
  const auto s = static_cast<std::size_t>(f.season);
  const double phase = 2.0 * std::numbers::pi * (static_cast<double>(f.hour) - 10.0) / 24.0;
  return 13000.0 * kLoadFactor[s] * (1.0 + 0.18 * std::sin(phase)) * (f.weekend ? 0.92 : 1.0);
}

std::size_t cell_index(const CalendarFeatures& f) {
  return (f.hour * 4 + static_cast<std::size_t>(f.season)) * 2 + (f.weekend ? 1 : 0);
}

}  // namespace

nlohmann::json FixtureSpec::to_json() const {
  return {{"beta_hydro", beta_hydro},   {"beta_wind", beta_wind},
          {"beta_solar", beta_solar},   {"intercept", intercept},
          {"noise_std", noise_std},     {"calendar_effects", calendar_effects},
          {"start", start.to_string()}};
}

SyntheticData synthetic_fixture(std::uint64_t seed, std::size_t n_hours, const FixtureSpec& spec) {
  if (n_hours < 24 * 90) throw ParameterError("synthetic fixture needs at least 90 days of hours");
  if (!(spec.noise_std >= 0.0)) throw ParameterError("noise_std must be >= 0");

  const std::size_t n_days = (n_hours + 23) / 24;
  std::vector<Timestamp> hours;
  hours.reserve(n_hours);
  for (std::size_t d = 0; d < n_days && hours.size() < n_hours; ++d) {
    const std::size_t offset = n_days >= 365 ? d : (d * 365) / n_days;
    const Timestamp day = spec.start.plus_minutes(static_cast<std::int64_t>(offset) * 24 * 60);
    for (int h = 0; h < 24 && hours.size() < n_hours; ++h) hours.push_back(day.plus_minutes(h * 60));
  }

  std::mt19937_64 rng(mix_seed(seed, 0));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  const std::size_t n = hours.size();
  std::vector<CalendarFeatures> feats(n);
  std::vector<std::array<double, 3>> raw(n);  // hydro, wind, solar share noise
  std::map<std::size_t, std::pair<std::array<double, 3>, std::size_t>> cell_sum;
  for (std::size_t i = 0; i < n; ++i) {
    feats[i] = calendar_features(hours[i]);
    raw[i] = {kHydroShare.half_width * unit(rng), kWindShare.half_width * unit(rng),
              kSolarShare.half_width * unit(rng)};
    auto& acc = cell_sum[cell_index(feats[i])];
    for (int k = 0; k < 3; ++k) acc.first[k] += raw[i][k];
    ++acc.second;
  }

  SyntheticData out;
  out.truth = spec;
  out.seed = seed;
  out.n_hours = n;
  out.prices.reserve(n);
  out.generation.reserve(n * 32);

  std::uniform_real_distribution<double> congestion(-2.0, 3.0);
  std::uniform_real_distribution<double> loss(-1.0, 1.0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& cell = cell_sum[cell_index(feats[i])];
    const double count = static_cast<double>(cell.second);
    const double hydro = kHydroShare.level + raw[i][0] - cell.first[0] / count;
    const double wind = kWindShare.level + raw[i][1] - cell.first[1] / count;
    const double solar = kSolarShare.level + raw[i][2] - cell.first[2] / count;

    const double load = system_load_mw(feats[i]);
    const std::array<double, kSourceCount> mw = {
        load * hydro / 100.0, load * solar / 100.0, load * wind / 100.0,
        load * (100.0 - hydro - solar - wind) / 100.0};

    double mec = spec.intercept + spec.beta_hydro * hydro + spec.beta_wind * wind +
                 spec.beta_solar * solar;
    if (spec.calendar_effects) mec += calendar_effect(feats[i]);
    mec += spec.noise_std * noise(rng);

    const double mcc = congestion(rng);
    const double mlc = loss(rng);
    out.prices.push_back(PriceRow{hours[i], mec + mcc + mlc, mcc, mlc});

    for (auto src : kAllSources) {
      const int interval = (src == Source::wind || src == Source::solar) ? 15 : 5;
      for (int m = 0; m < 60; m += interval) {
        out.generation.push_back(
            GenerationReading{hours[i].plus_minutes(m), src, mw[static_cast<std::size_t>(src)], interval});
      }
    }
  }
  return out;
}

}  // namespace hydroprice
