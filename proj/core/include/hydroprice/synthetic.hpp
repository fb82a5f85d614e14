#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydroprice/ingest.hpp"
#include "hydroprice/timestamp.hpp"

namespace hydroprice {

struct FixtureSpec {
  // Planted price response per percentage point of penetration.
  double beta_hydro = -0.56;
  double beta_wind = -0.82;
  double beta_solar = -4.33;
  double intercept = 40.0;
  double noise_std = 5.0;
  bool calendar_effects = true;
  Timestamp start = Timestamp::from_civil(2015, 1, 1);

  nlohmann::json to_json() const;
};

struct SyntheticData {
  std::vector<PriceRow> prices;
  std::vector<GenerationReading> generation;
  FixtureSpec truth;
  std::uint64_t seed = 0;
  std::size_t n_hours = 0;
};

// Calendar-structured synthetic market:
//
//   mec(t) = intercept + calendar(t) + sum_k beta_k * pct_k(t) + noise
//
// Total generation follows a diurnal and seasonal load shape; source shares
// are noisy around fixed levels and are demeaned within every
// (hour, season, weekend) cell, so the calendar adjustment cannot absorb any
// of the planted penetration effect. Hydro and "other" report every 5 min,
// wind and solar every 15 min. With fewer than 365 days the days are spread
// over one year so that every season is covered.
//
// Throws ParameterError for n_hours < 24 * 90.
SyntheticData synthetic_fixture(std::uint64_t seed, std::size_t n_hours, const FixtureSpec& spec = {});

}  // namespace hydroprice
