#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace hydroprice {

// Market-local civil date-time at minute resolution. No zone is attached;
// ISO-NE publishes in US Eastern civil time.
class Timestamp {
 public:
  constexpr Timestamp() = default;

  static Timestamp from_civil(int year, unsigned month, unsigned day,
                              unsigned hour = 0, unsigned minute = 0);
  static Timestamp from_minutes(std::int64_t minutes_since_epoch) {
    Timestamp t;
    t.minutes_ = minutes_since_epoch;
    return t;
  }

  // Accepts "YYYY-MM-DDTHH:MM[:SS]" or with a space separator. Seconds must
  // be zero.
  static std::optional<Timestamp> parse(std::string_view text);

  std::int64_t minutes() const noexcept { return minutes_; }

  int year() const;
  unsigned month() const;
  unsigned day() const;
  unsigned hour() const;
  unsigned minute() const;
  // 0 = Sunday ... 6 = Saturday
  unsigned weekday() const;

  bool is_top_of_hour() const noexcept { return minute() == 0; }
  Timestamp floor_hour() const noexcept {
    return from_minutes(minutes_ - (((minutes_ % 60) + 60) % 60));
  }
  Timestamp plus_minutes(std::int64_t m) const noexcept {
    return from_minutes(minutes_ + m);
  }

  // "YYYY-MM-DDTHH:MM"
  std::string to_string() const;

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;

 private:
  std::chrono::sys_days days() const;

  std::int64_t minutes_ = 0;
};

// True for the civil hour that repeats when US daylight saving time ends
// (01:00 on the first Sunday of November).
bool is_fall_back_hour(Timestamp t);

}  // namespace hydroprice
