#include "hydroprice/timestamp.hpp"

#include <charconv>
#include <cstdio>

namespace hydroprice {

namespace {

constexpr std::int64_t kMinutesPerDay = 24 * 60;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Timestamp Timestamp::from_civil(int year, unsigned month, unsigned day,
                                unsigned hour, unsigned minute) {
  using namespace std::chrono;
  const sys_days d{year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}}};
  return from_minutes(std::int64_t{d.time_since_epoch().count()} * kMinutesPerDay +
                      std::int64_t{hour} * 60 + minute);
}

std::optional<Timestamp> Timestamp::parse(std::string_view text) {
  // YYYY-MM-DDTHH:MM[:SS]
  if (text.size() != 16 && text.size() != 19) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':')
    return std::nullopt;
  unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), mo) ||
      !parse_uint(text.substr(8, 2), d) || !parse_uint(text.substr(11, 2), h) ||
      !parse_uint(text.substr(14, 2), mi))
    return std::nullopt;
  if (text.size() == 19) {
    if (text[16] != ':' || !parse_uint(text.substr(17, 2), s) || s != 0)
      return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{static_cast<int>(y)},
                           std::chrono::month{mo}, std::chrono::day{d}};
  if (!ymd.ok() || h > 23 || mi > 59) return std::nullopt;
  return from_civil(static_cast<int>(y), mo, d, h, mi);
}

std::chrono::sys_days Timestamp::days() const {
  return std::chrono::sys_days{
      std::chrono::days{floor_div(minutes_, kMinutesPerDay)}};
}

int Timestamp::year() const {
  return static_cast<int>(std::chrono::year_month_day{days()}.year());
}
unsigned Timestamp::month() const {
  return static_cast<unsigned>(std::chrono::year_month_day{days()}.month());
}
unsigned Timestamp::day() const {
  return static_cast<unsigned>(std::chrono::year_month_day{days()}.day());
}
unsigned Timestamp::hour() const {
  return static_cast<unsigned>((minutes_ - floor_div(minutes_, kMinutesPerDay) * kMinutesPerDay) / 60);
}
unsigned Timestamp::minute() const {
  return static_cast<unsigned>(((minutes_ % 60) + 60) % 60);
}
unsigned Timestamp::weekday() const {
  return std::chrono::weekday{days()}.c_encoding();
}

std::string Timestamp::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:%02u", year(), month(),
                day(), hour(), minute());
  return buf;
}

bool is_fall_back_hour(Timestamp t) {
  using namespace std::chrono;
  if (t.month() != 10 && t.month() != 11) return false;
  if (t.hour() != 1) return false;
  const std::chrono::year y{t.year()};
  year_month_day end;
  if (t.year() >= 2007) {
    end = year_month_day{sys_days{y / November / Sunday[1]}};
  } else {
    end = year_month_day{sys_days{y / October / Sunday[last]}};
  }
  return static_cast<unsigned>(end.month()) == t.month() &&
         static_cast<unsigned>(end.day()) == t.day();
}

}  // namespace hydroprice
