#include "sniffwatch/timestamp.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sniffwatch {

std::string to_seconds_string(Timestamp ts) {
  return fmt::format("{}.{:06d}", ts.sec, ts.usec);
}

std::string to_iso8601(Timestamp ts) {
  using namespace std::chrono;
  auto day_count = ts.sec / 86400;
  auto second_of_day = ts.sec % 86400;
  if (second_of_day < 0) {
    second_of_day += 86400;
    --day_count;
  }
  const year_month_day ymd{sys_days{days{day_count}}};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:06d}Z", int(ymd.year()),
                     unsigned(ymd.month()), unsigned(ymd.day()), second_of_day / 3600,
                     (second_of_day / 60) % 60, second_of_day % 60, ts.usec);
}

Timestamp parse_iso8601(const std::string& text) {
  int year = 0;
  unsigned month = 0, day = 0, hour = 0, minute = 0, second = 0, micros = 0;
  int consumed = 0;
  // Exactly the shape to_iso8601 produces: 27 characters.
  if (text.size() != 27 ||
      std::sscanf(text.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u.%6uZ%n", &year, &month, &day, &hour,
                  &minute, &second, &micros, &consumed) != 7 ||
      consumed != 27) {
    throw std::invalid_argument("not an ISO-8601 UTC timestamp: " + text);
  }
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
    throw std::invalid_argument("timestamp out of range: " + text);
  }
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return Timestamp{std::int64_t{days_since_epoch} * 86400 + hour * 3600 + minute * 60 + second,
                   micros};
}

std::int64_t seconds_to_micros(double seconds) {
  return std::llround(seconds * 1e6);
}

}  // namespace sniffwatch
