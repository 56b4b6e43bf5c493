#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace sniffwatch {

// Capture time as carried by a pcap record header. All rule arithmetic is
// done on total microseconds so thresholds never go through floating point.
struct Timestamp {
  std::int64_t sec = 0;
  std::uint32_t usec = 0;

  static constexpr std::int64_t kMicrosPerSecond = 1'000'000;

  static constexpr Timestamp from_micros(std::int64_t micros) {
    auto s = micros / kMicrosPerSecond;
    auto u = micros % kMicrosPerSecond;
    if (u < 0) {
      u += kMicrosPerSecond;
      --s;
    }
    return Timestamp{s, static_cast<std::uint32_t>(u)};
  }

  constexpr std::int64_t micros() const { return sec * kMicrosPerSecond + usec; }

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

// "10.712000"
std::string to_seconds_string(Timestamp ts);

// "1970-01-01T00:00:10.712000Z"; always UTC.
std::string to_iso8601(Timestamp ts);

// Inverse of to_iso8601. Throws std::invalid_argument on anything else.
Timestamp parse_iso8601(const std::string& text);

// Seconds (possibly fractional) to whole microseconds, rounded to nearest.
std::int64_t seconds_to_micros(double seconds);

}  // namespace sniffwatch
