#include "sniffwatch/net_types.hpp"

#include <fmt/format.h>

#include <charconv>
#include <stdexcept>

namespace sniffwatch {

MacAddress MacAddress::from_bytes(ByteView bytes) {
  if (bytes.size() < 6) {
    throw std::invalid_argument("MAC address needs 6 bytes");
  }
  std::array<std::uint8_t, 6> octets{};
  std::copy_n(bytes.begin(), 6, octets.begin());
  return MacAddress{octets};
}

MacAddress MacAddress::parse(std::string_view text) {
  std::array<std::uint8_t, 6> octets{};
  if (text.size() != 17) {
    throw std::invalid_argument(fmt::format("bad MAC address '{}'", text));
  }
  for (std::size_t i = 0; i < 6; ++i) {
    const auto field = text.substr(i * 3, 2);
    if (i < 5 && text[i * 3 + 2] != ':') {
      throw std::invalid_argument(fmt::format("bad MAC address '{}'", text));
    }
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + 2, value, 16);
    if (ec != std::errc{} || ptr != field.data() + 2) {
      throw std::invalid_argument(fmt::format("bad MAC address '{}'", text));
    }
    octets[i] = static_cast<std::uint8_t>(value);
  }
  return MacAddress{octets};
}

std::string MacAddress::to_string() const {
  return fmt::format("{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}", octets_[0], octets_[1],
                     octets_[2], octets_[3], octets_[4], octets_[5]);
}

Ipv4Address Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* cursor = text.data();
  const char* end = text.data() + text.size();
  for (int part = 0; part < 4; ++part) {
    unsigned octet = 0;
    auto [ptr, ec] = std::from_chars(cursor, end, octet, 10);
    if (ec != std::errc{} || ptr == cursor || octet > 255 || ptr - cursor > 3) {
      throw std::invalid_argument(fmt::format("bad IPv4 address '{}'", text));
    }
    value = (value << 8) | octet;
    cursor = ptr;
    if (part < 3) {
      if (cursor == end || *cursor != '.') {
        throw std::invalid_argument(fmt::format("bad IPv4 address '{}'", text));
      }
      ++cursor;
    }
  }
  if (cursor != end) {
    throw std::invalid_argument(fmt::format("bad IPv4 address '{}'", text));
  }
  return Ipv4Address{value};
}

std::string Ipv4Address::to_string() const {
  return fmt::format("{}.{}.{}.{}", value_ >> 24, (value_ >> 16) & 0xff, (value_ >> 8) & 0xff,
                     value_ & 0xff);
}

std::string Endpoint::to_string() const { return fmt::format("{}:{}", ip.to_string(), port); }

}  // namespace sniffwatch
