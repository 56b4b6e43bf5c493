#include "sniffwatch/checksum.hpp"

namespace sniffwatch {

void ChecksumAccumulator::add(ByteView bytes) {
  std::size_t i = 0;
  if (odd_ && !bytes.empty()) {
    sum_ += (std::uint32_t{pending_} << 8) | bytes[0];
    odd_ = false;
    i = 1;
  }
  for (; i + 1 < bytes.size(); i += 2) {
    sum_ += (std::uint32_t{bytes[i]} << 8) | bytes[i + 1];
  }
  if (i < bytes.size()) {
    pending_ = bytes[i];
    odd_ = true;
  }
}

void ChecksumAccumulator::add_be16(std::uint16_t word) {
  const std::uint8_t b[2] = {static_cast<std::uint8_t>(word >> 8),
                             static_cast<std::uint8_t>(word)};
  add(b);
}

void ChecksumAccumulator::add_be32(std::uint32_t word) {
  add_be16(static_cast<std::uint16_t>(word >> 16));
  add_be16(static_cast<std::uint16_t>(word));
}

std::uint16_t ChecksumAccumulator::finish() const {
  auto sum = sum_;
  if (odd_) sum += std::uint32_t{pending_} << 8;
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum & 0xffff);
}

std::uint16_t internet_checksum(ByteView bytes) {
  ChecksumAccumulator acc;
  acc.add(bytes);
  return acc.finish();
}

}  // namespace sniffwatch
