#pragma once

#include <cstdint>

#include "sniffwatch/net_types.hpp"

namespace sniffwatch {

// Ones-complement sum over a sequence of byte ranges, treated as one
// contiguous big-endian word stream (an odd-length range carries its last
// byte into the next range).
class ChecksumAccumulator {
 public:
  void add(ByteView bytes);
  void add_be16(std::uint16_t word);
  void add_be32(std::uint32_t word);

  // Complement of the folded sum; an odd trailing byte is zero-padded.
  std::uint16_t finish() const;

 private:
  std::uint64_t sum_ = 0;
  bool odd_ = false;
  std::uint8_t pending_ = 0;
};

std::uint16_t internet_checksum(ByteView bytes);

}  // namespace sniffwatch
