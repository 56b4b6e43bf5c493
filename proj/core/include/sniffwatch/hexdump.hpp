#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sniffwatch/net_types.hpp"

namespace sniffwatch {

inline constexpr std::size_t kHexdumpRowBytes = 16;

struct DumpLine {
  std::size_t offset = 0;
  std::string hex;    // always 48 columns wide
  std::string ascii;  // one glyph per byte in the row
};

std::vector<DumpLine> hexdump_lines(ByteView data, std::size_t base_offset = 0);

// Rows look like
//   0000  00 01 02 03 04 05 06 07  08 09 0a 0b 0c 0d 0e 0f  ................
// each terminated by '\n'. Empty input gives an empty string.
std::string hexdump(ByteView data, std::size_t base_offset = 0);

}  // namespace sniffwatch
