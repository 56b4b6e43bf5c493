#include "sniffwatch/hexdump.hpp"

#include <fmt/format.h>

namespace sniffwatch {
namespace {

// 16 byte pairs, 15 separators and the extra gap after the 8th byte.
constexpr std::size_t kHexColumnWidth = 48;

char ascii_glyph(std::uint8_t b) { return (b >= 0x20 && b <= 0x7e) ? static_cast<char>(b) : '.'; }

}  // namespace

std::vector<DumpLine> hexdump_lines(ByteView data, std::size_t base_offset) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::vector<DumpLine> lines;
  lines.reserve((data.size() + kHexdumpRowBytes - 1) / kHexdumpRowBytes);
  for (std::size_t row = 0; row < data.size(); row += kHexdumpRowBytes) {
    const auto chunk = data.subspan(row, std::min(kHexdumpRowBytes, data.size() - row));
    DumpLine line;
    line.offset = base_offset + row;
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      if (i == 8) line.hex += ' ';
      if (i != 0) line.hex += ' ';
      line.hex += kDigits[chunk[i] >> 4];
      line.hex += kDigits[chunk[i] & 0x0f];
      line.ascii += ascii_glyph(chunk[i]);
    }
    line.hex.resize(kHexColumnWidth, ' ');
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string hexdump(ByteView data, std::size_t base_offset) {
  std::string out;
  for (const auto& line : hexdump_lines(data, base_offset)) {
    out += fmt::format("{:04x}  {}  {}\n", line.offset, line.hex, line.ascii);
  }
  return out;
}

}  // namespace sniffwatch
