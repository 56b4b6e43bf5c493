#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sniffwatch/timestamp.hpp"

namespace sniffwatch {

inline constexpr std::uint32_t kPcapMagic = 0xa1b2c3d4;
inline constexpr std::uint32_t kPcapMagicSwapped = 0xd4c3b2a1;
inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::uint32_t kDefaultSnaplen = 65535;
inline constexpr std::size_t kDefaultPacketLimit = 1000;

struct PcapHeader {
  // As seen when the first four file bytes are read little-endian:
  // kPcapMagic for little-endian files, kPcapMagicSwapped for big-endian.
  std::uint32_t magic = kPcapMagic;
  std::uint16_t version_major = 2;
  std::uint16_t version_minor = 4;
  std::int32_t thiszone = 0;
  std::uint32_t sigfigs = 0;
  std::uint32_t snaplen = kDefaultSnaplen;
  std::uint32_t linktype = kLinkTypeEthernet;

  bool byte_swapped() const { return magic == kPcapMagicSwapped; }

  friend bool operator==(const PcapHeader&, const PcapHeader&) = default;
};

struct CaptureRecord {
  Timestamp ts;
  std::uint32_t orig_len = 0;
  std::vector<std::uint8_t> data;

  friend bool operator==(const CaptureRecord&, const CaptureRecord&) = default;
};

class PcapError : public std::runtime_error {
 public:
  enum class Kind {
    UnknownMagic,
    TruncatedHeader,
    TruncatedRecord,
    InvalidRecord,
    RecordTooLong,
    UnsupportedLinkType,
    FileNotFound,
    IoFailure,
    InvalidArgument,
  };

  PcapError(Kind kind, std::uint64_t offset, const std::string& what)
      : std::runtime_error(what), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }
  // Byte offset in the stream where the problem was detected.
  std::uint64_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

// Streaming reader over a classic pcap byte stream. The global header is
// consumed by the constructor.
class PcapReader {
 public:
  explicit PcapReader(std::istream& in);

  const PcapHeader& header() const { return header_; }

  // Next record in file order, or nullopt at a clean end of stream.
  std::optional<CaptureRecord> next();

  // True if at least one more byte is available.
  bool has_more();

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint32_t to_host32(const std::uint8_t* p) const;
  std::uint16_t to_host16(const std::uint8_t* p) const;

  std::istream& in_;
  PcapHeader header_;
  std::uint64_t offset_ = 0;
};

struct PcapTrace {
  PcapHeader header;
  std::vector<CaptureRecord> records;
};

PcapTrace read_pcap(std::istream& in);
PcapTrace read_pcap(const std::vector<std::uint8_t>& bytes);

// Writes canonical little-endian pcap (magic 0xa1b2c3d4, version 2.4) using
// the header's snaplen and linktype. Returns the number of bytes written.
std::uint64_t write_pcap(const PcapHeader& header, const std::vector<CaptureRecord>& records,
                         std::ostream& out);
std::vector<std::uint8_t> write_pcap(const PcapHeader& header,
                                     const std::vector<CaptureRecord>& records);

// Bounded record iterator over a file or standard input ("-").
class RecordSource {
 public:
  static RecordSource open(const std::string& path_or_dash,
                           std::size_t limit = kDefaultPacketLimit);
  static RecordSource from_stream(std::unique_ptr<std::istream> stream,
                                  std::size_t limit = kDefaultPacketLimit);

  RecordSource(RecordSource&&) noexcept;
  RecordSource& operator=(RecordSource&&) noexcept;
  ~RecordSource();

  const PcapHeader& header() const;
  std::optional<CaptureRecord> next();

  // Set once the limit has been reached and the stream still had data.
  bool truncated() const { return truncated_; }
  std::size_t delivered() const { return delivered_; }
  std::size_t limit() const { return limit_; }

 private:
  RecordSource(std::istream* stream, std::unique_ptr<std::istream> owned, std::size_t limit);

  std::unique_ptr<std::istream> owned_;
  std::unique_ptr<PcapReader> reader_;
  std::size_t limit_;
  std::size_t delivered_ = 0;
  bool truncated_ = false;
};

}  // namespace sniffwatch
