#include "sniffwatch/pcap_io.hpp"

#include <fmt/format.h>

#include <array>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sniffwatch {
namespace {

constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;
constexpr std::uint32_t kNanosecondMagic = 0xa1b23c4d;
constexpr std::uint32_t kPcapngMagic = 0x0a0d0d0a;

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

void put_le16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_le32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

// Reads up to n bytes; returns how many were actually read.
std::size_t read_some(std::istream& in, std::uint8_t* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount());
}

}  // namespace

PcapReader::PcapReader(std::istream& in) : in_(in) {
  std::array<std::uint8_t, kGlobalHeaderSize> raw{};
  const auto got = read_some(in_, raw.data(), raw.size());
  if (got >= 4) {
    const auto magic = le32(raw.data());
    if (magic == kNanosecondMagic || magic == 0x4d3cb2a1) {
      throw PcapError(PcapError::Kind::UnknownMagic, 0,
                      "nanosecond-resolution pcap is not supported");
    }
    if (magic == kPcapngMagic) {
      throw PcapError(PcapError::Kind::UnknownMagic, 0, "pcapng is not supported");
    }
    if (magic != kPcapMagic && magic != kPcapMagicSwapped) {
      throw PcapError(PcapError::Kind::UnknownMagic, 0,
                      fmt::format("not a pcap file (magic 0x{:08x})", magic));
    }
    header_.magic = magic;
  }
  if (got < kGlobalHeaderSize) {
    throw PcapError(PcapError::Kind::TruncatedHeader, got,
                    fmt::format("pcap global header truncated at byte {}", got));
  }
  header_.version_major = to_host16(raw.data() + 4);
  header_.version_minor = to_host16(raw.data() + 6);
  header_.thiszone = static_cast<std::int32_t>(to_host32(raw.data() + 8));
  header_.sigfigs = to_host32(raw.data() + 12);
  header_.snaplen = to_host32(raw.data() + 16);
  header_.linktype = to_host32(raw.data() + 20);
  offset_ = kGlobalHeaderSize;
  if (header_.snaplen == 0) {
    throw PcapError(PcapError::Kind::InvalidRecord, 16, "pcap snaplen is zero");
  }
}

std::uint32_t PcapReader::to_host32(const std::uint8_t* p) const {
  const auto v = le32(p);
  if (!header_.byte_swapped()) return v;
  return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}

std::uint16_t PcapReader::to_host16(const std::uint8_t* p) const {
  if (!header_.byte_swapped()) return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

bool PcapReader::has_more() {
  return in_.peek() != std::char_traits<char>::eof();
}

std::optional<CaptureRecord> PcapReader::next() {
  std::array<std::uint8_t, kRecordHeaderSize> raw{};
  const auto record_start = offset_;
  const auto got = read_some(in_, raw.data(), raw.size());
  if (got == 0) return std::nullopt;
  if (got < kRecordHeaderSize) {
    throw PcapError(PcapError::Kind::TruncatedRecord, record_start,
                    fmt::format("record header truncated at byte {}", record_start));
  }
  offset_ += kRecordHeaderSize;

  CaptureRecord rec;
  rec.ts.sec = to_host32(raw.data());
  rec.ts.usec = to_host32(raw.data() + 4);
  const auto incl_len = to_host32(raw.data() + 8);
  rec.orig_len = to_host32(raw.data() + 12);

  if (rec.ts.usec >= 1'000'000) {
    throw PcapError(PcapError::Kind::InvalidRecord, record_start,
                    fmt::format("record at byte {} has ts_usec {}", record_start, rec.ts.usec));
  }
  if (incl_len > header_.snaplen || incl_len > rec.orig_len) {
    throw PcapError(PcapError::Kind::InvalidRecord, record_start,
                    fmt::format("record at byte {} claims {} captured bytes (snaplen {}, "
                                "orig_len {})",
                                record_start, incl_len, header_.snaplen, rec.orig_len));
  }

  rec.data.resize(incl_len);
  const auto body = read_some(in_, rec.data.data(), incl_len);
  if (body < incl_len) {
    throw PcapError(PcapError::Kind::TruncatedRecord, record_start,
                    fmt::format("record at byte {} promises {} bytes, only {} remain",
                                record_start, incl_len, body));
  }
  offset_ += incl_len;
  return rec;
}

PcapTrace read_pcap(std::istream& in) {
  PcapReader reader(in);
  PcapTrace trace{reader.header(), {}};
  while (auto rec = reader.next()) {
    trace.records.push_back(std::move(*rec));
  }
  return trace;
}

PcapTrace read_pcap(const std::vector<std::uint8_t>& bytes) {
  std::istringstream in(std::string(bytes.begin(), bytes.end()), std::ios::binary);
  return read_pcap(in);
}

std::uint64_t write_pcap(const PcapHeader& header, const std::vector<CaptureRecord>& records,
                         std::ostream& out) {
  if (header.snaplen == 0) {
    throw PcapError(PcapError::Kind::InvalidArgument, 0, "snaplen must be positive");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.data.size() > header.snaplen) {
      throw PcapError(PcapError::Kind::RecordTooLong, i,
                      fmt::format("record {} has {} bytes, snaplen is {}", i, rec.data.size(),
                                  header.snaplen));
    }
    if (rec.data.size() > rec.orig_len || rec.ts.usec >= 1'000'000 || rec.ts.sec < 0 ||
        rec.ts.sec > 0xffffffffLL) {
      throw PcapError(PcapError::Kind::InvalidRecord, i,
                      fmt::format("record {} is not representable in pcap", i));
    }
  }

  put_le32(out, kPcapMagic);
  put_le16(out, 2);
  put_le16(out, 4);
  put_le32(out, 0);
  put_le32(out, 0);
  put_le32(out, header.snaplen);
  put_le32(out, header.linktype);
  std::uint64_t written = kGlobalHeaderSize;
  for (const auto& rec : records) {
    put_le32(out, static_cast<std::uint32_t>(rec.ts.sec));
    put_le32(out, rec.ts.usec);
    put_le32(out, static_cast<std::uint32_t>(rec.data.size()));
    put_le32(out, rec.orig_len);
    out.write(reinterpret_cast<const char*>(rec.data.data()),
              static_cast<std::streamsize>(rec.data.size()));
    written += kRecordHeaderSize + rec.data.size();
  }
  if (!out) {
    throw PcapError(PcapError::Kind::IoFailure, written, "write to pcap sink failed");
  }
  return written;
}

std::vector<std::uint8_t> write_pcap(const PcapHeader& header,
                                     const std::vector<CaptureRecord>& records) {
  std::ostringstream out(std::ios::binary);
  write_pcap(header, records, out);
  const auto s = std::move(out).str();
  return {s.begin(), s.end()};
}

RecordSource::RecordSource(std::istream* stream, std::unique_ptr<std::istream> owned,
                           std::size_t limit)
    : owned_(std::move(owned)), reader_(std::make_unique<PcapReader>(*stream)), limit_(limit) {}

RecordSource::RecordSource(RecordSource&&) noexcept = default;
RecordSource& RecordSource::operator=(RecordSource&&) noexcept = default;
RecordSource::~RecordSource() = default;

RecordSource RecordSource::open(const std::string& path_or_dash, std::size_t limit) {
  if (limit == 0) {
    throw PcapError(PcapError::Kind::InvalidArgument, 0, "packet limit must be at least 1");
  }
  if (path_or_dash == "-") {
    return RecordSource(&std::cin, nullptr, limit);
  }
  auto file = std::make_unique<std::ifstream>(path_or_dash, std::ios::binary);
  if (!*file) {
    throw PcapError(PcapError::Kind::FileNotFound, 0,
                    fmt::format("cannot open '{}'", path_or_dash));
  }
  auto* raw = file.get();
  return RecordSource(raw, std::move(file), limit);
}

RecordSource RecordSource::from_stream(std::unique_ptr<std::istream> stream, std::size_t limit) {
  if (limit == 0) {
    throw PcapError(PcapError::Kind::InvalidArgument, 0, "packet limit must be at least 1");
  }
  auto* raw = stream.get();
  return RecordSource(raw, std::move(stream), limit);
}

const PcapHeader& RecordSource::header() const { return reader_->header(); }

std::optional<CaptureRecord> RecordSource::next() {
  if (delivered_ >= limit_) {
    if (!truncated_ && reader_->has_more()) truncated_ = true;
    return std::nullopt;
  }
  auto rec = reader_->next();
  if (rec) ++delivered_;
  if (delivered_ == limit_ && reader_->has_more()) truncated_ = true;
  return rec;
}

}  // namespace sniffwatch
