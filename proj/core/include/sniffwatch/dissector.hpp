#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sniffwatch/net_types.hpp"
#include "sniffwatch/pcap_io.hpp"
#include "sniffwatch/timestamp.hpp"

namespace sniffwatch {

inline constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
inline constexpr std::uint16_t kEtherTypeArp = 0x0806;
inline constexpr std::uint16_t kEtherTypeVlan = 0x8100;

class ParseError : public std::runtime_error {
 public:
  enum class Kind { TooShort, BadVersion, BadIhl, BadTotalLength, BadDataOffset, BadLength };

  ParseError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Views below alias the bytes handed to the parser; they do not own them.

struct EthernetFrame {
  MacAddress dst_mac;
  MacAddress src_mac;
  std::uint16_t ethertype = 0;
  ByteView payload;
};

struct Ipv4Packet {
  std::uint8_t version = 4;
  std::uint8_t ihl = 5;
  std::uint8_t tos = 0;
  std::uint16_t total_length = 0;
  std::uint16_t identification = 0;
  std::uint16_t flags_fragment = 0;
  std::uint8_t ttl = 0;
  std::uint8_t protocol = 0;
  std::uint16_t header_checksum = 0;
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  ByteView header;   // ihl*4 bytes, options included
  ByteView payload;  // bounded by total_length and by what was captured
  bool truncated = false;

  std::size_t header_length() const { return std::size_t{ihl} * 4; }
  bool is_fragment() const { return (flags_fragment & 0x3fff) != 0; }
};

struct TcpFlags {
  bool fin = false;
  bool syn = false;
  bool rst = false;
  bool psh = false;
  bool ack = false;
  bool urg = false;

  static constexpr std::uint8_t kFin = 0x01;
  static constexpr std::uint8_t kSyn = 0x02;
  static constexpr std::uint8_t kRst = 0x04;
  static constexpr std::uint8_t kPsh = 0x08;
  static constexpr std::uint8_t kAck = 0x10;
  static constexpr std::uint8_t kUrg = 0x20;

  static TcpFlags from_byte(std::uint8_t bits);
  std::uint8_t to_byte() const;
  std::string to_string() const;  // e.g. "SA", "PA", "." for none

  friend bool operator==(const TcpFlags&, const TcpFlags&) = default;
};

struct TcpSegment {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::uint8_t data_offset = 5;
  TcpFlags flags;
  std::uint16_t window = 0;
  std::uint16_t checksum = 0;
  std::uint16_t urgent = 0;
  ByteView segment;  // header + payload as captured
  ByteView payload;
};

struct UdpDatagram {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint16_t length = 0;
  std::uint16_t checksum = 0;
  ByteView datagram;
  ByteView payload;
  bool truncated = false;
};

struct IcmpMessage {
  std::uint8_t icmp_type = 0;
  std::uint8_t code = 0;
  std::uint16_t checksum = 0;
  ByteView rest;
};

struct OpaquePayload {
  std::uint8_t protocol = 0;
  ByteView bytes;
};

using Transport = std::variant<TcpSegment, UdpDatagram, IcmpMessage, OpaquePayload>;

EthernetFrame parse_ethernet(ByteView bytes);
Ipv4Packet parse_ipv4(ByteView bytes);
Transport parse_transport(std::uint8_t protocol, ByteView bytes);

bool verify_ipv4_checksum(const Ipv4Packet& pkt);
bool verify_tcp_checksum(const Ipv4Packet& ip, const TcpSegment& tcp);
// A zero checksum means "not computed" and verifies as true.
bool verify_udp_checksum(const Ipv4Packet& ip, const UdpDatagram& udp);

// One fully dissected capture record. Owns a shared copy of the frame
// bytes, so copies of a DissectedPacket keep every view valid.
class DissectedPacket {
 public:
  std::size_t index = 0;
  Timestamp timestamp;
  std::uint32_t orig_len = 0;
  std::optional<EthernetFrame> ethernet;
  std::optional<Ipv4Packet> ip;
  std::optional<Transport> transport;
  std::vector<std::string> parse_notes;

  ByteView frame() const { return bytes_ ? ByteView{*bytes_} : ByteView{}; }

  const TcpSegment* tcp() const;
  const UdpDatagram* udp() const;
  const IcmpMessage* icmp() const;

  // Offset of `view` inside the frame; view must alias frame().
  std::size_t offset_of(ByteView view) const;

 private:
  friend DissectedPacket dissect(const CaptureRecord& record, std::size_t index);
  std::shared_ptr<const std::vector<std::uint8_t>> bytes_;
};

// Never throws on malformed input: failures become parse_notes.
DissectedPacket dissect(const CaptureRecord& record, std::size_t index);

// "TCP", "UDP", "ICMP" or "other".
std::string transport_label(const DissectedPacket& pkt);

}  // namespace sniffwatch
