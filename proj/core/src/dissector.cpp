#include "sniffwatch/dissector.hpp"

#include <fmt/format.h>

#include "sniffwatch/checksum.hpp"

namespace sniffwatch {

TcpFlags TcpFlags::from_byte(std::uint8_t bits) {
  TcpFlags f;
  f.fin = bits & kFin;
  f.syn = bits & kSyn;
  f.rst = bits & kRst;
  f.psh = bits & kPsh;
  f.ack = bits & kAck;
  f.urg = bits & kUrg;
  return f;
}

std::uint8_t TcpFlags::to_byte() const {
  return static_cast<std::uint8_t>((fin ? kFin : 0) | (syn ? kSyn : 0) | (rst ? kRst : 0) |
                                   (psh ? kPsh : 0) | (ack ? kAck : 0) | (urg ? kUrg : 0));
}

std::string TcpFlags::to_string() const {
  std::string s;
  if (syn) s += 'S';
  if (fin) s += 'F';
  if (rst) s += 'R';
  if (psh) s += 'P';
  if (ack) s += 'A';
  if (urg) s += 'U';
  return s.empty() ? "." : s;
}

EthernetFrame parse_ethernet(ByteView bytes) {
  if (bytes.size() < 14) {
    throw ParseError(ParseError::Kind::TooShort,
                     fmt::format("ethernet frame of {} bytes (need 14)", bytes.size()));
  }
  EthernetFrame frame;
  frame.dst_mac = MacAddress::from_bytes(bytes.subspan(0, 6));
  frame.src_mac = MacAddress::from_bytes(bytes.subspan(6, 6));
  frame.ethertype = load_be16(bytes, 12);
  frame.payload = bytes.subspan(14);
  return frame;
}

Ipv4Packet parse_ipv4(ByteView bytes) {
  if (bytes.size() < 20) {
    throw ParseError(ParseError::Kind::TooShort,
                     fmt::format("ipv4 header of {} bytes (need 20)", bytes.size()));
  }
  Ipv4Packet pkt;
  pkt.version = bytes[0] >> 4;
  pkt.ihl = bytes[0] & 0x0f;
  if (pkt.version != 4) {
    throw ParseError(ParseError::Kind::BadVersion, fmt::format("ip version {}", pkt.version));
  }
  if (pkt.ihl < 5) {
    throw ParseError(ParseError::Kind::BadIhl, fmt::format("ipv4 ihl {}", pkt.ihl));
  }
  const auto header_len = pkt.header_length();
  if (bytes.size() < header_len) {
    throw ParseError(ParseError::Kind::TooShort,
                     fmt::format("ipv4 header needs {} bytes, have {}", header_len, bytes.size()));
  }
  pkt.tos = bytes[1];
  pkt.total_length = load_be16(bytes, 2);
  pkt.identification = load_be16(bytes, 4);
  pkt.flags_fragment = load_be16(bytes, 6);
  pkt.ttl = bytes[8];
  pkt.protocol = bytes[9];
  pkt.header_checksum = load_be16(bytes, 10);
  pkt.src_ip = Ipv4Address{load_be32(bytes, 12)};
  pkt.dst_ip = Ipv4Address{load_be32(bytes, 16)};
  if (pkt.total_length < header_len) {
    throw ParseError(ParseError::Kind::BadTotalLength,
                     fmt::format("ipv4 total_length {} below header length {}", pkt.total_length,
                                 header_len));
  }
  pkt.header = bytes.subspan(0, header_len);
  if (pkt.total_length > bytes.size()) {
    pkt.truncated = true;
    pkt.payload = bytes.subspan(header_len);
  } else {
    pkt.payload = bytes.subspan(header_len, pkt.total_length - header_len);
  }
  return pkt;
}

namespace {

TcpSegment parse_tcp(ByteView bytes) {
  if (bytes.size() < 20) {
    throw ParseError(ParseError::Kind::TooShort,
                     fmt::format("tcp header of {} bytes (need 20)", bytes.size()));
  }
  TcpSegment seg;
  seg.src_port = load_be16(bytes, 0);
  seg.dst_port = load_be16(bytes, 2);
  seg.seq = load_be32(bytes, 4);
  seg.ack = load_be32(bytes, 8);
  seg.data_offset = bytes[12] >> 4;
  seg.flags = TcpFlags::from_byte(bytes[13] & 0x3f);
  seg.window = load_be16(bytes, 14);
  seg.checksum = load_be16(bytes, 16);
  seg.urgent = load_be16(bytes, 18);
  const std::size_t header_len = std::size_t{seg.data_offset} * 4;
  if (seg.data_offset < 5 || header_len > bytes.size()) {
    throw ParseError(ParseError::Kind::BadDataOffset,
                     fmt::format("tcp data offset {} with {} bytes", seg.data_offset,
                                 bytes.size()));
  }
  seg.segment = bytes;
  seg.payload = bytes.subspan(header_len);
  return seg;
}

UdpDatagram parse_udp(ByteView bytes) {
  if (bytes.size() < 8) {
    throw ParseError(ParseError::Kind::TooShort,
                     fmt::format("udp header of {} bytes (need 8)", bytes.size()));
  }
  UdpDatagram dgram;
  dgram.src_port = load_be16(bytes, 0);
  dgram.dst_port = load_be16(bytes, 2);
  dgram.length = load_be16(bytes, 4);
  dgram.checksum = load_be16(bytes, 6);
  if (dgram.length < 8) {
    throw ParseError(ParseError::Kind::BadLength, fmt::format("udp length {}", dgram.length));
  }
  if (dgram.length > bytes.size()) {
    dgram.truncated = true;
    dgram.datagram = bytes;
  } else {
    dgram.datagram = bytes.subspan(0, dgram.length);
  }
  dgram.payload = dgram.datagram.subspan(8);
  return dgram;
}

IcmpMessage parse_icmp(ByteView bytes) {
  if (bytes.size() < 4) {
    throw ParseError(ParseError::Kind::TooShort,
                     fmt::format("icmp message of {} bytes (need 4)", bytes.size()));
  }
  return IcmpMessage{bytes[0], bytes[1], load_be16(bytes, 2), bytes.subspan(4)};
}

std::uint16_t transport_checksum(const Ipv4Packet& ip, std::uint8_t protocol, ByteView body) {
  ChecksumAccumulator acc;
  acc.add_be32(ip.src_ip.value());
  acc.add_be32(ip.dst_ip.value());
  acc.add_be16(protocol);
  acc.add_be16(static_cast<std::uint16_t>(body.size()));
  acc.add(body);
  return acc.finish();
}

}  // namespace

Transport parse_transport(std::uint8_t protocol, ByteView bytes) {
  switch (protocol) {
    case static_cast<std::uint8_t>(IpProtocol::Tcp):
      return parse_tcp(bytes);
    case static_cast<std::uint8_t>(IpProtocol::Udp):
      return parse_udp(bytes);
    case static_cast<std::uint8_t>(IpProtocol::Icmp):
      return parse_icmp(bytes);
    default:
      return OpaquePayload{protocol, bytes};
  }
}

bool verify_ipv4_checksum(const Ipv4Packet& pkt) {
  return internet_checksum(pkt.header) == 0;
}

bool verify_tcp_checksum(const Ipv4Packet& ip, const TcpSegment& tcp) {
  return transport_checksum(ip, static_cast<std::uint8_t>(IpProtocol::Tcp), tcp.segment) == 0;
}

bool verify_udp_checksum(const Ipv4Packet& ip, const UdpDatagram& udp) {
  if (udp.checksum == 0) return true;
  return transport_checksum(ip, static_cast<std::uint8_t>(IpProtocol::Udp), udp.datagram) == 0;
}

const TcpSegment* DissectedPacket::tcp() const {
  return transport ? std::get_if<TcpSegment>(&*transport) : nullptr;
}
const UdpDatagram* DissectedPacket::udp() const {
  return transport ? std::get_if<UdpDatagram>(&*transport) : nullptr;
}
const IcmpMessage* DissectedPacket::icmp() const {
  return transport ? std::get_if<IcmpMessage>(&*transport) : nullptr;
}

std::size_t DissectedPacket::offset_of(ByteView view) const {
  if (view.empty() || !bytes_) return 0;
  return static_cast<std::size_t>(view.data() - bytes_->data());
}

DissectedPacket dissect(const CaptureRecord& record, std::size_t index) {
  DissectedPacket pkt;
  pkt.index = index;
  pkt.timestamp = record.ts;
  pkt.orig_len = record.orig_len;
  pkt.bytes_ = std::make_shared<const std::vector<std::uint8_t>>(record.data);
  const ByteView frame{*pkt.bytes_};

  try {
    pkt.ethernet = parse_ethernet(frame);
  } catch (const ParseError& e) {
    pkt.parse_notes.push_back(fmt::format("ethernet: {}", e.what()));
    return pkt;
  }
  if (pkt.ethernet->ethertype == kEtherTypeVlan) {
    pkt.parse_notes.emplace_back("non-IPv4 (vlan-tagged frame)");
    return pkt;
  }
  if (pkt.ethernet->ethertype != kEtherTypeIpv4) {
    pkt.parse_notes.push_back(
        fmt::format("non-IPv4 (ethertype 0x{:04x})", pkt.ethernet->ethertype));
    return pkt;
  }

  try {
    pkt.ip = parse_ipv4(pkt.ethernet->payload);
  } catch (const ParseError& e) {
    pkt.parse_notes.push_back(fmt::format("ipv4: {}", e.what()));
    return pkt;
  }
  auto& ip = *pkt.ip;
  if (ip.truncated) {
    pkt.parse_notes.push_back(fmt::format("ipv4: truncated (total_length {}, captured {})",
                                          ip.total_length,
                                          ip.header_length() + ip.payload.size()));
  }
  if (!verify_ipv4_checksum(ip)) {
    pkt.parse_notes.emplace_back("ipv4: bad header checksum");
  }
  if (ip.is_fragment()) {
    pkt.parse_notes.emplace_back("ipv4: fragment, transport not decoded");
    pkt.transport = OpaquePayload{ip.protocol, ip.payload};
    return pkt;
  }

  try {
    pkt.transport = parse_transport(ip.protocol, ip.payload);
  } catch (const ParseError& e) {
    pkt.parse_notes.push_back(fmt::format("transport: {}", e.what()));
    pkt.transport = OpaquePayload{ip.protocol, ip.payload};
    return pkt;
  }

  if (const auto* tcp = pkt.tcp(); tcp && !ip.truncated && !verify_tcp_checksum(ip, *tcp)) {
    pkt.parse_notes.emplace_back("tcp: bad checksum");
  }
  if (const auto* udp = pkt.udp()) {
    if (udp->truncated) {
      pkt.parse_notes.emplace_back("udp: truncated");
    } else if (udp->checksum == 0) {
      pkt.parse_notes.emplace_back("udp: checksum disabled");
    } else if (!ip.truncated && !verify_udp_checksum(ip, *udp)) {
      pkt.parse_notes.emplace_back("udp: bad checksum");
    }
  }
  return pkt;
}

std::string transport_label(const DissectedPacket& pkt) {
  if (pkt.tcp()) return "TCP";
  if (pkt.udp()) return "UDP";
  if (pkt.icmp()) return "ICMP";
  return "other";
}

}  // namespace sniffwatch
