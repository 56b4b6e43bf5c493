#pragma once

#include <cstdint>
#include <vector>

#include "sniffwatch/dissector.hpp"
#include "sniffwatch/net_types.hpp"

namespace sniffwatch {

// Link and network addressing shared by every frame a builder emits.
struct FrameAddressing {
  MacAddress src_mac;
  MacAddress dst_mac;
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  std::uint8_t ttl = 64;
  std::uint16_t ip_id = 0;
  std::vector<std::uint8_t> ip_options;  // length must be a multiple of 4, at most 40
};

struct TcpHeaderFields {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  TcpFlags flags;
  std::uint16_t window = 65535;
  std::vector<std::uint8_t> options;  // multiple of 4, at most 40
};

std::vector<std::uint8_t> build_ethernet_frame(const MacAddress& src, const MacAddress& dst,
                                               std::uint16_t ethertype, ByteView payload);

// Ethernet + IPv4 around an already-serialized transport body. The IPv4
// header checksum is computed.
std::vector<std::uint8_t> build_ipv4_frame(const FrameAddressing& addr, std::uint8_t protocol,
                                           ByteView transport);

// The builders below fill in valid IPv4 and transport checksums.
std::vector<std::uint8_t> build_tcp_frame(const FrameAddressing& addr,
                                          const TcpHeaderFields& tcp, ByteView payload);
std::vector<std::uint8_t> build_udp_frame(const FrameAddressing& addr, std::uint16_t src_port,
                                          std::uint16_t dst_port, ByteView payload);
std::vector<std::uint8_t> build_icmp_frame(const FrameAddressing& addr, std::uint8_t type,
                                           std::uint8_t code, ByteView rest);

}  // namespace sniffwatch
