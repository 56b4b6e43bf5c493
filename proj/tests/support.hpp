#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sniffwatch/dissector.hpp"
#include "sniffwatch/packet_builder.hpp"
#include "sniffwatch/pcap_io.hpp"

namespace sniffwatch::testing {

inline const Ipv4Address kClientIp{10, 0, 0, 1};
inline const Ipv4Address kServerIp{10, 0, 0, 2};
inline const MacAddress kClientMac{{0x02, 0, 0, 0, 0, 0x01}};
inline const MacAddress kServerMac{{0x02, 0, 0, 0, 0, 0x02}};

// A fresh, empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(SNIFFWATCH_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::vector<std::uint8_t> bytes_of(std::string_view text) {
  return {text.begin(), text.end()};
}

struct TcpFields {
  bool from_client = true;
  std::uint16_t client_port = 49152;
  std::uint16_t server_port = 80;
  std::uint8_t flags = TcpFlags::kAck;
  std::uint32_t seq = 1;
  std::uint32_t ack = 1;
  std::vector<std::uint8_t> payload;
  std::int64_t t_us = 0;
};

inline CaptureRecord tcp_record(const TcpFields& s) {
  FrameAddressing addr;
  addr.src_mac = s.from_client ? kClientMac : kServerMac;
  addr.dst_mac = s.from_client ? kServerMac : kClientMac;
  addr.src_ip = s.from_client ? kClientIp : kServerIp;
  addr.dst_ip = s.from_client ? kServerIp : kClientIp;
  TcpHeaderFields tcp;
  tcp.src_port = s.from_client ? s.client_port : s.server_port;
  tcp.dst_port = s.from_client ? s.server_port : s.client_port;
  tcp.seq = s.seq;
  tcp.ack = s.ack;
  tcp.flags = TcpFlags::from_byte(s.flags);
  CaptureRecord r;
  r.ts = Timestamp::from_micros(s.t_us);
  r.data = build_tcp_frame(addr, tcp, s.payload);
  r.orig_len = static_cast<std::uint32_t>(r.data.size());
  return r;
}

inline DissectedPacket tcp_packet(const TcpFields& s, std::size_t index = 0) {
  return dissect(tcp_record(s), index);
}

}  // namespace sniffwatch::testing
