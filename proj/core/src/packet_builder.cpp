#include "sniffwatch/packet_builder.hpp"

#include <stdexcept>

#include "sniffwatch/checksum.hpp"

namespace sniffwatch {
namespace {

std::uint16_t pseudo_header_checksum(const FrameAddressing& addr, std::uint8_t protocol,
                                     ByteView body) {
  ChecksumAccumulator acc;
  acc.add_be32(addr.src_ip.value());
  acc.add_be32(addr.dst_ip.value());
  acc.add_be16(protocol);
  acc.add_be16(static_cast<std::uint16_t>(body.size()));
  acc.add(body);
  return acc.finish();
}

}  // namespace

std::vector<std::uint8_t> build_ethernet_frame(const MacAddress& src, const MacAddress& dst,
                                               std::uint16_t ethertype, ByteView payload) {
  std::vector<std::uint8_t> frame(14 + payload.size());
  std::copy(dst.octets().begin(), dst.octets().end(), frame.begin());
  std::copy(src.octets().begin(), src.octets().end(), frame.begin() + 6);
  store_be16(frame, 12, ethertype);
  std::copy(payload.begin(), payload.end(), frame.begin() + 14);
  return frame;
}

std::vector<std::uint8_t> build_ipv4_frame(const FrameAddressing& addr, std::uint8_t protocol,
                                           ByteView transport) {
  if (addr.ip_options.size() % 4 != 0 || addr.ip_options.size() > 40) {
    throw std::invalid_argument("ipv4 options must be a multiple of 4 bytes, at most 40");
  }
  const std::size_t header_len = 20 + addr.ip_options.size();
  const std::size_t total = header_len + transport.size();
  if (total > 0xffff) {
    throw std::invalid_argument("ipv4 packet exceeds 65535 bytes");
  }
  std::vector<std::uint8_t> ip(total, 0);
  ip[0] = static_cast<std::uint8_t>(0x40 | (header_len / 4));
  store_be16(ip, 2, static_cast<std::uint16_t>(total));
  store_be16(ip, 4, addr.ip_id);
  store_be16(ip, 6, 0x4000);  // DF
  ip[8] = addr.ttl;
  ip[9] = protocol;
  store_be32(ip, 12, addr.src_ip.value());
  store_be32(ip, 16, addr.dst_ip.value());
  std::copy(addr.ip_options.begin(), addr.ip_options.end(), ip.begin() + 20);
  store_be16(ip, 10, internet_checksum(ByteView{ip}.subspan(0, header_len)));
  std::copy(transport.begin(), transport.end(), ip.begin() + static_cast<long>(header_len));
  return build_ethernet_frame(addr.src_mac, addr.dst_mac, kEtherTypeIpv4, ip);
}

std::vector<std::uint8_t> build_tcp_frame(const FrameAddressing& addr,
                                          const TcpHeaderFields& tcp, ByteView payload) {
  if (tcp.options.size() % 4 != 0 || tcp.options.size() > 40) {
    throw std::invalid_argument("tcp options must be a multiple of 4 bytes, at most 40");
  }
  const std::size_t header_len = 20 + tcp.options.size();
  std::vector<std::uint8_t> seg(header_len + payload.size(), 0);
  store_be16(seg, 0, tcp.src_port);
  store_be16(seg, 2, tcp.dst_port);
  store_be32(seg, 4, tcp.seq);
  store_be32(seg, 8, tcp.ack);
  seg[12] = static_cast<std::uint8_t>((header_len / 4) << 4);
  seg[13] = tcp.flags.to_byte();
  store_be16(seg, 14, tcp.window);
  std::copy(tcp.options.begin(), tcp.options.end(), seg.begin() + 20);
  std::copy(payload.begin(), payload.end(), seg.begin() + static_cast<long>(header_len));
  store_be16(seg, 16,
             pseudo_header_checksum(addr, static_cast<std::uint8_t>(IpProtocol::Tcp), seg));
  return build_ipv4_frame(addr, static_cast<std::uint8_t>(IpProtocol::Tcp), seg);
}

std::vector<std::uint8_t> build_udp_frame(const FrameAddressing& addr, std::uint16_t src_port,
                                          std::uint16_t dst_port, ByteView payload) {
  std::vector<std::uint8_t> dgram(8 + payload.size(), 0);
  store_be16(dgram, 0, src_port);
  store_be16(dgram, 2, dst_port);
  store_be16(dgram, 4, static_cast<std::uint16_t>(dgram.size()));
  std::copy(payload.begin(), payload.end(), dgram.begin() + 8);
  auto sum = pseudo_header_checksum(addr, static_cast<std::uint8_t>(IpProtocol::Udp), dgram);
  store_be16(dgram, 6, sum == 0 ? 0xffff : sum);
  return build_ipv4_frame(addr, static_cast<std::uint8_t>(IpProtocol::Udp), dgram);
}

std::vector<std::uint8_t> build_icmp_frame(const FrameAddressing& addr, std::uint8_t type,
                                           std::uint8_t code, ByteView rest) {
  std::vector<std::uint8_t> msg(4 + rest.size(), 0);
  msg[0] = type;
  msg[1] = code;
  std::copy(rest.begin(), rest.end(), msg.begin() + 4);
  store_be16(msg, 2, internet_checksum(msg));
  return build_ipv4_frame(addr, static_cast<std::uint8_t>(IpProtocol::Icmp), msg);
}

}  // namespace sniffwatch
