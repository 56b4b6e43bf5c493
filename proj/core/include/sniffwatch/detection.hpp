#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sniffwatch/dissector.hpp"
#include "sniffwatch/flow_tracker.hpp"
#include "sniffwatch/signatures.hpp"

namespace sniffwatch {

// Declared in label order so enum order and string order agree.
enum class RuleId { EmptyPayloadFlood, HalfOpenSyn, PortMutation, SigMatch, ZeroSeqAck };

inline constexpr std::array<RuleId, 5> kAllRules = {
    RuleId::EmptyPayloadFlood, RuleId::HalfOpenSyn, RuleId::PortMutation, RuleId::SigMatch,
    RuleId::ZeroSeqAck};

std::string_view to_string(RuleId rule);  // "SIG-MATCH", ...
std::optional<RuleId> parse_rule_id(std::string_view text);

enum class Severity { Info, Warn, Alert };

std::string_view to_string(Severity severity);
std::optional<Severity> parse_severity(std::string_view text);

// alert: SIG-MATCH, PORT-MUTATION, ZERO-SEQACK; warn: the two timing rules.
Severity severity_of(RuleId rule);

struct RuleConfig {
  std::uint32_t empty_payload_threshold = 3;
  double halfopen_timeout_s = 5.0;
  double port_mutation_window_s = 1.0;
  std::set<RuleId> enabled{kAllRules.begin(), kAllRules.end()};

  // Throws std::invalid_argument when a threshold is out of range.
  void validate() const;
  bool is_enabled(RuleId rule) const { return enabled.count(rule) != 0; }
  TrackerConfig tracker_config() const;
};

// The evidence fields every detection records about its packet.
struct PacketEvidence {
  std::size_t packet_index = 0;
  Timestamp timestamp;
  MacAddress src_mac;
  MacAddress dst_mac;
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  std::string protocol;  // "TCP" or "UDP"
  FlowKey flow;
};

// Requires an IPv4 packet with TCP or UDP transport.
PacketEvidence evidence_of(const DissectedPacket& pkt);

struct Detection {
  RuleId rule = RuleId::SigMatch;
  Severity severity = Severity::Alert;
  std::size_t packet_index = 0;
  Timestamp timestamp;
  FlowKey flow;
  MacAddress src_mac;
  MacAddress dst_mac;
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  std::string protocol;
  std::string detail;
  std::optional<std::string> signature_id;
  std::optional<std::uint64_t> stream_offset;

  friend bool operator==(const Detection&, const Detection&) = default;
};

Detection make_detection(RuleId rule, const PacketEvidence& evidence, std::string detail);

// Total order used for reports: packet index, rule, then match position.
bool detection_less(const Detection& x, const Detection& y);

Detection sig_match_detection(const DissectedPacket& pkt, const SignatureMatch& match,
                              const Signature& sig);

// Fires on seq == 0 and ack == 0 unless the segment is a pure SYN.
std::optional<Detection> rule_zero_seqack(const DissectedPacket& pkt);

// Fires on the packet that brings a flow's empty-ACK run to the threshold.
std::optional<Detection> rule_empty_payload(const DissectedPacket& pkt, const FlowState& state,
                                            const RuleConfig& config);

std::vector<Detection> rule_half_open(std::span<const FlowEvent> events,
                                      const std::map<std::size_t, PacketEvidence>& syn_evidence);

std::vector<Detection> rule_port_mutation(std::span<const FlowEvent> events,
                                          const DissectedPacket& trigger);

}  // namespace sniffwatch
