#include "sniffwatch/detection.hpp"

#include <fmt/format.h>

#include <stdexcept>
#include <tuple>

namespace sniffwatch {

std::string_view to_string(RuleId rule) {
  switch (rule) {
    case RuleId::EmptyPayloadFlood: return "EMPTY-PAYLOAD-FLOOD";
    case RuleId::HalfOpenSyn: return "HALF-OPEN-SYN";
    case RuleId::PortMutation: return "PORT-MUTATION";
    case RuleId::SigMatch: return "SIG-MATCH";
    case RuleId::ZeroSeqAck: return "ZERO-SEQACK";
  }
  return "?";
}

std::optional<RuleId> parse_rule_id(std::string_view text) {
  for (auto rule : kAllRules) {
    if (to_string(rule) == text) return rule;
  }
  return std::nullopt;
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::Info: return "info";
    case Severity::Warn: return "warn";
    case Severity::Alert: return "alert";
  }
  return "?";
}

std::optional<Severity> parse_severity(std::string_view text) {
  for (auto s : {Severity::Info, Severity::Warn, Severity::Alert}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

Severity severity_of(RuleId rule) {
  switch (rule) {
    case RuleId::EmptyPayloadFlood:
    case RuleId::HalfOpenSyn:
      return Severity::Warn;
    default:
      return Severity::Alert;
  }
}

void RuleConfig::validate() const {
  if (empty_payload_threshold < 1) {
    throw std::invalid_argument("empty-payload threshold must be at least 1");
  }
  if (!(halfopen_timeout_s > 0)) {
    throw std::invalid_argument("half-open timeout must be positive");
  }
  if (!(port_mutation_window_s > 0)) {
    throw std::invalid_argument("port-mutation window must be positive");
  }
}

TrackerConfig RuleConfig::tracker_config() const {
  return TrackerConfig{seconds_to_micros(halfopen_timeout_s),
                       seconds_to_micros(port_mutation_window_s)};
}

PacketEvidence evidence_of(const DissectedPacket& pkt) {
  const auto flow = flow_of(pkt);
  return PacketEvidence{pkt.index,         pkt.timestamp,       pkt.ethernet->src_mac,
                        pkt.ethernet->dst_mac, pkt.ip->src_ip, pkt.ip->dst_ip,
                        pkt.tcp() ? "TCP" : "UDP", flow.key};
}

Detection make_detection(RuleId rule, const PacketEvidence& evidence, std::string detail) {
  Detection d;
  d.rule = rule;
  d.severity = severity_of(rule);
  d.packet_index = evidence.packet_index;
  d.timestamp = evidence.timestamp;
  d.flow = evidence.flow;
  d.src_mac = evidence.src_mac;
  d.dst_mac = evidence.dst_mac;
  d.src_ip = evidence.src_ip;
  d.dst_ip = evidence.dst_ip;
  d.protocol = evidence.protocol;
  d.detail = std::move(detail);
  return d;
}

bool detection_less(const Detection& x, const Detection& y) {
  const auto offset = [](const Detection& d) { return d.stream_offset.value_or(0); };
  const auto sig = [](const Detection& d) { return d.signature_id.value_or(""); };
  return std::make_tuple(x.packet_index, x.rule, offset(x), sig(x), x.flow) <
         std::make_tuple(y.packet_index, y.rule, offset(y), sig(y), y.flow);
}

Detection sig_match_detection(const DissectedPacket& pkt, const SignatureMatch& match,
                              const Signature& sig) {
  auto d = make_detection(RuleId::SigMatch, evidence_of(pkt),
                          fmt::format("{} {} at stream offset {}", sig.id, sig.name,
                                      match.offset));
  d.signature_id = sig.id;
  d.stream_offset = match.offset;
  return d;
}

std::optional<Detection> rule_zero_seqack(const DissectedPacket& pkt) {
  const auto* tcp = pkt.tcp();
  if (!tcp || tcp->seq != 0 || tcp->ack != 0) return std::nullopt;
  if (tcp->flags.syn && !tcp->flags.ack) return std::nullopt;
  return make_detection(RuleId::ZeroSeqAck, evidence_of(pkt),
                        fmt::format("seq=0 ack=0 flags={}", tcp->flags.to_string()));
}

std::optional<Detection> rule_empty_payload(const DissectedPacket& pkt, const FlowState& state,
                                            const RuleConfig& config) {
  if (state.phase != FlowPhase::Established) return std::nullopt;
  if (state.consecutive_empty_ack != config.empty_payload_threshold) return std::nullopt;
  if (state.last_empty_ack_index != pkt.index) return std::nullopt;
  return make_detection(RuleId::EmptyPayloadFlood, evidence_of(pkt),
                        fmt::format("{} consecutive empty-payload ACK segments",
                                    state.consecutive_empty_ack));
}

std::vector<Detection> rule_half_open(std::span<const FlowEvent> events,
                                      const std::map<std::size_t, PacketEvidence>& syn_evidence) {
  std::vector<Detection> out;
  for (const auto& ev : events) {
    if (ev.kind != FlowEventKind::HalfOpenTimeout) continue;
    auto it = syn_evidence.find(ev.packet_index);
    if (it == syn_evidence.end()) {
      throw std::logic_error(fmt::format("no evidence kept for SYN packet {}", ev.packet_index));
    }
    out.push_back(make_detection(RuleId::HalfOpenSyn, it->second, ev.detail));
  }
  return out;
}

std::vector<Detection> rule_port_mutation(std::span<const FlowEvent> events,
                                          const DissectedPacket& trigger) {
  std::vector<Detection> out;
  for (const auto& ev : events) {
    if (ev.kind != FlowEventKind::PortMutationCandidate) continue;
    out.push_back(make_detection(RuleId::PortMutation, evidence_of(trigger), ev.detail));
  }
  return out;
}

}  // namespace sniffwatch
