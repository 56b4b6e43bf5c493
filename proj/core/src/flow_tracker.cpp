#include "sniffwatch/flow_tracker.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace sniffwatch {

FlowKey FlowKey::canonical(std::uint8_t protocol, Endpoint x, Endpoint y) {
  if (y < x) std::swap(x, y);
  return FlowKey{protocol, x, y};
}

std::string FlowKey::to_string() const {
  std::string_view proto = "IP";
  if (protocol == static_cast<std::uint8_t>(IpProtocol::Tcp)) proto = "TCP";
  if (protocol == static_cast<std::uint8_t>(IpProtocol::Udp)) proto = "UDP";
  return fmt::format("{} {} <-> {}", proto, a.to_string(), b.to_string());
}

OrientedFlow flow_of(const DissectedPacket& pkt) {
  if (!pkt.ip) throw NotFlowable("packet has no IPv4 layer");
  Endpoint src{pkt.ip->src_ip, 0};
  Endpoint dst{pkt.ip->dst_ip, 0};
  std::uint8_t protocol = 0;
  if (const auto* tcp = pkt.tcp()) {
    src.port = tcp->src_port;
    dst.port = tcp->dst_port;
    protocol = static_cast<std::uint8_t>(IpProtocol::Tcp);
  } else if (const auto* udp = pkt.udp()) {
    src.port = udp->src_port;
    dst.port = udp->dst_port;
    protocol = static_cast<std::uint8_t>(IpProtocol::Udp);
  } else {
    throw NotFlowable("packet carries neither TCP nor UDP");
  }
  const auto key = FlowKey::canonical(protocol, src, dst);
  return OrientedFlow{key, key.a == src ? Side::A : Side::B};
}

std::string_view to_string(FlowPhase phase) {
  switch (phase) {
    case FlowPhase::Closed: return "Closed";
    case FlowPhase::SynSent: return "SynSent";
    case FlowPhase::SynAckSeen: return "SynAckSeen";
    case FlowPhase::Established: return "Established";
    case FlowPhase::FinSeen: return "FinSeen";
    case FlowPhase::Reset: return "Reset";
  }
  return "?";
}

std::string_view to_string(FlowEventKind kind) {
  switch (kind) {
    case FlowEventKind::HandshakeComplete: return "HandshakeComplete";
    case FlowEventKind::HalfOpenTimeout: return "HalfOpenTimeout";
    case FlowEventKind::PortMutationCandidate: return "PortMutationCandidate";
    case FlowEventKind::StateViolation: return "StateViolation";
  }
  return "?";
}

FlowTracker::FlowTracker(TrackerConfig config) : config_(config) {}

const FlowState* FlowTracker::find(const FlowKey& key) const {
  auto it = flows_.find(key);
  return it == flows_.end() ? nullptr : &it->second;
}

std::optional<FlowEvent> FlowTracker::check_port_mutation(const FlowKey& key,
                                                          std::uint16_t new_port,
                                                          const DissectedPacket& pkt) const {
  const IpPair pair{key.a.ip.value(), key.b.ip.value()};
  auto bucket = tcp_by_ip_pair_.find(pair);
  if (bucket == tcp_by_ip_pair_.end()) return std::nullopt;

  const FlowKey* best_key = nullptr;
  const FlowState* best = nullptr;
  for (const auto& other_key : bucket->second) {
    if (other_key == key) continue;
    const auto& other = flows_.at(other_key);
    if (other.phase != FlowPhase::Established) continue;
    if (pkt.timestamp.micros() - other.last_activity.micros() > config_.mutation_window_us) {
      continue;
    }
    if (other.service_port(other_key) == new_port) continue;
    // Most recently active wins; set iteration order breaks ties by key.
    if (!best || other.last_activity > best->last_activity) {
      best_key = &other_key;
      best = &other;
    }
  }
  if (!best) return std::nullopt;
  return FlowEvent{FlowEventKind::PortMutationCandidate, key, pkt.index, pkt.timestamp,
                   fmt::format("port {} → {}", best->service_port(*best_key), new_port)};
}

std::vector<FlowEvent> FlowTracker::advance(const DissectedPacket& pkt) {
  std::vector<FlowEvent> events;
  if (!pkt.tcp() && !pkt.udp()) return events;
  const auto [key, sender] = flow_of(pkt);

  auto [it, inserted] = flows_.try_emplace(key);
  auto& st = it->second;
  if (inserted) st.initiator = sender;
  st.packets_seen++;

  const auto* tcp = pkt.tcp();
  if (!tcp) {
    st.last_activity = pkt.timestamp;
    return events;
  }
  if (inserted) tcp_by_ip_pair_[{key.a.ip.value(), key.b.ip.value()}].insert(key);

  auto violation = [&](std::string detail) {
    events.push_back(FlowEvent{FlowEventKind::StateViolation, key, pkt.index, pkt.timestamp,
                               std::move(detail)});
  };
  const auto& f = tcp->flags;
  const bool has_payload = !tcp->payload.empty();

  if (f.rst) {
    st.phase = FlowPhase::Reset;
    st.consecutive_empty_ack = 0;
  } else if (f.syn && !f.ack) {
    if (st.phase == FlowPhase::Closed || st.phase == FlowPhase::Reset ||
        st.phase == FlowPhase::FinSeen) {
      const auto& dst = key.endpoint(opposite(sender));
      if (auto ev = check_port_mutation(key, dst.port, pkt)) events.push_back(std::move(*ev));
      const auto packets = st.packets_seen;
      st = FlowState{};
      st.phase = FlowPhase::SynSent;
      st.initiator = sender;
      st.syn_time = pkt.timestamp;
      st.syn_index = pkt.index;
      st.initiator_isn = tcp->seq;
      st.packets_seen = packets;
    } else if (!(st.phase == FlowPhase::SynSent && sender == st.initiator)) {
      violation(fmt::format("unexpected SYN in {}", to_string(st.phase)));
    }
  } else if (f.syn) {
    if (st.phase == FlowPhase::SynSent && sender != st.initiator) {
      st.phase = FlowPhase::SynAckSeen;
      st.responder_isn = tcp->seq;
      if (tcp->ack != st.initiator_isn + 1) {
        violation(fmt::format("SYN-ACK acknowledges {}, expected {}", tcp->ack,
                              st.initiator_isn + 1));
      }
    } else {
      violation(fmt::format("unexpected SYN-ACK in {}", to_string(st.phase)));
    }
  } else if (f.fin) {
    if (st.phase == FlowPhase::Established || st.phase == FlowPhase::FinSeen) {
      st.phase = FlowPhase::FinSeen;
    } else {
      violation(fmt::format("unexpected FIN in {}", to_string(st.phase)));
    }
  } else if (f.ack) {
    if (st.phase == FlowPhase::SynAckSeen && sender == st.initiator) {
      st.phase = FlowPhase::Established;
      events.push_back(FlowEvent{FlowEventKind::HandshakeComplete, key, pkt.index,
                                 pkt.timestamp, "three-way handshake complete"});
      if (tcp->ack != st.responder_isn + 1) {
        violation(fmt::format("handshake ACK acknowledges {}, expected {}", tcp->ack,
                              st.responder_isn + 1));
      }
    } else if (st.phase == FlowPhase::Established) {
      if (has_payload) {
        st.consecutive_empty_ack = 0;
      } else {
        st.consecutive_empty_ack++;
        st.last_empty_ack_index = pkt.index;
      }
    } else if (st.phase != FlowPhase::FinSeen) {
      violation(fmt::format("unexpected ACK in {}", to_string(st.phase)));
    }
  } else {
    if (st.phase == FlowPhase::Established && has_payload) st.consecutive_empty_ack = 0;
    violation(fmt::format("segment without SYN/ACK/FIN/RST in {}", to_string(st.phase)));
  }

  st.last_activity = pkt.timestamp;
  std::stable_sort(events.begin(), events.end(),
                   [](const FlowEvent& x, const FlowEvent& y) { return x.kind < y.kind; });
  return events;
}

std::vector<FlowEvent> FlowTracker::finalize(Timestamp trace_end) const {
  std::vector<FlowEvent> events;
  for (const auto& [key, st] : flows_) {
    if (st.phase != FlowPhase::SynSent && st.phase != FlowPhase::SynAckSeen) continue;
    if (trace_end.micros() - st.syn_time.micros() <= config_.halfopen_timeout_us) continue;
    events.push_back(FlowEvent{
        FlowEventKind::HalfOpenTimeout, key, st.syn_index, st.syn_time,
        st.phase == FlowPhase::SynSent ? "no reply to SYN" : "handshake incomplete"});
  }
  std::stable_sort(events.begin(), events.end(), [](const FlowEvent& x, const FlowEvent& y) {
    return std::tie(x.packet_index, x.flow) < std::tie(y.packet_index, y.flow);
  });
  return events;
}

}  // namespace sniffwatch
