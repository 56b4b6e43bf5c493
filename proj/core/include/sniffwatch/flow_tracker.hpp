#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sniffwatch/dissector.hpp"
#include "sniffwatch/net_types.hpp"
#include "sniffwatch/timestamp.hpp"

namespace sniffwatch {

enum class Side : std::uint8_t { A, B };

inline Side opposite(Side s) { return s == Side::A ? Side::B : Side::A; }

// Direction-independent conversation key: endpoint `a` is the smaller of the
// two (ordered by ip, then port).
struct FlowKey {
  std::uint8_t protocol = 0;
  Endpoint a;
  Endpoint b;

  static FlowKey canonical(std::uint8_t protocol, Endpoint x, Endpoint y);

  const Endpoint& endpoint(Side s) const { return s == Side::A ? a : b; }
  std::string to_string() const;  // "TCP 10.0.0.1:49152 <-> 10.0.0.2:80"

  friend constexpr auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

// A key plus which side sent the packet it was derived from.
struct OrientedFlow {
  FlowKey key;
  Side sender = Side::A;
};

class NotFlowable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws NotFlowable unless the packet carries TCP or UDP.
OrientedFlow flow_of(const DissectedPacket& pkt);

enum class FlowPhase { Closed, SynSent, SynAckSeen, Established, FinSeen, Reset };

std::string_view to_string(FlowPhase phase);

struct FlowState {
  FlowPhase phase = FlowPhase::Closed;
  Side initiator = Side::A;  // first sender, replaced by the sender of each new SYN
  Timestamp syn_time;
  std::size_t syn_index = 0;
  std::uint32_t initiator_isn = 0;
  std::uint32_t responder_isn = 0;
  std::uint64_t packets_seen = 0;
  // Back-to-back zero-payload ACK segments while Established.
  std::uint32_t consecutive_empty_ack = 0;
  std::optional<std::size_t> last_empty_ack_index;
  Timestamp last_activity;

  std::uint16_t service_port(const FlowKey& key) const {
    return key.endpoint(opposite(initiator)).port;
  }
};

enum class FlowEventKind { HandshakeComplete, HalfOpenTimeout, PortMutationCandidate, StateViolation };

std::string_view to_string(FlowEventKind kind);

struct FlowEvent {
  FlowEventKind kind = FlowEventKind::StateViolation;
  FlowKey flow;
  std::size_t packet_index = 0;
  Timestamp timestamp;
  std::string detail;

  friend bool operator==(const FlowEvent&, const FlowEvent&) = default;
};

struct TrackerConfig {
  std::int64_t halfopen_timeout_us = 5'000'000;
  std::int64_t mutation_window_us = 1'000'000;
};

// Single-writer table of per-conversation state, fed in packet order.
class FlowTracker {
 public:
  explicit FlowTracker(TrackerConfig config = {});

  // TCP packets drive the handshake machine; UDP packets only update
  // counters. Anything else is ignored. Events come back ordered.
  std::vector<FlowEvent> advance(const DissectedPacket& pkt);

  // Half-open flows whose SYN is older than the timeout at trace end.
  std::vector<FlowEvent> finalize(Timestamp trace_end) const;

  const FlowState* find(const FlowKey& key) const;
  std::size_t size() const { return flows_.size(); }
  const std::map<FlowKey, FlowState>& flows() const { return flows_; }
  const TrackerConfig& config() const { return config_; }

 private:
  using IpPair = std::pair<std::uint32_t, std::uint32_t>;

  std::optional<FlowEvent> check_port_mutation(const FlowKey& key, std::uint16_t new_port,
                                               const DissectedPacket& pkt) const;

  TrackerConfig config_;
  std::map<FlowKey, FlowState> flows_;
  std::map<IpPair, std::set<FlowKey>> tcp_by_ip_pair_;
};

}  // namespace sniffwatch
