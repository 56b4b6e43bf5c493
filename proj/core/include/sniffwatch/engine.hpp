#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sniffwatch/detection.hpp"
#include "sniffwatch/flow_tracker.hpp"
#include "sniffwatch/pcap_io.hpp"
#include "sniffwatch/signatures.hpp"

namespace sniffwatch {

struct TraceStats {
  std::uint64_t packets = 0;
  std::uint64_t tcp = 0;
  std::uint64_t udp = 0;
  std::uint64_t icmp = 0;
  std::uint64_t other = 0;
  std::uint64_t packets_with_notes = 0;
  bool truncated = false;  // the packet limit cut the trace short

  friend bool operator==(const TraceStats&, const TraceStats&) = default;
};

struct EvaluationResult {
  std::vector<Detection> detections;  // ordered by detection_less
  TraceStats stats;
};

// One analysis pass: dissect, advance flows, run per-packet and per-flow
// rules, then finalize for half-open connections. Feed records in trace
// order; malformed packets are counted, never fatal.
class Engine {
 public:
  Engine(SignatureSet signatures, RuleConfig config);

  void process(const CaptureRecord& record);
  EvaluationResult finish();

  const FlowTracker& tracker() const { return tracker_; }

 private:
  struct DirectionStream {
    std::uint32_t base_seq = 0;
    std::uint32_t next_seq = 0;
    FlowCarryBuffer carry;
  };
  using StreamKey = std::pair<FlowKey, Side>;

  void match_payload(const DissectedPacket& pkt, const TcpSegment& tcp, const OrientedFlow& flow);
  void emit(Detection d);

  SignatureSet signatures_;
  RuleConfig config_;
  FlowTracker tracker_;
  std::map<StreamKey, DirectionStream> streams_;
  std::map<std::size_t, PacketEvidence> syn_evidence_;
  std::vector<Detection> detections_;
  TraceStats stats_;
  std::size_t next_index_ = 0;
  std::optional<Timestamp> last_timestamp_;
};

// Throws PcapError (UnsupportedLinkType) unless the trace is Ethernet.
EvaluationResult evaluate(RecordSource& source, const SignatureSet& signatures,
                          const RuleConfig& config);
EvaluationResult evaluate(const PcapTrace& trace, const SignatureSet& signatures,
                          const RuleConfig& config);

}  // namespace sniffwatch
