#include "sniffwatch/engine.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace sniffwatch {
namespace {

void require_ethernet(const PcapHeader& header) {
  if (header.linktype != kLinkTypeEthernet) {
    throw PcapError(PcapError::Kind::UnsupportedLinkType, 20,
                    fmt::format("link type {} is not Ethernet", header.linktype));
  }
}

}  // namespace

Engine::Engine(SignatureSet signatures, RuleConfig config)
    : signatures_(std::move(signatures)),
      config_(std::move(config)),
      tracker_((config_.validate(), config_.tracker_config())) {}

void Engine::emit(Detection d) {
  if (config_.is_enabled(d.rule)) detections_.push_back(std::move(d));
}

void Engine::match_payload(const DissectedPacket& pkt, const TcpSegment& tcp,
                           const OrientedFlow& flow) {
  const StreamKey key{flow.key, flow.sender};
  if (tcp.flags.syn) {
    auto& s = streams_[key];
    s = DirectionStream{tcp.seq + 1, tcp.seq + 1, {}};
  }
  if (!tcp.payload.empty()) {
    const std::uint32_t data_seq = tcp.seq + (tcp.flags.syn ? 1 : 0);
    auto [it, fresh] = streams_.try_emplace(key);
    auto& s = it->second;
    if (fresh) s = DirectionStream{data_seq, data_seq, {}};

    const std::uint64_t relative = static_cast<std::uint32_t>(data_seq - s.base_seq);
    std::vector<SignatureMatch> matches;
    if (data_seq == s.next_seq) {
      matches = match_signatures(s.carry, tcp.payload, signatures_);
      s.next_seq = data_seq + static_cast<std::uint32_t>(tcp.payload.size());
    } else {
      // Out of order: this segment alone, carry untouched.
      FlowCarryBuffer scratch{{}, relative};
      matches = match_signatures(scratch, tcp.payload, signatures_);
    }
    for (const auto& m : matches) {
      emit(sig_match_detection(pkt, m, *signatures_.find(m.signature_id)));
    }
  }
  if (tcp.flags.rst) {
    streams_.erase(StreamKey{flow.key, Side::A});
    streams_.erase(StreamKey{flow.key, Side::B});
  }
}

void Engine::process(const CaptureRecord& record) {
  const auto pkt = dissect(record, next_index_++);
  last_timestamp_ = pkt.timestamp;

  stats_.packets++;
  if (!pkt.parse_notes.empty()) stats_.packets_with_notes++;
  if (pkt.tcp()) {
    stats_.tcp++;
  } else if (pkt.udp()) {
    stats_.udp++;
  } else if (pkt.icmp()) {
    stats_.icmp++;
  } else {
    stats_.other++;
  }

  const auto* tcp = pkt.tcp();
  if (!tcp) {
    if (pkt.udp()) tracker_.advance(pkt);
    return;
  }

  const auto flow = flow_of(pkt);
  if (tcp->flags.syn && !tcp->flags.ack) syn_evidence_.emplace(pkt.index, evidence_of(pkt));

  const auto events = tracker_.advance(pkt);

  match_payload(pkt, *tcp, flow);
  if (auto d = rule_zero_seqack(pkt)) emit(std::move(*d));
  if (auto d = rule_empty_payload(pkt, *tracker_.find(flow.key), config_)) emit(std::move(*d));
  for (auto& d : rule_port_mutation(events, pkt)) emit(std::move(d));
}

EvaluationResult Engine::finish() {
  if (last_timestamp_) {
    const auto events = tracker_.finalize(*last_timestamp_);
    for (auto& d : rule_half_open(events, syn_evidence_)) emit(std::move(d));
  }
  std::stable_sort(detections_.begin(), detections_.end(), detection_less);
  return EvaluationResult{std::move(detections_), stats_};
}

EvaluationResult evaluate(RecordSource& source, const SignatureSet& signatures,
                          const RuleConfig& config) {
  require_ethernet(source.header());
  Engine engine(signatures, config);
  while (auto rec = source.next()) engine.process(*rec);
  auto result = engine.finish();
  result.stats.truncated = source.truncated();
  return result;
}

EvaluationResult evaluate(const PcapTrace& trace, const SignatureSet& signatures,
                          const RuleConfig& config) {
  require_ethernet(trace.header);
  Engine engine(signatures, config);
  for (const auto& rec : trace.records) engine.process(rec);
  return engine.finish();
}

}  // namespace sniffwatch
