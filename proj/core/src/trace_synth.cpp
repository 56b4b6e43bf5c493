#include "sniffwatch/trace_synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <json.hpp>
#include <random>
#include <tuple>

#include "sniffwatch/flow_tracker.hpp"
#include "sniffwatch/packet_builder.hpp"

namespace sniffwatch {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Normal: return "normal";
    case ScenarioKind::TrojanHorse: return "trojan-horse";
    case ScenarioKind::Backdoor: return "backdoor";
    case ScenarioKind::Mixed: return "mixed";
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
  for (auto k : {ScenarioKind::Normal, ScenarioKind::TrojanHorse, ScenarioKind::Backdoor,
                 ScenarioKind::Mixed}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

namespace {

constexpr std::uint16_t kHttpPort = 80;
constexpr std::uint16_t kMutatedPort = 82;
// Largest TCP payload whose Ethernet frame still fits the default snaplen.
constexpr std::size_t kMaxSegment = 65535 - 14 - 20 - 20;
// Scripted times (microseconds) reused from the observed backdoor capture.
constexpr std::int64_t kHandshakeSynUs = 16'479'000;
constexpr std::int64_t kNormalBehaviourUs = 10'438'000;
constexpr std::int64_t kZeroSeqAckUs = 10'710'000;
constexpr std::int64_t kLoneSynUs = 10'712'000;
// Observed sequence/acknowledgment values of the normal flow.
constexpr std::uint32_t kObservedSeq = 79225;
constexpr std::uint32_t kObservedAck = 759;

// mt19937_64 output is fixed by the standard; std distributions are not,
// so bounded draws are done by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t draw(std::uint64_t lo, std::uint64_t hi) {
    return lo + engine_() % (hi - lo + 1);
  }
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

struct Host {
  MacAddress mac;
  Ipv4Address ip;
};

struct Topology {
  Host client;
  Host server;
};

Topology topology_for(std::uint8_t subnet) {
  return Topology{
      Host{MacAddress{{0x02, 0, 0, 0, subnet, 0x01}}, Ipv4Address{10, 0, subnet, 1}},
      Host{MacAddress{{0x02, 0, 0, 0, subnet, 0x02}}, Ipv4Address{10, 0, subnet, 2}},
  };
}

class TraceWriter {
 public:
  explicit TraceWriter(std::int64_t time_offset_us = 0) : offset_us_(time_offset_us) {}

  std::size_t emit(std::int64_t t_us, std::vector<std::uint8_t> frame) {
    CaptureRecord rec;
    rec.ts = Timestamp::from_micros(offset_us_ + t_us);
    rec.orig_len = static_cast<std::uint32_t>(frame.size());
    rec.data = std::move(frame);
    records_.push_back(std::move(rec));
    return records_.size() - 1;
  }

  void expect(std::size_t index, std::string_view rule, const FlowKey& flow, std::string detail) {
    expected_.push_back(ExpectedDetection{index, std::string(rule), flow.to_string(),
                                          std::move(detail)});
  }

  std::vector<CaptureRecord>& records() { return records_; }
  std::vector<ExpectedDetection>& expected() { return expected_; }

 private:
  std::int64_t offset_us_;
  std::vector<CaptureRecord> records_;
  std::vector<ExpectedDetection> expected_;
};

// Both halves of one TCP conversation with correct sequence bookkeeping.
class TcpConversation {
 public:
  TcpConversation(TraceWriter& out, const Host& client, std::uint16_t client_port,
                  const Host& server, std::uint16_t server_port, std::uint32_t client_isn,
                  std::uint32_t server_isn)
      : out_(out),
        client_(client),
        server_(server),
        client_port_(client_port),
        server_port_(server_port),
        client_next_(client_isn),
        server_next_(server_isn) {}

  FlowKey key() const {
    return FlowKey::canonical(static_cast<std::uint8_t>(IpProtocol::Tcp),
                              Endpoint{client_.ip, client_port_},
                              Endpoint{server_.ip, server_port_});
  }

  std::size_t syn(std::int64_t t) { return client(t, TcpFlags::kSyn, {}, 0, true); }
  std::size_t syn_ack(std::int64_t t) {
    return server(t, TcpFlags::kSyn | TcpFlags::kAck, {}, client_next_, true);
  }
  std::size_t handshake_ack(std::int64_t t) { return client_ack(t); }

  std::size_t client_data(std::int64_t t, ByteView payload) {
    return client(t, TcpFlags::kPsh | TcpFlags::kAck, payload, server_next_, false);
  }
  std::size_t server_data(std::int64_t t, ByteView payload) {
    return server(t, TcpFlags::kPsh | TcpFlags::kAck, payload, client_next_, false);
  }
  std::size_t client_ack(std::int64_t t) {
    return client(t, TcpFlags::kAck, {}, server_next_, false);
  }
  std::size_t server_ack(std::int64_t t) {
    return server(t, TcpFlags::kAck, {}, client_next_, false);
  }
  std::size_t client_fin(std::int64_t t) {
    return client(t, TcpFlags::kFin | TcpFlags::kAck, {}, server_next_, true);
  }
  std::size_t server_fin(std::int64_t t) {
    return server(t, TcpFlags::kFin | TcpFlags::kAck, {}, client_next_, true);
  }

  // FIN from the client, ACK, FIN from the server, final ACK; 1 ms apart.
  std::int64_t teardown(std::int64_t t) {
    client_fin(t);
    server_ack(t + 1000);
    server_fin(t + 2000);
    client_ack(t + 3000);
    return t + 3000;
  }

  // Sends a raw segment from the client with caller-chosen numbers.
  std::size_t client_raw(std::int64_t t, std::uint8_t flags, std::uint32_t seq,
                         std::uint32_t ack) {
    return out_.emit(t, build_tcp_frame(address(client_, server_),
                                        header(client_port_, server_port_, seq, ack, flags), {}));
  }

 private:
  std::size_t client(std::int64_t t, std::uint8_t flags, ByteView payload, std::uint32_t ack,
                     bool consumes_seq) {
    const auto idx = out_.emit(
        t, build_tcp_frame(address(client_, server_),
                           header(client_port_, server_port_, client_next_, ack, flags), payload));
    client_next_ += static_cast<std::uint32_t>(payload.size()) + (consumes_seq ? 1 : 0);
    return idx;
  }

  std::size_t server(std::int64_t t, std::uint8_t flags, ByteView payload, std::uint32_t ack,
                     bool consumes_seq) {
    const auto idx = out_.emit(
        t, build_tcp_frame(address(server_, client_),
                           header(server_port_, client_port_, server_next_, ack, flags), payload));
    server_next_ += static_cast<std::uint32_t>(payload.size()) + (consumes_seq ? 1 : 0);
    return idx;
  }

  FrameAddressing address(const Host& from, const Host& to) {
    FrameAddressing a;
    a.src_mac = from.mac;
    a.dst_mac = to.mac;
    a.src_ip = from.ip;
    a.dst_ip = to.ip;
    a.ip_id = ip_id_++;
    return a;
  }

  static TcpHeaderFields header(std::uint16_t sport, std::uint16_t dport, std::uint32_t seq,
                                std::uint32_t ack, std::uint8_t flags) {
    TcpHeaderFields h;
    h.src_port = sport;
    h.dst_port = dport;
    h.seq = seq;
    h.ack = ack;
    h.flags = TcpFlags::from_byte(flags);
    return h;
  }

  TraceWriter& out_;
  Host client_;
  Host server_;
  std::uint16_t client_port_;
  std::uint16_t server_port_;
  std::uint32_t client_next_;
  std::uint32_t server_next_;
  std::uint16_t ip_id_ = 1;
};

std::vector<std::uint8_t> http_request(Rng& rng, std::string_view path_prefix,
                                       const Ipv4Address& host) {
  std::string path(path_prefix);
  const auto extra = rng.draw(4, 40);
  for (std::uint64_t i = 0; i < extra; ++i) {
    path += static_cast<char>('a' + rng.draw(0, 25));
  }
  const auto text =
      fmt::format("GET /{} HTTP/1.1\r\nHost: {}\r\nAccept: */*\r\n\r\n", path, host.to_string());
  return {text.begin(), text.end()};
}

// Filler never contains printable ASCII, so no default signature can
// appear in it, and it avoids `avoid` so no embedded pattern starts in it.
std::vector<std::uint8_t> filler(Rng& rng, std::size_t n, std::uint8_t avoid = 0) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) {
    do {
      b = static_cast<std::uint8_t>(rng.draw(0x80, 0xff));
    } while (b == avoid);
  }
  return out;
}

std::uint32_t random_isn(Rng& rng) { return static_cast<std::uint32_t>(rng.draw(1000, 0x7fffffff)); }
std::uint16_t ephemeral_port(Rng& rng) { return static_cast<std::uint16_t>(rng.draw(49152, 60999)); }

// The client ISN is chosen so the server acknowledges the request with the
// observed ack value, and the server's first data byte carries the
// observed sequence number.
std::pair<std::uint32_t, std::uint32_t> observed_isns(std::size_t request_len) {
  return {kObservedAck - 1 - static_cast<std::uint32_t>(request_len), kObservedSeq - 1};
}

void build_normal(TraceWriter& out, const Topology& topo, Rng& rng) {
  const auto request = http_request(rng, "index", topo.server.ip);
  const auto [client_isn, server_isn] = observed_isns(request.size());
  const auto port = ephemeral_port(rng);
  TcpConversation conv(out, topo.client, port, topo.server, kHttpPort, client_isn, server_isn);

  std::int64_t t = kHandshakeSynUs;
  conv.syn(t);
  conv.syn_ack(t + 1000);
  conv.handshake_ack(t + 1300);
  conv.client_data(t + 2000, request);
  t += 3000;
  const auto segments = rng.draw(1, 3);
  for (std::uint64_t i = 0; i < segments; ++i) {
    conv.server_data(t, filler(rng, rng.draw(200, 1460)));
    conv.client_ack(t + 1000);
    t += 2000;
  }

  // A parallel connection to the same service port while the first is open.
  if (rng.draw(0, 1) == 1) {
    const auto second_request = http_request(rng, "style", topo.server.ip);
    TcpConversation second(out, topo.client, static_cast<std::uint16_t>(port + 1), topo.server,
                           kHttpPort, random_isn(rng), random_isn(rng));
    second.syn(t);
    second.syn_ack(t + 1000);
    second.handshake_ack(t + 1300);
    second.client_data(t + 2000, second_request);
    second.server_data(t + 3000, filler(rng, rng.draw(100, 1460)));
    second.client_ack(t + 4000);
    t = second.teardown(t + 5000) + 1000;
  }
  conv.teardown(t);
}

void build_trojan_horse(TraceWriter& out, const Topology& topo, Rng& rng,
                        const ScenarioParams& params) {
  const auto& pattern = params.embedded.pattern;
  const std::size_t len = pattern.size();
  const std::size_t total = params.transfer_size;
  const std::size_t seg = params.segment_size;
  const std::size_t nseg = (total + seg - 1) / seg;
  auto segment_length = [&](std::size_t j) { return std::min(seg, total - j * seg); };

  std::size_t start = 0;
  if (params.split) {
    const auto boundary = rng.draw(1, nseg - 1) * seg;
    start = boundary - *params.split;
    if (start + len > total) {
      throw InvalidParameters("embedded pattern does not fit around the chosen boundary");
    }
  } else {
    std::vector<std::size_t> roomy;
    for (std::size_t j = 0; j < nseg; ++j) {
      if (segment_length(j) >= len) roomy.push_back(j);
    }
    if (roomy.empty()) throw InvalidParameters("no segment is long enough for the pattern");
    const auto j = roomy[rng.draw(0, roomy.size() - 1)];
    start = j * seg + rng.draw(0, segment_length(j) - len);
  }

  auto body = filler(rng, total, pattern.front());
  std::copy(pattern.begin(), pattern.end(), body.begin() + static_cast<long>(start));

  const auto request = http_request(rng, "attachments/hp-ftp.exe?", topo.server.ip);
  const auto [client_isn, server_isn] = observed_isns(request.size());
  TcpConversation conv(out, topo.client, ephemeral_port(rng), topo.server, kHttpPort,
                       client_isn, server_isn);

  std::int64_t t = kHandshakeSynUs;
  conv.syn(t);
  conv.syn_ack(t + 1000);
  conv.handshake_ack(t + 1300);
  conv.client_data(t + 2000, request);
  t += 3000;
  const std::size_t match_end_segment = (start + len - 1) / seg;
  for (std::size_t j = 0; j < nseg; ++j) {
    const auto idx = conv.server_data(
        t, ByteView{body}.subspan(j * seg, segment_length(j)));
    if (j == match_end_segment) {
      out.expect(idx, "SIG-MATCH", conv.key(),
                 fmt::format("{} {} at stream offset {}", params.embedded.id,
                             params.embedded.name, start));
    }
    conv.client_ack(t + 1000);
    t += 2000;
  }
  conv.teardown(t);
}

void build_backdoor(TraceWriter& out, const Topology& topo, Rng& rng) {
  const auto& victim = topo.client;
  const auto& remote = topo.server;

  // A: the backdoor's control connection; looks normal, then goes quiet.
  const auto request = http_request(rng, "update", remote.ip);
  const auto [client_isn, server_isn] = observed_isns(request.size());
  const auto base_port = ephemeral_port(rng);
  TcpConversation control(out, victim, base_port, remote, kHttpPort, client_isn, server_isn);
  control.syn(kNormalBehaviourUs - 8000);
  control.syn_ack(kNormalBehaviourUs - 7000);
  control.handshake_ack(kNormalBehaviourUs - 6000);
  control.client_data(kNormalBehaviourUs - 2000, request);
  control.server_data(kNormalBehaviourUs, filler(rng, rng.draw(100, 600)));

  // B: segments with both sequence and acknowledgment numbers zeroed.
  TcpConversation zeroed(out, victim, static_cast<std::uint16_t>(base_port + 1), remote,
                         kHttpPort, 0, 0);
  const auto zero_count = rng.draw(1, 2);
  for (std::uint64_t i = 0; i < zero_count; ++i) {
    const auto idx = zeroed.client_raw(kZeroSeqAckUs + static_cast<std::int64_t>(i) * 1000,
                                       TcpFlags::kAck, 0, 0);
    out.expect(idx, "ZERO-SEQACK", zeroed.key(), "seq=0 ack=0 flags=A");
  }

  // D: a SYN that is never answered.
  TcpConversation lone(out, victim, static_cast<std::uint16_t>(base_port + 2), remote,
                       kHttpPort, random_isn(rng), random_isn(rng));
  const auto lone_idx = lone.syn(kLoneSynUs);
  out.expect(lone_idx, "HALF-OPEN-SYN", lone.key(), "no reply to SYN");

  // Empty ACKs on the control connection.
  const auto empties = rng.draw(3, 6);
  std::int64_t t = kLoneSynUs + 8000;
  for (std::uint64_t i = 0; i < empties; ++i) {
    const auto idx = control.client_ack(t);
    if (i == 2) {
      out.expect(idx, "EMPTY-PAYLOAD-FLOOD", control.key(),
                 "3 consecutive empty-payload ACK segments");
    }
    if (i + 1 < empties) t += 2000;
  }

  // C: same host pair, new service port, shortly after the last activity.
  t += static_cast<std::int64_t>(rng.draw(150'000, 200'000));
  TcpConversation mutated(out, victim, static_cast<std::uint16_t>(base_port + 3), remote,
                          kMutatedPort, random_isn(rng), random_isn(rng));
  const auto mutated_idx = mutated.syn(t);
  out.expect(mutated_idx, "PORT-MUTATION", mutated.key(),
             fmt::format("port {} → {}", kHttpPort, kMutatedPort));
  mutated.syn_ack(t + 1000);
  mutated.handshake_ack(t + 2000);
  mutated.teardown(t + 3000);

  // E: an ordinary connection later in the capture.
  const auto later_request = http_request(rng, "index", remote.ip);
  TcpConversation later(out, victim, static_cast<std::uint16_t>(base_port + 4), remote,
                        kHttpPort, random_isn(rng), random_isn(rng));
  t = kHandshakeSynUs;
  later.syn(t);
  later.syn_ack(t + 1000);
  later.handshake_ack(t + 1300);
  later.client_data(t + 2000, later_request);
  later.server_data(t + 3000, filler(rng, rng.draw(100, 1460)));
  later.client_ack(t + 4000);
  later.teardown(t + 5000);

  control.teardown(t + 120'000);
}

void validate(const Scenario& scenario) {
  const auto& p = scenario.params;
  if (scenario.kind != ScenarioKind::TrojanHorse && scenario.kind != ScenarioKind::Mixed) return;
  if (p.embedded.pattern.empty()) throw InvalidParameters("embedded signature is empty");
  if (p.segment_size == 0 || p.segment_size > kMaxSegment) {
    throw InvalidParameters(fmt::format("segment size must be within 1..{}", kMaxSegment));
  }
  if (p.transfer_size < p.embedded.pattern.size()) {
    throw InvalidParameters("transfer is shorter than the embedded pattern");
  }
  if (p.split) {
    if (*p.split > p.embedded.pattern.size()) {
      throw InvalidParameters(fmt::format("split point {} beyond pattern length {}", *p.split,
                                          p.embedded.pattern.size()));
    }
    if (p.transfer_size <= p.segment_size) {
      throw InvalidParameters("a split pattern needs at least two segments");
    }
    if (*p.split > p.segment_size) {
      throw InvalidParameters("split point is beyond the segment size");
    }
  }
}

// splitmix64 step, for deriving independent section seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void append_section(SynthResult& result, TraceWriter& section) {
  const auto base = result.records.size();
  for (auto& e : section.expected()) {
    e.packet_index += base;
    result.manifest.expected.push_back(std::move(e));
  }
  for (auto& rec : section.records()) result.records.push_back(std::move(rec));
}

}  // namespace

SynthResult synth(const Scenario& scenario) {
  validate(scenario);
  SynthResult result;
  result.manifest.scenario = std::string(to_string(scenario.kind));
  result.manifest.seed = scenario.seed;

  auto run = [&](ScenarioKind kind, std::uint64_t seed, const Topology& topo,
                 std::int64_t offset_us) {
    Rng rng(seed);
    TraceWriter section(offset_us);
    switch (kind) {
      case ScenarioKind::Normal: build_normal(section, topo, rng); break;
      case ScenarioKind::TrojanHorse: build_trojan_horse(section, topo, rng, scenario.params); break;
      case ScenarioKind::Backdoor: build_backdoor(section, topo, rng); break;
      case ScenarioKind::Mixed: break;
    }
    append_section(result, section);
  };

  if (scenario.kind == ScenarioKind::Mixed) {
    run(ScenarioKind::Normal, mix(scenario.seed), topology_for(1), 0);
    run(ScenarioKind::TrojanHorse, mix(scenario.seed + 1), topology_for(2), 100'000'000);
    run(ScenarioKind::Backdoor, mix(scenario.seed + 2), topology_for(3), 200'000'000);
  } else {
    run(scenario.kind, scenario.seed, topology_for(0), 0);
  }

  std::stable_sort(result.manifest.expected.begin(), result.manifest.expected.end(),
                   [](const ExpectedDetection& x, const ExpectedDetection& y) {
                     return std::tie(x.packet_index, x.rule) < std::tie(y.packet_index, y.rule);
                   });
  result.manifest.packet_count = result.records.size();
  return result;
}

std::string manifest_to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["scenario"] = m.scenario;
  j["seed"] = m.seed;
  j["packet_count"] = m.packet_count;
  auto expected = nlohmann::ordered_json::array();
  for (const auto& e : m.expected) {
    expected.push_back(nlohmann::ordered_json{{"packet_index", e.packet_index},
                                              {"rule", e.rule},
                                              {"flow", e.flow},
                                              {"detail", e.detail}});
  }
  j["expected"] = expected;
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Manifest m;
    m.scenario = j.at("scenario").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.packet_count = j.at("packet_count").get<std::size_t>();
    for (const auto& e : j.at("expected")) {
      m.expected.push_back(ExpectedDetection{e.at("packet_index").get<std::size_t>(),
                                             e.at("rule").get<std::string>(),
                                             e.at("flow").get<std::string>(),
                                             e.at("detail").get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("malformed manifest: {}", e.what()));
  }
}

}  // namespace sniffwatch
