// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if
// any criterion fails.

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sniffwatch/checksum.hpp"
#include "sniffwatch/dissector.hpp"
#include "sniffwatch/engine.hpp"
#include "sniffwatch/evidence_store.hpp"
#include "sniffwatch/flow_tracker.hpp"
#include "sniffwatch/hexdump.hpp"
#include "sniffwatch/packet_builder.hpp"
#include "sniffwatch/trace_synth.hpp"
#include "sniffwatch_tools/commands.hpp"

namespace sw = sniffwatch;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::path(SNIFFWATCH_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sw::EvaluationResult evaluate_synth(const sw::SynthResult& r) {
  return sw::evaluate(sw::read_pcap(r.pcap_bytes()), sw::default_signatures(), sw::RuleConfig{});
}

Outcome ac1_end_to_end() {
  const auto start = Clock::now();
  int total = 0, matched = 0;
  std::string first_failure;
  for (auto kind : {sw::ScenarioKind::Normal, sw::ScenarioKind::TrojanHorse,
                    sw::ScenarioKind::Backdoor, sw::ScenarioKind::Mixed}) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto result = sw::synth(sw::Scenario{kind, seed, {}});
      const auto got = sw::oracle::as_manifest_entries(evaluate_synth(result).detections);
      ++total;
      if (got == result.manifest.expected) {
        ++matched;
      } else if (first_failure.empty()) {
        first_failure = fmt::format(" first mismatch: {} seed {}", sw::to_string(kind), seed);
      }
    }
  }
  const double secs = seconds_since(start);
  return {matched == total && secs < 10.0,
          fmt::format("{}/{} traces equal their manifest in {:.2f} s (limit 10 s){}", matched,
                      total, secs, first_failure)};
}

Outcome ac2_backdoor_fixture() {
  const auto eval = evaluate_synth(sw::synth(sw::Scenario{sw::ScenarioKind::Backdoor, 1, {}}));
  int mutation = 0, half_open = 0, zero = 0, flood = 0;
  bool mutation_detail = false, half_open_time = false;
  for (const auto& d : eval.detections) {
    switch (d.rule) {
      case sw::RuleId::PortMutation:
        ++mutation;
        mutation_detail = d.detail.find("80 → 82") != std::string::npos;
        break;
      case sw::RuleId::HalfOpenSyn:
        ++half_open;
        half_open_time = d.timestamp == sw::Timestamp::from_micros(10'712'000);
        break;
      case sw::RuleId::ZeroSeqAck: ++zero; break;
      case sw::RuleId::EmptyPayloadFlood: ++flood; break;
      case sw::RuleId::SigMatch: break;
    }
  }
  const bool ok = mutation == 1 && mutation_detail && half_open == 1 && half_open_time &&
                  zero >= 1 && flood == 1;
  return {ok, fmt::format("PORT-MUTATION={} (80 → 82: {}), HALF-OPEN-SYN={} (at 10.712: {}), "
                          "ZERO-SEQACK={}, EMPTY-PAYLOAD-FLOOD={}",
                          mutation, mutation_detail, half_open, half_open_time, zero, flood)};
}

Outcome ac3_trojan_fixture() {
  const auto pattern = sw::ScenarioParams{}.embedded.pattern;
  std::size_t ok = 0;
  std::string first_failure;
  for (std::size_t split = 0; split <= pattern.size(); ++split) {
    sw::Scenario s{sw::ScenarioKind::TrojanHorse, 1, {}};
    s.params.split = split;
    const auto result = sw::synth(s);
    const auto eval = evaluate_synth(result);
    const auto naive = sw::oracle::naive_stream_matches(result.records, pattern);
    const bool good = eval.detections.size() == 1 && naive.size() == 1 &&
                      eval.detections[0].rule == sw::RuleId::SigMatch &&
                      eval.detections[0].packet_index == naive[0].packet_index &&
                      eval.detections[0].stream_offset == naive[0].offset;
    if (good) {
      ++ok;
    } else if (first_failure.empty()) {
      first_failure = fmt::format(" first failure at split {}", split);
    }
  }
  return {ok == pattern.size() + 1,
          fmt::format("{}/{} split points give exactly one SIG-MATCH at the naive offset{}", ok,
                      pattern.size() + 1, first_failure)};
}

Outcome ac4_clean_baseline() {
  const auto dir = fresh_dir("ac4");
  sw::tools::SynthConfig sc;
  sc.scenario = "normal";
  sc.out_dir = dir;
  std::ostringstream out, err;
  sw::tools::cmd_synth(sc, out, err);
  sw::tools::RunConfig rc;
  rc.input = (dir / "normal.pcap").string();
  rc.out_dir = dir / "out";
  const int code = sw::tools::cmd_analyze(rc, out, err);
  const auto eval = evaluate_synth(sw::synth(sw::Scenario{}));
  return {code == 0 && eval.detections.empty(),
          fmt::format("{} detections, analyze exit code {}", eval.detections.size(), code)};
}

Outcome ac5_checksum_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  int agree = 0, corruptions = 0, caught = 0, rejected_by_parser = 0;
  constexpr int kCases = 1000;
  for (int i = 0; i < kCases; ++i) {
    sw::FrameAddressing a;
    a.src_ip = sw::Ipv4Address(static_cast<std::uint32_t>(rng()));
    a.dst_ip = sw::Ipv4Address(static_cast<std::uint32_t>(rng()));
    a.ttl = static_cast<std::uint8_t>(rng());
    a.ip_id = static_cast<std::uint16_t>(rng());
    a.ip_options.assign(4 * (rng() % 3), static_cast<std::uint8_t>(1));
    sw::TcpHeaderFields t;
    t.src_port = static_cast<std::uint16_t>(rng());
    t.dst_port = static_cast<std::uint16_t>(rng());
    t.seq = static_cast<std::uint32_t>(rng());
    t.ack = static_cast<std::uint32_t>(rng());
    t.flags = sw::TcpFlags::from_byte(static_cast<std::uint8_t>(rng() & 0x3f));
    t.window = static_cast<std::uint16_t>(rng());
    std::vector<std::uint8_t> payload(rng() % 64);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    const auto frame = sw::build_tcp_frame(a, t, payload);
    const std::size_t ihl = (frame[14] & 0x0f) * 4u;

    std::vector<std::uint8_t> header(frame.begin() + 14, frame.begin() + 14 + static_cast<long>(ihl));
    std::vector<std::uint8_t> segment(frame.begin() + 14 + static_cast<long>(ihl), frame.end());
    auto header_zeroed = header;
    header_zeroed[10] = header_zeroed[11] = 0;
    auto segment_zeroed = segment;
    segment_zeroed[16] = segment_zeroed[17] = 0;
    std::vector<std::uint8_t> pseudo;
    for (auto ip : {a.src_ip.value(), a.dst_ip.value()}) {
      for (int s = 24; s >= 0; s -= 8) pseudo.push_back(static_cast<std::uint8_t>(ip >> s));
    }
    pseudo.insert(pseudo.end(), {0, 6, static_cast<std::uint8_t>(segment.size() >> 8),
                                 static_cast<std::uint8_t>(segment.size())});
    pseudo.insert(pseudo.end(), segment_zeroed.begin(), segment_zeroed.end());

    sw::CaptureRecord rec;
    rec.data = frame;
    rec.orig_len = static_cast<std::uint32_t>(frame.size());
    const auto pkt = sw::dissect(rec, 0);
    const bool agrees =
        sw::internet_checksum(header_zeroed) == sw::oracle::ones_complement_checksum(header_zeroed) &&
        sw::internet_checksum(pseudo) == sw::oracle::ones_complement_checksum(pseudo) &&
        sw::internet_checksum(header_zeroed) == static_cast<std::uint16_t>(header[10] << 8 | header[11]) &&
        sw::oracle::transport_checksum(a.src_ip.value(), a.dst_ip.value(), 6, segment_zeroed) ==
            static_cast<std::uint16_t>(segment[16] << 8 | segment[17]) &&
        pkt.ip && pkt.tcp() && sw::verify_ipv4_checksum(*pkt.ip) &&
        sw::verify_tcp_checksum(*pkt.ip, *pkt.tcp());
    if (agrees) ++agree;

    // One corrupted byte in the IPv4 header, one in the TCP segment.
    for (const bool in_header : {true, false}) {
      auto bad = rec;
      const std::size_t at = in_header ? 14 + rng() % ihl : 14 + ihl + rng() % segment.size();
      bad.data[at] ^= static_cast<std::uint8_t>(1 + rng() % 255);
      ++corruptions;
      const auto broken = sw::dissect(bad, 0);
      bool detected = false;
      if (in_header) {
        if (!broken.ip) {
          detected = true;
          ++rejected_by_parser;
        } else {
          detected = !sw::verify_ipv4_checksum(*broken.ip);
        }
      } else {
        if (!broken.tcp()) {
          detected = true;
          ++rejected_by_parser;
        } else {
          detected = !sw::verify_tcp_checksum(*broken.ip, *broken.tcp());
        }
      }
      if (detected) ++caught;
    }
  }
  const double secs = seconds_since(start);
  return {agree == kCases && caught == corruptions && secs < 1.0,
          fmt::format("{}/{} agree with oracle, {}/{} corruptions detected ({} by parser "
                      "rejection) in {:.3f} s",
                      agree, kCases, caught, corruptions, rejected_by_parser, secs)};
}

Outcome ac6_pcap_round_trip() {
  const auto start = Clock::now();
  std::mt19937_64 rng(6);
  const auto mixed = sw::synth(sw::Scenario{sw::ScenarioKind::Mixed, 3, {}}).records;
  std::vector<sw::CaptureRecord> records;
  for (std::size_t i = 0; i < sw::kDefaultPacketLimit; ++i) {
    auto r = mixed[i % mixed.size()];
    r.ts = sw::Timestamp::from_micros(static_cast<std::int64_t>(1'000'000 + i * 997));
    records.push_back(std::move(r));
  }
  const auto bytes = sw::write_pcap(sw::PcapHeader{}, records);
  const bool lossless = sw::read_pcap(bytes).records == records;
  const bool swapped = sw::read_pcap(sw::oracle::write_pcap_big_endian(records)).records == records;

  auto stream = std::make_unique<std::istringstream>(std::string(bytes.begin(), bytes.end()));
  auto source = sw::RecordSource::from_stream(std::move(stream));
  std::size_t streamed = 0;
  while (source.next()) ++streamed;
  const bool limit_ok = streamed == 1000 && !source.truncated();

  const double secs = seconds_since(start);
  return {lossless && swapped && limit_ok && secs < 1.0,
          fmt::format("1000 records lossless={} swapped-magic identical={} streamed={} in "
                      "{:.3f} s",
                      lossless, swapped, streamed, secs)};
}

Outcome ac7_hexdump_golden() {
  std::vector<std::uint8_t> row(16);
  std::iota(row.begin(), row.end(), 0);
  const std::string golden =
      "0000  00 01 02 03 04 05 06 07  08 09 0a 0b 0c 0d 0e 0f  ................\n";
  const bool golden_ok = sw::hexdump(row) == golden;
  std::mt19937_64 rng(7);
  int lossless = 0;
  constexpr int kCases = 200;
  for (int i = 0; i < kCases; ++i) {
    std::vector<std::uint8_t> data(rng() % 200);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    if (sw::oracle::decode_hexdump(sw::hexdump(data, 54), 54) == data) ++lossless;
  }
  return {golden_ok && lossless == kCases,
          fmt::format("golden row {}, {}/{} dumps decode back losslessly",
                      golden_ok ? "exact" : "differs", lossless, kCases)};
}

Outcome ac8_evidence_log() {
  const auto dir = fresh_dir("ac8");
  const auto result = sw::synth(sw::Scenario{sw::ScenarioKind::Mixed, 8, {}});
  const auto eval = evaluate_synth(result);
  const auto log_path = dir / "direct.log";
  static const char* const kKeys[] = {"\"ts\":",     "\"proto\":",  "\"src_mac\":",
                                      "\"dst_mac\":", "\"src_ip\":", "\"dst_ip\":",
                                      "\"rule\":",   "\"severity\":", "\"pkt\":"};
  bool prefix_valid = true, fields_present = true;
  for (std::size_t n = 0; n < eval.detections.size(); ++n) {
    sw::append_detection(log_path, eval.detections[n]);
    const auto log = sw::read_evidence(log_path);
    prefix_valid = prefix_valid && log.records.size() == n + 1 && log.malformed.empty();
  }
  std::ifstream in(log_path);
  std::string line;
  while (std::getline(in, line)) {
    for (const char* key : kKeys) fields_present = fields_present && line.find(key) != std::string::npos;
  }
  const auto back = sw::read_evidence(log_path).records;
  bool round_trip = back.size() == eval.detections.size();
  for (std::size_t i = 0; round_trip && i < back.size(); ++i) {
    round_trip = back[i] == sw::to_evidence(eval.detections[i]);
  }

  std::ofstream(dir / "mixed.pcap", std::ios::binary)
      .write(reinterpret_cast<const char*>(result.pcap_bytes().data()),
             static_cast<std::streamsize>(result.pcap_bytes().size()));
  std::ostringstream out, err;
  sw::tools::RunConfig rc;
  rc.input = (dir / "mixed.pcap").string();
  rc.out_dir = dir / "out";
  sw::tools::cmd_analyze(rc, out, err);
  const auto html = slurp(rc.out_dir / "report.html");
  sw::tools::RunConfig report;
  report.input = (rc.out_dir / "evidence.log").string();
  report.out_dir = rc.out_dir;
  sw::tools::cmd_report(report, out, err);
  const bool identical = !html.empty() && slurp(rc.out_dir / "report.html") == html;

  return {eval.detections.size() >= 4 && prefix_valid && fields_present && round_trip && identical,
          fmt::format("{} appends prefix-valid={} all fields={} round-trip={} report.html "
                      "byte-identical={}",
                      eval.detections.size(), prefix_valid, fields_present, round_trip,
                      identical)};
}

Outcome ac9_flow_tracker() {
  std::mt19937_64 rng(9);
  constexpr int kTraces = 500;
  int equal = 0;
  std::size_t events = 0;
  std::array<std::size_t, 4> per_kind{};
  std::string first_failure;
  for (int trial = 0; trial < kTraces; ++trial) {
    const auto trace = sw::oracle::random_trace(rng, 50);
    const sw::oracle::RefConfig cfg;
    sw::FlowTracker tracker;
    const auto records = sw::oracle::to_records(trace);
    std::vector<sw::oracle::RefEvent> got, want;
    for (std::size_t i = 0; i < records.size(); ++i) {
      for (const auto& e : tracker.advance(sw::dissect(records[i], i))) {
        got.push_back({static_cast<int>(e.kind), e.flow.to_string(), e.packet_index,
                       e.timestamp.micros(), e.detail});
      }
      const auto ref = sw::oracle::reference_advance(trace, i, cfg);
      want.insert(want.end(), ref.begin(), ref.end());
    }
    if (!records.empty()) {
      for (const auto& e : tracker.finalize(records.back().ts)) {
        got.push_back({static_cast<int>(e.kind), e.flow.to_string(), e.packet_index,
                       e.timestamp.micros(), e.detail});
      }
      const auto ref = sw::oracle::reference_finalize(trace, cfg);
      want.insert(want.end(), ref.begin(), ref.end());
    }
    events += want.size();
    for (const auto& e : want) ++per_kind.at(static_cast<std::size_t>(e.kind));
    if (got == want) {
      ++equal;
    } else if (first_failure.empty()) {
      first_failure = fmt::format("; first mismatch in trace {}", trial);
    }
  }
  const bool every_kind = std::all_of(per_kind.begin(), per_kind.end(), [](auto c) { return c > 0; });
  return {equal == kTraces && every_kind,
          fmt::format("{}/{} random traces ({} reference events: handshake={} half-open={} "
                      "port-mutation={} violation={}) equal the brute-force state machine{}",
                      equal, kTraces, events, per_kind[0], per_kind[1], per_kind[2], per_kind[3],
                      first_failure)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"AC1 end-to-end oracle", ac1_end_to_end},
      {"AC2 backdoor fixture", ac2_backdoor_fixture},
      {"AC3 trojan-horse fixture", ac3_trojan_fixture},
      {"AC4 clean baseline", ac4_clean_baseline},
      {"AC5 checksum oracle", ac5_checksum_oracle},
      {"AC6 pcap round-trip", ac6_pcap_round_trip},
      {"AC7 hexdump golden", ac7_hexdump_golden},
      {"AC8 evidence log", ac8_evidence_log},
      {"AC9 flow-tracker equivalence", ac9_flow_tracker},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    fmt::print("[{}] {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
  }
  fmt::print("{} of {} criteria passed\n", std::size(criteria) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
