#include "sniffwatch_tools/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <variant>

#include "sniffwatch/engine.hpp"
#include "sniffwatch/evidence_store.hpp"
#include "sniffwatch/hexdump.hpp"
#include "sniffwatch/signatures.hpp"
#include "sniffwatch/trace_synth.hpp"

namespace sniffwatch::tools {
namespace {

constexpr const char* kEvidenceFile = "evidence.log";
constexpr const char* kSummaryFile = "summary.json";
constexpr const char* kReportFile = "report.html";

void fail(std::ostream& err, std::string_view what) {
  fmt::print(err, "sniffwatch: error: {}\n", what);
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  f.flush();
  if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  f.flush();
  if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
}

std::string trace_name_of(const std::string& input) {
  return input == "-" ? std::string("stdin") : std::filesystem::path(input).filename().string();
}

SignatureSet signatures_for(const RunConfig& config) {
  return config.signature_file ? load_signatures(*config.signature_file) : default_signatures();
}

void report_malformed(const EvidenceLog& log, const std::filesystem::path& path,
                      std::ostream& err) {
  for (const auto& m : log.malformed) {
    fmt::print(err, "sniffwatch: warning: MalformedLine {}:{}: {}\n", path.string(), m.line,
               m.reason);
  }
}

// Writes summary.json and report.html for `records` into `dir`.
void render_outputs(const std::filesystem::path& dir, const std::vector<EvidenceRecord>& records,
                    const TraceStats& stats, const std::string& trace_name) {
  const auto summary = summarize(records, stats, trace_name);
  write_file(dir / kSummaryFile, render_summary_json(summary));
  write_file(dir / kReportFile, render_html(summary, records));
}

std::string tcp_summary(const TcpSegment& tcp) {
  return fmt::format("{} seq={} ack={} win={} len={}", tcp.flags.to_string(), tcp.seq, tcp.ack,
                     tcp.window, tcp.payload.size());
}

ByteView dump_bytes(const DissectedPacket& pkt) {
  if (!pkt.transport) return pkt.frame();
  return std::visit(
      [](const auto& t) -> ByteView {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, TcpSegment> || std::is_same_v<T, UdpDatagram>) {
          return t.payload;
        } else if constexpr (std::is_same_v<T, IcmpMessage>) {
          return t.rest;
        } else {
          return t.bytes;
        }
      },
      *pkt.transport);
}

}  // namespace

std::string describe_packet(const DissectedPacket& pkt) {
  std::string line = fmt::format("#{} {}", pkt.index, to_seconds_string(pkt.timestamp));
  if (!pkt.ethernet) {
    return line + fmt::format(" undissectable len={}", pkt.frame().size());
  }
  const auto& eth = *pkt.ethernet;
  line += fmt::format(" {} > {}", eth.src_mac.to_string(), eth.dst_mac.to_string());
  if (!pkt.ip) {
    return line + fmt::format(" ethertype=0x{:04x} len={}", eth.ethertype, pkt.frame().size());
  }
  const auto& ip = *pkt.ip;
  if (const auto* tcp = pkt.tcp()) {
    line += fmt::format(" {}:{} > {}:{} TCP {}", ip.src_ip.to_string(), tcp->src_port,
                        ip.dst_ip.to_string(), tcp->dst_port, tcp_summary(*tcp));
  } else if (const auto* udp = pkt.udp()) {
    line += fmt::format(" {}:{} > {}:{} UDP len={}", ip.src_ip.to_string(), udp->src_port,
                        ip.dst_ip.to_string(), udp->dst_port, udp->payload.size());
  } else if (const auto* icmp = pkt.icmp()) {
    line += fmt::format(" {} > {} ICMP type={} code={} len={}", ip.src_ip.to_string(),
                        ip.dst_ip.to_string(), icmp->icmp_type, icmp->code, icmp->rest.size());
  } else {
    line += fmt::format(" {} > {} proto={} len={}", ip.src_ip.to_string(), ip.dst_ip.to_string(),
                        ip.protocol, ip.payload.size());
  }
  return line;
}

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    auto rules = config.rules;
    if (!config.filter.rules.empty()) rules.enabled = config.filter.rules;
    rules.validate();
    const auto signatures = signatures_for(config);
    auto source = RecordSource::open(config.input, config.limit);
    const auto result = evaluate(source, signatures, rules);

    ensure_dir(config.out_dir);
    const auto log_path = config.out_dir / kEvidenceFile;
    { std::ofstream touch(log_path, std::ios::app); }
    std::map<RuleId, std::uint64_t> counts;
    std::uint64_t recorded = 0;
    for (const auto& d : result.detections) {
      const auto rec = to_evidence(d);
      if (!config.filter.accepts(rec)) continue;
      append_evidence(log_path, rec);
      ++counts[d.rule];
      ++recorded;
    }

    const auto log = read_evidence(log_path);
    report_malformed(log, log_path, err);
    render_outputs(config.out_dir, log.records, result.stats, trace_name_of(config.input));

    for (auto rule : kAllRules) {
      fmt::print(out, "{:<20} {}\n", to_string(rule), counts[rule]);
    }
    if (result.stats.truncated) {
      fmt::print(err, "sniffwatch: warning: stopped after {} packets (--limit)\n", config.limit);
    }
    return recorded == 0 ? kExitClean : kExitDetections;
  } catch (const std::exception& e) {
    fail(err, e.what());
    return kExitError;
  }
}

int cmd_dump(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    auto source = RecordSource::open(config.input, config.limit);
    std::size_t index = 0;
    bool shown = false;
    while (auto record = source.next()) {
      const auto this_index = index++;
      if (config.packet && *config.packet != this_index) continue;
      const auto pkt = dissect(*record, this_index);
      out << describe_packet(pkt) << '\n';
      for (const auto& note : pkt.parse_notes) out << "  note: " << note << '\n';
      const auto bytes = dump_bytes(pkt);
      out << hexdump(bytes, bytes.empty() ? 0 : pkt.offset_of(bytes));
      shown = true;
      if (config.packet) break;
    }
    if (config.packet && !shown) {
      fail(err, fmt::format("no packet {} in a trace of {} packets", *config.packet, index));
      return kExitError;
    }
    return kExitClean;
  } catch (const std::exception& e) {
    fail(err, e.what());
    return kExitError;
  }
}

int cmd_synth(const SynthConfig& config, std::ostream& out, std::ostream& err) {
  const auto kind = parse_scenario_kind(config.scenario);
  if (!kind) {
    fail(err, fmt::format("unknown scenario '{}' (normal, trojan-horse, backdoor, mixed)",
                          config.scenario));
    return kExitError;
  }
  try {
    Scenario scenario;
    scenario.kind = *kind;
    scenario.seed = config.seed;
    scenario.params.split = config.split;
    const auto result = synth(scenario);
    ensure_dir(config.out_dir);
    const auto pcap_path = config.out_dir / (config.scenario + ".pcap");
    const auto manifest_path = config.out_dir / (config.scenario + ".manifest.json");
    write_file(pcap_path, result.pcap_bytes());
    write_file(manifest_path, manifest_to_json(result.manifest));
    fmt::print(out, "wrote {} ({} packets, {} expected detections)\n", pcap_path.string(),
               result.records.size(), result.manifest.expected.size());
    fmt::print(out, "wrote {}\n", manifest_path.string());
    return kExitClean;
  } catch (const std::exception& e) {
    fail(err, e.what());
    return kExitError;
  }
}

int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const std::filesystem::path log_path = config.input;
    const auto log = read_evidence(log_path);
    report_malformed(log, log_path, err);

    // Trace statistics are not in the log; reuse the ones cmd_analyze
    // stored next to it.
    TraceStats stats;
    std::string trace_name;
    const auto summary_path = log_path.parent_path() / kSummaryFile;
    if (std::ifstream in{summary_path}) {
      std::stringstream text;
      text << in.rdbuf();
      try {
        const auto previous = parse_summary_json(text.str());
        stats = previous.stats;
        trace_name = previous.trace_name;
      } catch (const std::exception& e) {
        fmt::print(err, "sniffwatch: warning: ignoring {}: {}\n", summary_path.string(), e.what());
      }
    }

    const auto records = apply_filter(log.records, config.filter);
    ensure_dir(config.out_dir);
    render_outputs(config.out_dir, records, stats, trace_name);
    fmt::print(out, "{} records, {} malformed lines -> {}\n", records.size(),
               log.malformed.size(), (config.out_dir / kReportFile).string());
    return kExitClean;
  } catch (const std::exception& e) {
    fail(err, e.what());
    return kExitError;
  }
}

}  // namespace sniffwatch::tools
