#include "sniffwatch/evidence_store.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <json.hpp>

namespace sniffwatch {

using ordered_json = nlohmann::ordered_json;

EvidenceRecord to_evidence(const Detection& d) {
  return EvidenceRecord{d.timestamp, d.protocol,  d.src_mac,      d.dst_mac,
                        d.src_ip,    d.dst_ip,    d.rule,         d.severity,
                        d.packet_index, d.flow.to_string(), d.detail};
}

std::string serialize_evidence(const EvidenceRecord& r) {
  ordered_json j;
  j["ts"] = to_iso8601(r.grab_datetime);
  j["proto"] = r.protocol;
  j["src_mac"] = r.src_mac.to_string();
  j["dst_mac"] = r.dst_mac.to_string();
  j["src_ip"] = r.src_ip.to_string();
  j["dst_ip"] = r.dst_ip.to_string();
  j["rule"] = std::string(to_string(r.rule));
  j["severity"] = std::string(to_string(r.severity));
  j["pkt"] = r.packet_index;
  j["flow"] = r.flow;
  j["detail"] = r.detail;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

EvidenceRecord parse_evidence_line(const std::string& line) {
  const auto j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::invalid_argument("not a JSON object");
  }
  auto text = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw std::invalid_argument(fmt::format("missing or non-string '{}'", key));
    }
    return it->get<std::string>();
  };

  EvidenceRecord r;
  r.grab_datetime = parse_iso8601(text("ts"));
  r.protocol = text("proto");
  if (r.protocol != "TCP" && r.protocol != "UDP") {
    throw std::invalid_argument(fmt::format("unknown proto '{}'", r.protocol));
  }
  r.src_mac = MacAddress::parse(text("src_mac"));
  r.dst_mac = MacAddress::parse(text("dst_mac"));
  r.src_ip = Ipv4Address::parse(text("src_ip"));
  r.dst_ip = Ipv4Address::parse(text("dst_ip"));
  const auto rule = parse_rule_id(text("rule"));
  if (!rule) throw std::invalid_argument("unknown rule id");
  r.rule = *rule;
  const auto severity = parse_severity(text("severity"));
  if (!severity) throw std::invalid_argument("unknown severity");
  r.severity = *severity;
  auto pkt = j.find("pkt");
  if (pkt == j.end() || !pkt->is_number_unsigned()) {
    throw std::invalid_argument("missing or non-integer 'pkt'");
  }
  r.packet_index = pkt->get<std::uint64_t>();
  r.flow = text("flow");
  r.detail = text("detail");
  return r;
}

void append_evidence(const std::filesystem::path& path, const EvidenceRecord& record) {
  const auto line = serialize_evidence(record) + '\n';
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) {
    throw EvidenceError(path, fmt::format("cannot open '{}' for append: {}", path.string(),
                                          std::strerror(errno)));
  }
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) {
    throw EvidenceError(path, fmt::format("write to '{}' failed", path.string()));
  }
}

void append_detection(const std::filesystem::path& path, const Detection& d) {
  append_evidence(path, to_evidence(d));
}

EvidenceLog read_evidence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw EvidenceError(path, fmt::format("cannot open evidence log '{}'", path.string()));
  }
  EvidenceLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      log.records.push_back(parse_evidence_line(line));
    } catch (const std::exception& e) {
      log.malformed.push_back(MalformedLine{line_no, e.what()});
    }
  }
  return log;
}

}  // namespace sniffwatch
