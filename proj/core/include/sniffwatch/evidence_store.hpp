#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sniffwatch/detection.hpp"

namespace sniffwatch {

// One line of the evidence log. Key order on disk is fixed:
// ts, proto, src_mac, dst_mac, src_ip, dst_ip, rule, severity, pkt, flow, detail.
struct EvidenceRecord {
  Timestamp grab_datetime;
  std::string protocol;
  MacAddress src_mac;
  MacAddress dst_mac;
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  RuleId rule = RuleId::SigMatch;
  Severity severity = Severity::Alert;
  std::uint64_t packet_index = 0;
  std::string flow;
  std::string detail;

  friend bool operator==(const EvidenceRecord&, const EvidenceRecord&) = default;
};

class EvidenceError : public std::runtime_error {
 public:
  EvidenceError(std::filesystem::path path, const std::string& what)
      : std::runtime_error(what), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct MalformedLine {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct EvidenceLog {
  std::vector<EvidenceRecord> records;
  std::vector<MalformedLine> malformed;
};

EvidenceRecord to_evidence(const Detection& d);

// Single line, no trailing newline.
std::string serialize_evidence(const EvidenceRecord& record);
// Throws std::invalid_argument describing the first problem found.
EvidenceRecord parse_evidence_line(const std::string& line);

// Opens `path` in append mode and adds exactly one line. Throws
// EvidenceError on I/O failure. One writer per file.
void append_evidence(const std::filesystem::path& path, const EvidenceRecord& record);
void append_detection(const std::filesystem::path& path, const Detection& d);

// Bad lines are reported in `malformed`; the rest are still returned.
// Throws EvidenceError if the file cannot be opened.
EvidenceLog read_evidence(const std::filesystem::path& path);

}  // namespace sniffwatch
