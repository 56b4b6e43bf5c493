#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "sniffwatch/detection.hpp"
#include "sniffwatch/dissector.hpp"
#include "sniffwatch/pcap_io.hpp"
#include "sniffwatch/report.hpp"

namespace sniffwatch::tools {

inline constexpr int kExitClean = 0;
inline constexpr int kExitDetections = 1;
inline constexpr int kExitError = 2;

struct RunConfig {
  std::string input = "-";  // pcap path, evidence log for report; "-" is stdin
  std::filesystem::path out_dir = "out";
  std::optional<std::string> signature_file;
  std::size_t limit = kDefaultPacketLimit;
  RuleConfig rules;
  ReportFilter filter;
  std::optional<std::size_t> packet;  // dump only
};

struct SynthConfig {
  std::string scenario;
  std::uint64_t seed = 1;
  std::optional<std::size_t> split;
  std::filesystem::path out_dir = "out";
};

// Every command writes normal output to `out` and diagnostics to `err`,
// and returns the process exit code.
int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_dump(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err);

// The header line cmd_dump prints before a packet's hexdump.
std::string describe_packet(const DissectedPacket& pkt);

}  // namespace sniffwatch::tools
