#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sniffwatch/pcap_io.hpp"
#include "sniffwatch/signatures.hpp"

namespace sniffwatch {

enum class ScenarioKind { Normal, TrojanHorse, Backdoor, Mixed };

std::string_view to_string(ScenarioKind kind);  // "normal", "trojan-horse", ...
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);

struct ScenarioParams {
  // Trojan-horse only: how many pattern bytes sit before a segment
  // boundary. Unset embeds the pattern whole inside one segment.
  std::optional<std::size_t> split;
  Signature embedded{"SIG-001", "linuxpir8-mail",
                     {'L', 'i', 'n', 'u', 'x', 'P', 'i', 'r', '8', ' ', '[', 'a',
                      't', ']', ' ', 'y', 'a', 'h', 'o', 'o', '.', 'c', 'o', 'm'}};
  std::size_t transfer_size = 14140;
  std::size_t segment_size = 1460;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::Normal;
  std::uint64_t seed = 1;
  ScenarioParams params;
};

// A detection the generated trace must produce under the default rule
// configuration and the default signature set.
struct ExpectedDetection {
  std::size_t packet_index = 0;
  std::string rule;
  std::string flow;
  std::string detail;

  friend bool operator==(const ExpectedDetection&, const ExpectedDetection&) = default;
};

struct Manifest {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t packet_count = 0;
  std::vector<ExpectedDetection> expected;  // ordered by packet index, then rule

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct SynthResult {
  PcapHeader header;
  std::vector<CaptureRecord> records;
  Manifest manifest;

  std::vector<std::uint8_t> pcap_bytes() const { return write_pcap(header, records); }
};

class InvalidParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Deterministic: equal scenarios give byte-identical traces on every platform.
SynthResult synth(const Scenario& scenario);

std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const std::string& text);

}  // namespace sniffwatch
