#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sniffwatch/detection.hpp"
#include "sniffwatch/engine.hpp"
#include "sniffwatch/evidence_store.hpp"

namespace sniffwatch {

struct FlowGroup {
  std::string flow;
  std::vector<std::uint64_t> packets;  // one entry per detection, log order

  friend bool operator==(const FlowGroup&, const FlowGroup&) = default;
};

struct Summary {
  std::string trace_name;
  TraceStats stats;
  std::map<RuleId, std::uint64_t> rule_counts;  // every rule present, zero if unseen
  std::uint64_t total_detections = 0;
  std::vector<FlowGroup> flows;  // sorted by flow text
  bool clean = true;

  friend bool operator==(const Summary&, const Summary&) = default;
};

Summary summarize(std::span<const EvidenceRecord> records, const TraceStats& stats,
                  std::string trace_name);

// Self-contained page: no scripts, no external assets. "NO DETECTIONS"
// appears when the summary is clean.
std::string render_html(const Summary& summary, std::span<const EvidenceRecord> records);

std::string render_summary_json(const Summary& summary);
// Throws std::invalid_argument on malformed input.
Summary parse_summary_json(const std::string& text);

std::string html_escape(std::string_view text);

// Selection applied before rendering; empty members select everything.
struct ReportFilter {
  std::set<RuleId> rules;
  std::optional<std::string> flow_contains;

  bool accepts(const EvidenceRecord& r) const;
};

std::vector<EvidenceRecord> apply_filter(std::span<const EvidenceRecord> records,
                                         const ReportFilter& filter);

}  // namespace sniffwatch
