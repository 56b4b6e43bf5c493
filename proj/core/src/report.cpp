#include "sniffwatch/report.hpp"

#include <fmt/format.h>

#include <json.hpp>
#include <stdexcept>

namespace sniffwatch {

using ordered_json = nlohmann::ordered_json;

Summary summarize(std::span<const EvidenceRecord> records, const TraceStats& stats,
                  std::string trace_name) {
  Summary s;
  s.trace_name = std::move(trace_name);
  s.stats = stats;
  for (auto rule : kAllRules) s.rule_counts[rule] = 0;

  std::map<std::string, FlowGroup> groups;
  for (const auto& r : records) {
    s.rule_counts[r.rule]++;
    auto& g = groups[r.flow];
    g.flow = r.flow;
    g.packets.push_back(r.packet_index);
  }
  s.total_detections = records.size();
  for (auto& [flow, group] : groups) s.flows.push_back(std::move(group));
  s.clean = s.total_detections == 0;
  return s;
}

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

constexpr const char* kStyle =
    "body{font-family:sans-serif;margin:2em;}"
    "table{border-collapse:collapse;margin-bottom:1.5em;}"
    "th,td{border:1px solid #999;padding:0.25em 0.5em;text-align:left;}"
    "tr.alert td{background:#fdd;}tr.warn td{background:#ffd;}"
    "p.clean{font-weight:bold;color:#060;}";

void row(std::string& out, std::string_view label, const std::string& value) {
  out += fmt::format("<tr><th>{}</th><td>{}</td></tr>\n", html_escape(label),
                     html_escape(value));
}

}  // namespace

std::string render_html(const Summary& s, std::span<const EvidenceRecord> records) {
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n";
  out += fmt::format("<title>Trojan traffic report: {}</title>\n", html_escape(s.trace_name));
  out += fmt::format("<style>{}</style>\n</head>\n<body>\n", kStyle);
  out += fmt::format("<h1>Trojan traffic report: {}</h1>\n", html_escape(s.trace_name));

  out += "<h2>Summary</h2>\n<table class=\"summary\">\n";
  row(out, "Trace", s.trace_name);
  row(out, "Packets analyzed", std::to_string(s.stats.packets));
  row(out, "Packet limit reached", s.stats.truncated ? "yes" : "no");
  row(out, "TCP", std::to_string(s.stats.tcp));
  row(out, "UDP", std::to_string(s.stats.udp));
  row(out, "ICMP", std::to_string(s.stats.icmp));
  row(out, "Other", std::to_string(s.stats.other));
  row(out, "Packets with parse notes", std::to_string(s.stats.packets_with_notes));
  for (const auto& [rule, count] : s.rule_counts) {
    row(out, to_string(rule), std::to_string(count));
  }
  row(out, "Total detections", std::to_string(s.total_detections));
  out += "</table>\n";

  if (s.clean) {
    out += "<p class=\"clean\">NO DETECTIONS</p>\n";
  } else {
    out += "<h2>Detections</h2>\n<table class=\"detections\">\n<thead><tr>"
           "<th>#</th><th>Captured (UTC)</th><th>Type</th><th>Source MAC</th>"
           "<th>Destination MAC</th><th>Source IP</th><th>Destination IP</th><th>Rule</th>"
           "<th>Severity</th><th>Packet</th><th>Flow</th><th>Detail</th></tr></thead>\n<tbody>\n";
    std::size_t n = 0;
    for (const auto& r : records) {
      out += fmt::format(
          "<tr class=\"{}\"><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td>"
          "<td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>\n",
          to_string(r.severity), ++n, to_iso8601(r.grab_datetime), html_escape(r.protocol),
          r.src_mac.to_string(), r.dst_mac.to_string(), r.src_ip.to_string(),
          r.dst_ip.to_string(), to_string(r.rule), to_string(r.severity), r.packet_index,
          html_escape(r.flow), html_escape(r.detail));
    }
    out += "</tbody>\n</table>\n";

    out += "<h2>Flows</h2>\n<table class=\"flows\">\n"
           "<thead><tr><th>Flow</th><th>Detections</th><th>Packets</th></tr></thead>\n<tbody>\n";
    for (const auto& g : s.flows) {
      out += fmt::format("<tr><td>{}</td><td>{}</td><td>{}</td></tr>\n", html_escape(g.flow),
                         g.packets.size(), fmt::join(g.packets, ", "));
    }
    out += "</tbody>\n</table>\n";
  }
  out += "</body>\n</html>\n";
  return out;
}

std::string render_summary_json(const Summary& s) {
  ordered_json j;
  j["trace"] = s.trace_name;
  j["packets"] = s.stats.packets;
  j["truncated"] = s.stats.truncated;
  j["packets_with_notes"] = s.stats.packets_with_notes;
  j["protocols"] = ordered_json{{"TCP", s.stats.tcp},
                                {"UDP", s.stats.udp},
                                {"ICMP", s.stats.icmp},
                                {"other", s.stats.other}};
  ordered_json rules = ordered_json::object();
  for (const auto& [rule, count] : s.rule_counts) rules[std::string(to_string(rule))] = count;
  j["rules"] = rules;
  j["total_detections"] = s.total_detections;
  ordered_json flows = ordered_json::array();
  for (const auto& g : s.flows) {
    flows.push_back(ordered_json{{"flow", g.flow},
                                 {"detections", g.packets.size()},
                                 {"packets", g.packets}});
  }
  j["flows"] = flows;
  j["clean"] = s.clean;
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

Summary parse_summary_json(const std::string& text) {
  const auto j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::invalid_argument("summary is not a JSON object");
  }
  try {
    Summary s;
    s.trace_name = j.at("trace").get<std::string>();
    s.stats.packets = j.at("packets").get<std::uint64_t>();
    s.stats.truncated = j.at("truncated").get<bool>();
    s.stats.packets_with_notes = j.at("packets_with_notes").get<std::uint64_t>();
    const auto& protocols = j.at("protocols");
    s.stats.tcp = protocols.at("TCP").get<std::uint64_t>();
    s.stats.udp = protocols.at("UDP").get<std::uint64_t>();
    s.stats.icmp = protocols.at("ICMP").get<std::uint64_t>();
    s.stats.other = protocols.at("other").get<std::uint64_t>();
    for (auto rule : kAllRules) s.rule_counts[rule] = 0;
    for (const auto& [name, count] : j.at("rules").items()) {
      const auto rule = parse_rule_id(name);
      if (!rule) throw std::invalid_argument(fmt::format("unknown rule '{}'", name));
      s.rule_counts[*rule] = count.get<std::uint64_t>();
    }
    s.total_detections = j.at("total_detections").get<std::uint64_t>();
    for (const auto& f : j.at("flows")) {
      FlowGroup g{f.at("flow").get<std::string>(),
                  f.at("packets").get<std::vector<std::uint64_t>>()};
      if (f.at("detections").get<std::size_t>() != g.packets.size()) {
        throw std::invalid_argument("flow detection count disagrees with packet list");
      }
      s.flows.push_back(std::move(g));
    }
    s.clean = j.at("clean").get<bool>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("malformed summary: {}", e.what()));
  }
}

bool ReportFilter::accepts(const EvidenceRecord& r) const {
  if (!rules.empty() && rules.count(r.rule) == 0) return false;
  if (flow_contains && r.flow.find(*flow_contains) == std::string::npos) return false;
  return true;
}

std::vector<EvidenceRecord> apply_filter(std::span<const EvidenceRecord> records,
                                         const ReportFilter& filter) {
  std::vector<EvidenceRecord> out;
  for (const auto& r : records) {
    if (filter.accepts(r)) out.push_back(r);
  }
  return out;
}

}  // namespace sniffwatch
