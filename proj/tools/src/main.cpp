#include <CLI11.hpp>

#include <iostream>

#include "sniffwatch_tools/commands.hpp"

namespace {

using sniffwatch::tools::RunConfig;

void add_rule_options(CLI::App& cmd, RunConfig& config, std::vector<std::string>& rule_names) {
  cmd.add_option("--rule", rule_names,
                 "Only run/report this rule (repeatable): SIG-MATCH, ZERO-SEQACK, "
                 "EMPTY-PAYLOAD-FLOOD, HALF-OPEN-SYN, PORT-MUTATION");
  cmd.add_option("--flow", config.filter.flow_contains,
                 "Only keep detections whose flow text contains this string");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sniffwatch: offline packet-trace detector for Trojan and backdoor traffic"};
  app.require_subcommand(1);

  RunConfig run;
  sniffwatch::tools::SynthConfig synth;
  std::vector<std::string> rule_names;

  auto* analyze = app.add_subcommand("analyze", "Run every rule over a pcap trace");
  analyze->add_option("input", run.input, "pcap file, or - for standard input")->required();
  analyze->add_option("--out", run.out_dir, "Output directory")->capture_default_str();
  analyze->add_option("--signatures", run.signature_file, "Signature file (id<TAB>name<TAB>ascii|hex<TAB>value)");
  analyze->add_option("--limit", run.limit, "Stop after this many packets")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  analyze->add_option("--empty-threshold", run.rules.empty_payload_threshold,
                      "Consecutive empty ACK segments that raise EMPTY-PAYLOAD-FLOOD")
      ->capture_default_str();
  analyze->add_option("--halfopen-timeout", run.rules.halfopen_timeout_s,
                      "Seconds before an unanswered SYN is HALF-OPEN-SYN")
      ->capture_default_str();
  analyze->add_option("--mutation-window", run.rules.port_mutation_window_s,
                      "Seconds of inactivity within which a new port counts as PORT-MUTATION")
      ->capture_default_str();
  add_rule_options(*analyze, run, rule_names);

  auto* dump = app.add_subcommand("dump", "Print packet headers and hex/ASCII payloads");
  dump->add_option("input", run.input, "pcap file, or - for standard input")->required();
  dump->add_option("--packet", run.packet, "Only show the packet with this 0-based index");
  dump->add_option("--limit", run.limit, "Stop after this many packets")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* synth_cmd = app.add_subcommand("synth", "Generate a scenario trace and its manifest");
  synth_cmd->add_option("scenario", synth.scenario, "normal, trojan-horse, backdoor or mixed")
      ->required();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--split", synth.split,
                        "trojan-horse: signature bytes placed before a segment boundary");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->capture_default_str();

  auto* report = app.add_subcommand("report", "Re-render report.html and summary.json from a log");
  report->add_option("evidence", run.input, "Evidence log written by analyze")->required();
  report->add_option("--out", run.out_dir, "Output directory")->capture_default_str();
  add_rule_options(*report, run, rule_names);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sniffwatch::tools::kExitError;
  }

  for (const auto& name : rule_names) {
    const auto rule = sniffwatch::parse_rule_id(name);
    if (!rule) {
      std::cerr << "sniffwatch: error: unknown rule '" << name << "'\n";
      return sniffwatch::tools::kExitError;
    }
    run.filter.rules.insert(*rule);
  }

  if (analyze->parsed()) return sniffwatch::tools::cmd_analyze(run, std::cout, std::cerr);
  if (dump->parsed()) return sniffwatch::tools::cmd_dump(run, std::cout, std::cerr);
  if (synth_cmd->parsed()) return sniffwatch::tools::cmd_synth(synth, std::cout, std::cerr);
  return sniffwatch::tools::cmd_report(run, std::cout, std::cerr);
}
