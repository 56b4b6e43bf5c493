#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "sniffwatch/evidence_store.hpp"
#include "sniffwatch/report.hpp"
#include "sniffwatch/trace_synth.hpp"
#include "sniffwatch_tools/commands.hpp"
#include "support.hpp"

namespace sniffwatch::tools {
namespace {

struct Captured {
  int code = 0;
  std::string out;
  std::string err;
};

template <typename Config, typename Fn>
Captured run(Fn fn, const Config& config) {
  std::ostringstream out, err;
  const int code = fn(config, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path synth_into(const std::filesystem::path& dir, const std::string& name,
                                 std::uint64_t seed = 1) {
  SynthConfig c;
  c.scenario = name;
  c.seed = seed;
  c.out_dir = dir;
  EXPECT_EQ(run(cmd_synth, c).code, kExitClean);
  return dir / (name + ".pcap");
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

int shell(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CmdSynth, WritesPcapAndManifest) {
  const auto dir = testing::scratch_dir("cmd_synth");
  synth_into(dir, "backdoor");
  EXPECT_TRUE(std::filesystem::exists(dir / "backdoor.pcap"));
  const auto manifest = manifest_from_json(testing::slurp(dir / "backdoor.manifest.json"));
  EXPECT_EQ(manifest.scenario, "backdoor");
  EXPECT_GE(manifest.expected.size(), 4u);
}

TEST(CmdSynth, SameSeedSameFiles) {
  const auto a = testing::scratch_dir("cmd_synth_a");
  const auto b = testing::scratch_dir("cmd_synth_b");
  synth_into(a, "normal", 7);
  synth_into(b, "normal", 7);
  EXPECT_EQ(testing::slurp(a / "normal.pcap"), testing::slurp(b / "normal.pcap"));
  EXPECT_EQ(testing::slurp(a / "normal.manifest.json"), testing::slurp(b / "normal.manifest.json"));
}

TEST(CmdSynth, UnknownScenarioAndBadSplit) {
  SynthConfig c;
  c.scenario = "bogus";
  c.out_dir = testing::scratch_dir("cmd_synth_bogus");
  const auto r = run(cmd_synth, c);
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
  c.scenario = "trojan-horse";
  c.split = 99;
  EXPECT_EQ(run(cmd_synth, c).code, kExitError);
}

TEST(CmdAnalyze, NormalIsClean) {
  const auto dir = testing::scratch_dir("cmd_analyze_normal");
  RunConfig c;
  c.input = synth_into(dir, "normal").string();
  c.out_dir = dir / "out";
  const auto r = run(cmd_analyze, c);
  EXPECT_EQ(r.code, kExitClean) << r.err;
  EXPECT_EQ(line_count(r.out), 5u);
  EXPECT_EQ(testing::slurp(c.out_dir / "evidence.log"), "");
  EXPECT_NE(testing::slurp(c.out_dir / "report.html").find("NO DETECTIONS"), std::string::npos);
  const auto summary = parse_summary_json(testing::slurp(c.out_dir / "summary.json"));
  EXPECT_TRUE(summary.clean);
  EXPECT_EQ(summary.trace_name, "normal.pcap");
}

TEST(CmdAnalyze, BackdoorHasDetections) {
  const auto dir = testing::scratch_dir("cmd_analyze_backdoor");
  RunConfig c;
  c.input = synth_into(dir, "backdoor").string();
  c.out_dir = dir / "out";
  const auto r = run(cmd_analyze, c);
  EXPECT_EQ(r.code, kExitDetections);
  EXPECT_NE(r.out.find("PORT-MUTATION        1"), std::string::npos) << r.out;
  const auto log = read_evidence(c.out_dir / "evidence.log");
  EXPECT_GE(log.records.size(), 4u);
  EXPECT_TRUE(log.malformed.empty());
}

TEST(CmdAnalyze, AppendsAcrossRuns) {
  const auto dir = testing::scratch_dir("cmd_analyze_append");
  RunConfig c;
  c.input = synth_into(dir, "backdoor").string();
  c.out_dir = dir / "out";
  run(cmd_analyze, c);
  const auto once = read_evidence(c.out_dir / "evidence.log").records.size();
  run(cmd_analyze, c);
  EXPECT_EQ(read_evidence(c.out_dir / "evidence.log").records.size(), 2 * once);
}

TEST(CmdAnalyze, RuleFilterLimitsRules) {
  const auto dir = testing::scratch_dir("cmd_analyze_filter");
  RunConfig c;
  c.input = synth_into(dir, "backdoor").string();
  c.out_dir = dir / "out";
  c.filter.rules = {RuleId::HalfOpenSyn};
  EXPECT_EQ(run(cmd_analyze, c).code, kExitDetections);
  const auto log = read_evidence(c.out_dir / "evidence.log");
  ASSERT_EQ(log.records.size(), 1u);
  EXPECT_EQ(log.records[0].rule, RuleId::HalfOpenSyn);
  c.filter.rules = {RuleId::SigMatch};
  c.out_dir = dir / "out2";
  EXPECT_EQ(run(cmd_analyze, c).code, kExitClean);
}

TEST(CmdAnalyze, ThresholdFlags) {
  const auto dir = testing::scratch_dir("cmd_analyze_thresholds");
  RunConfig c;
  c.input = synth_into(dir, "backdoor").string();
  c.out_dir = dir / "out";
  c.rules.empty_payload_threshold = 50;
  c.rules.halfopen_timeout_s = 100;
  c.rules.port_mutation_window_s = 0.001;
  const auto r = run(cmd_analyze, c);
  EXPECT_NE(r.out.find("EMPTY-PAYLOAD-FLOOD  0"), std::string::npos);
  EXPECT_NE(r.out.find("HALF-OPEN-SYN        0"), std::string::npos);
  EXPECT_NE(r.out.find("PORT-MUTATION        0"), std::string::npos);
  c.rules.empty_payload_threshold = 0;
  EXPECT_EQ(run(cmd_analyze, c).code, kExitError);
}

TEST(CmdAnalyze, Errors) {
  const auto dir = testing::scratch_dir("cmd_analyze_errors");
  RunConfig c;
  c.input = (dir / "missing.pcap").string();
  c.out_dir = dir / "out";
  auto r = run(cmd_analyze, c);
  EXPECT_EQ(r.code, kExitError);
  EXPECT_FALSE(r.err.empty());

  c.input = synth_into(dir, "normal").string();
  testing::spit(dir / "bad.sigs", "only-one-field\n");
  c.signature_file = (dir / "bad.sigs").string();
  EXPECT_EQ(run(cmd_analyze, c).code, kExitError);

  testing::spit(dir / "garbage.pcap", "this is not a pcap file at all");
  c.signature_file.reset();
  c.input = (dir / "garbage.pcap").string();
  EXPECT_EQ(run(cmd_analyze, c).code, kExitError);
}

TEST(CmdAnalyze, CustomSignatureFile) {
  const auto dir = testing::scratch_dir("cmd_analyze_sigs");
  RunConfig c;
  c.input = synth_into(dir, "normal").string();
  c.out_dir = dir / "out";
  testing::spit(dir / "http.sigs", "X-1\thttp-get\tascii\tGET /\n");
  c.signature_file = (dir / "http.sigs").string();
  const auto r = run(cmd_analyze, c);
  EXPECT_EQ(r.code, kExitDetections);
  EXPECT_NE(r.out.find("SIG-MATCH"), std::string::npos);
}

TEST(CmdAnalyze, LimitTruncates) {
  const auto dir = testing::scratch_dir("cmd_analyze_limit");
  RunConfig c;
  c.input = synth_into(dir, "backdoor").string();
  c.out_dir = dir / "out";
  c.limit = 3;
  const auto r = run(cmd_analyze, c);
  EXPECT_EQ(r.code, kExitClean);
  const auto summary = parse_summary_json(testing::slurp(c.out_dir / "summary.json"));
  EXPECT_EQ(summary.stats.packets, 3u);
  EXPECT_TRUE(summary.stats.truncated);
}

TEST(CmdReport, ReproducesAnalyzeOutputs) {
  const auto dir = testing::scratch_dir("cmd_report_same");
  RunConfig c;
  c.input = synth_into(dir, "backdoor").string();
  c.out_dir = dir / "out";
  run(cmd_analyze, c);
  const auto html = testing::slurp(c.out_dir / "report.html");
  const auto json = testing::slurp(c.out_dir / "summary.json");

  RunConfig rc;
  rc.input = (c.out_dir / "evidence.log").string();
  rc.out_dir = c.out_dir;
  EXPECT_EQ(run(cmd_report, rc).code, kExitClean);
  EXPECT_EQ(testing::slurp(c.out_dir / "report.html"), html);
  EXPECT_EQ(testing::slurp(c.out_dir / "summary.json"), json);

  rc.out_dir = dir / "elsewhere";
  EXPECT_EQ(run(cmd_report, rc).code, kExitClean);
  EXPECT_EQ(testing::slurp(rc.out_dir / "report.html"), html);
}

TEST(CmdReport, EmptyLogSaysNoDetections) {
  const auto dir = testing::scratch_dir("cmd_report_empty");
  testing::spit(dir / "evidence.log", "");
  RunConfig rc;
  rc.input = (dir / "evidence.log").string();
  rc.out_dir = dir / "out";
  EXPECT_EQ(run(cmd_report, rc).code, kExitClean);
  EXPECT_NE(testing::slurp(rc.out_dir / "report.html").find("NO DETECTIONS"), std::string::npos);
}

TEST(CmdReport, CorruptLogWarns) {
  const auto dir = testing::scratch_dir("cmd_report_corrupt");
  RunConfig c;
  c.input = synth_into(dir, "backdoor").string();
  c.out_dir = dir / "out";
  run(cmd_analyze, c);
  {
    std::ofstream log(c.out_dir / "evidence.log", std::ios::app);
    log << "{broken\n";
  }
  RunConfig rc;
  rc.input = (c.out_dir / "evidence.log").string();
  rc.out_dir = dir / "report";
  const auto r = run(cmd_report, rc);
  EXPECT_EQ(r.code, kExitClean);
  EXPECT_NE(r.err.find("MalformedLine"), std::string::npos);
}

TEST(CmdReport, MissingLog) {
  RunConfig rc;
  rc.input = "/nonexistent/evidence.log";
  rc.out_dir = testing::scratch_dir("cmd_report_missing");
  EXPECT_EQ(run(cmd_report, rc).code, kExitError);
}

TEST(CmdDump, HeaderAndHexRows) {
  const auto dir = testing::scratch_dir("cmd_dump");
  testing::TcpFields s;
  s.flags = TcpFlags::kPsh | TcpFlags::kAck;
  s.payload = testing::bytes_of("0123456789abcdef");
  std::vector<CaptureRecord> records{testing::tcp_record(s), testing::tcp_record(s),
                                     testing::tcp_record(s)};
  const auto bytes = write_pcap(PcapHeader{}, records);
  testing::spit(dir / "three.pcap", std::string(bytes.begin(), bytes.end()));

  RunConfig c;
  c.input = (dir / "three.pcap").string();
  c.packet = 0;
  auto r = run(cmd_dump, c);
  EXPECT_EQ(r.code, kExitClean);
  ASSERT_EQ(line_count(r.out), 2u) << r.out;
  EXPECT_EQ(r.out.substr(0, 3), "#0 ");
  EXPECT_NE(r.out.find("0036  30 31 32 33"), std::string::npos);

  c.packet.reset();
  r = run(cmd_dump, c);
  EXPECT_EQ(line_count(r.out), 6u);

  c.packet = 99;
  EXPECT_EQ(run(cmd_dump, c).code, kExitError);
}

TEST(CmdDump, UndissectableShowsWholeFrame) {
  const auto dir = testing::scratch_dir("cmd_dump_raw");
  CaptureRecord junk;
  junk.data = {0xde, 0xad, 0xbe, 0xef};
  junk.orig_len = 4;
  const auto bytes = write_pcap(PcapHeader{}, {junk});
  testing::spit(dir / "junk.pcap", std::string(bytes.begin(), bytes.end()));
  RunConfig c;
  c.input = (dir / "junk.pcap").string();
  const auto r = run(cmd_dump, c);
  EXPECT_EQ(r.code, kExitClean);
  EXPECT_NE(r.out.find("0000  de ad be ef"), std::string::npos) << r.out;
}

TEST(Cli, ExitCodesAndStdin) {
  const auto dir = testing::scratch_dir("cli");
  const std::string cli = SNIFFWATCH_CLI;
  const std::string out = dir.string();
  EXPECT_EQ(shell(cli + " synth normal --out " + out + " >/dev/null"), 0);
  EXPECT_EQ(shell(cli + " synth backdoor --out " + out + " >/dev/null"), 0);
  EXPECT_EQ(shell(cli + " synth bogus --out " + out + " 2>/dev/null"), 2);
  EXPECT_EQ(shell(cli + " analyze " + out + "/normal.pcap --out " + out + "/a >/dev/null"), 0);
  EXPECT_EQ(shell(cli + " analyze - --out " + out + "/b < " + out + "/backdoor.pcap >/dev/null"),
            1);
  EXPECT_EQ(shell(cli + " analyze " + out + "/missing.pcap --out " + out + "/c 2>/dev/null"), 2);
  EXPECT_EQ(shell(cli + " analyze " + out + "/normal.pcap --rule NOPE 2>/dev/null"), 2);
  EXPECT_EQ(shell(cli + " analyze " + out + "/normal.pcap --limit 0 >/dev/null 2>&1"), 2);
  EXPECT_EQ(shell(cli + " dump " + out + "/normal.pcap --packet 99 2>/dev/null"), 2);
  EXPECT_EQ(shell(cli + " report " + out + "/b/evidence.log --out " + out + "/r >/dev/null"), 0);
  EXPECT_EQ(shell(cli + " --help >/dev/null"), 0);
  EXPECT_EQ(shell(cli + " >/dev/null 2>&1"), 2);
}

}  // namespace
}  // namespace sniffwatch::tools
