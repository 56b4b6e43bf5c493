#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sniffwatch/checksum.hpp"
#include "sniffwatch/dissector.hpp"
#include "sniffwatch/engine.hpp"
#include "sniffwatch/hexdump.hpp"
#include "sniffwatch/pcap_io.hpp"
#include "sniffwatch/signatures.hpp"
#include "sniffwatch/trace_synth.hpp"

namespace sw = sniffwatch;

namespace {

const sw::SynthResult& mixed_trace() {
  static const auto result = sw::synth(sw::Scenario{sw::ScenarioKind::Mixed, 1, {}});
  return result;
}

std::vector<std::uint8_t> random_bytes(std::size_t n) {
  std::mt19937_64 rng(7);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

void BM_ReadPcap(benchmark::State& state) {
  const auto bytes = mixed_trace().pcap_bytes();
  for (auto _ : state) {
    auto trace = sw::read_pcap(bytes);
    benchmark::DoNotOptimize(trace.records.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_ReadPcap);

void BM_Dissect(benchmark::State& state) {
  const auto& records = mixed_trace().records;
  for (auto _ : state) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto pkt = sw::dissect(records[i], i);
      benchmark::DoNotOptimize(pkt);
    }
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * records.size()));
}
BENCHMARK(BM_Dissect);

void BM_InternetChecksum(benchmark::State& state) {
  const auto bytes = random_bytes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sw::internet_checksum(bytes));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_InternetChecksum)->Arg(64)->Arg(1500)->Arg(65535);

void BM_MatchSignatures(benchmark::State& state) {
  const auto sigs = sw::default_signatures();
  const auto payload = random_bytes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    sw::FlowCarryBuffer buffer;
    benchmark::DoNotOptimize(sw::match_signatures(buffer, payload, sigs));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * payload.size()));
}
BENCHMARK(BM_MatchSignatures)->Arg(64)->Arg(1460)->Arg(65535);

void BM_Hexdump(benchmark::State& state) {
  const auto bytes = random_bytes(1460);
  for (auto _ : state) benchmark::DoNotOptimize(sw::hexdump(bytes));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_Hexdump);

void BM_EvaluateMixed(benchmark::State& state) {
  const auto& synth = mixed_trace();
  const sw::PcapTrace trace{synth.header, synth.records};
  const auto sigs = sw::default_signatures();
  const sw::RuleConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(sw::evaluate(trace, sigs, config));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trace.records.size()));
}
BENCHMARK(BM_EvaluateMixed);

}  // namespace

BENCHMARK_MAIN();
