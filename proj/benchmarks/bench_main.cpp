#include <benchmark/benchmark.h>

#include <random>

#include "prototrack/cli.hpp"
#include "prototrack/memory_bank.hpp"
#include "prototrack/prompt.hpp"
#include "prototrack/synth_world.hpp"

using namespace prototrack;

namespace {

PrototypicalMemoryBank make_bank(int entries, int channels) {
  PrototypicalMemoryBank bank(0.3, 30);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < entries; ++i) {
    FeatureMap f(1, 2, channels);
    for (int c = 0; c < channels; ++c) {
      f.at(0, 0, c) = dist(rng);
      f.at(0, 1, c) = dist(rng);
    }
    BinaryMask m(1, 2);
    m.at(0, 0) = 1;
    bank.add_memory(i + 1, f, m, f);
  }
  return bank;
}

void BM_Calibrate(benchmark::State& state) {
  const auto bank = make_bank(static_cast<int>(state.range(0)), 16);
  const int t = static_cast<int>(bank.size()) + 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bank.calibrate(t));
  }
}
BENCHMARK(BM_Calibrate)->Arg(32)->Arg(64)->Arg(256);

void BM_PositionalField(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(positional_field(n, n, 16));
  }
}
BENCHMARK(BM_PositionalField)->Arg(32)->Arg(64);

void BM_GeneratePrompt(benchmark::State& state) {
  const ScenarioSpec spec = standard_suite(3)[4];
  const FeatureMap features = render_frame(spec, 30).first;
  const auto field = positional_field(spec.height, spec.width, spec.channels);
  BinaryMask prev(spec.height, spec.width);
  for (int y = 13; y < 20; ++y)
    for (int x = 13; x < 20; ++x) prev.at(y, x) = 1;

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Prototype> fg, bg;
  for (int m = 0; m < 7; ++m) {
    std::vector<double> a(spec.channels), b(spec.channels);
    for (double& v : a) v = dist(rng);
    for (double& v : b) v = dist(rng);
    fg.emplace_back(a);
    bg.emplace_back(b);
  }
  std::vector<const Prototype*> fgp, bgp;
  for (int m = 0; m < 7; ++m) {
    fgp.push_back(&fg[m]);
    bgp.push_back(&bg[m]);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_prompt(features, fgp, bgp, field, prev));
  }
}
BENCHMARK(BM_GeneratePrompt);

void BM_RenderFrame(benchmark::State& state) {
  const ScenarioSpec spec = standard_suite(5)[5];
  int t = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_frame(spec, t));
    t = t % spec.frames + 1;
  }
}
BENCHMARK(BM_RenderFrame);

void BM_TrackSequence(benchmark::State& state) {
  ScenarioSpec spec = standard_suite(9)[0];
  spec.frames = static_cast<int>(state.range(0));
  const TrackConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cli::run_scenario(spec, config));
  }
  state.SetItemsProcessed(state.iterations() * spec.frames);
}
BENCHMARK(BM_TrackSequence)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
