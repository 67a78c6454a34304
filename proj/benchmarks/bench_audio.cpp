#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "forge/audio.hpp"

namespace {

forge::AudioBuffer tone(int seconds) {
  std::vector<std::int16_t> s(static_cast<std::size_t>(16000 * seconds));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::int16_t>(8000 * std::sin(0.05 * static_cast<double>(i)));
  return forge::AudioBuffer(16000, std::move(s));
}

void BM_RmsFrames(benchmark::State& state) {
  const auto audio = tone(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forge::rms_frames(audio, 25, 10));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * audio.size()));
}
BENCHMARK(BM_RmsFrames)->Arg(10)->Arg(600);

void BM_Resample(benchmark::State& state) {
  const auto audio = tone(10);
  for (auto _ : state) benchmark::DoNotOptimize(forge::resample_linear(audio, 44100));
}
BENCHMARK(BM_Resample);

void BM_EncodeDecodeWav(benchmark::State& state) {
  const auto audio = tone(10);
  for (auto _ : state) benchmark::DoNotOptimize(forge::decode_wav(forge::encode_wav(audio)));
}
BENCHMARK(BM_EncodeDecodeWav);

}  // namespace
